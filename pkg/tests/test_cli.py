import json
import os

import pytest

from conftest import synth_ecg, write_signal_csv
from edgevitals.classify import (
    ClassLabel,
    FeatureVector,
    LabeledDataset,
    dataset_to_csv,
    patient_schema,
)
from edgevitals.cli import main
from edgevitals.messaging import parse_message_xml

RULES = """<rules>
  <rule id="hr-high" severity="ALARM"><threshold kind="HEART_RATE" op="gt" value="120"/></rule>
  <rule id="weight-gain" scope="CKD" severity="ALARM">
    <percent_change kind="BODY_WEIGHT" op="gt" percent="2" window_hours="24"/>
  </rule>
  <rule id="fever" severity="ALARM"><threshold kind="BODY_TEMPERATURE" op="gt" value="38"/></rule>
</rules>"""

NOW = "1970-01-01T00:01:00Z"  # ms 60000, the end of a 60 s recording


def write_rules(tmp_path):
    path = tmp_path / "rules.xml"
    path.write_text(RULES)
    return str(path)


def ecg_manifest(tmp_path, patient, bpm, disease=None, tag=""):
    samples, _ = synth_ecg(bpm, duration_s=60.0)
    ecg = tmp_path / ("ecg-%s%s.csv" % (patient, tag))
    write_signal_csv(str(ecg), samples, 250.0)
    doc = {
        "patient_id": patient,
        "out_dir": "out-%s%s" % (patient, tag),
        "ecg": ecg.name,
        "rules": os.path.basename(write_rules(tmp_path)),
    }
    if disease:
        cfg = tmp_path / ("cfg-%s%s.json" % (patient, tag))
        cfg.write_text(json.dumps({"disease": disease}))
        doc["config"] = cfg.name
    path = tmp_path / ("manifest-%s%s.json" % (patient, tag))
    path.write_text(json.dumps(doc))
    return str(path)


def measurements_manifest(tmp_path, patient, csv_text, disease, now_note=""):
    meas = tmp_path / ("meas-%s.csv" % patient)
    meas.write_text(csv_text)
    cfg = tmp_path / ("cfg-%s.json" % patient)
    cfg.write_text(json.dumps({"disease": disease}))
    doc = {
        "patient_id": patient,
        "out_dir": "out-%s" % patient,
        "measurements": meas.name,
        "rules": os.path.basename(write_rules(tmp_path)),
        "config": cfg.name,
    }
    path = tmp_path / ("manifest-%s.json" % patient)
    path.write_text(json.dumps(doc))
    return str(path)


def message_path(tmp_path, patient, tag=""):
    return tmp_path / ("out-%s%s" % (patient, tag)) / patient / "message.xml"


class TestRun:
    def test_copd_tachycardia_exits_2_with_immediate_xml(self, tmp_path, capsys):
        manifest = ecg_manifest(tmp_path, "pat-copd", bpm=125, disease="COPD")
        code = main(["run", manifest, "--now", NOW])
        out = capsys.readouterr().out
        assert code == 2
        assert "pat-copd alerts=1 alarm=yes decision=IMMEDIATE" in out
        xml = message_path(tmp_path, "pat-copd").read_text()
        msg = parse_message_xml(xml)
        assert msg.urgency.value == "IMMEDIATE"
        assert msg.alerts[0].rule_id == "hr-high"

    def test_ckd_weight_gain_exits_2(self, tmp_path, capsys):
        csv_text = ("kind,value,timestamp_ms\n"
                    "BODY_WEIGHT,70.0,0\n"
                    "BODY_WEIGHT,71.5,50000\n")
        manifest = measurements_manifest(tmp_path, "pat-ckd", csv_text, "CKD")
        code = main(["run", manifest, "--now", NOW])
        out = capsys.readouterr().out
        assert code == 2
        assert "pat-ckd alerts=1 alarm=yes decision=IMMEDIATE" in out
        msg = parse_message_xml(message_path(tmp_path, "pat-ckd").read_text())
        assert msg.alerts[0].rule_id == "weight-gain"

    def test_healthy_patient_exits_0(self, tmp_path, capsys):
        manifest = ecg_manifest(tmp_path, "pat-ok", bpm=70)
        code = main(["run", manifest, "--now", NOW])
        out = capsys.readouterr().out
        assert code == 0
        assert "pat-ok alerts=0 alarm=no decision=SCHEDULED" in out

    def test_pinned_now_reruns_byte_identically(self, tmp_path, capsys):
        a = ecg_manifest(tmp_path, "pat-rep", bpm=125, tag="-a")
        b = ecg_manifest(tmp_path, "pat-rep", bpm=125, tag="-b")
        assert main(["run", a, "--now", NOW]) == 2
        assert main(["run", b, "--now", NOW]) == 2
        capsys.readouterr()
        for name in ("message.xml", "report.jsonl", "features.csv", "beats.csv"):
            fa = tmp_path / "out-pat-rep-a" / "pat-rep" / name
            fb = tmp_path / "out-pat-rep-b" / "pat-rep" / name
            assert fa.read_bytes() == fb.read_bytes()

    def test_jobs_outputs_sorted_by_patient(self, tmp_path, capsys):
        m_b = ecg_manifest(tmp_path, "pat-b", bpm=70)
        m_a = ecg_manifest(tmp_path, "pat-a", bpm=70)
        code = main(["run", m_b, m_a, "--now", NOW, "--jobs", "2"])
        out = capsys.readouterr().out
        assert code == 0
        lines = [l for l in out.splitlines() if l.startswith("pat-")]
        assert [l.split()[0] for l in lines] == ["pat-a", "pat-b"]

    def test_duplicate_patient_ids_usage_error(self, tmp_path, capsys):
        manifest = ecg_manifest(tmp_path, "pat-x", bpm=70)
        assert main(["run", manifest, manifest, "--now", NOW]) == 64
        assert "duplicate patient_id" in capsys.readouterr().err

    def test_missing_manifest_usage_error(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.json"), "--now", NOW]) == 64
        assert "not readable" in capsys.readouterr().err

    def test_bad_now_usage_error(self, tmp_path, capsys):
        manifest = ecg_manifest(tmp_path, "pat-y", bpm=70)
        assert main(["run", manifest, "--now", "tomorrow"]) == 64
        assert "ISO8601" in capsys.readouterr().err

    def test_manifest_without_patient_id(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"out_dir": "out"}))
        assert main(["run", str(path)]) == 64
        assert "patient_id" in capsys.readouterr().err

    def test_missing_rules_usage_error(self, tmp_path, capsys):
        samples, _ = synth_ecg(70, duration_s=60.0)
        ecg = tmp_path / "e.csv"
        write_signal_csv(str(ecg), samples, 250.0)
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"patient_id": "p", "out_dir": "out",
                                    "ecg": "e.csv"}))
        assert main(["run", str(path), "--now", NOW]) == 64
        assert "rules" in capsys.readouterr().err


def hr_row(schema, v):
    idx = [a.name for a in schema].index("mean_heart_rate_bpm")
    vals = [None] * len(schema)
    vals[idx] = v
    return FeatureVector(schema, tuple(vals))


def write_dataset(tmp_path, name, pairs):
    schema = patient_schema()
    feats = tuple(hr_row(schema, v) for v, _ in pairs)
    labels = tuple(lab for _, lab in pairs)
    path = tmp_path / name
    path.write_text(dataset_to_csv(LabeledDataset(schema, feats, labels)))
    return str(path)


TRAIN_PAIRS = [(58.0, ClassLabel.STABLE), (62.0, ClassLabel.STABLE),
               (96.0, ClassLabel.LIGHT_WORSENING), (104.0, ClassLabel.LIGHT_WORSENING),
               (128.0, ClassLabel.WORSENING), (132.0, ClassLabel.WORSENING)]


class TestTrainEval:
    def test_tree_round_trip_perfect_on_training_data(self, tmp_path, capsys):
        dataset = write_dataset(tmp_path, "train.csv", TRAIN_PAIRS)
        model = str(tmp_path / "tree.json")
        assert main(["train", dataset, "--algorithm", "tree", "--out", model]) == 0
        out = capsys.readouterr().out
        assert "trained decision tree" in out and "rows=6" in out
        assert main(["eval", model, dataset]) == 0
        table = capsys.readouterr().out
        assert "MAE" in table and "0.0000" in table
        assert "Instances" in table and "6" in table

    def test_eval_table_reports_fifty_percent_rae(self, tmp_path, capsys):
        dataset = write_dataset(tmp_path, "train.csv",
                                [(60.0, ClassLabel.STABLE),
                                 (100.0, ClassLabel.LIGHT_WORSENING)])
        model = str(tmp_path / "tree.json")
        assert main(["train", dataset, "--algorithm", "tree", "--out", model]) == 0
        capsys.readouterr()
        testset = write_dataset(tmp_path, "test.csv",
                                [(60.0, ClassLabel.STABLE),
                                 (100.0, ClassLabel.LIGHT_WORSENING),
                                 (100.0, ClassLabel.WORSENING)])
        assert main(["eval", model, testset]) == 0
        table = capsys.readouterr().out
        assert "RAE (%)" in table
        assert "50.0000" in table
        assert "0.3333" in table  # MAE of (0, 0, 1)

    def test_eval_rae_not_available_for_constant_targets(self, tmp_path, capsys):
        dataset = write_dataset(tmp_path, "train.csv", TRAIN_PAIRS)
        model = str(tmp_path / "tree.json")
        assert main(["train", dataset, "--algorithm", "tree", "--out", model]) == 0
        capsys.readouterr()
        testset = write_dataset(tmp_path, "test.csv",
                                [(60.0, ClassLabel.STABLE), (62.0, ClassLabel.STABLE)])
        assert main(["eval", model, testset]) == 0
        assert "n/a" in capsys.readouterr().out

    def test_forest_and_bayes_summaries(self, tmp_path, capsys):
        dataset = write_dataset(tmp_path, "train.csv", TRAIN_PAIRS)
        forest = str(tmp_path / "forest.json")
        assert main(["train", dataset, "--algorithm", "forest", "--out", forest,
                     "--n-trees", "5", "--attrs-per-split", "3", "--seed", "9"]) == 0
        out = capsys.readouterr().out
        assert "trained random forest: trees=5 attrs_per_split=3 seed=9" in out
        bayes = str(tmp_path / "bayes.json")
        assert main(["train", dataset, "--algorithm", "bayes", "--out", bayes]) == 0
        out = capsys.readouterr().out
        assert "trained naive bayes" in out
        assert "STABLE=0.3333" in out

    def test_train_bad_header_exits_1(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("wrong,header\n1,2\n")
        model = str(tmp_path / "m.json")
        assert main(["train", str(path), "--algorithm", "tree", "--out", model]) == 1
        assert "header mismatch" in capsys.readouterr().err

    def test_train_missing_algorithm_is_usage_error(self, tmp_path):
        dataset = write_dataset(tmp_path, "train.csv", TRAIN_PAIRS)
        with pytest.raises(SystemExit) as exc:
            main(["train", dataset, "--out", str(tmp_path / "m.json")])
        assert exc.value.code == 64


class TestRulesCheck:
    def test_valid_rules(self, tmp_path, capsys):
        path = write_rules(tmp_path)
        assert main(["rules-check", path]) == 0
        assert "ok: 3 rules" in capsys.readouterr().out

    def test_invalid_rules_exit_1(self, tmp_path, capsys):
        path = tmp_path / "bad.xml"
        path.write_text('<rules><rule id="a" severity="ALARM">'
                        '<threshold kind="NOPE" op="gt" value="1"/></rule></rules>')
        assert main(["rules-check", str(path)]) == 1
        assert "invalid" in capsys.readouterr().err

    def test_unreadable_rules_usage_error(self, tmp_path, capsys):
        assert main(["rules-check", str(tmp_path / "missing.xml")]) == 64
        assert "not readable" in capsys.readouterr().err


class TestParser:
    def test_unknown_subcommand_exits_64(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 64

    def test_no_arguments_exits_64(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 64
