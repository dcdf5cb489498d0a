"""Per-patient batch pipeline: signals -> features -> rules -> message.

Steps (each optional input skips its branch):
  1. ECG: baseline removal, wavelet denoise, QRS with the configured
     detector plus a cross-check against the other one, RR series, HRV
     features, trailing-60 s mean heart rate injected into the store as a
     HEART_RATE measurement so rules can see it.
  2. Respiration: windowed dominant-frequency rate (injected as a
     RESPIRATION_RATE measurement) and breath-volume features.
  3. Measurements CSV ingest (weight, temperature, questionnaire scores...).
  4. Rule evaluation at --now over the patient's history.
  5. Stress/lifestyle weighted indices from questionnaire/diary scores in
     [0, 1]; a triggered index contributes a LIGHT_ALERT.
  6. Optional classifier prediction from the assembled feature vector.
  7. Transmission decision and canonical outbound XML.

Artifacts land in <out_dir>/<patient>/: report.jsonl, features.csv,
beats.csv (when ECG ran), message.xml (when not held).
"""

import csv
import io
import os
from dataclasses import dataclass, field

from . import hrv
from .classify.metrics import predict_any
from .classify.schema import CATEGORICAL, FeatureVector, patient_schema
from .classify.weighted import weighted_index
from .ecg_preprocess import remove_baseline_linear, remove_baseline_poly, select_pq_knots, wavelet_denoise
from .errors import NoDataError
from .messaging import (
    OutboundMessage,
    TransmissionDecision,
    Urgency,
    build_message_xml,
    decide_transmission,
)
from .qrs_detect import (
    BeatLabel,
    annotations_to_csv,
    mean_heart_rate,
    pan_tompkins,
    rr_from_peaks,
    wavelet_qrs,
)
from .respiration import respiration_rate, volume_features
from .rules import (
    AcquisitionMode,
    Alert,
    DiseaseScope,
    MeasurementKind,
    MeasurementRecord,
    Severity,
    evaluate,
    evaluation_report,
    report_to_json_line,
)
from .signal_core import SignalKind, read_signal_csv

__all__ = ["PipelineResult", "run_patient", "read_measurements_csv"]

FEATURE_COLUMNS = [
    "sdnn_ms", "sdann_ms", "sdnnidx_ms", "pnn50_pct", "rmssd_ms",
    "lf_power", "hf_power", "respiration_rate_bpm", "tidal_volume_l",
    "vital_capacity_l", "mean_heart_rate_bpm",
]


@dataclass
class PipelineResult:
    patient_id: str
    alerts: list = field(default_factory=list)
    report: dict = field(default_factory=dict)
    features: dict = field(default_factory=dict)
    qrs_disagreement_pct: float = 0.0
    qrs_flagged: bool = False
    decision: TransmissionDecision = TransmissionDecision.HOLD
    message_xml: str = ""
    artifacts: list = field(default_factory=list)
    prediction: str = ""


def read_measurements_csv(path, patient_id):
    """Rows: kind,value,timestamp_ms[,mode[,name]]."""
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"kind", "value", "timestamp_ms"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError("measurements CSV needs columns kind,value,timestamp_ms")
        out = []
        for row in reader:
            out.append({
                "patient_id": patient_id,
                "kind": row["kind"],
                "value": float(row["value"]),
                "timestamp_ms": int(row["timestamp_ms"]),
                "mode": row.get("mode") or "NOSILENT",
                "name": row.get("name") or "",
            })
    return out


def _ecg_features(signal, cfg, features):
    pre = cfg["preprocess"]
    if pre["baseline_method"] == "linear":
        cleaned = remove_baseline_linear(signal)
    else:
        rough = pan_tompkins(signal)
        knots = select_pq_knots(signal, rough)
        cleaned = remove_baseline_poly(signal, knots)
    den = wavelet_denoise(cleaned, levels=pre["wavelet_levels"],
                          threshold_mode=pre["threshold_mode"])
    qcfg = cfg["qrs"]
    pt_peaks = pan_tompkins(den)
    annotations = wavelet_qrs(
        cleaned, levels=pre["wavelet_levels"], threshold_mode=pre["threshold_mode"],
        spike_fraction=qcfg["spike_fraction"], qrs_min_ms=qcfg["qrs_min_ms"],
        qrs_max_ms=qcfg["qrs_max_ms"], artifact_threshold=qcfg["artifact_threshold"])
    wv_peaks = [a.r_peak for a in annotations if a.label is BeatLabel.QRS]
    n_pt, n_wv = len(pt_peaks), len(wv_peaks)
    disagreement = 0.0
    if max(n_pt, n_wv) > 0:
        disagreement = abs(n_pt - n_wv) / max(n_pt, n_wv) * 100.0
    peaks = pt_peaks if qcfg["detector"] == "pan_tompkins" else wv_peaks
    rr = rr_from_peaks(peaks, signal.rate_hz, signal.start_time_ms)
    if len(rr) >= 2:
        try:
            tf = hrv.time_features(rr)
            features["sdnn_ms"] = tf.sdnn_ms
            features["sdann_ms"] = tf.sdann_ms
            features["sdnnidx_ms"] = tf.sdnnidx_ms
            features["pnn50_pct"] = tf.pnn50_pct
            features["rmssd_ms"] = tf.rmssd_ms
        except NoDataError:
            features["sdnn_ms"] = hrv.sdnn(rr)
            features["rmssd_ms"] = hrv.rmssd(rr)
            features["pnn50_pct"] = hrv.pnn50(rr)
        try:
            ff = hrv.band_powers(rr)
            features["lf_power"] = ff.lf_power
            features["hf_power"] = ff.hf_power
        except NoDataError:
            pass
        try:
            features["mean_heart_rate_bpm"] = mean_heart_rate(rr)
        except NoDataError:
            pass
    return annotations, disagreement


def _resp_features(signal, cfg, features):
    rcfg = cfg["respiration"]
    try:
        rates = respiration_rate(signal, window_s=rcfg["window_s"], hop_s=rcfg["window_s"])
    except NoDataError:
        rates = []
    if len(rates):
        features["respiration_rate_bpm"] = float(sum(rates) / len(rates))
    try:
        vol = volume_features(signal, rcfg["calibration"], rcfg["vr_litres"])
        features["tidal_volume_l"] = vol.tidal_volume
        features["vital_capacity_l"] = vol.vital_capacity
    except NoDataError:
        pass


def _index_scores(model, named_values):
    """Latest named values mapped to scores; out-of-[0,1] values count as
    explicitly missing."""
    scores = {}
    for name in model.weights:
        v = named_values.get(name)
        scores[name] = v if v is not None and 0.0 <= v <= 1.0 else None
    return scores


def _index_alert(rule_id, model, named_records, patient_id, now_ms):
    named_values = {n: r.value for n, r in named_records.items()}
    scores = _index_scores(model, named_values)
    try:
        index, triggered = weighted_index(model, scores)
    except NoDataError:
        return None, None
    if not triggered:
        return index, None
    evidence = tuple(named_records[n] for n in sorted(model.weights)
                     if scores.get(n) is not None)
    return index, Alert(
        rule_id=rule_id,
        patient_id=patient_id,
        severity=Severity.LIGHT_ALERT,
        fired_at_ms=int(now_ms),
        evidence=evidence,
    )


def _feature_vector(features, named_records, store, patient_id, now_ms):
    schema = patient_schema()
    mapping = {}
    for name in FEATURE_COLUMNS:
        if name in features:
            mapping[name] = features[name]
    latest = {}
    for rec in store.records(patient_id, until_ms=now_ms):
        if rec.kind is MeasurementKind.BODY_WEIGHT:
            latest["body_weight_kg"] = rec.value
        elif rec.kind is MeasurementKind.GLUCOSE:
            latest["glucose_mg_dl"] = rec.value
    mapping.update(latest)
    for attr in schema:
        if attr.name in named_records and attr.name not in mapping:
            v = named_records[attr.name].value
            mapping[attr.name] = ("%g" % v) if attr.kind == CATEGORICAL else v
    return FeatureVector.from_mapping(schema, mapping)


def run_patient(patient_id, store, cfg, ruleset, now_ms,
                ecg_csv=None, ecg_rate_hz=250.0,
                resp_csv=None, resp_rate_hz=25.0,
                measurements_csv=None, model=None, out_dir=None):
    result = PipelineResult(patient_id=patient_id)
    features = {}
    annotations = None

    if measurements_csv:
        store.ingest(read_measurements_csv(measurements_csv, patient_id))

    if ecg_csv:
        ecg = read_signal_csv(ecg_csv, ecg_rate_hz, SignalKind.ECG)
        annotations, disagreement = _ecg_features(ecg, cfg, features)
        result.qrs_disagreement_pct = disagreement
        result.qrs_flagged = disagreement > cfg["qrs"]["cross_check_pct"]
        if "mean_heart_rate_bpm" in features:
            end_ms = ecg.start_time_ms + int(round(ecg.duration_seconds * 1000.0))
            store.ingest([MeasurementRecord(
                patient_id, MeasurementKind.HEART_RATE,
                features["mean_heart_rate_bpm"], end_ms, AcquisitionMode.SILENT)])

    if resp_csv:
        resp = read_signal_csv(resp_csv, resp_rate_hz, SignalKind.RESPIRATION)
        _resp_features(resp, cfg, features)
        if "respiration_rate_bpm" in features:
            end_ms = resp.start_time_ms + int(round(resp.duration_seconds * 1000.0))
            store.ingest([MeasurementRecord(
                patient_id, MeasurementKind.RESPIRATION_RATE,
                features["respiration_rate_bpm"], end_ms, AcquisitionMode.SILENT)])

    disease = None if cfg.disease is None else DiseaseScope(cfg.disease)
    history = store.records(patient_id, until_ms=now_ms)
    report = evaluation_report(ruleset, history, patient_id, now_ms, disease)
    alerts = list(evaluate(ruleset, history, patient_id, now_ms, disease))

    named_records = {}
    for rec in history:
        if rec.name:
            named_records[rec.name] = rec
    stress_index, stress_alert = _index_alert(
        "stress-index", cfg.stress_model(), named_records, patient_id, now_ms)
    lifestyle_index, lifestyle_alert = _index_alert(
        "lifestyle-index", cfg.lifestyle_model(), named_records, patient_id, now_ms)
    for extra in (stress_alert, lifestyle_alert):
        if extra is not None:
            alerts.append(extra)
            report["alerts"].append({
                "rule": extra.rule_id,
                "severity": extra.severity.value,
                "fired_at": extra.fired_at_ms,
                "evidence": [{"kind": r.kind.value, "value": r.value,
                              "ts": r.timestamp_ms, "mode": r.mode.value}
                             for r in extra.evidence],
            })
    alerts.sort(key=lambda a: (0 if a.severity is Severity.ALARM else 1, a.rule_id))
    report["alerts"].sort(key=lambda d: (0 if d["severity"] == "ALARM" else 1, d["rule"]))
    if stress_index is not None:
        report["stress_index"] = round(stress_index, 6)
    if lifestyle_index is not None:
        report["lifestyle_index"] = round(lifestyle_index, 6)
    if annotations is not None:
        report["qrs_disagreement_pct"] = round(result.qrs_disagreement_pct, 3)
        report["qrs_flagged"] = result.qrs_flagged
    result.alerts = alerts
    result.report = report
    result.features = features

    if model is not None:
        fv = _feature_vector(features, named_records, store, patient_id, now_ms)
        label, dist = predict_any(model, fv)
        result.prediction = label.name
        report["prediction"] = label.name
        report["prediction_distribution"] = [round(p, 6) for p in dist]

    decision = decide_transmission(alerts, cfg.schedule, now_ms,
                                   _last_scheduled_send(store, patient_id))
    result.decision = decision
    if decision is not TransmissionDecision.HOLD:
        pending = store.untransmitted(patient_id)
        feature_pairs = tuple(sorted(features.items()))
        if result.prediction:
            feature_pairs += (("predicted_severity", result.prediction),)
        message = OutboundMessage(
            patient_id=patient_id,
            created_at_ms=int(now_ms),
            urgency=Urgency(decision.value),
            alerts=tuple(alerts),
            features=feature_pairs,
            measurements=tuple(pending),
        )
        result.message_xml = build_message_xml(message)
        store.mark_transmitted(patient_id, len(pending))
        if decision is TransmissionDecision.SCHEDULED:
            _set_last_scheduled_send(store, patient_id, now_ms)

    if out_dir is not None:
        pdir = os.path.join(out_dir, patient_id)
        os.makedirs(pdir, exist_ok=True)
        rpath = os.path.join(pdir, "report.jsonl")
        with open(rpath, "w", encoding="utf-8") as fh:
            fh.write(report_to_json_line(report) + "\n")
        result.artifacts.append(rpath)
        fpath = os.path.join(pdir, "features.csv")
        with open(fpath, "w", encoding="utf-8") as fh:
            fh.write(_features_csv(features))
        result.artifacts.append(fpath)
        if annotations is not None:
            bpath = os.path.join(pdir, "beats.csv")
            with open(bpath, "w", encoding="utf-8") as fh:
                fh.write(annotations_to_csv(annotations))
            result.artifacts.append(bpath)
        if result.message_xml:
            mpath = os.path.join(pdir, "message.xml")
            with open(mpath, "w", encoding="utf-8") as fh:
                fh.write(result.message_xml)
            result.artifacts.append(mpath)
    return result


def _features_csv(features):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_COLUMNS)
    writer.writerow([repr(features[c]) if c in features else "" for c in FEATURE_COLUMNS])
    return buf.getvalue()


def _last_scheduled_send(store, patient_id):
    path = os.path.join(store.root, patient_id + ".lastsend")
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as fh:
        return int(fh.read().strip())


def _set_last_scheduled_send(store, patient_id, now_ms):
    path = os.path.join(store.root, patient_id + ".lastsend")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%d" % now_ms)
