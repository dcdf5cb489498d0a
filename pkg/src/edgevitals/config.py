"""Pipeline configuration: versioned JSON with defaults for every knob.

Example document (all keys optional except config_version):

    {
      "config_version": 1,
      "disease": "COPD",
      "preprocess": {"baseline_method": "linear", "highpass_cutoff_hz": 0.5,
                     "highpass_order": 2, "wavelet_levels": 4,
                     "threshold_mode": "soft"},
      "qrs": {"detector": "pan_tompkins", "qrs_min_ms": 50.0,
              "qrs_max_ms": 150.0, "spike_fraction": 0.2,
              "artifact_threshold": 0.15, "cross_check_pct": 10.0},
      "respiration": {"calibration": 1.0, "vr_litres": 1.2, "window_s": 60.0},
      "rules_path": "rules.xml",
      "model_path": null,
      "stress_index": {"weights": {"questionnaire_01": 0.0769, ...},
                       "threshold": 0.6},
      "lifestyle_index": {"weights": {...}, "threshold": 0.6},
      "schedule": {"send_time": "20:00"}
    }
"""

import copy
import json
from dataclasses import dataclass

from .classify.schema import patient_schema
from .classify.weighted import WeightedIndexModel
from .messaging import DailySchedule

__all__ = ["PipelineConfig", "default_config", "load_config", "config_from_dict"]

CONFIG_VERSION = 1


def _equal_weights(names):
    w = 1.0 / len(names)
    weights = {n: w for n in names}
    # nudge the first weight so the sum is exactly 1.0
    weights[names[0]] += 1.0 - sum(weights.values())
    return weights


def _attr_names(prefixes):
    return [a.name for a in patient_schema()
            if any(a.name.startswith(p) for p in prefixes)]


_DEFAULTS = {
    "config_version": CONFIG_VERSION,
    "disease": None,
    "preprocess": {
        "baseline_method": "linear",
        "highpass_cutoff_hz": 0.5,
        "highpass_order": 2,
        "wavelet_levels": 4,
        "threshold_mode": "soft",
    },
    "qrs": {
        "detector": "pan_tompkins",
        "qrs_min_ms": 50.0,
        "qrs_max_ms": 150.0,
        "spike_fraction": 0.2,
        "artifact_threshold": 0.15,
        "cross_check_pct": 10.0,
    },
    "respiration": {
        "calibration": 1.0,
        "vr_litres": 1.2,
        "window_s": 60.0,
    },
    "rules_path": None,
    "model_path": None,
    "stress_index": {
        "weights": _equal_weights(_attr_names(["questionnaire_"])),
        "threshold": 0.6,
    },
    "lifestyle_index": {
        "weights": _equal_weights(_attr_names(["food_", "activity_"])),
        "threshold": 0.6,
    },
    "schedule": {"send_time": "20:00"},
}


@dataclass(frozen=True)
class PipelineConfig:
    raw: dict

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def disease(self):
        return self.raw["disease"]

    @property
    def schedule(self):
        return DailySchedule(self.raw["schedule"]["send_time"])

    def stress_model(self):
        s = self.raw["stress_index"]
        return WeightedIndexModel(dict(s["weights"]), s["threshold"])

    def lifestyle_model(self):
        s = self.raw["lifestyle_index"]
        return WeightedIndexModel(dict(s["weights"]), s["threshold"])


def _merge(base, override, path):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ValueError("unknown config key %r" % (path + key))
        if isinstance(base[key], dict) and key not in ("stress_index", "lifestyle_index"):
            if not isinstance(value, dict):
                raise ValueError("config key %r must be an object" % (path + key))
            out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def config_from_dict(doc):
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    version = doc.get("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ValueError("unsupported config_version %r" % version)
    merged = _merge(_DEFAULTS, doc, "")
    cfg = PipelineConfig(merged)
    if cfg.disease not in (None, "COPD", "CKD"):
        raise ValueError("disease must be COPD, CKD or null")
    cfg.schedule.offset_ms()  # validates send_time
    cfg.stress_model()
    cfg.lifestyle_model()
    if merged["preprocess"]["baseline_method"] not in ("linear", "poly"):
        raise ValueError("baseline_method must be linear or poly")
    if merged["qrs"]["detector"] not in ("pan_tompkins", "wavelet"):
        raise ValueError("detector must be pan_tompkins or wavelet")
    return cfg


def default_config():
    return config_from_dict({})


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError("config %s is not valid JSON: %s" % (path, exc)) from None
    return config_from_dict(doc)
