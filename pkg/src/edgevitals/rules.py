"""XML if-then clinical rules evaluated over the measurement history.

Rule document shape (versioned by the root's schema attribute):

    <rules schema="1">
      <rule id="hr-high" scope="BOTH" severity="ALARM" message="...">
        <threshold kind="HEART_RATE" op="gt" value="120"/>
      </rule>
    </rules>

Conditions may nest <and>/<or>/<not> around the three predicate forms
threshold, percent_change (percent, window_hours) and sustained
(duration_minutes).
"""

import enum
import json
import operator
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import IntegrityError, RuleParseError, RuleSemanticError

__all__ = [
    "MeasurementKind",
    "AcquisitionMode",
    "MeasurementRecord",
    "Severity",
    "DiseaseScope",
    "Rule",
    "RuleSet",
    "Alert",
    "parse_rules",
    "evaluate",
    "evaluation_report",
    "report_to_json_line",
    "explain",
]


class MeasurementKind(enum.Enum):
    HEART_RATE = "HEART_RATE"            # bpm
    BODY_WEIGHT = "BODY_WEIGHT"          # kg
    BODY_TEMPERATURE = "BODY_TEMPERATURE"  # deg C
    BLOOD_PRESSURE_SYS = "BLOOD_PRESSURE_SYS"  # mmHg
    BLOOD_PRESSURE_DIA = "BLOOD_PRESSURE_DIA"  # mmHg
    GLUCOSE = "GLUCOSE"                  # mg/dL
    SPO2 = "SPO2"                        # percent
    RESPIRATION_RATE = "RESPIRATION_RATE"  # breaths/min
    QUESTIONNAIRE_ITEM = "QUESTIONNAIRE_ITEM"  # coded
    FEATURE = "FEATURE"                  # named computed feature


class AcquisitionMode(enum.Enum):
    SILENT = "SILENT"
    NOSILENT = "NOSILENT"


class Severity(enum.Enum):
    ALARM = "ALARM"
    LIGHT_ALERT = "LIGHT_ALERT"


class DiseaseScope(enum.Enum):
    COPD = "COPD"
    CKD = "CKD"
    BOTH = "BOTH"


@dataclass(frozen=True)
class MeasurementRecord:
    patient_id: str
    kind: MeasurementKind
    value: float
    timestamp_ms: int
    mode: AcquisitionMode = AcquisitionMode.NOSILENT
    name: str = ""

    def __post_init__(self):
        v = float(self.value)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("measurement value must be finite")
        object.__setattr__(self, "value", v)

    def key(self):
        return (self.patient_id, self.kind.value, self.timestamp_ms, self.value, self.name)


_OPS = {
    "lt": operator.lt,
    "le": operator.le,
    "gt": operator.gt,
    "ge": operator.ge,
    "eq": operator.eq,
}
_OP_SYMBOL = {"lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "="}


@dataclass(frozen=True)
class Threshold:
    kind: MeasurementKind
    op: str
    value: float


@dataclass(frozen=True)
class PercentChange:
    kind: MeasurementKind
    op: str
    percent: float
    window_hours: float


@dataclass(frozen=True)
class Sustained:
    kind: MeasurementKind
    op: str
    value: float
    duration_minutes: float


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class Rule:
    id: str
    scope: DiseaseScope
    severity: Severity
    message: str
    condition: object


@dataclass(frozen=True)
class RuleSet:
    rules: tuple
    schema: str = "1"

    def __len__(self):
        return len(self.rules)


@dataclass(frozen=True)
class Alert:
    rule_id: str
    patient_id: str
    severity: Severity
    fired_at_ms: int
    evidence: tuple = field(repr=False)


def _attr(elem, name, required=True, default=None):
    if name in elem.attrib:
        return elem.attrib[name]
    if required:
        raise RuleSemanticError("<%s> missing attribute %r" % (elem.tag, name))
    return default


def _check_attrs(elem, allowed):
    for a in elem.attrib:
        if a not in allowed:
            raise RuleSemanticError("<%s> has unknown attribute %r" % (elem.tag, a))


def _parse_kind(elem):
    raw = _attr(elem, "kind")
    try:
        return MeasurementKind(raw)
    except ValueError:
        raise RuleSemanticError("unknown measurement kind %r" % raw) from None


def _parse_op(elem):
    raw = _attr(elem, "op")
    if raw not in _OPS:
        raise RuleSemanticError("unknown op %r (expected one of %s)" % (raw, sorted(_OPS)))
    return raw


def _parse_float(elem, name, positive=False):
    raw = _attr(elem, name)
    try:
        v = float(raw)
    except ValueError:
        raise RuleSemanticError("<%s> attribute %r is not a number: %r" % (elem.tag, name, raw)) from None
    if positive and not (v > 0):
        raise RuleSemanticError("<%s> attribute %r must be > 0" % (elem.tag, name))
    return v


def _parse_condition(elem):
    tag = elem.tag
    if tag == "threshold":
        _check_attrs(elem, {"kind", "op", "value"})
        return Threshold(_parse_kind(elem), _parse_op(elem), _parse_float(elem, "value"))
    if tag == "percent_change":
        _check_attrs(elem, {"kind", "op", "percent", "window_hours"})
        return PercentChange(
            _parse_kind(elem), _parse_op(elem),
            _parse_float(elem, "percent"),
            _parse_float(elem, "window_hours", positive=True),
        )
    if tag == "sustained":
        _check_attrs(elem, {"kind", "op", "value", "duration_minutes"})
        return Sustained(
            _parse_kind(elem), _parse_op(elem),
            _parse_float(elem, "value"),
            _parse_float(elem, "duration_minutes", positive=True),
        )
    if tag in ("and", "or"):
        children = [_parse_condition(c) for c in elem]
        if len(children) < 2:
            raise RuleSemanticError("<%s> needs at least 2 children" % tag)
        return And(tuple(children)) if tag == "and" else Or(tuple(children))
    if tag == "not":
        children = list(elem)
        if len(children) != 1:
            raise RuleSemanticError("<not> needs exactly 1 child")
        return Not(_parse_condition(children[0]))
    raise RuleSemanticError("unknown condition element <%s>" % tag)


def parse_rules(xml_text):
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise RuleParseError(exc.msg if hasattr(exc, "msg") else str(exc), line, col) from None
    if root.tag != "rules":
        raise RuleSemanticError("root element must be <rules>, got <%s>" % root.tag)
    _check_attrs(root, {"schema"})
    schema = root.attrib.get("schema", "1")
    if schema != "1":
        raise RuleSemanticError("unsupported rules schema %r" % schema)
    rules = []
    seen_ids = set()
    for child in root:
        if child.tag != "rule":
            raise RuleSemanticError("unexpected element <%s> under <rules>" % child.tag)
        _check_attrs(child, {"id", "scope", "severity", "message"})
        rule_id = _attr(child, "id")
        if rule_id in seen_ids:
            raise RuleSemanticError("duplicate rule id %r" % rule_id)
        seen_ids.add(rule_id)
        try:
            scope = DiseaseScope(child.attrib.get("scope", "BOTH"))
        except ValueError:
            raise RuleSemanticError("unknown scope %r" % child.attrib["scope"]) from None
        try:
            severity = Severity(_attr(child, "severity"))
        except ValueError:
            raise RuleSemanticError("unknown severity %r" % child.attrib["severity"]) from None
        conditions = list(child)
        if len(conditions) != 1:
            raise RuleSemanticError("rule %r must hold exactly one condition" % rule_id)
        rules.append(Rule(
            id=rule_id,
            scope=scope,
            severity=severity,
            message=child.attrib.get("message", ""),
            condition=_parse_condition(conditions[0]),
        ))
    return RuleSet(rules=tuple(rules), schema=schema)


def _referenced_kinds(condition):
    if isinstance(condition, (Threshold, PercentChange, Sustained)):
        return {condition.kind}
    if isinstance(condition, (And, Or)):
        kinds = set()
        for c in condition.children:
            kinds |= _referenced_kinds(c)
        return kinds
    if isinstance(condition, Not):
        return _referenced_kinds(condition.child)
    raise TypeError("unknown condition node %r" % condition)


def _eval_condition(condition, by_kind, now_ms):
    """Returns (satisfied, consulted records)."""
    if isinstance(condition, Threshold):
        records = by_kind[condition.kind]
        latest = records[-1]
        return _OPS[condition.op](latest.value, condition.value), [latest]
    if isinstance(condition, PercentChange):
        records = by_kind[condition.kind]
        latest = records[-1]
        horizon = now_ms - condition.window_hours * 3600000.0
        in_window = [r for r in records if r.timestamp_ms >= horizon]
        if not in_window:
            return False, [latest]
        ref = in_window[0]
        if ref.value == 0:
            return False, [ref, latest]
        change = (latest.value - ref.value) / ref.value * 100.0
        return _OPS[condition.op](change, condition.percent), [ref, latest]
    if isinstance(condition, Sustained):
        records = by_kind[condition.kind]
        horizon = now_ms - condition.duration_minutes * 60000.0
        in_window = [r for r in records if r.timestamp_ms >= horizon]
        if len(in_window) < 2:
            return False, in_window
        ok = all(_OPS[condition.op](r.value, condition.value) for r in in_window)
        return ok, in_window
    if isinstance(condition, And):
        consulted = []
        verdict = True
        for c in condition.children:
            sat, used = _eval_condition(c, by_kind, now_ms)
            consulted.extend(used)
            verdict = verdict and sat
        return verdict, consulted
    if isinstance(condition, Or):
        consulted = []
        verdict = False
        for c in condition.children:
            sat, used = _eval_condition(c, by_kind, now_ms)
            consulted.extend(used)
            verdict = verdict or sat
        return verdict, consulted
    if isinstance(condition, Not):
        sat, used = _eval_condition(condition.child, by_kind, now_ms)
        return not sat, used
    raise TypeError("unknown condition node %r" % condition)


def _evaluate_full(ruleset, history, patient_id, now_ms, disease=None):
    visible = sorted(
        (r for r in history if r.patient_id == patient_id and r.timestamp_ms <= now_ms),
        key=lambda r: (r.timestamp_ms, r.kind.value),
    )
    by_kind = {}
    for rec in visible:
        by_kind.setdefault(rec.kind, []).append(rec)
    alerts = []
    skipped = []
    for rule in ruleset.rules:
        if disease is not None and rule.scope not in (DiseaseScope.BOTH, disease):
            continue
        kinds = _referenced_kinds(rule.condition)
        missing = [k for k in kinds if k not in by_kind]
        if missing:
            skipped.append((rule.id, sorted(k.value for k in missing)))
            continue
        fired, consulted = _eval_condition(rule.condition, by_kind, now_ms)
        if fired:
            evidence = []
            seen = set()
            for rec in consulted:
                if rec.key() not in seen:
                    seen.add(rec.key())
                    evidence.append(rec)
            if not evidence:
                # negated conditions can fire without touching a record;
                # cite the latest record of each referenced kind instead
                evidence = [by_kind[k][-1] for k in sorted(kinds, key=lambda k: k.value)]
            alerts.append(Alert(
                rule_id=rule.id,
                patient_id=patient_id,
                severity=rule.severity,
                fired_at_ms=int(now_ms),
                evidence=tuple(evidence),
            ))
    alerts.sort(key=lambda a: (0 if a.severity is Severity.ALARM else 1, a.rule_id))
    return alerts, skipped


def evaluate(ruleset, history, patient_id, now_ms, disease=None):
    """Alerts for every rule whose condition holds at now_ms. Rules that
    reference a measurement kind with no history are skipped, not errors."""
    alerts, _ = _evaluate_full(ruleset, history, patient_id, now_ms, disease)
    return alerts


def evaluation_report(ruleset, history, patient_id, now_ms, disease=None):
    alerts, skipped = _evaluate_full(ruleset, history, patient_id, now_ms, disease)
    return {
        "patient": patient_id,
        "ts": int(now_ms),
        "alerts": [_alert_dict(a) for a in alerts],
        "skipped_rules": [
            {"rule": rule_id, "missing_kinds": kinds} for rule_id, kinds in skipped
        ],
    }


def _alert_dict(alert):
    return {
        "rule": alert.rule_id,
        "severity": alert.severity.value,
        "fired_at": alert.fired_at_ms,
        "evidence": [
            {
                "kind": r.kind.value,
                "value": r.value,
                "ts": r.timestamp_ms,
                "mode": r.mode.value,
            }
            for r in alert.evidence
        ],
    }


def report_to_json_line(report):
    return json.dumps(report, separators=(",", ":"), sort_keys=False)


def _describe(condition, by_kind, now_ms, lines, depth):
    pad = "  " * depth
    if isinstance(condition, Threshold):
        latest = by_kind[condition.kind][-1]
        lines.append("%sthreshold: %s %s %g, observed %g at %d" % (
            pad, condition.kind.value, _OP_SYMBOL[condition.op],
            condition.value, latest.value, latest.timestamp_ms))
    elif isinstance(condition, PercentChange):
        records = by_kind[condition.kind]
        latest = records[-1]
        horizon = now_ms - condition.window_hours * 3600000.0
        in_window = [r for r in records if r.timestamp_ms >= horizon]
        if in_window and in_window[0].value != 0:
            ref = in_window[0]
            change = (latest.value - ref.value) / ref.value * 100.0
            lines.append("%spercent_change: %s %s %g%% over %gh, computed %+.2f%% (%g -> %g)" % (
                pad, condition.kind.value, _OP_SYMBOL[condition.op], condition.percent,
                condition.window_hours, change, ref.value, latest.value))
        else:
            lines.append("%spercent_change: %s, no usable reference in window" % (
                pad, condition.kind.value))
    elif isinstance(condition, Sustained):
        horizon = now_ms - condition.duration_minutes * 60000.0
        in_window = [r for r in by_kind[condition.kind] if r.timestamp_ms >= horizon]
        lines.append("%ssustained: %s %s %g for %g min, %d observations" % (
            pad, condition.kind.value, _OP_SYMBOL[condition.op], condition.value,
            condition.duration_minutes, len(in_window)))
    elif isinstance(condition, (And, Or)):
        lines.append("%s%s:" % (pad, "all of" if isinstance(condition, And) else "any of"))
        for c in condition.children:
            _describe(c, by_kind, now_ms, lines, depth + 1)
    elif isinstance(condition, Not):
        lines.append("%snot:" % pad)
        _describe(condition.child, by_kind, now_ms, lines, depth + 1)


def explain(alert, ruleset, history):
    """Human-readable trace: the rule condition, the evidence records, and
    the computed intermediate values."""
    rule = next((r for r in ruleset.rules if r.id == alert.rule_id), None)
    if rule is None:
        raise IntegrityError("alert cites unknown rule %r" % alert.rule_id)
    history_keys = {r.key() for r in history}
    for rec in alert.evidence:
        if rec.key() not in history_keys:
            raise IntegrityError("alert evidence not present in history: %r" % (rec.key(),))
    visible = sorted(
        (r for r in history if r.patient_id == alert.patient_id
         and r.timestamp_ms <= alert.fired_at_ms),
        key=lambda r: (r.timestamp_ms, r.kind.value),
    )
    by_kind = {}
    for rec in visible:
        by_kind.setdefault(rec.kind, []).append(rec)
    lines = [
        "rule %s (%s): %s" % (rule.id, rule.severity.value, rule.message or "<no message>"),
        "fired at %d for patient %s" % (alert.fired_at_ms, alert.patient_id),
        "condition:",
    ]
    _describe(rule.condition, by_kind, alert.fired_at_ms, lines, 1)
    lines.append("evidence:")
    for rec in alert.evidence:
        lines.append("  %s = %g at %d (%s)" % (
            rec.kind.value, rec.value, rec.timestamp_ms, rec.mode.value))
    return "\n".join(lines)
