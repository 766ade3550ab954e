"""Case documents: JSON parsing, validation and serialization.

Quantities are kept in the document's own units (MW, rad, $/MWh) here;
conversion to per-unit happens when a :class:`~otsldr.network.Grid` is built.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..errors import SchemaError, UnitsError, ValidationError


@dataclass(frozen=True)
class Bus:
    id: int
    theta_min: float
    theta_max: float
    load: float


@dataclass(frozen=True)
class Line:
    from_id: int
    to_id: int
    b: float
    f_min: float
    f_max: float
    dtheta_max: float | None = None
    switchable: bool = True


@dataclass(frozen=True)
class Generator:
    bus_id: int
    c: float
    q: float
    g_min: float
    g_max: float
    r_minus: float
    r_plus: float
    agc: bool = True


@dataclass(frozen=True)
class WindFarm:
    bus_id: int
    nominal: float
    xi_min: float = 0.0
    xi_max: float = 0.0


@dataclass(frozen=True)
class CaseFile:
    base_mva: float
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    gens: tuple[Generator, ...]
    wind: tuple[WindFarm, ...]
    ref_bus: int
    max_open: int = 0
    name: str = field(default="case", compare=False)

    @property
    def n_buses(self):
        return len(self.buses)

    @property
    def n_lines(self):
        return len(self.lines)

    @property
    def n_wind(self):
        return len(self.wind)


# document key -> dataclass field; `None` marks an optional key
_BUS_KEYS = {"id": "id", "theta_min": "theta_min", "theta_max": "theta_max", "load": "load"}
_LINE_KEYS = {
    "from": "from_id", "to": "to_id", "b": "b", "f_min": "f_min", "f_max": "f_max",
    "dtheta_max": "dtheta_max", "switchable": "switchable",
}
_GEN_KEYS = {
    "bus": "bus_id", "c": "c", "q": "q", "g_min": "g_min", "g_max": "g_max",
    "r_minus": "r_minus", "r_plus": "r_plus", "agc": "agc",
}
_WIND_KEYS = {"bus": "bus_id", "nominal": "nominal", "xi_min": "xi_min", "xi_max": "xi_max"}

_OPTIONAL = {"dtheta_max", "switchable", "agc", "xi_min", "xi_max"}
_INT_FIELDS = {"id", "from_id", "to_id", "bus_id"}
_BOOL_FIELDS = {"switchable", "agc"}


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {type(value).__name__}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise SchemaError(f"{path}: expected an integer")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise UnitsError(f"{path}: non-finite value {value!r}")
    return value


def _record(raw, keys, cls, path):
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected an object")
    extra = set(raw) - set(keys)
    if extra:
        raise SchemaError(f"{path}: unknown keys {sorted(extra)}")
    kwargs = {}
    for key, attr in keys.items():
        if key not in raw:
            if key in _OPTIONAL:
                continue
            raise SchemaError(f"{path}.{key}: missing field")
        value = raw[key]
        if attr in _BOOL_FIELDS:
            if not isinstance(value, bool):
                raise SchemaError(f"{path}.{key}: expected true/false")
        elif attr == "dtheta_max" and value is None:
            pass
        else:
            value = _number(value, f"{path}.{key}", integer=attr in _INT_FIELDS)
        kwargs[attr] = value
    return cls(**kwargs)


def _records(doc, key, keys, cls, required=True):
    if key not in doc:
        if required:
            raise SchemaError(f"{key}: missing field")
        return ()
    raw = doc[key]
    if not isinstance(raw, list):
        raise SchemaError(f"{key}: expected an array")
    return tuple(_record(item, keys, cls, f"{key}[{i}]") for i, item in enumerate(raw))


def validate_case(case: CaseFile) -> CaseFile:
    """Check every data invariant, raising :class:`ValidationError` on the first failure."""
    if not case.base_mva > 0:
        raise ValidationError("base_mva", "must be positive")
    if not case.buses:
        raise ValidationError("buses", "at least one bus required")
    seen = set()
    for i, bus in enumerate(case.buses):
        if bus.id in seen:
            raise ValidationError(f"buses[{i}].id", f"duplicate bus id {bus.id}")
        seen.add(bus.id)
        if bus.theta_min > bus.theta_max:
            raise ValidationError(f"buses[{i}].theta_min", "theta_min > theta_max")
    if case.ref_bus not in seen:
        raise ValidationError("ref_bus", f"unknown bus {case.ref_bus}")
    for i, ln in enumerate(case.lines):
        p = f"lines[{i}]"
        for key, bus in (("from", ln.from_id), ("to", ln.to_id)):
            if bus not in seen:
                raise ValidationError(f"{p}.{key}", f"unknown bus {bus}")
        if ln.from_id == ln.to_id:
            raise ValidationError(f"{p}.to", "self-loop")
        if not ln.b > 0:
            raise ValidationError(f"{p}.b", "susceptance must be positive")
        if not ln.f_min <= 0 <= ln.f_max:
            raise ValidationError(f"{p}.f_min", "need f_min <= 0 <= f_max")
        if ln.dtheta_max is not None and not ln.dtheta_max > 0:
            raise ValidationError(f"{p}.dtheta_max", "must be positive")
    for i, g in enumerate(case.gens):
        p = f"gens[{i}]"
        if g.bus_id not in seen:
            raise ValidationError(f"{p}.bus", f"unknown bus {g.bus_id}")
        if g.g_min > g.g_max:
            raise ValidationError(f"{p}.g_min", "g_min > g_max")
        if not g.r_minus <= 0 <= g.r_plus:
            raise ValidationError(f"{p}.r_minus", "need r_minus <= 0 <= r_plus")
    for i, w in enumerate(case.wind):
        p = f"wind[{i}]"
        if w.bus_id not in seen:
            raise ValidationError(f"{p}.bus", f"unknown bus {w.bus_id}")
        if not w.xi_min <= 0 <= w.xi_max:
            raise ValidationError(f"{p}.xi_min", "need xi_min <= 0 <= xi_max")
    if case.max_open < 0:
        raise ValidationError("max_open", "must be non-negative")
    return case


def case_from_dict(doc, name="case") -> CaseFile:
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    allowed = {"base_mva", "buses", "lines", "gens", "wind", "ref_bus", "max_open", "name"}
    extra = set(doc) - allowed
    if extra:
        raise SchemaError(f"unknown top-level keys {sorted(extra)}")
    for key in ("base_mva", "ref_bus"):
        if key not in doc:
            raise SchemaError(f"{key}: missing field")
    case = CaseFile(
        base_mva=_number(doc["base_mva"], "base_mva"),
        buses=_records(doc, "buses", _BUS_KEYS, Bus),
        lines=_records(doc, "lines", _LINE_KEYS, Line),
        gens=_records(doc, "gens", _GEN_KEYS, Generator),
        wind=_records(doc, "wind", _WIND_KEYS, WindFarm, required=False),
        ref_bus=_number(doc["ref_bus"], "ref_bus", integer=True),
        max_open=_number(doc.get("max_open", 0), "max_open", integer=True),
        name=str(doc.get("name", name)),
    )
    return validate_case(case)


def parse_case(text: str, name="case") -> CaseFile:
    """Parse a UTF-8 JSON case document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return case_from_dict(doc, name=name)


def load_case(path) -> CaseFile:
    from pathlib import Path

    path = Path(path)
    return parse_case(path.read_text(encoding="utf-8"), name=path.stem)


def _dump_record(obj, keys):
    out = {}
    for key, attr in keys.items():
        value = getattr(obj, attr)
        if value is None and key in _OPTIONAL:
            continue
        out[key] = value
    return out


def case_to_dict(case: CaseFile) -> dict:
    return {
        "name": case.name,
        "base_mva": case.base_mva,
        "ref_bus": case.ref_bus,
        "max_open": case.max_open,
        "buses": [_dump_record(b, _BUS_KEYS) for b in case.buses],
        "lines": [_dump_record(ln, _LINE_KEYS) for ln in case.lines],
        "gens": [_dump_record(g, _GEN_KEYS) for g in case.gens],
        "wind": [_dump_record(w, _WIND_KEYS) for w in case.wind],
    }


def serialize_case(case: CaseFile, indent=1) -> str:
    # json emits repr() floats, which round-trip exactly
    return json.dumps(case_to_dict(case), indent=indent)


def replace_field(case: CaseFile, section: str, index: int, attr: str, value) -> CaseFile:
    """Return a copy of ``case`` with one record field changed (no validation)."""
    from dataclasses import replace

    records = list(getattr(case, section))
    records[index] = replace(records[index], **{attr: value})
    return replace(case, **{section: tuple(records)})


__all__ = [
    "Bus", "Line", "Generator", "WindFarm", "CaseFile", "parse_case", "load_case",
    "serialize_case", "case_to_dict", "case_from_dict", "validate_case", "replace_field",
]
