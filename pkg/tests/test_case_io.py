import copy
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from otsldr.cli import read_case
from otsldr.errors import SchemaError, UnitsError, ValidationError
from otsldr.ingest.case import (
    case_from_dict,
    parse_case,
    replace_field,
    serialize_case,
    validate_case,
)

from helpers import two_bus_doc


def test_minimal_two_bus():
    case = parse_case(json.dumps(two_bus_doc()))
    assert case.n_buses == 2 and case.n_lines == 1 and case.n_wind == 0
    assert case.ref_bus == 1


def test_duplicate_bus_id_names_the_id():
    doc = two_bus_doc()
    doc["buses"][1]["id"] = 1
    with pytest.raises(ValidationError, match="duplicate bus id 1"):
        case_from_dict(doc)


def test_case14_shape():
    case = read_case("case14")
    assert case.n_buses == 14 and case.n_lines == 20 and len(case.gens) == 5
    assert [w.bus_id for w in case.wind] == [3, 5, 6, 10, 13]


@pytest.mark.parametrize("mutate, err", [
    (lambda d: d.pop("base_mva"), SchemaError),
    (lambda d: d["buses"][0].pop("load"), SchemaError),
    (lambda d: d["lines"][0].update(b="x"), SchemaError),
    (lambda d: d.update(extra=1), SchemaError),
    (lambda d: d["lines"][0].update(b=float("nan")), UnitsError),
    (lambda d: d["gens"][0].update(g_max=float("inf")), UnitsError),
    (lambda d: d["lines"][0].update(to=7), ValidationError),
    (lambda d: d.update(ref_bus=9), ValidationError),
])
def test_rejections(mutate, err):
    doc = two_bus_doc()
    mutate(doc)
    with pytest.raises(err):
        case_from_dict(doc)


def test_not_json():
    with pytest.raises(SchemaError):
        parse_case("{not json")


def test_missing_wind_bounds_default_to_zero():
    doc = two_bus_doc(wind=[{"bus": 2, "nominal": 10.0}])
    w = case_from_dict(doc).wind[0]
    assert w.xi_min == 0.0 and w.xi_max == 0.0


def test_round_trip_pinned_cases():
    for name in ("case14", "case118"):
        case = read_case(name)
        assert parse_case(serialize_case(case), name=case.name) == case


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(load=st.floats(0, 1e4), c=st.floats(0, 1e3), b=st.floats(1e-3, 1e3), lim=st.floats(0, 1e4))
def test_round_trip_property(load, c, b, lim):
    doc = two_bus_doc(load=load, c=c)
    doc["lines"][0].update(b=b, f_min=-lim, f_max=lim, dtheta_max=0.5)
    case = case_from_dict(doc)
    assert parse_case(serialize_case(case), name=case.name) == case


# single-field mutations that break an invariant, as (section, attr, bad value)
INVALID = [
    ("buses", "theta_min", 2.0),
    ("lines", "b", 0.0),
    ("lines", "b", -1.0),
    ("lines", "f_min", 1.0),
    ("lines", "f_max", -1.0),
    ("lines", "dtheta_max", 0.0),
    ("lines", "from_id", 5),
    ("lines", "to_id", 1),
    ("gens", "g_min", 500.0),
    ("gens", "r_minus", 1.0),
    ("gens", "r_plus", -1.0),
    ("gens", "bus_id", 3),
    ("wind", "xi_min", 1.0),
    ("wind", "xi_max", -1.0),
    ("wind", "bus_id", 0),
]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(INVALID), st.floats(1.0, 10.0))
def test_invalid_mutations_rejected(mutation, scale):
    section, attr, value = mutation
    doc = two_bus_doc(wind=[{"bus": 2, "nominal": 10.0, "xi_min": -1.0, "xi_max": 1.0}])
    doc["lines"][0]["dtheta_max"] = 0.5
    case = case_from_dict(doc)
    if isinstance(value, float) and value != 0.0 and attr not in ("theta_min",):
        value = math.copysign(abs(value) * scale, value)
    if attr == "theta_min":
        value = case.buses[0].theta_max + scale
    bad = replace_field(case, section, 0, attr, value)
    with pytest.raises(ValidationError):
        validate_case(bad)


def test_valid_case_untouched_by_validation():
    case = case_from_dict(copy.deepcopy(two_bus_doc()))
    assert validate_case(case) is case
