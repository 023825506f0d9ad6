import json
import pathlib

import numpy as np
import pytest

from nearex.problem import ProblemError, ProblemFile

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "fixtures"

MINIMAL = {
    "system": "vars x; params p1, p2; poly x^2 + p1*x + p2;",
    "p_hat": [2.8284271, 2.0],
    "structure": {"kind": "multiplicity", "prefix": [1, 1], "dim": 0},
}


def test_minimal_problem_parses():
    prob = ProblemFile.from_dict(MINIMAL)
    assert prob.kind == "multiplicity"
    assert np.array_equal(prob.p_hat, np.array([2.8284271, 2.0], dtype=complex))


def test_missing_fields_raise_problem_error():
    for drop in ("system", "p_hat", "structure"):
        data = {k: v for k, v in MINIMAL.items() if k != drop}
        with pytest.raises(ProblemError):
            ProblemFile.from_dict(data)


def test_unknown_structure_kind_rejected():
    data = dict(MINIMAL, structure={"kind": "mystery"})
    with pytest.raises(ProblemError):
        ProblemFile.from_dict(data)


def test_parameter_count_mismatch_rejected():
    data = dict(MINIMAL, p_hat=[1.0])
    with pytest.raises(ProblemError):
        ProblemFile.from_dict(data)


def test_bad_group_name_rejected():
    data = dict(
        MINIMAL,
        structure={"kind": "infinity", "groups": [["nope"]]},
    )
    with pytest.raises(ProblemError):
        ProblemFile.from_dict(data)


def test_invalid_json_raises_problem_error():
    with pytest.raises(ProblemError):
        ProblemFile.from_json("{not json")
    with pytest.raises(ProblemError):
        ProblemFile.from_json("[1, 2, 3]")


def test_complex_entries_as_pairs():
    data = dict(MINIMAL, p_hat=[[2.8, 0.1], 2.0])
    prob = ProblemFile.from_dict(data)
    assert prob.p_hat[0] == complex(2.8, 0.1)
    with pytest.raises(ProblemError):
        ProblemFile.from_dict(dict(MINIMAL, p_hat=["x", 2.0]))


def test_round_trip_preserves_equality():
    prob = ProblemFile.from_dict(MINIMAL)
    again = ProblemFile.from_json(prob.to_json())
    assert again == prob


@pytest.mark.parametrize("path", sorted(FIXTURE_DIR.glob("*.json")),
                         ids=lambda p: p.stem)
def test_shipped_fixtures_round_trip(path):
    prob = ProblemFile.load(path)
    again = ProblemFile.from_json(prob.to_json())
    assert again == prob
    # serialization is stable: the shipped file already is the canonical form
    assert prob.to_json() == path.read_text(encoding="utf-8")


def test_run_dispatches_multiplicity_double_root():
    prob = ProblemFile.load(FIXTURE_DIR / "double_root.json")
    outcome = prob.run(seed=0)
    assert outcome.validated
    assert outcome.result.p_star[0] == pytest.approx(2.828427116497461, abs=1e-6)
    assert outcome.result.p_star[1] == pytest.approx(1.999999988334534, abs=1e-6)
