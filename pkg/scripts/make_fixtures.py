"""Regenerate the shipped problem files in fixtures/ from the built-in data."""

from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from nearex import fixtures
from nearex.algebra import format_system
from nearex.problem import ProblemFile

OUT = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def real_list(values):
    return [float(v) for v in values]


def main():
    OUT.mkdir(exist_ok=True)
    specs = []

    _, _, ph, _ = fixtures.load("double_root")
    specs.append(ProblemFile(
        name="double_root",
        source=fixtures.DOUBLE_ROOT_SOURCE.strip() + "\n",
        p_hat=ph,
        structure={"kind": "multiplicity", "prefix": [1, 1], "dim": 0},
    ))

    _, pt, ph, _ = fixtures.load("infinity_example")
    specs.append(ProblemFile(
        name="infinity_example",
        source=fixtures.INFINITY_SOURCE.strip() + "\n",
        p_hat=ph, p_tilde=pt,
        structure={"kind": "infinity"},
    ))
    specs.append(ProblemFile(
        name="infinity_example_2hom",
        source=fixtures.INFINITY_SOURCE.strip() + "\n",
        p_hat=ph, p_tilde=pt,
        structure={"kind": "infinity", "groups": [["x1"], ["x2"]]},
    ))

    _, pt, ph, _ = fixtures.load("posdim")
    specs.append(ProblemFile(
        name="posdim",
        source=fixtures.POSDIM_SOURCE.strip() + "\n",
        p_hat=ph, p_tilde=pt,
        structure={"kind": "positive_dim", "dim": 1, "degree": 1},
    ))

    _, pt, ph, _ = fixtures.load("zeke_quartic")
    specs.append(ProblemFile(
        name="zeke_quartic",
        source=fixtures.ZEKE_SOURCE.strip() + "\n",
        p_hat=ph, p_tilde=pt,
        structure={"kind": "factor", "dim": 1, "subset_size": 2},
        options={"max_components": 5},
    ))

    _, pt, ph, _ = fixtures.load("multiplicity_line")
    specs.append(ProblemFile(
        name="multiplicity_line",
        source=fixtures.MULTIPLICITY_SOURCE.strip() + "\n",
        p_hat=ph, p_tilde=pt,
        structure={"kind": "multiplicity", "prefix": [1, 1], "dim": 1},
    ))

    _, pt, ph, _ = fixtures.load("fourbar")
    specs.append(ProblemFile(
        name="fourbar",
        source=fixtures.FOURBAR_SOURCE.strip() + "\n",
        p_hat=ph, p_tilde=pt,
        structure={"kind": "factor", "dim": 1, "subset_size": 2},
        options={"max_components": 4},
    ))

    sg, pt, ph, _ = fixtures.load("stewart_gough")
    specs.append(ProblemFile(
        name="stewart_gough",
        source=format_system(sg),
        p_hat=ph, p_tilde=pt,
        structure={"kind": "positive_dim", "dim": 1, "degree": 2},
        options={"max_components": 5},
    ))

    sixr, pt, ph, _ = fixtures.load("sixR")
    specs.append(ProblemFile(
        name="sixR",
        source=format_system(sixr),
        p_hat=ph, p_tilde=pt,
        structure={"kind": "positive_dim", "dim": 1, "degree": 2},
    ))

    for prob in specs:
        prob.p_hat = [float(v.real) for v in prob.p_hat]
        if prob.p_tilde is not None:
            prob.p_tilde = [float(v.real) for v in prob.p_tilde]
        path = OUT / f"{prob.name}.json"
        reloaded = ProblemFile.from_dict(prob.to_dict())  # validate before writing
        path.write_text(reloaded.to_json(), encoding="utf-8")
        print("wrote", path)


if __name__ == "__main__":
    main()
