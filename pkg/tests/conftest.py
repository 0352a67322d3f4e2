from pathlib import Path

import numpy as np
import pytest

from torsion_lab.presentation import load_presentation, parse_presentation

DATA = Path(__file__).resolve().parents[1] / "src" / "torsion_lab" / "data"

T3_TEXT = """\
# three-torus with duals
generators: a b c
relators: a b a^-1 b^-1; b c b^-1 c^-1; c a c^-1 a^-1
duals: c; a; b
"""


@pytest.fixture(scope="session")
def trefoil():
    return load_presentation(DATA / "trefoil.pres")


@pytest.fixture(scope="session")
def figure8():
    return load_presentation(DATA / "figure8.pres")


@pytest.fixture(scope="session")
def unknot():
    return load_presentation(DATA / "unknot.pres")


@pytest.fixture(scope="session")
def knots(trefoil, figure8):
    return {"trefoil": trefoil, "figure8": figure8}


@pytest.fixture(scope="session")
def t3():
    return parse_presentation(T3_TEXT, "T3")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
