import json
import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from vpwaves.model import Marginal, PlasmaParams


@pytest.fixture(scope="session")
def golden() -> dict:
    path = os.path.join(os.path.dirname(__file__), "golden",
                        "reference_values.json")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def unit_params() -> PlasmaParams:
    return PlasmaParams()


def make_s25_marginals() -> tuple[Marginal, Marginal]:
    """Two-box ion marginal and three-box electron marginal whose net
    charge changes sign inside (1/100, 1)."""
    s2 = math.sqrt(2.0)
    h = 1.0 / (2.0 * s2)
    g_plus = Marginal.piecewise([(-2.0 * s2, -s2, h), (s2, 2.0 * s2, h)])
    g_minus = Marginal.piecewise([
        (-1.9 * s2, -s2, h), (-0.1 * s2, 0.1 * s2, h), (s2, 1.9 * s2, h)])
    return g_plus, g_minus


def make_s33_marginals(phi_l: float):
    """Four flat boxes forming a matched monotone front of height phi_l."""
    r = math.sqrt(phi_l)
    h = 0.5
    left_plus = Marginal.piecewise([(-1.5 * r, -r, h), (r, 1.5 * r, h)])
    right_plus = Marginal.piecewise([(-0.5 * r, 0.5 * r, h)])
    left_minus = Marginal.piecewise([(-0.5 * r, 0.5 * r, h)])
    right_minus = Marginal.piecewise([(-1.5 * r, -r, h), (r, 1.5 * r, h)])
    return left_plus, right_plus, left_minus, right_minus


@pytest.fixture(scope="session")
def s25_marginals():
    return make_s25_marginals()


@pytest.fixture(scope="session")
def s33_marginals():
    return make_s33_marginals(1.0)


@pytest.fixture(scope="session")
def s25_pot(golden, unit_params):
    from vpwaves.sagdeev import SagdeevPotential
    g_plus, g_minus = make_s25_marginals()
    return SagdeevPotential.solitary(
        g_plus, g_minus, golden["solitary_s25"]["beta1"], unit_params)


@pytest.fixture(scope="session")
def s25_profile(s25_pot):
    from vpwaves.profile import build_solitary
    return build_solitary(s25_pot)


@pytest.fixture(scope="session")
def s33_pot(unit_params):
    from vpwaves.sagdeev import SagdeevPotential
    lp, _, _, rm = make_s33_marginals(1.0)
    return SagdeevPotential.shock(lp, rm, 1.0, unit_params)


@pytest.fixture(scope="session")
def s33_profile(s33_pot):
    from vpwaves.profile import build_shock
    return build_shock(s33_pot, points_per_branch=4001)
