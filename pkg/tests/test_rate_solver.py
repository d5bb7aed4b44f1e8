import csv
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffcons.rate_solver import (
    ThetaKind,
    constant_residual,
    rate_curve,
    solve_mu,
    solve_mu_constant,
    solve_mu_variable,
    table_rates,
    theta_profile,
    variable_residual,
)

DATA = Path(__file__).parent / "data"


def load_table(name):
    with open(DATA / name) as fh:
        return {int(r["N"]): {k: float(v) for k, v in r.items() if k != "N"} for r in csv.DictReader(fh)}


@pytest.mark.parametrize("lam,x", [(1.0, 0.8603), (2.0, 1.0768), (3.0, 1.1924)])
def test_constant_root_golden(lam, x):
    assert solve_mu_constant(lam).root == pytest.approx(x, abs=1e-4)


def test_constant_examples():
    assert round(solve_mu_constant(1.0).mu, 4) == 0.7402
    m = solve_mu_constant(0.0)
    assert m.mu == pytest.approx(math.pi**2) and m.k == 1


def test_variable_examples():
    # reference variable-Theta rates carry about 1e-4 of noise; the tables'
    # own +-5e-4 tolerance applies
    assert solve_mu_variable(4 / 3).mu == pytest.approx(1.2772, abs=5e-4)
    assert solve_mu_variable(1.0).mu == pytest.approx(1.0586, abs=5e-4)
    m = solve_mu_variable(0.0)
    assert m.root == 0.0 and m.mu == 0.0


def test_zero_lambda_overtones():
    for n in range(1, 5):
        assert solve_mu_constant(0.0, 2.0, n).mu == pytest.approx(2.0 * (n * math.pi) ** 2)
        nu = 2 * (n - 1)
        assert solve_mu_variable(0.0, 2.0, n).mu == pytest.approx(3.0 * nu * (nu + 1))


def test_rejects_bad_input():
    for f in (solve_mu_constant, solve_mu_variable):
        with pytest.raises(ValueError):
            f(-1.0)
        with pytest.raises(ValueError):
            f(1.0, theta_hat=0.0)
        with pytest.raises(ValueError):
            f(1.0, n=0)
        with pytest.raises(ValueError):
            f(math.nan)


def test_dispatch():
    assert solve_mu("constant", 2.0).mu == solve_mu_constant(2.0).mu
    assert solve_mu(ThetaKind.VARIABLE, 2.0).mu == solve_mu_variable(2.0).mu


def test_rate_curve_asymptotics():
    (_, mc, mv), = rate_curve([1e-3])
    assert 1.4985 <= mv / mc <= 1.5005
    (_, mc, mv), = rate_curve([1e6])
    assert mc == pytest.approx(math.pi**2 / 4, abs=1e-3)
    assert mv == pytest.approx(3.0, abs=1e-3)


def test_rate_curve_cycle_point():
    (_, mc, mv), = rate_curve([2.0])
    assert round(mc, 4) == 1.1597
    assert mv == pytest.approx(1.6022, abs=5e-4)
    with pytest.raises(ValueError):
        rate_curve([0.0])


def test_theta_profile_mean():
    xi = np.linspace(0, 1, 100001)
    assert np.trapezoid(theta_profile(xi, 2.0), xi) == pytest.approx(2.0, rel=1e-9)


def test_residuals_on_random_lambdas():
    rng = np.random.default_rng(11)
    lams = 10 ** rng.uniform(-3, 3, 1000)
    ns = rng.integers(1, 4, 1000)
    for lam, n in zip(lams, ns):
        n = int(n)
        c = solve_mu_constant(lam, n=n)
        assert (n - 1) * math.pi < c.root < (n - 0.5) * math.pi
        # sine-cosine form: the cot form amplifies one ulp of x by
        # lambda / sin(x)^2 next to (n-1) pi
        assert abs(constant_residual(c.root, lam)) < 1e-12 * max(1.0, lam)
        v = solve_mu_variable(lam, n=n)
        assert 2 * (n - 1) < v.root < 2 * n - 1
        assert abs(variable_residual(v.root, lam)) < 1e-11


def test_residual_unscaled_moderate_lambda():
    for lam in (1e-3, 0.1, 1.0, 10.0):
        c = solve_mu_constant(lam)
        assert abs(c.root - lam / math.tan(c.root)) < 1e-12
        assert abs(variable_residual(solve_mu_variable(lam).root, lam)) < 1e-11


def test_monotone_in_lambda():
    grid = np.geomspace(1e-3, 1e3, 200)
    rows = np.array(rate_curve(grid))
    assert np.all(np.diff(rows[:, 1]) > 0)
    assert np.all(np.diff(rows[:, 2]) > 0)
    assert np.all(rows[:, 2] > rows[:, 1])


@settings(max_examples=80, deadline=None)
@given(lam=st.floats(1e-3, 1e3), c=st.floats(0.01, 100.0))
def test_linear_scaling(lam, c):
    for f in (solve_mu_constant, solve_mu_variable):
        assert f(lam, c).mu == pytest.approx(c * f(lam, 1.0).mu, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(1e-3, 1e3))
def test_overtone_ordering(lam):
    for f in (solve_mu_constant, solve_mu_variable):
        mus = [f(lam, n=n).mu for n in (1, 2, 3)]
        assert mus[0] < mus[1] < mus[2]


def test_table_rate_examples():
    (r,) = table_rates("complete", [5], "vertices")
    assert (round(r.mu_constant, 4), round(r.mu_variable, 4), round(r.ratio, 4)) == (1.3047, 1.7792, 1.3637)
    (r,) = table_rates("path", [10], "vertices")
    assert round(r.mu_constant, 4) == 0.1165
    assert r.mu_variable == pytest.approx(0.1737, abs=5e-4)
    (r,) = table_rates("cycle", [14], "edges")
    assert (round(r.mu_constant, 4), round(r.mu_variable, 4)) == (0.1857, 0.2756)
    with pytest.raises(ValueError):
        table_rates("star", [5])


@pytest.mark.parametrize("name,rule", [("reference_rates_vertices.csv", "vertices"), ("reference_rates_edges.csv", "edges")])
@pytest.mark.parametrize("topo", ["complete", "path", "cycle"])
def test_table_rates_match_reference_rates(name, rule, topo):
    table = load_table(name)
    for r in table_rates(topo, sorted(table), rule):
        assert abs(round(r.mu_constant, 4) - table[r.n][f"{topo}_const"]) <= 5e-4
        assert abs(round(r.mu_variable, 4) - table[r.n][f"{topo}_var"]) <= 5e-4


@pytest.mark.parametrize("name,rule", [("reference_rates_vertices.csv", "vertices"), ("reference_rates_edges.csv", "edges")])
@pytest.mark.parametrize("topo", ["complete", "path", "cycle"])
def test_table_rates_match_reference_ratios(name, rule, topo):
    # several reference path ratios disagree with the reference rates themselves
    table = load_table(name)
    bad = []
    for r in table_rates(topo, sorted(table), rule):
        if abs(round(r.ratio, 4) - table[r.n][f"{topo}_ratio"]) > 5e-4:
            bad.append((r.n, round(r.ratio, 4), table[r.n][f"{topo}_ratio"]))
    assert not bad, bad
