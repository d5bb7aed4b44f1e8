import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import simpson

from diffcons.discrete_oracle import build_star_graph, sturm_liouville_smallest_eig
from diffcons.pde_solution import InitialCondition
from diffcons.rate_solver import ThetaKind
from diffcons.spectral import lambda2
from diffcons.star_analytics import (
    StarSpec,
    build_star_solution,
    evaluate_star,
    evaluate_star_solution,
    robustness_closed,
    robustness_from_spectrum,
    robustness_table,
    star_discrete_weights,
    star_lambda2_discrete,
    star_spectrum,
    variational_optimum,
    write_robustness_csv,
    write_spectrum_csv,
)
from diffcons.star_analytics import _dft_matrices

# profiles agree at the centre, as a continuous star state must
CENTRED = [np.cos, lambda x: 1 + x * x, np.exp]


def test_spec_validation():
    assert StarSpec(3, 2, 24.0).theta_hat == pytest.approx(1.0)
    with pytest.raises(ValueError):
        StarSpec(0, theta_hat=1.0)
    with pytest.raises(ValueError):
        StarSpec(2)
    with pytest.raises(ValueError):
        StarSpec(2, 3, -1.0)
    with pytest.raises(ValueError):
        star_discrete_weights(StarSpec(2, theta_hat=1.0))


def test_discrete_weight_examples():
    np.testing.assert_allclose(star_discrete_weights(StarSpec(2, 1, 2.0)), [1.0])
    s = StarSpec(3, 50, 7.3)
    w = star_discrete_weights(s)
    assert s.p * w.sum() == pytest.approx(7.3, rel=1e-9)
    assert w[-1] == pytest.approx(3 * 7.3 * 2 * 50 / (3 * 50 * 51 * 101))
    assert w[-1] == w.min() > 0


@settings(max_examples=50, deadline=None)
@given(p=st.integers(1, 20), q=st.integers(1, 300), d=st.floats(1e-3, 1e6))
def test_weights_telescope_to_budget(p, q, d):
    s = StarSpec(p, q, d)
    assert p * star_discrete_weights(s).sum() == pytest.approx(d, rel=1e-9)


def test_lambda2_examples():
    assert star_lambda2_discrete(StarSpec(3, 50, 3 * 50**3)) == pytest.approx(6 * 375000 / (3 * 50 * 51 * 101))
    assert star_lambda2_discrete(StarSpec(3, 50, 3 * 50**3)) == pytest.approx(2.91206, abs=1e-5)
    assert star_lambda2_discrete(StarSpec(1, 1, 1.0)) == pytest.approx(1.0)
    e50 = abs(star_lambda2_discrete(StarSpec.from_theta(3, 50)) - 3)
    e200 = abs(star_lambda2_discrete(StarSpec.from_theta(3, 200)) - 3)
    assert e200 < e50
    assert e200 / 3 == pytest.approx(3 / (2 * 200), rel=0.02)


def test_lambda2_first_order_convergence():
    e50 = abs(star_lambda2_discrete(StarSpec.from_theta(3, 50)) - 3)
    e100 = abs(star_lambda2_discrete(StarSpec.from_theta(3, 100)) - 3)
    assert 1.6 <= e50 / e100 <= 2.4


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("q", [5, 20, 60])
def test_lambda2_closed_form_matches_graph(p, q):
    s = StarSpec(p, q, 10.0)
    assert lambda2(build_star_graph(s)) == pytest.approx(star_lambda2_discrete(s), rel=1e-9)


def test_lambda2_single_branch_differs():
    # with one branch there is no odd sector; the graph's lambda_2 is the
    # first nonzero even mode, not the closed form
    s = StarSpec(1, 30, 10.0)
    assert lambda2(build_star_graph(s)) > 2 * star_lambda2_discrete(s)


def test_spectrum_examples():
    v = star_spectrum(StarSpec(3, theta_hat=1.0), "variable", 10)
    assert v.smallest_positive() == pytest.approx(3.0)
    evens = [e.mu for e in v.entries if e.parity == "even" and e.mu > 0]
    assert min(evens) == pytest.approx(9.0)
    c = star_spectrum(StarSpec(3, theta_hat=1.0), "constant", 10)
    assert c.smallest_positive() == pytest.approx(math.pi**2 / 4)
    with pytest.raises(ValueError):
        star_spectrum(StarSpec(3, theta_hat=1.0), "constant", 0)


@pytest.mark.parametrize("kind", ["constant", "variable"])
@pytest.mark.parametrize("p", [1, 2, 4, 9])
def test_spectrum_structure(kind, p):
    spec = star_spectrum(StarSpec(p, theta_hat=0.7), kind, 25)
    mus = [e.mu for e in spec.entries]
    assert mus == sorted(mus)
    for e in spec.entries:
        assert e.degeneracy == (1 if e.parity == "even" else p - 1)
        assert (e.index % 2 == 0) == (e.parity == "even")
    assert sum(e.parity == "even" for e in spec.entries) == 26
    assert sum(e.parity == "odd" for e in spec.entries) == 25


@settings(max_examples=40, deadline=None)
@given(th=st.floats(1e-3, 1e3), p=st.integers(2, 30))
def test_sturm_comparison(th, p):
    for kind, first_even, first_odd in [("variable", 9.0, 3.0), ("constant", math.pi**2, math.pi**2 / 4)]:
        spec = star_spectrum(StarSpec(p, theta_hat=th), kind, 5)
        even = min(e.mu for e in spec.entries if e.parity == "even" and e.mu > 0)
        odd = min(e.mu for e in spec.entries if e.parity == "odd")
        assert even > odd
        assert even == pytest.approx(first_even * th) and odd == pytest.approx(first_odd * th)


def test_robustness_closed_examples():
    s2 = StarSpec(2, theta_hat=1.0)
    assert robustness_closed(s2, "constant") == pytest.approx(0.57735, abs=1e-5)
    assert robustness_closed(s2, "variable") == pytest.approx(0.57735, abs=1e-5)
    assert robustness_closed(s2, "constant") == robustness_closed(s2, "variable")
    s10 = StarSpec(10, theta_hat=1.0)
    ratio = robustness_closed(s10, "constant") / robustness_closed(s10, "variable")
    assert ratio == pytest.approx(1.034, abs=1e-3)


def test_robustness_ratio_above_one():
    for p, hc, hv, r in robustness_table(range(3, 40)):
        assert r > 1 and hc / hv == r


@pytest.mark.parametrize("p", [2, 3, 5, 10])
@pytest.mark.parametrize("kind", ["constant", "variable"])
def test_robustness_from_spectrum(p, kind):
    s = StarSpec(p, theta_hat=1.0)
    h, err = robustness_from_spectrum(star_spectrum(s, kind, 10**5))
    assert h == pytest.approx(robustness_closed(s, kind), abs=1e-3)
    assert err < 1e-3
    # the truncated sum undershoots, and the bound covers the gap
    assert h <= robustness_closed(s, kind) <= h + err


def test_robustness_tolerance_error():
    with pytest.raises(ValueError):
        robustness_from_spectrum(star_spectrum(StarSpec(3, theta_hat=1.0), "constant", 5), tol=1e-6)


def test_zeta_partial_sums():
    k = np.arange(1, 10**6 + 1, dtype=float)
    assert math.fsum((1 / (2 * k) ** 2)[::-1]) == pytest.approx(math.pi**2 / 24, abs=1e-6)
    assert math.fsum((1 / (2 * k * (2 * k + 1)))[::-1]) == pytest.approx(1 - math.log(2), abs=1e-6)


def test_variational_optimum():
    mu, theta, phi = variational_optimum(1.0)
    assert mu == 3.0 and theta(0.0) == 1.5 and theta(1.0) == 0.0
    xi = np.linspace(0, 1, 1001)
    assert simpson(theta(xi), x=xi) == pytest.approx(1.0, abs=1e-12)
    assert simpson(phi(xi) ** 2, x=xi) == pytest.approx(1.0, abs=1e-12)
    dphi = math.sqrt(3.0)
    rq = simpson(theta(xi) * dphi**2, x=xi) / simpson(phi(xi) ** 2, x=xi)
    assert rq == pytest.approx(3.0, abs=1e-10)
    mu2, _, _ = variational_optimum(2.5)
    assert mu2 == 7.5
    with pytest.raises(ValueError):
        variational_optimum(0.0)


def test_variational_matches_sturm_liouville():
    _, theta, _ = variational_optimum(1.0)
    assert sturm_liouville_smallest_eig(theta, 400) == pytest.approx(3.0, abs=2e-2)


def test_dft_roundtrip():
    for p in (1, 2, 5):
        fwd, inv = _dft_matrices(p)
        np.testing.assert_allclose(inv @ fwd, np.eye(p), atol=1e-13)


@pytest.mark.parametrize("kind,K", [("constant", 50), ("variable", 40)])
def test_reconstruction(kind, K):
    s = StarSpec(3, theta_hat=1.0)
    q0 = InitialCondition.from_functions(CENTRED)
    xi = np.linspace(0, 1, 201)
    err = np.max(np.abs(evaluate_star_solution(s, kind, q0, xi, 0.0, K) - q0.sample(xi)))
    assert err < 0.02


@pytest.mark.parametrize("kind", ["constant", "variable"])
def test_equal_branches_only_even_sector(kind):
    s = StarSpec(4, theta_hat=1.0)
    q0 = InitialCondition.from_functions([lambda x: np.cos(2 * x)] * 4)
    sol = build_star_solution(s, kind, q0, 20)
    assert np.max(np.abs(sol.coef_odd)) < 1e-12


@pytest.mark.parametrize("kind,rate", [("constant", math.pi**2 / 4), ("variable", 3.0)])
def test_decay_and_equilibrium(kind, rate):
    s = StarSpec(3, theta_hat=1.0)
    q0 = InitialCondition.from_functions(CENTRED)
    sol = build_star_solution(s, kind, q0, 30)
    xi = np.linspace(0, 1, 401)
    avg = np.mean([simpson(f(xi), x=xi) for f in CENTRED])
    assert sol.equilibrium == pytest.approx(avg, abs=1e-8)
    far = evaluate_star(sol, xi, 20.0)
    assert np.max(np.abs(far - avg)) < 1e-8
    ts = np.linspace(1.0, 3.0, 9)
    norms = [np.linalg.norm(evaluate_star(sol, xi, t) - avg) for t in ts]
    assert -np.polyfit(ts, np.log(norms), 1)[0] == pytest.approx(rate, rel=1e-2)


@pytest.mark.parametrize("kind", ["constant", "variable"])
def test_average_conserved(kind):
    s = StarSpec(3, theta_hat=1.0)
    sol = build_star_solution(s, kind, InitialCondition.from_functions(CENTRED), 30)
    xi = np.linspace(0, 1, 2001)
    avgs = [simpson(evaluate_star(sol, xi, t).mean(axis=1), x=xi) for t in (0.0, 0.05, 0.2, 1.0)]
    assert np.ptp(avgs) < 1e-6


def test_parity_at_centre():
    # beta != 0 sectors vanish at the centre; beta = 0 has zero slope there
    s = StarSpec(3, theta_hat=1.0)
    for kind in ("constant", "variable"):
        sol = build_star_solution(s, kind, InitialCondition.from_functions(CENTRED), 20)
        v = evaluate_star(sol, 0.0, 0.3)
        assert np.ptp(v) < 1e-10


def test_csv_emitters(tmp_path):
    spec = star_spectrum(StarSpec(3, theta_hat=1.0), ThetaKind.VARIABLE, 3)
    f = tmp_path / "spec.csv"
    write_spectrum_csv(spec, f)
    rows = list(csv.DictReader(open(f)))
    assert rows[0]["mu"] == "0.0" and rows[1]["parity"] == "odd" and rows[1]["degeneracy"] == "2"
    g = tmp_path / "rob.csv"
    write_robustness_csv(robustness_table([2, 3]), g)
    assert g.read_text().splitlines()[0] == "p,H_const,H_var,ratio"
