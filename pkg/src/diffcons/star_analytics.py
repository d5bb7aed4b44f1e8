"""Symmetric star: p equal branches of q edges meeting at one centre.

Branch data are mixed by a discrete Fourier transform over the branch index.
The beta = 0 sector sees a zero-flux condition at the centre, every other
sector sees a zero value there, so

* variable Theta: beta = 0 uses P_2k,  beta != 0 uses P_(2k+1)
* constant Theta: beta = 0 uses cos(k pi xi), beta != 0 uses sin((2k+1) pi xi / 2)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .pde_solution import _GRID, _XI_ANGLE, InitialCondition, legendre_quad
from .rate_solver import ThetaKind, theta_profile
from .special_fn import legendre_p

__all__ = [
    "StarSpec",
    "SpectrumEntry",
    "StarSpectrum",
    "StarSolution",
    "star_discrete_weights",
    "star_lambda2_discrete",
    "star_spectrum",
    "build_star_solution",
    "evaluate_star",
    "evaluate_star_solution",
    "robustness_closed",
    "robustness_from_spectrum",
    "robustness_tail_bound",
    "robustness_table",
    "variational_optimum",
    "write_spectrum_csv",
    "write_robustness_csv",
]


@dataclass(frozen=True)
class StarSpec:
    p: int
    q: int | None = None
    D: float | None = None
    theta_hat: float | None = None

    def __post_init__(self):
        if self.p < 1 or int(self.p) != self.p:
            raise ValueError("branch count p must be a positive integer")
        if self.q is not None and (self.q < 1 or int(self.q) != self.q):
            raise ValueError("q must be a positive integer")
        if self.D is not None and not self.D > 0:
            raise ValueError("weight budget D must be positive")
        if self.theta_hat is None:
            if self.q is None or self.D is None:
                raise ValueError("give theta_hat directly or both q and D")
            object.__setattr__(self, "theta_hat", self.D / (self.p * self.q**3))
        elif not self.theta_hat > 0:
            raise ValueError("theta_hat must be positive")

    @classmethod
    def from_theta(cls, p: int, q: int, theta_hat: float = 1.0) -> "StarSpec":
        """Discrete star whose budget is chosen so that D / (p q^3) = theta_hat."""
        return cls(p, q, p * q**3 * theta_hat, theta_hat)

    def _require_discrete(self):
        if self.q is None or self.D is None:
            raise ValueError("discrete star needs q and D")


def star_discrete_weights(s: StarSpec) -> np.ndarray:
    """Weights W_1..W_q along one branch, W_1 on the edge at the centre."""
    s._require_discrete()
    p, q = s.p, s.q
    j = np.arange(1, q + 1, dtype=float)
    return 3.0 * s.D * (q + j) * (q - j + 1) / (p * q * (q + 1) * (2 * q + 1))


def star_lambda2_discrete(s: StarSpec) -> float:
    s._require_discrete()
    q = s.q
    return 6.0 * s.D / (s.p * q * (q + 1) * (2 * q + 1))


# -- spectra --------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    mu: float
    degeneracy: int
    parity: str  # "even" (beta = 0 sector) or "odd"
    index: int  # 2k or 2k + 1


@dataclass(frozen=True)
class StarSpectrum:
    kind: ThetaKind
    p: int
    theta_hat: float
    cutoff: int
    entries: tuple[SpectrumEntry, ...]

    def nonzero(self) -> list[SpectrumEntry]:
        return [e for e in self.entries if e.mu > 0 and e.degeneracy > 0]

    def smallest_positive(self) -> float:
        return min(e.mu for e in self.nonzero())


def _family_rates(kind: ThetaKind, theta_hat: float, k: np.ndarray):
    if kind == ThetaKind.VARIABLE:
        even = 1.5 * theta_hat * 2 * k * (2 * k + 1)
        odd = 1.5 * theta_hat * 2 * (k + 1) * (2 * k + 1)
    else:
        even = (k * math.pi) ** 2 * theta_hat
        odd = ((2 * k + 1) * math.pi) ** 2 * theta_hat / 4.0
    return even, odd


def star_spectrum(s: StarSpec, kind, K: int) -> StarSpectrum:
    """Even family k = 0..K (k = 0 is the consensus mode) and odd family
    k = 0..K-1, merged by rate."""
    if K < 1:
        raise ValueError("mode cutoff K must be >= 1")
    kind = ThetaKind(kind)
    ke = np.arange(0, K + 1, dtype=float)
    ko = np.arange(0, K, dtype=float)
    even, _ = _family_rates(kind, s.theta_hat, ke)
    _, odd = _family_rates(kind, s.theta_hat, ko)
    entries = [SpectrumEntry(float(m), 1, "even", 2 * i) for i, m in enumerate(even)]
    entries += [SpectrumEntry(float(m), s.p - 1, "odd", 2 * i + 1) for i, m in enumerate(odd)]
    entries.sort(key=lambda e: (e.mu, e.index))
    return StarSpectrum(kind, s.p, s.theta_hat, K, tuple(entries))


# -- robustness -----------------------------------------------------------


def robustness_closed(s: StarSpec, kind) -> float:
    kind = ThetaKind(kind)
    p, th = s.p, s.theta_hat
    if kind == ThetaKind.CONSTANT:
        return 0.5 * math.sqrt((3 * p - 2) / (3.0 * th))
    return math.sqrt((1.0 + (p - 2) * math.log(2.0)) / (3.0 * th))


def _h2_sum(spec: StarSpectrum) -> float:
    # vectorised form of sum over nonzero entries of degeneracy / (2 mu)
    K = spec.cutoff
    ke = np.arange(1, K + 1, dtype=float)
    ko = np.arange(0, K, dtype=float)
    even, _ = _family_rates(spec.kind, spec.theta_hat, ke)
    _, odd = _family_rates(spec.kind, spec.theta_hat, ko)
    # add smallest terms first
    s_even = math.fsum((0.5 / even)[::-1])
    s_odd = math.fsum((0.5 / odd)[::-1])
    return s_even + (spec.p - 1) * s_odd


def robustness_tail_bound(spec: StarSpectrum) -> float:
    """Upper bound on the omitted part of sum(1 / (2 mu)) beyond the cutoff.

    Each family obeys 1 / (2 mu_k) <= C (1/k - 1/(k+1)) or C / k**2 past the
    cutoff, so the tail is at most C / K per family.
    """
    K = spec.cutoff
    th = spec.theta_hat
    c = 1.0 / (12.0 * th) if spec.kind == ThetaKind.VARIABLE else 1.0 / (2.0 * math.pi**2 * th)
    return c / K + (spec.p - 1) * c / K


def robustness_from_spectrum(spec: StarSpectrum, tol: float | None = None) -> tuple[float, float]:
    """Truncated H = sqrt(sum 1 / (2 mu)) and an upper bound on its error."""
    h2 = _h2_sum(spec)
    h = math.sqrt(h2)
    err = math.sqrt(h2 + robustness_tail_bound(spec)) - h
    if tol is not None and err > tol:
        raise ValueError(f"cutoff K={spec.cutoff} leaves tail bound {err:.3e} > tol {tol:.3e}")
    return h, err


def robustness_table(p_values, theta_hat: float = 1.0) -> list[tuple[int, float, float, float]]:
    rows = []
    for p in p_values:
        s = StarSpec(int(p), theta_hat=theta_hat)
        hc = robustness_closed(s, ThetaKind.CONSTANT)
        hv = robustness_closed(s, ThetaKind.VARIABLE)
        rows.append((int(p), hc, hv, hc / hv))
    return rows


def variational_optimum(theta_hat: float = 1.0):
    """(mu, Theta, Phi) maximising the slowest rate at fixed mean diffusion."""
    if not theta_hat > 0:
        raise ValueError("theta_hat must be positive")

    def theta(xi):
        return theta_profile(xi, theta_hat)

    def phi(xi):
        return math.sqrt(3.0) * np.asarray(xi, dtype=float)

    return 3.0 * theta_hat, theta, phi


# -- series solution ------------------------------------------------------


def _dft_matrices(p: int):
    omega = np.exp(-2j * np.pi / p)
    alpha = np.arange(1, p + 1)
    beta = np.arange(p)
    fwd = omega ** np.outer(beta, alpha) / p  # [beta, alpha]
    inv = omega ** (-np.outer(alpha, beta))  # [alpha, beta]
    return fwd, inv


@dataclass(frozen=True)
class StarSolution:
    kind: ThetaKind
    p: int
    theta_hat: float
    cutoff: int
    rates_even: np.ndarray  # (K+1,)
    rates_odd: np.ndarray  # (K,)
    coef_even: np.ndarray  # (K+1,) complex, beta = 0 sector
    coef_odd: np.ndarray  # (p, K) complex, row beta (row 0 unused)

    @property
    def equilibrium(self) -> float:
        return float(self.coef_even[0].real)


def _shapes(kind: ThetaKind, xi: np.ndarray, K: int):
    even = np.empty((K + 1, len(xi)))
    odd = np.empty((K, len(xi)))
    for k in range(K + 1):
        if kind == ThetaKind.VARIABLE:
            even[k] = legendre_p(2 * k, xi)
        else:
            even[k] = np.cos(k * math.pi * xi)
    for k in range(K):
        if kind == ThetaKind.VARIABLE:
            odd[k] = legendre_p(2 * k + 1, xi)
        else:
            odd[k] = np.sin((2 * k + 1) * math.pi * xi / 2.0)
    return even, odd


def build_star_solution(s: StarSpec, kind, q0: InitialCondition, K: int = 40) -> StarSolution:
    kind = ThetaKind(kind)
    if q0.n != s.p:
        raise ValueError(f"initial condition has {q0.n} branches, star has {s.p}")
    if K < 1:
        raise ValueError("mode cutoff K must be >= 1")
    fwd, _ = _dft_matrices(s.p)
    grid = _XI_ANGLE if kind == ThetaKind.VARIABLE else _GRID
    sectors = q0.sample(grid) @ fwd.T  # (G, p): column beta

    def quad(v):
        if kind == ThetaKind.VARIABLE:
            return legendre_quad(v.real) + 1j * legendre_quad(v.imag)
        return simpson(v, x=_GRID)

    even_shape, odd_shape = _shapes(kind, grid, K)
    if kind == ThetaKind.VARIABLE:
        w_even = 4.0 * np.arange(K + 1) + 1.0
        w_odd = 4.0 * np.arange(K) + 3.0
    else:
        w_even = np.full(K + 1, 2.0)
        w_even[0] = 1.0
        w_odd = np.full(K, 2.0)
    coef_even = np.array([w_even[k] * quad(sectors[:, 0] * even_shape[k]) for k in range(K + 1)])
    coef_odd = np.zeros((s.p, K), dtype=complex)
    for b in range(1, s.p):
        coef_odd[b] = [w_odd[k] * quad(sectors[:, b] * odd_shape[k]) for k in range(K)]
    rates_even, _ = _family_rates(kind, s.theta_hat, np.arange(K + 1, dtype=float))
    _, rates_odd = _family_rates(kind, s.theta_hat, np.arange(K, dtype=float))
    return StarSolution(kind, s.p, s.theta_hat, K, rates_even, rates_odd, coef_even, coef_odd)


def evaluate_star(sol: StarSolution, xi, t: float = 0.0) -> np.ndarray:
    """Branch values, shape (p,) for scalar xi or (G, p)."""
    if t < 0:
        raise ValueError("time must be non-negative")
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    even_shape, odd_shape = _shapes(sol.kind, xi, sol.cutoff)
    sec = np.zeros((len(xi), sol.p), dtype=complex)
    sec[:, 0] = (sol.coef_even * np.exp(-sol.rates_even * t)) @ even_shape
    decay_odd = np.exp(-sol.rates_odd * t)
    for b in range(1, sol.p):
        sec[:, b] = (sol.coef_odd[b] * decay_odd) @ odd_shape
    _, inv = _dft_matrices(sol.p)
    out = (sec @ inv.T).real
    return out[0] if scalar else out


def evaluate_star_solution(s: StarSpec, kind, q0: InitialCondition, xi, t: float = 0.0, K: int = 40):
    return evaluate_star(build_star_solution(s, kind, q0, K), xi, t)


# -- output ---------------------------------------------------------------


def write_spectrum_csv(spec: StarSpectrum, path, limit: int | None = None) -> None:
    rows = spec.entries if limit is None else spec.entries[:limit]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "parity", "mu", "degeneracy"])
        for e in rows:
            w.writerow([e.index, e.parity, repr(e.mu), e.degeneracy])


def write_robustness_csv(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "H_const", "H_var", "ratio"])
        for p, hc, hv, r in rows:
            w.writerow([p, repr(hc), repr(hv), repr(r)])

