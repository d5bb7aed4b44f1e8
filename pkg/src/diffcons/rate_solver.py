"""Decay rates of the continuum consensus modes.

Constant diffusion: x sin x - lambda cos x = 0 on ((n-1) pi, (n-1/2) pi),
mu = theta_hat * x**2.

Variable diffusion, Theta(xi) = 1.5 theta_hat (1 - xi**2):
P'_nu(0) - lambda P_nu(0) = 0 on (2(n-1), 2n-1), mu = 1.5 theta_hat nu (nu+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .graph_core import CoreTopology, Topology, budget_for, lambda2_closed_form
from .special_fn import legendre_p_nu, legendre_p_nu_deriv

__all__ = [
    "ThetaKind",
    "DecayMode",
    "solve_mu_constant",
    "solve_mu_variable",
    "rate_curve",
    "table_rates",
    "RateRow",
    "theta_profile",
]

XTOL = 1e-15


class ThetaKind(str, Enum):
    CONSTANT = "constant"
    VARIABLE = "variable"


@dataclass(frozen=True)
class DecayMode:
    k: int
    n: int
    kind: ThetaKind
    mu: float
    root: float  # x for constant, nu for variable


def theta_profile(xi, theta_hat: float = 1.0):
    """Variable diffusion profile with spatial mean theta_hat."""
    xi = np.asarray(xi, dtype=float)
    return 1.5 * theta_hat * (1.0 - xi * xi)


def _check(lam: float, theta_hat: float, n: int):
    if not (lam >= 0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    if not theta_hat > 0:
        raise ValueError("theta_hat must be positive")
    if n < 1 or int(n) != n:
        raise ValueError("overtone index must be an integer >= 1")


def constant_residual(x: float, lam: float) -> float:
    return x * math.sin(x) - lam * math.cos(x)


def solve_mu_constant(lam: float, theta_hat: float = 1.0, n: int = 1, k: int = 2) -> DecayMode:
    _check(lam, theta_hat, n)
    if lam == 0.0:
        x = n * math.pi
        return DecayMode(1, n, ThetaKind.CONSTANT, theta_hat * x * x, x)
    # g = -lambda cos((n-1) pi) at the left end and (n-1/2) pi sin((n-1/2) pi)
    # at the right end: opposite signs for every lambda > 0, no cot poles
    lo = (n - 1) * math.pi
    hi = (n - 0.5) * math.pi
    x = brentq(constant_residual, lo, hi, args=(lam,), xtol=XTOL, rtol=4 * np.finfo(float).eps)
    return DecayMode(k, n, ThetaKind.CONSTANT, theta_hat * x * x, x)


def variable_residual(nu: float, lam: float) -> float:
    return legendre_p_nu_deriv(nu, 0.0) - lam * legendre_p_nu(nu, 0.0)


def solve_mu_variable(lam: float, theta_hat: float = 1.0, n: int = 1, k: int = 2) -> DecayMode:
    _check(lam, theta_hat, n)
    if lam == 0.0:
        nu = 2.0 * (n - 1)
        return DecayMode(1, n, ThetaKind.VARIABLE, 1.5 * theta_hat * nu * (nu + 1.0), nu)
    lo = 2.0 * (n - 1)
    hi = 2.0 * n - 1.0
    if n == 1:
        lo = 0.0  # f(0) = -lambda < 0
    f_lo = variable_residual(lo, lam)
    f_hi = variable_residual(hi, lam)
    if f_lo * f_hi > 0:
        raise ArithmeticError(
            f"no sign change for nu on [{lo}, {hi}] at lambda={lam}: f={f_lo:.3e}, {f_hi:.3e}"
        )
    nu = brentq(variable_residual, lo, hi, args=(lam,), xtol=XTOL, rtol=4 * np.finfo(float).eps)
    return DecayMode(k, n, ThetaKind.VARIABLE, 1.5 * theta_hat * nu * (nu + 1.0), nu)


def solve_mu(kind, lam: float, theta_hat: float = 1.0, n: int = 1, k: int = 2) -> DecayMode:
    if ThetaKind(kind) == ThetaKind.CONSTANT:
        return solve_mu_constant(lam, theta_hat, n, k)
    return solve_mu_variable(lam, theta_hat, n, k)


def rate_curve(lambda_grid, theta_hat: float = 1.0) -> list[tuple[float, float, float]]:
    """(lambda, mu/theta_hat, mu'/theta_hat) for the slowest non-consensus mode."""
    out = []
    for lam in lambda_grid:
        lam = float(lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise ValueError(f"grid values must be positive and finite, got {lam}")
        mc = solve_mu_constant(lam, theta_hat).mu / theta_hat
        mv = solve_mu_variable(lam, theta_hat).mu / theta_hat
        out.append((lam, mc, mv))
    return out


@dataclass(frozen=True)
class RateRow:
    topology: str
    n: int
    budget: float
    lambda2: float
    mu_constant: float
    mu_variable: float

    @property
    def ratio(self) -> float:
        return self.mu_variable / self.mu_constant


def table_rates(topology, n_range, budget_rule="vertices", theta_hat: float = 1.0) -> list[RateRow]:
    kind = Topology(topology)
    if kind not in (Topology.COMPLETE, Topology.PATH, Topology.CYCLE):
        raise ValueError(f"rate tables cover complete, path and cycle, not {kind.value}")
    rows = []
    for n in n_range:
        t = CoreTopology(kind, int(n))
        d = budget_for(t, budget_rule)
        lam = lambda2_closed_form(t, d)
        rows.append(
            RateRow(
                kind.value,
                int(n),
                d,
                lam,
                solve_mu_constant(lam, theta_hat).mu,
                solve_mu_variable(lam, theta_hat).mu,
            )
        )
    return rows
