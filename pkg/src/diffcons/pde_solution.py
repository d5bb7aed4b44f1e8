"""Modal series solutions of the continuum consensus problem.

Each core Laplacian eigenvector eta_k carries a 1-D problem on [0, 1] with a
Robin condition at the core (slope = lambda_k * value) and zero flux at the
free end.  Mode shapes:

* constant Theta: cos(x (1 - xi)), mu = theta_hat x**2
* variable Theta: P_nu(xi),        mu = 1.5 theta_hat nu (nu + 1)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .graph_core import WeightedGraph, build_laplacian
from .rate_solver import ThetaKind, solve_mu_constant, solve_mu_variable
from .spectral import DisconnectedGraphError, SpectralDecomposition, eig_sym
from .special_fn import legendre_p_nu

__all__ = [
    "InitialCondition",
    "ModeTerm",
    "DiffusionSolution",
    "consensus_value",
    "build_solution",
    "build_solution_constant",
    "build_solution_variable",
    "evaluate",
    "legendre_quad",
    "mode_shape",
    "solution_to_dict",
    "write_solution_json",
]

N_QUAD = 1001
DEFAULT_M = 40
_GRID = np.linspace(0.0, 1.0, N_QUAD)
# Legendre projections use xi = cos(theta): high-degree P_nu vary on a
# 1/nu**2 scale near xi = 1, which a uniform xi grid cannot resolve.
# Gauss-Legendre nodes in theta; Simpson in theta leaves ~1e-9 on P_2n.
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(N_QUAD)
_ANGLE = 0.25 * np.pi * (_NODES + 1.0)
_XI_ANGLE = np.clip(np.cos(_ANGLE), 0.0, 1.0)
_JACOBIAN = 0.25 * np.pi * _WEIGHTS * np.sin(_ANGLE)


def legendre_quad(values) -> float:
    """Integral over xi in [0, 1] of values sampled at ``_XI_ANGLE``."""
    return float(np.dot(np.asarray(values), _JACOBIAN))


@dataclass(frozen=True)
class InitialCondition:
    """Per-branch initial profile; ``sampler(xi)`` maps shape (G,) to (G, N)."""

    sampler: Callable[[np.ndarray], np.ndarray]
    n: int

    def sample(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        vals = np.asarray(self.sampler(xi), dtype=float)
        if vals.ndim == 1 and self.n == 1:
            vals = vals[:, None]
        if vals.shape != (len(xi), self.n):
            raise ValueError(f"sampler returned shape {vals.shape}, expected {(len(xi), self.n)}")
        return vals

    @classmethod
    def from_functions(cls, funcs) -> "InitialCondition":
        funcs = list(funcs)
        return cls(lambda xi: np.column_stack([np.broadcast_to(f(xi), xi.shape) for f in funcs]), len(funcs))

    @classmethod
    def from_grid(cls, xi_grid, values) -> "InitialCondition":
        """Wrap sampled data (G, N) by linear interpolation in xi."""
        xg = np.asarray(xi_grid, dtype=float)
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        cols = vals.shape[1]
        return cls(lambda xi: np.column_stack([np.interp(xi, xg, vals[:, c]) for c in range(cols)]), cols)

    @classmethod
    def constant(cls, value: float, n: int) -> "InitialCondition":
        return cls(lambda xi: np.full((len(xi), n), float(value)), n)


def consensus_value(q0: InitialCondition, n: int | None = None) -> float:
    n = q0.n if n is None else n
    vals = q0.sample(_GRID)
    return float(simpson(vals.sum(axis=1), x=_GRID) / n)


@dataclass(frozen=True)
class ModeTerm:
    k: int  # 1-based branch index
    n: int
    mu: float
    root: float
    coefficient: float


@dataclass(frozen=True)
class DiffusionSolution:
    kind: ThetaKind
    theta_hat: float
    spectrum: SpectralDecomposition
    modes: tuple[ModeTerm, ...]
    consensus: float
    truncation: int
    omitted_mu: float  # slowest rate left out of the series

    def branch_modes(self, k: int) -> list[ModeTerm]:
        return [m for m in self.modes if m.k == k]


def mode_shape(kind, root: float, xi):
    xi = np.asarray(xi, dtype=float)
    if ThetaKind(kind) == ThetaKind.CONSTANT:
        return np.cos(root * (1.0 - xi))
    return legendre_p_nu(root, xi)


def _core_spectrum(core: WeightedGraph) -> SpectralDecomposition:
    if core.n < 2 or core.m == 0:
        raise ValueError("lattice core needs at least one edge")
    spec = eig_sym(build_laplacian(core))
    if spec.values[1] < 1e-9 * max(1.0, spec.values[-1]):
        raise DisconnectedGraphError("lattice core is disconnected")
    # fix the consensus vector to the positive constant vector exactly
    v = spec.vectors.copy()
    v[:, 0] = 1.0 / math.sqrt(core.n)
    return SpectralDecomposition(spec.values.copy(), v)


def _projected(core_spec: SpectralDecomposition, q0: InitialCondition, grid=_GRID) -> np.ndarray:
    if q0.n != core_spec.n:
        raise ValueError(f"initial condition has {q0.n} branches, core has {core_spec.n}")
    return q0.sample(grid) @ core_spec.vectors  # column k: eta_k . Q(xi, 0)


def build_solution_constant(core, q0, theta_hat: float = 1.0, m: int = DEFAULT_M) -> DiffusionSolution:
    if m < 1:
        raise ValueError("truncation must be >= 1")
    spec = _core_spectrum(core)
    proj = _projected(spec, q0)
    modes = []
    f = proj[:, 0]
    for n in range(m + 1):
        x = n * math.pi
        phi = np.cos(x * (1.0 - _GRID))
        norm = 1.0 if n == 0 else 0.5
        modes.append(ModeTerm(1, n, theta_hat * x * x, x, float(simpson(f * phi, x=_GRID) / norm)))
    omitted = theta_hat * ((m + 1) * math.pi) ** 2
    for k in range(1, spec.n):
        lam = float(spec.values[k])
        f = proj[:, k]
        for n in range(1, m + 1):
            mode = solve_mu_constant(lam, theta_hat, n, k + 1)
            x = mode.root
            phi = np.cos(x * (1.0 - _GRID))
            norm = 0.5 * (1.0 + math.sin(x) ** 2 / lam)
            modes.append(ModeTerm(k + 1, n, mode.mu, x, float(simpson(f * phi, x=_GRID) / norm)))
        omitted = min(omitted, solve_mu_constant(lam, theta_hat, m + 1).mu)
    c = modes[0].coefficient / math.sqrt(spec.n)
    return DiffusionSolution(ThetaKind.CONSTANT, theta_hat, spec, tuple(modes), c, m, omitted)


def build_solution_variable(core, q0, theta_hat: float = 1.0, m: int = DEFAULT_M) -> DiffusionSolution:
    if m < 1:
        raise ValueError("truncation must be >= 1")
    spec = _core_spectrum(core)
    proj = _projected(spec, q0, _XI_ANGLE)
    modes = []
    f = proj[:, 0]
    for n in range(m + 1):
        nu = 2.0 * n
        phi = legendre_p_nu(nu, _XI_ANGLE)
        coef = (4 * n + 1) * legendre_quad(f * phi)
        modes.append(ModeTerm(1, n, 1.5 * theta_hat * nu * (nu + 1.0), nu, coef))
    nu_next = 2.0 * (m + 1)
    omitted = 1.5 * theta_hat * nu_next * (nu_next + 1.0)
    for k in range(1, spec.n):
        lam = float(spec.values[k])
        f = proj[:, k]
        for n in range(1, m + 1):
            mode = solve_mu_variable(lam, theta_hat, n, k + 1)
            phi = legendre_p_nu(mode.root, _XI_ANGLE)
            norm = legendre_quad(phi * phi)
            modes.append(ModeTerm(k + 1, n, mode.mu, mode.root, legendre_quad(f * phi) / norm))
        omitted = min(omitted, solve_mu_variable(lam, theta_hat, m + 1).mu)
    c = consensus_value(q0)
    return DiffusionSolution(ThetaKind.VARIABLE, theta_hat, spec, tuple(modes), c, m, omitted)


def build_solution(kind, core, q0, theta_hat: float = 1.0, m: int = DEFAULT_M) -> DiffusionSolution:
    if ThetaKind(kind) == ThetaKind.CONSTANT:
        return build_solution_constant(core, q0, theta_hat, m)
    return build_solution_variable(core, q0, theta_hat, m)


def evaluate(sol: DiffusionSolution, xi, t: float = 0.0) -> np.ndarray:
    """Q(xi, t); shape (N,) for scalar xi, (G, N) for an array."""
    if t < 0:
        raise ValueError("time must be non-negative")
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi < -1e-12) or np.any(xi > 1 + 1e-12):
        raise ValueError("xi outside [0, 1]")
    n_core = sol.spectrum.n
    branch = np.zeros((len(xi), n_core))
    for m in sol.modes:
        if m.coefficient == 0.0:
            continue
        branch[:, m.k - 1] += m.coefficient * math.exp(-m.mu * t) * mode_shape(sol.kind, m.root, xi)
    out = branch @ sol.spectrum.vectors.T
    return out[0] if scalar else out


def solution_to_dict(sol: DiffusionSolution) -> dict:
    return {
        "kind": sol.kind.value,
        "theta_hat": sol.theta_hat,
        "truncation": sol.truncation,
        "omitted_mu": sol.omitted_mu,
        "consensus": sol.consensus,
        "spectrum": {
            "values": sol.spectrum.values.tolist(),
            "vectors": sol.spectrum.vectors.tolist(),
        },
        "modes": [
            {"k": m.k, "n": m.n, "mu": m.mu, "root": m.root, "coefficient": m.coefficient}
            for m in sol.modes
        ],
    }


def write_solution_json(sol: DiffusionSolution, path) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(sol), indent=2) + "\n")
