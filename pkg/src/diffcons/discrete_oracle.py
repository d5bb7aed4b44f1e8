"""Finite-graph checks of the continuum results.

Builds core-plus-tails graphs, integrates dX/dt = -L X with classical RK4,
extracts decay rates, and discretises -(Theta Phi')' = mu Phi on [0, 1].
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .graph_core import WeightedGraph
from .rate_solver import ThetaKind
from .star_analytics import StarSpec, star_discrete_weights

__all__ = [
    "FullGraphSpec",
    "SimulationTrace",
    "StepSizeError",
    "UnderflowError",
    "SingularDiscretizationError",
    "build_full_graph",
    "build_star_graph",
    "tail_vertex",
    "sparse_laplacian",
    "lambda_max_estimate",
    "simulate_consensus",
    "empirical_decay_rate",
    "sturm_liouville_smallest_eig",
    "random_initial_state",
    "write_trace_csv",
    "write_state_dump",
]

POWER_ITERS = 100
DEFAULT_DT_FACTOR = 0.5


class StepSizeError(ValueError):
    pass


class UnderflowError(ArithmeticError):
    pass


class SingularDiscretizationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FullGraphSpec:
    core: WeightedGraph
    q: int
    kind: ThetaKind = ThetaKind.CONSTANT
    theta_hat: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ThetaKind(self.kind))
        if self.q < 2:
            raise ValueError("tail length q must be >= 2")
        if not self.theta_hat > 0:
            raise ValueError("theta_hat must be positive")


def tail_vertex(n_core: int, q: int, alpha: int, j: int) -> int:
    """Index of vertex j (0 = core vertex) on the tail of core vertex alpha."""
    return alpha if j == 0 else n_core + alpha * q + (j - 1)


def build_full_graph(spec: FullGraphSpec) -> WeightedGraph:
    """Core vertices keep indices 0..N-1; tail vertex (alpha, j) follows."""
    n, q, th = spec.core.n, spec.q, spec.theta_hat
    j = np.arange(1, q + 1, dtype=float)
    if spec.kind == ThetaKind.CONSTANT:
        tail_w = np.full(q, q * q * th)
        core_scale = q * th
    else:
        tail_w = 1.5 * q * q * th * (1.0 - j * j / (q * q))
        tail_w[-1] = 0.0  # exact zero, not round-off
        core_scale = 1.5 * q * th
    edges = [(i, k, core_scale * w) for i, k, w in spec.core.edges]
    for a in range(n):
        for jj in range(1, q + 1):
            edges.append((tail_vertex(n, q, a, jj - 1), tail_vertex(n, q, a, jj), float(tail_w[jj - 1])))
    return WeightedGraph(n * (q + 1), tuple(edges))


def build_star_graph(s: StarSpec, kind=ThetaKind.VARIABLE) -> WeightedGraph:
    """Centre is vertex 0; vertex 1 + alpha q + (j - 1) is step j on branch alpha.

    Variable kind uses the optimal profile; constant kind spreads the budget
    evenly, D / (p q) = q^2 theta_hat per edge.
    """
    if ThetaKind(kind) == ThetaKind.VARIABLE:
        w = star_discrete_weights(s)
    else:
        s._require_discrete()
        w = np.full(s.q, s.D / (s.p * s.q))
    p, q = s.p, s.q
    edges = []
    for a in range(p):
        prev = 0
        for j in range(1, q + 1):
            v = 1 + a * q + (j - 1)
            edges.append((prev, v, float(w[j - 1])))
            prev = v
    return WeightedGraph(1 + p * q, tuple(edges))


def sparse_laplacian(g: WeightedGraph) -> sp.csr_matrix:
    if g.m == 0:
        return sp.csr_matrix((g.n, g.n))
    e = np.array([(i, j) for i, j, _ in g.edges], dtype=int)
    w = np.array([w for _, _, w in g.edges])
    rows = np.concatenate([e[:, 0], e[:, 1], e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0], e[:, 0], e[:, 1]])
    vals = np.concatenate([-w, -w, w, w])
    return sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))


def lambda_max_estimate(lap, iters: int = POWER_ITERS, seed: int = 0) -> float:
    """Power iteration; returns a Rayleigh quotient (a lower bound)."""
    n = lap.shape[0]
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = lap @ v
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return lam


@dataclass
class SimulationTrace:
    times: np.ndarray
    states: np.ndarray  # (samples, dim)
    disagreement: np.ndarray
    dt: float
    lambda_max: float
    seed: int | None = None
    meta: dict = field(default_factory=dict)


def _disagreement(x: np.ndarray) -> float:
    return float(np.linalg.norm(x - x.mean()))


def simulate_consensus(g, x0, T: float, dt: float | None = None, n_samples: int = 200, seed=None):
    """Classical RK4 for dX/dt = -L X, keeping about ``n_samples`` states.

    The step must satisfy dt < 1 / lambda_max, where lambda_max comes from
    100 power iterations; the default is half that bound.
    """
    lap = g if sp.issparse(g) else sparse_laplacian(g)
    x = np.array(x0, dtype=float)
    if x.shape != (lap.shape[0],):
        raise ValueError(f"initial state has shape {x.shape}, expected ({lap.shape[0]},)")
    if not T > 0:
        raise ValueError("horizon T must be positive")
    lam_max = lambda_max_estimate(lap)
    bound = 1.0 / lam_max if lam_max > 0 else math.inf
    if dt is None:
        dt = DEFAULT_DT_FACTOR * bound if math.isfinite(bound) else T / 100
    if not 0 < dt < bound:
        raise StepSizeError(f"step {dt:.3e} violates dt < 1/lambda_max = {bound:.3e}")
    steps = int(math.ceil(T / dt - 1e-9))
    every = max(1, steps // max(1, n_samples))
    times = [0.0]
    states = [x.copy()]
    half = 0.5 * dt
    for s in range(1, steps + 1):
        k1 = -(lap @ x)
        k2 = -(lap @ (x + half * k1))
        k3 = -(lap @ (x + half * k2))
        k4 = -(lap @ (x + dt * k3))
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if s % every == 0 or s == steps:
            times.append(s * dt)
            states.append(x.copy())
    st = np.array(states)
    dis = np.linalg.norm(st - st.mean(axis=1, keepdims=True), axis=1)
    return SimulationTrace(np.array(times), st, dis, dt, lam_max, seed, {"steps": steps})


def empirical_decay_rate(tr: SimulationTrace, window: tuple[float, float]) -> float:
    """Negated least-squares slope of log(disagreement) over the window."""
    lo, hi = window
    sel = (tr.times >= lo) & (tr.times <= hi)
    if sel.sum() < 2:
        raise ValueError(f"fewer than two samples inside window [{lo}, {hi}]")
    d = tr.disagreement[sel]
    if np.any(d <= 1e-12):
        raise UnderflowError("disagreement reached the noise floor inside the window")
    slope = np.polyfit(tr.times[sel], np.log(d), 1)[0]
    return float(-slope)


def random_initial_state(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, n)


def _half_point_theta(theta, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Node values on xi_i = i/m and half-point values on (i + 1/2)/m.

    Callables are sampled at the midpoints; sampled arrays use the
    arithmetic mean of neighbours (a harmonic mean would cut the last cell
    loose when Theta(1) = 0).
    """
    if callable(theta):
        mid = (np.arange(m) + 0.5) / m
        half = np.asarray(theta(mid), dtype=float) * np.ones(m)
        nodes = np.asarray(theta(np.linspace(0, 1, m + 1)), dtype=float) * np.ones(m + 1)
        return nodes, half
    nodes = np.asarray(theta, dtype=float)
    if nodes.shape != (m + 1,):
        raise ValueError(f"expected {m + 1} samples of Theta, got {nodes.shape}")
    return nodes, 0.5 * (nodes[:-1] + nodes[1:])


def sturm_liouville_smallest_eig(theta, m: int | None = None, bc: str = "dirichlet-neumann") -> float:
    """Smallest eigenvalue of -(Theta Phi')' = mu Phi on a uniform grid.

    ``theta`` is either m + 1 samples on xi_i = i / m or a callable.
    ``bc`` "dirichlet-neumann" imposes Phi(0) = 0 and zero flux at 1;
    "neumann-neumann" has zero flux at both ends and returns the smallest
    nonzero eigenvalue.  Cell-centred fluxes keep the matrix symmetric and
    the end cells carry half mass, which gives O(h^2) accuracy.
    """
    if m is None:
        if callable(theta):
            raise ValueError("grid size m required for a callable Theta")
        m = len(theta) - 1
    if m < 2:
        raise ValueError("need at least two cells")
    nodes, half = _half_point_theta(theta, m)
    if np.any(nodes < 0) or np.any(half < 0):
        raise ValueError("Theta must be non-negative")
    if np.any(half <= 0):
        raise SingularDiscretizationError("Theta vanishes on a cell; the operator decouples")
    h = 1.0 / m
    # stiffness K (times h) on nodes 0..m, lumped mass M
    diag = np.zeros(m + 1)
    diag[:-1] += half
    diag[1:] += half
    off = -half
    mass = np.full(m + 1, h)
    mass[0] = mass[-1] = h / 2
    diag /= h
    off = off / h
    if bc == "dirichlet-neumann":
        diag, off, mass = diag[1:], off[1:], mass[1:]
        index = 0
    elif bc == "neumann-neumann":
        index = 1
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    s = 1.0 / np.sqrt(mass)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    w = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(index, index))
    return float(w[0])


def write_trace_csv(tr: SimulationTrace, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "disagreement"])
        for t, d in zip(tr.times, tr.disagreement):
            w.writerow([repr(float(t)), repr(float(d))])


def write_state_dump(tr: SimulationTrace, path) -> Path:
    """Little-endian float64, row-major (samples x dim), plus a JSON sidecar."""
    path = Path(path)
    np.ascontiguousarray(tr.states, dtype="<f8").tofile(path)
    sidecar = path.with_name(path.name + ".json")
    meta = {
        "dtype": "float64",
        "byteorder": "little",
        "order": "row-major",
        "rows": int(tr.states.shape[0]),
        "cols": int(tr.states.shape[1]),
        "times": [float(t) for t in tr.times],
        "dt": tr.dt,
        "seed": tr.seed,
    }
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return sidecar
