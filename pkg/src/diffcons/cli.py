"""Command-line front end: tables, rate curves, star data, simulations."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import __version__
from .discrete_oracle import (
    FullGraphSpec,
    build_full_graph,
    build_star_graph,
    empirical_decay_rate,
    random_initial_state,
    simulate_consensus,
    sturm_liouville_smallest_eig,
    write_state_dump,
)
from .graph_core import (
    CoreTopology,
    Topology,
    budget_for,
    build_laplacian,
    optimal_core_weights,
    read_graph,
)
from .rate_solver import ThetaKind, rate_curve, solve_mu_constant, solve_mu_variable, table_rates
from .spectral import eig_sym, lambda2
from .star_analytics import (
    StarSpec,
    robustness_closed,
    robustness_from_spectrum,
    star_lambda2_discrete,
    star_spectrum,
    variational_optimum,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

TABLE_N4_TOPOLOGIES = ("path", "star", "lollipop", "cycle", "paw", "complete")


class ConfigError(ValueError):
    pass


# -- helpers --------------------------------------------------------------


def parse_int_list(text: str) -> list[int]:
    """"5-14", "2,3,5,10" or "7"."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ConfigError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError(f"no integers in {text!r}")
    return out


def _budget_rule(text: str):
    if text in ("vertices", "edges"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"--budget must be vertices, edges or a number, got {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise ConfigError("--budget must be positive")
    return value


def _fmt(v, rounding: bool):
    if isinstance(v, float):
        return f"{v:.4f}" if rounding else repr(v)
    return str(v)


def _round_obj(v, rounding: bool):
    if isinstance(v, float) and rounding:
        return round(v, 4)
    if isinstance(v, dict):
        return {k: _round_obj(x, rounding) for k, x in v.items()}
    if isinstance(v, list):
        return [_round_obj(x, rounding) for x in v]
    return v


def emit(args, columns: list[str], rows: list[dict], extra: dict | None = None) -> None:
    rounding = getattr(args, "paper_rounding", False)
    if args.format == "json":
        doc = {"config": config_echo(args), "results": _round_obj(rows, rounding)}
        if extra:
            doc.update(_round_obj(extra, rounding))
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c], rounding) for c in columns])
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, newline="")


def config_echo(args) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _weights_label(g) -> str:
    return ";".join(f"{i}-{j}:{w!r}" for i, j, w in g.edges)


# -- commands -------------------------------------------------------------


def cmd_table_n4(args) -> None:
    rules = ["vertices", "edges"] if args.budget is None else [_budget_rule(args.budget)]
    rows = []
    for name in TABLE_N4_TOPOLOGIES:
        topo = CoreTopology(name, 4)
        for rule in rules:
            d = budget_for(topo, rule)
            g = optimal_core_weights(topo, d)
            lam = lambda2(g)
            rows.append(
                {
                    "topology": name,
                    "budget": rule if isinstance(rule, str) else "explicit",
                    "D_L": d,
                    "lambda2": lam,
                    "mu_const": solve_mu_constant(lam, args.theta).mu,
                    "mu_var": solve_mu_variable(lam, args.theta).mu,
                    "weights": _weights_label(g),
                }
            )
    emit(args, ["topology", "budget", "D_L", "lambda2", "mu_const", "mu_var", "weights"], rows)


def cmd_table_rates(args) -> None:
    topologies = ["complete", "path", "cycle"] if args.topology in (None, "all") else [args.topology]
    rule = _budget_rule(args.budget or "vertices")
    ns = parse_int_list(args.n or "5-14")
    rows = []
    for name in topologies:
        for r in table_rates(name, ns, rule, args.theta):
            rows.append(
                {
                    "topology": r.topology,
                    "N": r.n,
                    "D_L": r.budget,
                    "lambda2": r.lambda2,
                    "mu_const": r.mu_constant,
                    "mu_var": r.mu_variable,
                    "ratio": r.ratio,
                }
            )
    emit(args, ["topology", "N", "D_L", "lambda2", "mu_const", "mu_var", "ratio"], rows)


def cmd_mu_curve(args) -> None:
    if not (0 < args.lambda_min < args.lambda_max):
        raise ConfigError("need 0 < --lambda-min < --lambda-max")
    if args.points < 2:
        raise ConfigError("--points must be >= 2")
    grid = np.geomspace(args.lambda_min, args.lambda_max, args.points)
    rows = [
        {"lambda": lam, "mu_const": mc, "mu_var": mv, "ratio": mv / mc}
        for lam, mc, mv in rate_curve(grid, args.theta)
    ]
    emit(args, ["lambda", "mu_const", "mu_var", "ratio"], rows)


def cmd_star(args) -> None:
    ps = parse_int_list(args.p)
    if args.what == "ratio":
        rows = []
        for p in ps:
            s = StarSpec(p, theta_hat=args.theta)
            hc = robustness_closed(s, ThetaKind.CONSTANT)
            hv = robustness_closed(s, ThetaKind.VARIABLE)
            rows.append({"p": p, "H_const": hc, "H_var": hv, "ratio": hc / hv})
        emit(args, ["p", "H_const", "H_var", "ratio"], rows)
    elif args.what == "robustness":
        k = args.modes or 100_000
        rows = []
        for p in ps:
            s = StarSpec(p, theta_hat=args.theta)
            for kind in ThetaKind:
                h, err = robustness_from_spectrum(star_spectrum(s, kind, k))
                rows.append(
                    {
                        "p": p,
                        "kind": kind.value,
                        "K": k,
                        "H_truncated": h,
                        "tail_bound": err,
                        "H_closed": robustness_closed(s, kind),
                    }
                )
        emit(args, ["p", "kind", "K", "H_truncated", "tail_bound", "H_closed"], rows)
    elif args.what == "spectrum":
        if len(ps) != 1:
            raise ConfigError("star spectrum needs a single --p")
        s = StarSpec(ps[0], theta_hat=args.theta)
        k = args.modes or 10
        rows = []
        for kind in ThetaKind:
            for e in star_spectrum(s, kind, k).entries:
                rows.append(
                    {"kind": kind.value, "index": e.index, "parity": e.parity, "mu": e.mu, "degeneracy": e.degeneracy}
                )
        emit(args, ["kind", "index", "parity", "mu", "degeneracy"], rows)
    else:  # lambda2: discrete closed form against the continuum limit
        qs = parse_int_list(args.q or "50,100,200")
        rows = []
        for p in ps:
            for q in qs:
                s = StarSpec.from_theta(p, q, args.theta)
                lam = star_lambda2_discrete(s)
                rows.append({"p": p, "q": q, "D": s.D, "lambda2": lam, "error": abs(lam - 3 * args.theta)})
        emit(args, ["p", "q", "D", "lambda2", "error"], rows)


def _core_for(args):
    if args.graph:
        return read_graph(args.graph)
    if args.topology in (None, "star-tails"):
        return None
    topo = CoreTopology(args.topology, args.n or 4)
    return optimal_core_weights(topo, budget_for(topo, _budget_rule(args.budget or "vertices")))


def cmd_simulate(args) -> None:
    q = int(args.q or 100)
    core = _core_for(args)
    kind = ThetaKind(args.kind)
    if core is None:
        s = StarSpec.from_theta(int(args.p), q, args.theta)
        g = build_star_graph(s, kind)
        if kind == ThetaKind.VARIABLE:
            reference = star_lambda2_discrete(s)
            reference_label = "lambda2_closed_form"
        else:
            reference = math.pi**2 * args.theta / 4.0
            reference_label = "mu1_continuum"
    else:
        g = build_full_graph(FullGraphSpec(core, q, kind, args.theta))
        lam_core = lambda2(core)
        solver = solve_mu_constant if kind == ThetaKind.CONSTANT else solve_mu_variable
        reference = solver(lam_core, args.theta).mu
        reference_label = "mu21_continuum"
    x0 = random_initial_state(g.n, args.seed)
    horizon = 6.5 / reference
    tr = simulate_consensus(g, x0, T=horizon, n_samples=args.samples, seed=args.seed)
    window = (2.0 / reference, 6.0 / reference)
    rate = empirical_decay_rate(tr, window)
    summary = {
        "vertices": g.n,
        "dt": tr.dt,
        "lambda_max_estimate": tr.lambda_max,
        "window": list(window),
        "empirical_rate": rate,
        reference_label: reference,
        "relative_difference": rate / reference - 1.0,
    }
    if g.n <= 2000:
        vals = eig_sym(build_laplacian(g)).values
        summary["lambda2_numeric"] = float(vals[1])
    if args.dump:
        write_state_dump(tr, args.dump)
    rows = [{"t": float(t), "disagreement": float(d)} for t, d in zip(tr.times, tr.disagreement)]
    emit(args, ["t", "disagreement"], rows, {"summary": summary})
    sys.stderr.write(json.dumps(_round_obj(summary, args.paper_rounding)) + "\n")


def _random_profile(rng, m: int, theta_hat: float) -> np.ndarray:
    """Smooth positive profile with spatial mean theta_hat."""
    xs = np.linspace(0.0, 1.0, m + 1)
    k = np.arange(1, 6)
    a = rng.normal(0.0, 0.6, size=5) / k
    g = np.exp(np.cos(np.pi * np.outer(xs, k)) @ a)
    return theta_hat * g / simpson(g, x=xs)


def cmd_sturm_check(args) -> None:
    m = args.m
    th = args.theta
    mu_opt, theta_opt, _ = variational_optimum(th)
    xs = np.linspace(0.0, 1.0, m + 1)
    best = sturm_liouville_smallest_eig(theta_opt(xs))
    rows = [
        {"profile": "optimal", "mu": best, "mu_closed": mu_opt, "below_optimal": True},
        {
            "profile": "constant",
            "mu": sturm_liouville_smallest_eig(np.full(m + 1, th)),
            "mu_closed": math.pi**2 * th / 4,
            "below_optimal": None,
        },
    ]
    rng = np.random.default_rng(args.seed)
    for i in range(args.profiles):
        rows.append(
            {
                "profile": f"random-{i}",
                "mu": sturm_liouville_smallest_eig(_random_profile(rng, m, th)),
                "mu_closed": float("nan"),
                "below_optimal": None,
            }
        )
    for r in rows[1:]:
        r["below_optimal"] = bool(r["mu"] <= best)
    emit(args, ["profile", "mu", "mu_closed", "below_optimal"], rows)


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=float, default=1.0, help="mean diffusion parameter")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--paper-rounding", action="store_true", help="render values to 4 decimals")
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="diffcons", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table-n4", parents=[common], help="optimal rates of every connected 4-vertex core")
    p.add_argument("--budget", default=None, help="vertices | edges | <float> (default: both rules)")
    p.set_defaults(func=cmd_table_n4)

    p = sub.add_parser("table-rates", parents=[common], help="rates for complete/path/cycle cores")
    p.add_argument("--topology", choices=("all", "complete", "path", "cycle"), default="all")
    p.add_argument("--n", default="5-14", help="vertex counts, e.g. 5-14 or 5,8,13")
    p.add_argument("--budget", default="vertices", help="vertices | edges | <float>")
    p.set_defaults(func=cmd_table_rates)

    p = sub.add_parser("mu-curve", parents=[common], help="slowest rates against lambda_2")
    p.add_argument("--lambda-min", type=float, default=1e-2)
    p.add_argument("--lambda-max", type=float, default=1e2)
    p.add_argument("--points", type=int, default=81)
    p.set_defaults(func=cmd_mu_curve)

    p = sub.add_parser("star", parents=[common], help="symmetric star spectra and robustness")
    p.add_argument("--what", choices=("ratio", "robustness", "spectrum", "lambda2"), default="ratio")
    p.add_argument("--p", default="1-20", help="branch counts")
    p.add_argument("--q", default=None, help="edges per branch (lambda2 view)")
    p.add_argument("--modes", type=int, default=None, help="mode cutoff K")
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("simulate", parents=[common], help="RK4 consensus run on a core-plus-tails graph")
    p.add_argument(
        "--topology",
        choices=("star-tails",) + tuple(t.value for t in Topology if t != Topology.CUSTOM),
        default="star-tails",
        help="star-tails: symmetric star with optimal weights; otherwise a core with tails",
    )
    p.add_argument("--graph", default=None, help="custom core in 'n m' / 'i j w' format")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--budget", default=None)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--q", type=int, default=100)
    p.add_argument("--kind", choices=[k.value for k in ThetaKind], default="variable")
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--dump", default=None, help="binary state dump path (JSON sidecar alongside)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sturm-check", parents=[common], help="variational optimality of the diffusion profile")
    p.add_argument("--m", type=int, default=400)
    p.add_argument("--profiles", type=int, default=20)
    p.set_defaults(func=cmd_sturm_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        args.func(args)
    except OSError as exc:
        sys.stderr.write(f"diffcons: I/O error: {exc}\n")
        return EXIT_IO
    except ArithmeticError as exc:
        sys.stderr.write(f"diffcons: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"diffcons: bad configuration: {exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
