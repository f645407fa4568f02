"""Command line front end.

Subcommands: convergence, effort, shuffle, quadcheck, localerr.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


class _ConfigProblem(Exception):
    pass


def _load_spec(args):
    from .config import ConfigError, load_config

    if not args.config:
        raise _ConfigProblem("--config PATH is required")
    try:
        spec = load_config(args.config)
    except FileNotFoundError:
        raise _ConfigProblem(f"config file not found: {args.config}") from None
    except ConfigError as exc:
        raise _ConfigProblem(f"{args.config}: {exc}") from None
    if args.seed is not None:
        spec.seed = args.seed
    if args.workers is not None:
        spec.workers = args.workers
    if args.out is not None:
        spec.out = args.out
    try:
        spec.validate()
    except (ValueError, KeyError) as exc:
        raise _ConfigProblem(str(exc)) from None
    return spec


def _progress(k, n):
    print(f"\r  chunk {k}/{n}", end="", file=sys.stderr, flush=True)
    if k == n:
        print(file=sys.stderr)


def cmd_convergence(args):
    from .harness import run_experiment

    spec = _load_spec(args)
    report = run_experiment(spec, progress=_progress)
    out = spec.out or "."
    report.write(out, "convergence")
    summary = report.summary()
    print(f"{'scheme':<20}{'h':>12}{'Q':>8}{'error':>12}{'ci90':>11}")
    for r in report.rows:
        print(f"{r.scheme:<20}{r.h:>12.6g}{r.Q:>8d}{r.error:>12.4e}{r.ci90:>11.2e}")
    for s, e in summary["schemes"].items():
        if "slope_error_vs_h" in e:
            print(f"slope {s}: {e['slope_error_vs_h']:.3f}")
    print(f"wrote {os.path.join(out, 'convergence.csv')}")
    return EXIT_OK


def _beta_table():
    from .integrals import beta, effort_exponent

    lines = ["beta(M, l) and -M/beta for distinct non-zero indices:"]
    for M2 in range(2, 7):
        M = Fraction(M2, 2)
        cells = []
        for ell in range(2, 7):
            if M >= Fraction(ell, 2):
                cells.append(f"l={ell}: {beta(M, ell):>2} {str(effort_exponent(M, ell)):>6}")
        lines.append(f"  M={str(M):>3}  " + "  ".join(cells))
    return "\n".join(lines)


def cmd_effort(args):
    import csv

    from .harness import CSV_COLUMNS, effort_model, run_experiment

    spec = _load_spec(args)
    report = run_experiment(spec, progress=_progress)
    out = spec.out or "."
    os.makedirs(out, exist_ok=True)
    model = effort_model(report)
    path = os.path.join(out, "effort.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS + ("effort", "regime"))
        for r in report.rows:
            m = model[r.scheme]
            regime = m["regimes"][m["h"].index(r.h)]
            w.writerow([r.scheme, repr(r.h), r.Q, r.n_paths, repr(r.error), repr(r.ci90),
                        int(r.eval_flops), int(r.quad_ops), f"{r.wall_ms:.1f}",
                        int(r.effort), regime])
    report.write(out, "effort-report")
    for s, m in model.items():
        print(f"{s}: crossover h = {m['h_crossover']}, predicted h_cr = {m['h_cr_predicted']}")
    print(_beta_table())
    print(f"wrote {path}")
    return EXIT_OK


def cmd_shuffle(args):
    from .shuffle import as_word, classify_word, format_word, parts_reduce, solve_shuffle_system

    text = " ".join(args.word).strip()
    pattern = text.endswith("pattern")
    token = text.replace("pattern", "").strip()
    try:
        w = as_word(token)
    except ValueError as exc:
        raise _ConfigProblem(str(exc)) from None
    if pattern:
        try:
            system = solve_shuffle_system(w)
        except ValueError as exc:
            raise _ConfigProblem(str(exc)) from None
        gens = ", ".join(f"J_{{{format_word(g)}}}" for g in system.basis) or "none"
        print(f"pattern {format_word(sorted(w))}: {system.n_equations} equations, "
              f"{len(system.unknowns)} unknowns, rank {system.rank}")
        print(f"generators: {gens}")
        direct = ", ".join(f"J_{{{format_word(g)}}}" for g in system.generators) or "none"
        print(f"double-sum generators: {direct}")
        for u, expr in sorted(system.reductions.items()):
            print(f"  J_{{{format_word(u)}}} = {expr.render()}")
        return EXIT_OK
    cls = classify_word(w)
    if cls == "exact":
        k, c = len(w), w[0]
        base = "h" if c == 0 else "(ΔW)"
        sup = str(k).translate(_SUPERSCRIPT)
        print(f"exact: {base}{sup}/{math.factorial(k)}" if k > 1 else f"exact: {base}")
        return EXIT_OK
    try:
        print(parts_reduce(w).render())
    except ValueError:
        if len(set(w)) == 2:
            system = solve_shuffle_system(w)
            expr = system.reductions.get(w)
            print(expr.render() if expr is not None else f"J_{{{format_word(w)}}} (generator)")
        else:
            print(f"J_{{{format_word(w)}}}")
    print(f"class: {cls}")
    return EXIT_OK


def cmd_quadcheck(args):
    from .harness import quadrature_check

    try:
        qs = [int(q) for q in args.q.split(",")]
    except ValueError:
        raise _ConfigProblem(f"bad Q ladder {args.q!r}") from None
    res = quadrature_check(args.word, args.h, qs, args.paths, seed=args.seed or 0)
    print(f"word {args.word}, h = {args.h}")
    for q, e, s in zip(res.q_list, res.error, res.stderr):
        print(f"  Q={q:<6d} L2 error {e:.4e} ± {s:.1e}")
    if res.predicted is None:
        print("exact: error identically 0")
    else:
        a, b = res.predicted
        print(f"measured slope vs Q: {res.slope:.3f}   predicted: {-float(b):.3f} "
              f"(h^{a} / Q^{b})")
    return EXIT_OK


def cmd_localerr(args):
    from .fixtures import get_fixture
    from .integrators import local_error_gap

    try:
        system, _ = get_fixture(args.fixture)
    except KeyError as exc:
        raise _ConfigProblem(str(exc)) from None
    est = local_error_gap(system, args.h, args.q, args.samples, Fraction(args.order),
                          seed=args.seed or 0)
    np.set_printoptions(precision=4, suppress=False)
    print("E[R_neu^T R_neu] - E[R_mag^T R_mag] (symmetrized):")
    print(est.symmetrized())
    print(f"smallest eigenvalue {est.min_eigenvalue():.4e} ± {est.eigen_stderr():.1e}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="stratflow",
                                description="Strong integrators for linear Stratonovich SDEs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value experiment file")
    common.add_argument("--seed", type=int, help="override the seed (unsigned 64-bit)")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--out", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("convergence", parents=[common], help="error vs stepsize")
    s.set_defaults(func=cmd_convergence)
    s = sub.add_parser("effort", parents=[common], help="error vs effort with regimes")
    s.set_defaults(func=cmd_effort)
    s = sub.add_parser("shuffle", parents=[common], help="reduce or classify a word")
    s.add_argument("word", nargs="+", help='digit word, or "<letters> pattern"')
    s.set_defaults(func=cmd_shuffle)
    s = sub.add_parser("quadcheck", parents=[common], help="measured vs predicted quadrature rates")
    s.add_argument("word")
    s.add_argument("--h", type=float, default=1.0)
    s.add_argument("--q", default="1,2,4,8,16,32")
    s.add_argument("--paths", type=int, default=10000)
    s.set_defaults(func=cmd_quadcheck)
    s = sub.add_parser("localerr", parents=[common], help="one-step remainder gap")
    s.add_argument("--fixture", default="riccati-9.1")
    s.add_argument("--h", type=float, default=0.125)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--order", default="1")
    s.set_defaults(func=cmd_localerr)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ConfigProblem as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
