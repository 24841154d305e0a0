"""Command-line front end: ``torusqm <subcommand> [flags]``.

Exit codes: 0 success, 1 check or convergence failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import PhaseSpaceParams, check_identities
from .dynamics import (
    build_hamiltonian,
    evolve,
    spectral_period,
    survival_grid_period,
    translated_revival,
)
from .io import fmt, read_csv, write_csv, write_json, atomic_write
from .states import (
    DegenerateRecurrence,
    MusSpec,
    NoConvergence,
    basis_state,
    expectations,
    gaussian_state,
    lambda_roots,
    mus_state,
    random_state,
    solve_mus_for_targets,
)
from .svg import FigureSpec, bar_chart, line_chart
from .uncertainty import (
    InsufficientPositiveExcess,
    NoCircularMean,
    gaussian_probe,
    gup_excess,
    gup_scaling_sweep,
    mus_probe,
    unitary_uncertainty,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Flag parsing


def parse_complex(text: str) -> complex:
    """``"re,im"`` or a Python complex literal such as ``"1.5-0.2j"``."""
    try:
        if "," in text:
            re_, im = text.split(",")
            return complex(float(re_), float(im))
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r} (use re,im)")


_TIME = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?(pi)?(?:/(\d+\.?\d*))?$")


def parse_time(text: str) -> float:
    """A real number, optionally a multiple of pi: ``0.3``, ``pi/4``, ``3pi/4``, ``2*pi``."""
    m = _TIME.match(text.strip().lower())
    if not m or (not m.group(1) and not m.group(2)):
        raise argparse.ArgumentTypeError(f"cannot read time {text!r}")
    coef, has_pi, den = m.groups()
    value = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
    if has_pi:
        value *= math.pi
    if den:
        value /= float(den)
    return value


def parse_times(text: str) -> list[float]:
    """Comma list (``0,pi/4,pi``) or range ``t0..t1[:count]`` (count points, default 5)."""
    if ".." in text:
        span, _, count = text.partition(":")
        t0, t1 = span.split("..")
        steps = int(count) if count else 5
        if steps < 1:
            raise argparse.ArgumentTypeError("a time range needs at least one point")
        return [float(t) for t in np.linspace(parse_time(t0), parse_time(t1), steps)]
    return [parse_time(t) for t in text.split(",") if t.strip()]


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")


def parse_triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected centre,sigma,momentum")
    return tuple(float(p) for p in parts)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


# --------------------------------------------------------------------------
# State selection


def _state_modes(args) -> list[str]:
    modes = []
    if getattr(args, "mu", None) is not None:
        modes.append("mu")
    if getattr(args, "target_u", None) is not None or getattr(args, "target_v", None) is not None:
        modes.append("targets")
    if getattr(args, "gaussian", None) is not None:
        modes.append("gaussian")
    if getattr(args, "basis", None) is not None:
        modes.append("basis")
    return modes


def _build_state(args, params, default: str):
    """Returns (state, info dict, ok flag)."""
    modes = _state_modes(args)
    if len(modes) > 1:
        raise UsageError(f"choose one state specification, got {', '.join(modes)}")
    if getattr(args, "lam", None) is not None and "mu" not in modes:
        raise UsageError("--lambda needs --mu")
    if getattr(args, "root", None) is not None or getattr(args, "root_near", None) is not None:
        if "mu" not in modes:
            raise UsageError("--root/--root-near need --mu")
    mode = modes[0] if modes else default
    n = params.n
    info: dict = {"mode": mode}
    if mode == "mu":
        mu = args.mu
        chosen = [x is not None for x in (args.root, args.root_near, args.lam)]
        if sum(chosen) > 1:
            raise UsageError("give at most one of --root, --root-near, --lambda")
        if abs(mu**n - 1) < 1e-12:
            print("warning: mu^N = 1, lambda = 0 (V eigenstate)", file=sys.stderr)
        if args.lam is not None:
            spec = MusSpec.from_pair(params, mu, args.lam)
        else:
            roots = lambda_roots(params, mu)
            if args.root_near is not None:
                idx = int(np.argmin(np.abs(roots - args.root_near)))
            else:
                idx = args.root if args.root is not None else 0
            if not 0 <= idx < n:
                raise UsageError(f"--root must lie in [0, {n - 1}]")
            spec = MusSpec.from_mu(params, mu, idx)
        info["spec"] = spec.to_dict()
        return mus_state(spec), info, True
    if mode == "targets":
        if args.target_u is None or args.target_v is None:
            raise UsageError("--target-u and --target-v go together")
        ok = True
        try:
            spec = solve_mus_for_targets(params, args.target_u, args.target_v, tol=args.tol)
        except NoConvergence as err:
            if err.spec is None:
                raise
            print(f"warning: {err}", file=sys.stderr)
            spec, ok = err.spec, bool(getattr(args, "best_fit", False))
            info["solver_residual"] = err.residual
        info["spec"] = spec.to_dict()
        info["converged"] = ok
        return mus_state(spec), info, ok
    if mode == "gaussian":
        c, s, p = args.gaussian
        info["gaussian"] = {"center_j": c, "sigma_q": s, "momentum_k": p}
        return gaussian_state(params, c, s, p), info, True
    if mode == "basis":
        j = args.basis if args.basis is not None else 0
        info["basis"] = j
        return basis_state(params, j), info, True
    if mode == "random":
        info["seed"] = args.seed
        return random_state(params, np.random.default_rng(args.seed)), info, True
    if mode == "mus":
        spec = MusSpec.from_mu(params, 1.5, int(np.argmin(np.abs(lambda_roots(params, 1.5) + 1.5))))
        info["spec"] = spec.to_dict()
        return mus_state(spec), info, True
    raise UsageError(f"unknown state mode {mode}")


def _echo(args) -> dict:
    skip = {"func", "output_dir"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _formats(args) -> set[str]:
    out = set(args.format.split(",")) if args.format else {"csv", "json"}
    bad = out - {"csv", "json", "svg"}
    if bad:
        raise UsageError(f"unknown format(s): {', '.join(sorted(bad))}")
    if args.svg:
        out.add("svg")
    return out


# --------------------------------------------------------------------------
# Subcommands


def _state_tables(state):
    sites = [
        [j, fmt(p), fmt(z.real), fmt(z.imag)] for j, (p, z) in enumerate(zip(state.probs, state.c))
    ]
    momenta = [[k, fmt(p)] for k, p in enumerate(state.momentum_probs)]
    return sites, momenta


def cmd_algebra_check(args) -> int:
    if args.n > 64:
        raise UsageError("algebra-check supports N <= 64")
    out = Path(args.output_dir)
    report = check_identities(PhaseSpaceParams(args.n), tol=args.tol, seed=args.seed)
    if "json" in _formats(args):
        write_json(out / "identities.json", report.to_dict(), _echo(args))
    for r in report.identities:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:<14} residual={r.residual:.3e}")
    return EXIT_OK if report.all_passed else EXIT_FAIL


def cmd_mus(args) -> int:
    params = PhaseSpaceParams(args.n)
    out = Path(args.output_dir)
    fmts = _formats(args)
    state, info, ok = _build_state(args, params, default="mu_required")
    ex = expectations(state)
    try:
        unc = gup_excess(state).to_dict()
    except NoCircularMean:
        unc = unitary_uncertainty(state).to_dict()
    echo = _echo(args)
    sites, momenta = _state_tables(state)
    if "json" in fmts:
        write_json(out / "state.json", {**state.to_dict(), "state": info}, echo)
        write_json(out / "expectations.json", ex.to_dict(), echo)
        write_json(out / "uncertainty.json", unc, echo)
    if "csv" in fmts or "svg" in fmts:
        write_csv(out / "state_sites.csv", ["j", "prob", "re", "im"], sites, echo)
        write_csv(out / "state_momentum.csv", ["k", "prob"], momenta, echo)
    if "svg" in fmts:
        title = f"|c_j|^2, N={args.n}"
        spec = FigureSpec("site_bars", title, "j", "|c_j|^2", "state_sites.csv:prob")
        atomic_write(out / "state_sites.svg", bar_chart(spec, [str(r[0]) for r in sites], [r[1] for r in sites]))
        spec = FigureSpec("momentum_bars", f"|d_k|^2, N={args.n}", "k", "|d_k|^2", "state_momentum.csv:prob")
        atomic_write(
            out / "state_momentum.svg", bar_chart(spec, [str(r[0]) for r in momenta], [r[1] for r in momenta])
        )
    if "spec" in info:
        lam = info["spec"]["lambda"]
        mu = info["spec"]["mu"]
        print(f"mu = {mu[0]:.6f}{mu[1]:+.6f}i  lambda = {lam[0]:.6f}{lam[1]:+.6f}i  root_index = {info['spec']['root_index']}")
    print(f"<U> = {ex.exp_u.real:.6f}{ex.exp_u.imag:+.6f}i  <V> = {ex.exp_v.real:.6f}{ex.exp_v.imag:+.6f}i")
    print(f"peak site = {int(np.argmax(state.probs))}  saturation gap = {unc['gap']:.3e}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_evolve(args) -> int:
    params = PhaseSpaceParams(args.n)
    if args.k is None:
        raise UsageError("evolve needs --k")
    if not 1 <= args.k <= args.n - 1:
        raise UsageError("--k must satisfy 1 <= k <= N-1")
    out = Path(args.output_dir)
    fmts = _formats(args)
    state, info, ok = _build_state(args, params, default="basis")
    h = build_hamiltonian(params, args.k)
    times = args.times if args.times is not None else [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi]
    trace = evolve(h, state, times)
    echo = _echo(args)
    rows = [
        [fmt(t), fmt(abs(a)), fmt(math.atan2(a.imag, a.real)), fmt(w)]
        for t, a, w in zip(trace.times, trace.survival, trace.widths)
    ]
    site_rows = [
        [i, fmt(t), j, fmt(p)]
        for i, (t, probs) in enumerate(zip(trace.times, trace.site_probs))
        for j, p in enumerate(probs)
    ]
    if "csv" in fmts or "svg" in fmts:
        write_csv(out / "trace.csv", ["t", "abs_survival", "arg_survival", "width"], rows, echo)
        write_csv(out / "trace_sites.csv", ["frame", "t", "j", "prob"], site_rows, echo)
    if "json" in fmts:
        payload = {
            "state": info,
            "times": trace.times,
            "survival": [[a.real, a.imag] for a in trace.survival],
            "widths": trace.widths,
            "site_probs": trace.site_probs,
        }
        write_json(out / "trace.json", payload, echo)
    if "svg" in fmts:
        n = params.n
        top = float(np.max(trace.site_probs))
        for i, t in enumerate(trace.times):
            block = site_rows[i * n : (i + 1) * n]
            spec = FigureSpec("site_bars", f"|c_j|^2 at t={t:.4f}, N={n}, k={args.k}", "j", "|c_j|^2",
                              f"trace_sites.csv:frame={i}")
            svg = bar_chart(spec, [str(r[2]) for r in block], [r[3] for r in block], y_max=top)
            atomic_write(out / f"frame_{i:03d}.svg", svg)
    for t, a, p in zip(trace.times, trace.survival, trace.site_probs):
        print(f"t={t:.6f}  |A|={abs(a):.9f}  peak={int(np.argmax(p))}")
    dev = float(np.max(np.abs(trace.site_probs[-1] - trace.site_probs[0])))
    print(f"max |c_j(t_last)|^2 - |c_j(t_0)|^2 deviation = {dev:.3e}")
    return EXIT_OK if ok else EXIT_FAIL


def _divides(t_small: float, t_big: float, tol: float = 1e-6) -> bool:
    ratio = t_big / t_small
    return abs(ratio - round(ratio)) <= tol * max(1.0, ratio)


def cmd_revival(args) -> int:
    params = PhaseSpaceParams(args.n)
    if args.k is None:
        raise UsageError("revival needs --k")
    if not 1 <= args.k <= args.n - 1:
        raise UsageError("--k must satisfy 1 <= k <= N-1")
    if args.steps < 100:
        raise UsageError("--steps must be at least 100")
    state, info, ok = _build_state(args, params, default=args.state)
    h = build_hamiltonian(params, args.k)
    spectral = spectral_period(h)
    grid = survival_grid_period(h, state, t_max=args.t_max, steps=args.steps, tol=args.tol)
    half = None
    if grid.period is not None:
        off, fid = translated_revival(h, state, grid.period / 2)
        half = {"t": grid.period / 2, "offset": off, "fidelity": fid}
        grid = type(grid)(grid.method, grid.period, grid.kind, grid.residual, off)
    if spectral.kind == "exact" and spectral.period is not None:
        agree = grid.period is not None and _divides(grid.period, spectral.period)
        note = "grid period divides the spectral period" if agree else "grid missed the spectral period"
    else:
        agree = grid.kind in ("approximate", "none", "exact")
        note = "no state-independent period; grid result is specific to this state"
    payload = {
        "state": info,
        "spectral": spectral.to_dict(),
        "grid": grid.to_dict(),
        "half_period": half,
        "consistent": agree,
        "note": note,
    }
    if "json" in _formats(args):
        write_json(Path(args.output_dir) / "revival.json", payload, _echo(args))
    for rep in (spectral, grid):
        period = "none" if rep.period is None else f"{rep.period:.10f} ({rep.period / math.pi:.6f} pi)"
        print(f"{rep.method:<8} period={period} kind={rep.kind} residual={rep.residual:.3e}")
    if half:
        print(f"half period: offset={half['offset']} fidelity={half['fidelity']:.6f}")
    print(("consistent: " if agree else "INCONSISTENT: ") + note)
    return EXIT_OK if (agree and ok) else EXIT_FAIL


PROBES = {
    "default": lambda: mus_probe(0.5),
    "dp2x2": lambda: mus_probe(1.0),
    "gaussian": lambda: gaussian_probe(0.5),
}


def cmd_gup(args) -> int:
    n_values = args.n_list
    if len(n_values) < 4:
        raise UsageError("gup needs at least 4 values in --n-list")
    if any(b <= a for a, b in zip(n_values, n_values[1:])) or n_values[0] < 2:
        raise UsageError("--n-list must be strictly increasing and start at N >= 2")
    out = Path(args.output_dir)
    fmts = _formats(args) | {"svg"}
    echo = _echo(args)
    probe = PROBES[args.probe]()
    try:
        fit = gup_scaling_sweep(n_values, probe)
        reports, err = fit.reports, None
    except InsufficientPositiveExcess as exc:
        fit, err = None, exc
        reports = [gup_excess(probe(n)) for n in n_values]
    cols = ["n", "disp_u", "disp_v", "cross_sq", "gap", "dq2", "dp2", "product", "excess", "predicted_excess"]
    rows = [[r.to_dict()[c] for c in cols] for r in reports]
    if "csv" in fmts or "svg" in fmts:
        write_csv(out / "gup.csv", cols, rows, echo)
    if "json" in fmts:
        write_json(
            out / "gup.json",
            {"probe": args.probe, "fit": fit.to_dict() if fit else None,
             "error": str(err) if err else None, "reports": [r.to_dict() for r in reports]},
            echo,
        )
    if fit is not None:
        _, table = read_csv(out / "gup.csv")
        spec = FigureSpec("scaling_loglog", f"excess vs N ({args.probe} probe)", "N", "dQ^2 dP^2 - 1/4",
                          "gup.csv:n,excess")
        svg = line_chart(spec, [r[0] for r in table], [r[8] for r in table], log=True,
                         fit=(fit.amplitude, fit.exponent))
        atomic_write(out / "gup_loglog.svg", svg)
    for r in reports:
        print(f"N={r.n:<6d} dq2={r.dq2:.6f} dp2={r.dp2:.6f} product={r.product:.8f} excess={r.excess:.3e}")
    if fit is None:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL
    print(f"exponent = {fit.exponent:.4f}  amplitude = {fit.amplitude:.4f}  r^2 = {fit.r_squared:.5f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser


def _add_common(p, n_required=True):
    if n_required:
        p.add_argument("--n", type=_positive_int, required=True, help="lattice size N")
    p.add_argument("--output-dir", default=".", help="directory for output files")
    p.add_argument("--format", default=None, help="comma list from csv,json,svg (default csv,json)")
    p.add_argument("--svg", action="store_true", help="also write SVG figures")
    p.add_argument("--seed", type=int, default=0, help="seed for randomised states")


def _add_state(p):
    g = p.add_argument_group("state (choose one mode)")
    g.add_argument("--mu", type=parse_complex, help="MUS eigenvalue mu as re,im")
    g.add_argument("--root", type=int, help="index into the argument-ordered lambda roots")
    g.add_argument("--root-near", type=parse_complex, help="pick the lambda root nearest re,im")
    g.add_argument("--lambda", dest="lam", type=parse_complex, help="explicit lambda as re,im")
    g.add_argument("--target-u", type=parse_complex, help="target <U> as re,im")
    g.add_argument("--target-v", type=parse_complex, help="target <V> as re,im")
    g.add_argument("--best-fit", action="store_true",
                   help="accept the closest state when the targets cannot be met exactly")
    g.add_argument("--gaussian", type=parse_triple, help="wrapped Gaussian centre_j,sigma_q,momentum_k")
    g.add_argument("--basis", type=int, help="position eigenstate at site j")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torusqm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("algebra-check", help="verify clock/shift/Schwinger identities")
    _add_common(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_algebra_check)

    p = sub.add_parser("mus", help="build a minimum-uncertainty (or other) state")
    _add_common(p)
    _add_state(p)
    p.add_argument("--tol", type=float, default=1e-6, help="target-solver tolerance")
    p.set_defaults(func=cmd_mus)

    p = sub.add_parser("evolve", help="evolve a state under the hopping Hamiltonian")
    _add_common(p)
    _add_state(p)
    p.add_argument("--k", type=int, help="hop length, 1 <= k <= N-1")
    p.add_argument("--times", type=parse_times, help="e.g. 0,pi/4,pi or 0..pi/2:11")
    p.add_argument("--tol", type=float, default=1e-6, help="target-solver tolerance")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("revival", help="detect revivals by the grid and spectral methods")
    _add_common(p)
    _add_state(p)
    p.add_argument("--k", type=int, help="hop length, 1 <= k <= N-1")
    p.add_argument("--state", choices=["random", "mus", "basis"], default="random",
                   help="state used when no explicit mode is given")
    p.add_argument("--t-max", type=parse_time, default=8 * math.pi)
    p.add_argument("--steps", type=int, default=4096)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_revival)

    p = sub.add_parser("gup", help="sweep N and fit the uncertainty-product excess")
    _add_common(p, n_required=False)
    p.add_argument("--n-list", type=parse_int_list, default=[64, 128, 256, 512, 1024])
    p.add_argument("--probe", choices=sorted(PROBES), default="default")
    p.set_defaults(func=cmd_gup)
    return parser


VALUE_FLAGS = {"--mu", "--root-near", "--lambda", "--target-u", "--target-v", "--gaussian", "--times", "--t-max"}


def _attach_values(argv: list[str]) -> list[str]:
    """Glue ``--mu -1.5,0`` into ``--mu=-1.5,0`` so argparse keeps negative values."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_values(argv))
    try:
        if args.command == "mus" and not _state_modes(args):
            raise UsageError("mus needs a state: --mu, --target-u/--target-v, --gaussian or --basis")
        return args.func(args)
    except UsageError as err:
        parser.error(str(err))
    except (DegenerateRecurrence, NoConvergence, NoCircularMean) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
