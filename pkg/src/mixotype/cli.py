"""Command-line front end: ``mixotype <command> [options]``.

Exit codes: 0 success, 2 numeric or domain failure, 3 usage or parse failure,
4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import charflow, evolve, jordan, models
from .errors import ConvergenceError, ExpressionError, MixotypeError, ModelError
from .modelfile import load_model
from .svgplot import Plot
from .syscore import PointType, char_speeds, classify, hodograph_speeds

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE, EXIT_CONVERGENCE = 0, 2, 3, 4
BOUNDARY_BAND = 5e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _numbers(text, count, what):
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count or not all(math.isfinite(x) for x in vals):
        raise UsageError(f"{what}: expected {count} finite comma-separated numbers, got {text!r}")
    return vals


def _fmt(x):
    if isinstance(x, complex):
        if abs(x.imag) == 0:
            return _fmt(x.real)
        sign = "+" if x.imag >= 0 else "-"
        return f"{x.real:.10g}{sign}{abs(x.imag):.10g}i"
    if x is None:
        return "n/a"
    return f"{x:.10g}"


def _matrix_text(m):
    return "[[" + ", ".join(_fmt(x) for x in m[0]) + "], [" + ", ".join(_fmt(x) for x in m[1]) + "]]"


def _load(args):
    mf = load_model(args.model)
    if mf.tol is not None and "MIXOTYPE_TOL" not in os.environ:
        os.environ["MIXOTYPE_TOL"] = repr(mf.tol)
    return mf


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _try_svg(plot, path):
    # plots are best-effort; the CSV data has already been written
    try:
        plot.save(path)
    except (OSError, ValueError) as err:
        print(f"warning: could not write {path}: {err}", file=sys.stderr)


# --- commands ----------------------------------------------------------------

def cmd_classify(args):
    sys_ = _load(args).system
    p = _numbers(args.point, 2, "--point")
    cl = classify(sys_, p, args.tol)
    es = char_speeds(sys_, p, args.tol)
    if cl.kind is PointType.PARABOLIC:
        head = f"Parabolic (on transition line), λ={_fmt(es.lambda_plus)}"
    elif cl.kind is PointType.DEGENERATE_DIAGONAL:
        head = f"DegenerateDiagonal (V is a multiple of I), λ={_fmt(es.lambda_plus)}"
    else:
        head = (f"{cl.kind}, Ω={_fmt(cl.omega)}, "
                f"λ=({_fmt(es.lambda_plus)}, {_fmt(es.lambda_minus)})")
    print(head)
    print(f"model: {sys_.name}")
    print(f"point: ({_fmt(p[0])}, {_fmt(p[1])})")
    print(f"omega: {_fmt(cl.omega)}")
    print(f"tolerance: {cl.tol:.3g}")
    print(f"lambda_plus: {_fmt(es.lambda_plus)}")
    print(f"lambda_minus: {_fmt(es.lambda_minus)}")
    try:
        mp, mm = hodograph_speeds(sys_, p, args.tol)
        print(f"mu_plus: {_fmt(mp)}")
        print(f"mu_minus: {_fmt(mm)}")
    except MixotypeError as err:
        print(f"mu: n/a ({err})")
    if es.eigenvector_on_tl is not None:
        y = es.eigenvector_on_tl
        print(f"eigenvector: ({_fmt(y[0])}, {_fmt(y[1])})")
    return EXIT_OK


def cmd_jordan(args):
    sys_ = _load(args).system
    p = _numbers(args.point, 2, "--point")
    jd = jordan.conjugating_matrix(sys_, p, args.a, args.b, args.tol)
    print(f"lambda: {_fmt(jd.lam)}")
    print(f"V0: {_matrix_text(jd.v0)}")
    print(f"P: {_matrix_text(jd.p_matrix)}")
    print(f"P V0 P^-1: {_matrix_text(jd.p_matrix @ jd.v0 @ np.linalg.inv(jd.p_matrix))}")
    print(f"branch: {jd.branch}")
    print(f"residual: {jd.residual:.3e}")
    return EXIT_OK


def cmd_trace(args):
    mf = _load(args)
    sys_ = mf.system
    start = _numbers(args.start, 2, "--start")
    bounds = _numbers(args.bounds, 4, "--bounds") if args.bounds else mf.bounds
    if bounds is None:
        bounds = (start[0] - 5, start[0] + 5, start[1] - 5, start[1] + 5)
    step = args.step or mf.step or 1e-2
    if args.branch == "transition":
        curve = charflow.trace_transition_line(sys_, start, bounds, step)
    else:
        curve = charflow.trace_simple_wave(sys_, start, args.branch, bounds, step,
                                           sense=-1 if args.away else 1)
    _write(args.out, curve.to_csv())
    print(f"termination: {curve.termination}, points: {len(curve.points)}, "
          f"end: ({_fmt(curve.end[0])}, {_fmt(curve.end[1])})", file=sys.stderr)
    if args.svg:
        plot = Plot(f"{sys_.name}: {args.branch} curve", "u", "v")
        plot.line(curve.u, curve.v, label=args.branch)
        _try_svg(plot, args.svg)
    return EXIT_OK


def cmd_crossing(args):
    sys_ = _load(args).system
    p = _numbers(args.contact, 2, "--contact")
    verdict = charflow.crossing_verdict(sys_, p, args.probe)
    c = verdict.contact_point
    print(f"verdict: {verdict.kind}")
    allowed = verdict.allowed
    print(f"transition: {'undetermined' if allowed is None else 'allowed' if allowed else 'forbidden'}")
    print(f"contact: ({_fmt(c[0])}, {_fmt(c[1])})")
    print(f"delta_t_left: {_fmt(verdict.delta_t_left)}")
    print(f"delta_t_right: {_fmt(verdict.delta_t_right)}")
    print(f"diagnostics: {verdict.diagnostics}")
    try:
        e, r2 = charflow.contact_exponent(sys_, c, args.window)
        print(f"contact_exponent: {e:.4f} (r^2 = {r2:.6f})")
    except MixotypeError as err:
        print(f"contact_exponent: n/a ({err})")
    return EXIT_OK


def _parse_init(text, n):
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--init: bad parameter {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--init: {key.strip()} must be a number") from None
    try:
        if kind == "circle":
            sign = int(params.pop("sign", 1))
            c = params.pop("c")
            if params:
                raise KeyError(next(iter(params)))
            return evolve.circle_init(c, n, sign)
        if kind == "constant":
            u, v = params.pop("u"), params.pop("v")
            if params:
                raise KeyError(next(iter(params)))
            return evolve.GridState(np.full(n, u), np.full(n, v))
    except KeyError as err:
        raise UsageError(f"--init {kind}: missing or unknown parameter {err}") from None
    except ValueError as err:
        raise UsageError(f"--init: {err}") from None
    raise UsageError(f"--init: unknown initial condition {kind!r} (circle or constant)")


def _export_trajectory(traj, outdir, meta):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for i, state in enumerate(traj.states):
        name = f"state_{i:04d}.csv"
        (outdir / name).write_text(state.to_csv(), encoding="utf-8")
        files.append(name)
    manifest = dict(meta)
    manifest.update({
        "times": [float(s.t) for s in traj.states],
        "files": files,
        "crossing": None if traj.crossing is None else
        {"t": traj.crossing[0], "x": traj.crossing[1]},
        "blowup": None if traj.blowup is None else
        {"t": traj.blowup[0], "max_gradient": traj.blowup[1]
         if math.isfinite(traj.blowup[1]) else "inf"},
    })
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def _locus_plot(traj, title):
    plot = Plot(title, "u", "v")
    idx = sorted(set(np.linspace(0, len(traj.states) - 1, min(6, len(traj.states))).astype(int)))
    for i in idx:
        s = traj.states[i]
        plot.line(np.append(s.u, s.u[0]), np.append(s.v, s.v[0]), label=f"t = {s.t:.3g}")
    return plot


def _field_plot(traj, title):
    plot = Plot(title, "x", "u")
    idx = sorted(set(np.linspace(0, len(traj.states) - 1, min(6, len(traj.states))).astype(int)))
    for i in idx:
        s = traj.states[i]
        plot.line(s.x, s.u, label=f"t = {s.t:.3g}")
    return plot


def cmd_evolve(args):
    mf = _load(args)
    n = args.n or mf.grid or 512
    init = _parse_init(args.init, n)
    traj = evolve.evolve(mf.system, init, args.t_end, args.cfl, n_out=args.n_out)
    meta = {"model": mf.system.name, "init": args.init, "n": n, "cfl": args.cfl,
            "t_end": args.t_end}
    _export_trajectory(traj, args.outdir, meta)
    print(f"states: {len(traj.states)} written to {args.outdir}")
    print("crossing: " + ("none" if traj.crossing is None else
                          f"t = {traj.crossing[0]:.6g}, x = {traj.crossing[1]:.6g}"))
    print("blowup: " + ("none" if traj.blowup is None else
                        f"t = {traj.blowup[0]:.6g}, max gradient = {traj.blowup[1]:.3g}"))
    if args.svg:
        _try_svg(_locus_plot(traj, f"{mf.system.name}: (u, v) locus"),
                 os.path.join(args.outdir, "locus.svg"))
        _try_svg(_field_plot(traj, f"{mf.system.name}: u(x, t)"),
                 os.path.join(args.outdir, "field_u.svg"))
    return EXIT_OK


def experiment_verdict(c, c_crit):
    if abs(c - c_crit) <= BOUNDARY_BAND:
        return "boundary"
    return "forbidden" if c > c_crit else "allowed"


def cmd_boussinesq_experiment(args):
    c = args.c
    c_crit = evolve.critical_c()
    waves = evolve.tangent_simple_waves(c)
    k = waves[0][0]
    verdict = experiment_verdict(c, c_crit)
    detail = {"forbidden": f"c > c_crit={c_crit:.6f}", "allowed": f"c < c_crit={c_crit:.6f}",
              "boundary": f"|c - c_crit| <= {BOUNDARY_BAND:g}, c_crit={c_crit:.6f}"}[verdict]
    print(f"c_crit: {c_crit:.6f}")
    for kk, vc in waves:
        print(f"tangent wave: k = {kk:.6f}, v_c = {vc:.6f}")
    meet = (1.5 * k) ** (2 / 3) if k > 0 else None
    print("waves meet at: " + (f"u = {meet:.6f}" if meet is not None else "no point with u > 0"))
    print(f"verdict: {verdict} ({detail})")

    sys_ = models.boussinesq()
    traj = evolve.evolve(sys_, evolve.circle_init(c, args.n), args.t_end, args.cfl,
                         n_out=args.n_out)
    meta = {"model": "boussinesq", "init": f"circle:c={c!r}", "n": args.n, "cfl": args.cfl,
            "t_end": args.t_end, "c": c, "c_crit": c_crit, "verdict": verdict,
            "tangent_waves": [{"k": kk, "v_c": vc} for kk, vc in waves]}
    _export_trajectory(traj, args.outdir, meta)
    if traj.crossing is None:
        print(f"evolution: no crossing through t = {args.t_end:g}")
    else:
        print(f"evolution: crossing at t = {traj.crossing[0]:.6f}, x = {traj.crossing[1]:.6f}")
    if traj.blowup is not None:
        print(f"evolution: stopped at t = {traj.blowup[0]:.6g} (gradient blow-up)")
    min_u = min(float(s.u.min()) for s in traj.states)
    print(f"min u over stored states: {min_u:.6f}")

    if not args.no_svg:
        plot = _locus_plot(traj, f"dispersionless Boussinesq, circle c = {c:g}")
        vv = np.linspace(-3, 3, 2)
        plot.line([0, 0], vv, label="transition line u = 0", color="black", dash="4 3")
        uu = np.linspace(0, c + 1.5, 200)
        plot.line(uu, k - (2 / 3) * uu ** 1.5, label="tangent waves", color="#555555", dash="2 2")
        plot.line(uu, -(k - (2 / 3) * uu ** 1.5), color="#555555", dash="2 2")
        _try_svg(plot, os.path.join(args.outdir, "hodograph.svg"))
        _try_svg(_field_plot(traj, f"u(x, t), c = {c:g}"), os.path.join(args.outdir, "field_u.svg"))
    return EXIT_OK


# --- wiring ------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="mixotype", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--model", required=True, help="model id or model file path")
        return p

    p = model_cmd("classify", "type, discriminant and speeds at a point")
    p.add_argument("--point", required=True, help="u,v")
    p.add_argument("--tol", type=float, default=None, help="absolute zero threshold for Omega")
    p.set_defaults(func=cmd_classify)

    p = model_cmd("jordan", "Jordan structure on the transition line")
    p.add_argument("--point", required=True, help="u,v on the transition line")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_jordan)

    p = model_cmd("trace", "trace a simple wave or the transition line to CSV")
    p.add_argument("--start", required=True, help="u,v (seed for the transition line)")
    p.add_argument("--branch", choices=("plus", "minus", "transition"), required=True)
    p.add_argument("--bounds", help="umin,umax,vmin,vmax")
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--away", action="store_true", help="trace away from the transition line")
    p.add_argument("--out", default="-", help="CSV path (default stdout)")
    p.add_argument("--svg", help="optional SVG path")
    p.set_defaults(func=cmd_trace)

    p = model_cmd("crossing", "crossing verdict and contact exponent at a contact point")
    p.add_argument("--contact", required=True, help="u,v on the transition line")
    p.add_argument("--probe", type=float, default=1e-2)
    p.add_argument("--window", type=float, default=1e-2, help="contact exponent fit window")
    p.set_defaults(func=cmd_crossing)

    p = model_cmd("evolve", "time evolution on a periodic grid")
    p.add_argument("--init", required=True, help="circle:c=3[,sign=-1] or constant:u=3,v=0")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="grid size (default 512)")
    p.add_argument("--cfl", type=float, default=0.4)
    p.add_argument("--n-out", type=int, default=20)
    p.add_argument("--outdir", required=True)
    p.add_argument("--svg", action="store_true", help="write SVG snapshots")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("boussinesq-experiment", help="the circle experiment for dispersionless Boussinesq")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--t-end", type=float, default=2.0)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--cfl", type=float, default=0.4)
    p.add_argument("--n-out", type=int, default=20)
    p.add_argument("--outdir", default="boussinesq_out")
    p.add_argument("--no-svg", action="store_true")
    p.set_defaults(func=cmd_boussinesq_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    saved_tol = os.environ.get("MIXOTYPE_TOL")
    try:
        return args.func(args)
    except (UsageError, ExpressionError, ModelError) as err:
        parser.print_usage(sys.stderr)
        print(f"mixotype: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as err:
        print(f"mixotype: no convergence: {err}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (MixotypeError, ArithmeticError, ValueError) as err:
        print(f"mixotype: error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        # a model file's tol applies to this invocation only
        if saved_tol is None:
            os.environ.pop("MIXOTYPE_TOL", None)
        else:
            os.environ["MIXOTYPE_TOL"] = saved_tol


if __name__ == "__main__":
    sys.exit(main())
