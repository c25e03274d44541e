"""Command-line interface: ``newton-graphs <subcommand> ...``.

Exit codes: 0 for a positive answer or success, 1 for a negative answer
(the certificate is still printed), 2 for malformed input or any library
error, reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2
THREADS_VAR = "NEWTON_GRAPHS_THREADS"


class UsageError(Exception):
    code = "usage_error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _nonneg_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="newton-graphs",
                description="Newton graphs on the torus and elliptic Newton flows.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text, inputs=("graph",)):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        for arg in inputs:
            sp.add_argument(arg, help=f"path to the {arg.replace('_', ' ')} JSON file")
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")
        sp.add_argument("--seed", type=_nonneg_int, default=0,
                        help="seed for randomised internals (default 0)")
        return sp

    sp = cmd("check", "decide whether a graph is a Newton graph")
    sp.add_argument("--mode", choices=("rational", "float"), default="rational",
                    help="angle witness arithmetic (default rational)")
    cmd("dual", "geometric dual of an embedded graph")
    cmd("refine", "common refinement of a graph and its dual")
    sp = cmd("equiv", "equivalence test with witness", ("graph", "other"))
    sp.add_argument("--sense", choices=("any", "preserving", "reversing"), default="any",
                    help="allowed orientation sense (default any)")
    sp = cmd("angles", "angle assignment or Stiemke certificate")
    sp.add_argument("--mode", choices=("rational", "float"), default="rational")
    cmd("selfdual", "compare a graph with its negated dual")

    def flow_opts(sp):
        sp.add_argument("--horizon", type=_positive, default=1e4,
                        help="integration horizon per separatrix (default 1e4)")
        sp.add_argument("--connection-tol", type=_positive, default=1e-5,
                        help="saddle-connection distance threshold (default 1e-5)")

    cmd("canonical", "build the sigma quotient, its critical points and values", ("spec",))
    sp = cmd("extract", "trace separatrices and emit the three graphs", ("spec",))
    flow_opts(sp)
    sp.add_argument("--no-level", action="store_true", help="skip the level-line graph")
    sp = cmd("portrait", "SVG phase portrait", ("spec",))
    flow_opts(sp)
    sp.add_argument("--size", type=_nonneg_int, default=600, help="image size in px (default 600)")
    sp.add_argument("--raster", type=_nonneg_int, default=0,
                    help="flow-direction raster points per axis, 0 = off (default 0)")
    sp.add_argument("--unstable-color", default="#c0392b")
    sp.add_argument("--stable-color", default="#2c3e7a")
    sp.add_argument("--level-color", default="#7f8c8d")
    sp.add_argument("--raster-color", default="#b0b0b0")
    sp.add_argument("--separatrix-width", type=_positive, default=2.5)
    sp.add_argument("--raster-width", type=_positive, default=0.8)
    sp.add_argument("--no-level", action="store_true", help="omit level-line separatrices")
    sp = cmd("roundtrip", "extract a flow's graphs and decide Newton-ness", ("spec",))
    flow_opts(sp)
    sp.add_argument("--reference", help="graph JSON to test equivalence against "
                                        "(default: the order-2 graph when r = 2)")
    return p


def _threads():
    raw = os.environ.get(THREADS_VAR)
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_VAR} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_VAR} must be a positive integer, got {raw!r}")
    # the library itself is single-threaded; this caps the BLAS pools
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    return n


def _run(args):
    from . import flow, io
    from .corpus import g2
    from .elliptic import critical_points
    from .newton_props import a_property, is_newton_graph
    from .torus_graph import dual, equivalent, refine, self_dual_check

    c = args.command
    if c in ("check", "dual", "refine", "equiv", "angles", "selfdual"):
        g = io.load_graph(args.graph)
    if c == "check":
        rep = is_newton_graph(g, args.mode)
        return rep.to_dict(), EXIT_YES if rep.is_newton else EXIT_NO
    if c == "dual":
        return dual(g).to_dict(), EXIT_YES
    if c == "refine":
        rg = refine(g)
        return {"graph": rg.graph.to_dict(), "levels": rg.levels,
                "quad_faces": [list(q) for q in rg.quad_faces]}, EXIT_YES
    if c == "equiv":
        h = io.load_graph(args.other)
        w = equivalent(g, h, None if args.sense == "any" else args.sense)
        return {"equivalent": w is not None,
                "witness": None if w is None else w.to_dict()}, EXIT_YES if w else EXIT_NO
    if c == "angles":
        a = a_property(g, args.mode)
        out = {"holds": a.holds,
               "angles": a.angles.to_dict() if a.angles else None,
               "stiemke": a.stiemke.to_dict() if a.stiemke else None,
               "hall": a.hall.to_dict()}
        return out, EXIT_YES if a.holds else EXIT_NO
    if c == "selfdual":
        r = self_dual_check(g)
        return r.to_dict(), EXIT_YES if r.direct_test else EXIT_NO

    f = io.load_function(args.spec, seed=args.seed)
    if c == "canonical":
        cs = critical_points(f)
        return {"function": io.function_to_spec(f),
                "critical_points": [[z.real, z.imag] for z in cs.points],
                "critical_values": [[v.real, v.imag] for v in cs.values],
                "critical_log_modulus_spread": cs.log_modulus_spread()}, EXIT_YES
    if c == "extract":
        pt = flow.trace_separatrices(f, args.horizon, rotated=not args.no_level,
                                     connection_tol=args.connection_tol)
        ex = flow.extract_graphs(pt)
        return {"zero_graph": ex.primal.to_dict(), "pole_graph": ex.dual.to_dict(),
                "level_graph": None if ex.level is None else ex.level.to_dict(),
                "diagnostics": ex.diagnostics(),
                "separatrices": pt.to_dict()}, EXIT_YES
    if c == "portrait":
        from .portrait import PortraitStyle, render_svg

        pt = flow.trace_separatrices(f, args.horizon, rotated=not args.no_level,
                                     connection_tol=args.connection_tol, record=True)
        style = PortraitStyle(size=args.size, raster=args.raster,
                              unstable_color=args.unstable_color, stable_color=args.stable_color,
                              rotated_color=args.level_color, raster_color=args.raster_color,
                              separatrix_width=args.separatrix_width,
                              raster_width=args.raster_width)
        return render_svg(pt, style), EXIT_YES
    if c == "roundtrip":
        ref = io.load_graph(args.reference) if args.reference else (g2() if f.order == 2 else None)
        rep = flow.newton_roundtrip(f, ref, args.horizon)
        ok = rep.is_newton and (ref is None or rep.reference_witness is not None)
        out = rep.to_dict()
        out["zero_graph"] = rep.graphs.primal.to_dict()
        out["pole_graph"] = rep.graphs.dual.to_dict()
        return out, EXIT_YES if ok else EXIT_NO
    raise UsageError(f"unknown command {c!r}")


def main(argv=None) -> int:
    from .errors import NewtonGraphsError

    try:
        args = build_parser().parse_args(argv)
        _threads()
        result, code = _run(args)
    except (UsageError, NewtonGraphsError) as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": "input_error", "message": str(exc)}) + "\n")
        return EXIT_ERROR
    from .io import dumps

    text = result if isinstance(result, str) else dumps(result)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(json.dumps({"error": "output_error", "message": str(exc)}) + "\n")
            return EXIT_ERROR
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
