"""Command-line front end.

Exit codes: 0 every requested condition HOLDS, 1 some condition FAILS,
2 some condition UNKNOWN and none FAILS, 3 input or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import cones as C
from .cq import FAILS, HOLDS, UNKNOWN, ChainInconsistency, report_chain
from .problem import SCHEMA_VERSION, ProblemError, load, normalized
from .ratgeom import DEFAULT_FACE_CAP, as_v, to_fraction
from .system import CSInstance, KKTInstance, ProblemInstance, cs_to_general, kkt_to_cs
from .verify import empirical_modulus, sequence_falsifier

EXIT_OK, EXIT_FAILS, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3

LABELS = {"nnamcq": "NNAMCQ", "foscms": "FOSCMS", "soscms": "SOSCMS", "dir_pseudo": "dir-pseudo",
          "dir_quasi": "dir-quasi", "cs_pseudo": "CS dir-pseudo", "cs_quasi": "CS dir-quasi"}


def _vector(text: str):
    try:
        return tuple(to_fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise ProblemError(f"bad vector {text!r}: {e}") from None


def _general(inst) -> ProblemInstance:
    if isinstance(inst, KKTInstance):
        return cs_to_general(kkt_to_cs(inst))
    if isinstance(inst, CSInstance):
        return cs_to_general(inst)
    return inst


def _fmt(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def _cone_doc(c) -> dict:
    v = as_v(c)
    return {"rays": [[str(x) for x in r] for r in v.rays], "lines": [[str(x) for x in l] for l in v.lines]}


def _cone_text(c) -> str:
    v = as_v(c)
    if not v.rays and not v.lines:
        return "{0}"
    parts = []
    if v.rays:
        parts.append("rays " + " ".join(_fmt(r) for r in v.rays))
    if v.lines:
        parts.append("lines " + " ".join(_fmt(l) for l in v.lines))
    return "cone[" + "; ".join(parts) + "]"


def _union_text(u) -> str:
    if isinstance(u, C.ConeUnion):
        return "empty" if u.is_empty else " ∪ ".join(_cone_text(p) for p in u.pieces)
    return _cone_text(u)


def _emit(args, doc: dict, lines: list[str]):
    if args.json:
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _status_code(statuses) -> int:
    statuses = list(statuses)
    if FAILS in statuses:
        return EXIT_FAILS
    if UNKNOWN in statuses:
        return EXIT_UNKNOWN
    return EXIT_OK


def cmd_check(args, inst, pfile) -> int:
    cfg = (pfile.sampling.build(seed=args.seed, jobs=args.jobs) if pfile.sampling else
           _default_cfg(args))
    rep = report_chain(inst, cap=args.face_cap, i00_cap=args.i00_cap, cfg=cfg)
    requested = pfile.checks or [v.condition for v in rep.verdicts]
    chosen = [v for v in rep.verdicts if v.condition in requested]
    lines = []
    for v in rep.verdicts:
        mark = "*" if v.condition in requested else " "
        extra = ""
        if v.witness is not None:
            w = v.witness
            extra = (f"u={_fmt(w.u)} " if w.u is not None else "") + f"zeta={_fmt(w.zeta)}"
        elif v.reason:
            extra = v.reason
        lines.append(f"{mark} {LABELS[v.condition]:<14} {v.status:<8} {v.route:<20} {extra}".rstrip())
    lines.append(f"conclusion: {rep.conclusion}")
    doc = {"schema": SCHEMA_VERSION, "command": "check", "requested": list(requested), **rep.to_dict()}
    _emit(args, doc, lines)
    if args.conclude:
        if rep.subregular:
            return EXIT_OK
        return EXIT_UNKNOWN if any(v.status == UNKNOWN for v in rep.verdicts) else EXIT_FAILS
    return _status_code(v.status for v in chosen)


def cmd_cones(args, inst, pfile) -> int:
    g = _general(inst)
    S = g.Lambda
    point = _vector(args.point) if args.point else g.image().coordinates
    if len(point) != S.dim:
        raise ProblemError(f"point has {len(point)} entries, the set lives in R^{S.dim}")
    s = S.point(point)
    T = C.tangent_cone(S, s)
    Nr = C.regular_normal_cone(S, s)
    N = C.limiting_normal_cone(S, s, args.face_cap)
    doc = {"schema": SCHEMA_VERSION, "command": "cones", "point": [str(x) for x in point],
           "tangent": [_cone_doc(p) for p in T.pieces], "regular_normal": _cone_doc(Nr),
           "limiting_normal": [_cone_doc(p) for p in N.pieces]}
    lines = [f"point      {_fmt(point)}", f"T          {_union_text(T)}", f"N^         {_union_text(Nr)}",
             f"N          {_union_text(N)}"]
    if args.direction:
        d = _vector(args.direction)
        if len(d) != S.dim:
            raise ProblemError(f"direction has {len(d)} entries, the set lives in R^{S.dim}")
        Nd = C.directional_normal_cone(S, s, d, args.face_cap)
        doc["direction"] = [str(x) for x in d]
        doc["directional_normal"] = [_cone_doc(p) for p in Nd.pieces]
        lines.append(f"N(.; d)    {_union_text(Nd)}")
    _emit(args, doc, lines)
    return EXIT_OK


def _default_cfg(args):
    from .verify import SamplingConfig
    return SamplingConfig(seed=args.seed or 0, jobs=args.jobs or 1)


def cmd_verify(args, inst, pfile) -> int:
    cfg = pfile.sampling.build(seed=args.seed, jobs=args.jobs) if pfile.sampling else _default_cfg(args)
    tab = empirical_modulus(inst, cfg)
    lines = [f"{'radius':>10} {'counted':>8} {'solutions':>9} {'max ratio':>14} {'serrorb':>14}"]
    for r in tab.rows:
        mr = "-" if r.max_ratio is None else f"{r.max_ratio:.6g}"
        se = "-" if r.serrorb_max_ratio is None else f"{r.serrorb_max_ratio:.6g}"
        lines.append(f"{r.radius:>10.1e} {r.counted:>8} {r.exact_feasible:>9} {mr:>14} {se:>14}")
    flag = {True: "bounded", False: "unbounded", None: "undetermined (fewer than two informative radii)"}[tab.bounded]
    lines.append(f"trend: {flag}")
    _emit(args, {"schema": SCHEMA_VERSION, "command": "verify", **tab.to_dict()}, lines)
    return {True: EXIT_OK, False: EXIT_FAILS, None: EXIT_UNKNOWN}[tab.bounded]


def cmd_witness(args, inst, pfile) -> int:
    g = _general(inst)
    cfg = pfile.sampling.build(seed=args.seed, jobs=args.jobs) if pfile.sampling else _default_cfg(args)
    u, z = _vector(args.direction), _vector(args.zeta)
    if len(u) != g.n or len(z) != g.m:
        raise ProblemError(f"direction must have {g.n} entries and zeta {g.m}")
    try:
        w = sequence_falsifier(g, u, z, args.mode, cfg)
    except ValueError as e:
        raise ProblemError(str(e)) from None
    doc = {"schema": SCHEMA_VERSION, "command": "witness", "mode": args.mode, "found": w is not None,
           "witness": w.to_dict() if w else None}
    if w is None:
        lines = ["no witness found (this is not evidence that the condition holds)"]
    else:
        lines = [f"witness for failure of directional {args.mode}-normality", f"u={_fmt(w.u)} zeta={_fmt(w.zeta)}"]
        for st in w.prefix:
            lines.append(f"  t={st.t} u={_fmt(st.u)} s={_fmt(st.s)} zeta={_fmt(st.zeta)}")
    _emit(args, doc, lines)
    return EXIT_FAILS if w is not None else EXIT_UNKNOWN


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subreg", description="Exact constraint-qualification checks for P(x) in Lambda.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file")
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=None)
    common.add_argument("--face-cap", type=int, default=DEFAULT_FACE_CAP)
    common.add_argument("--i00-cap", type=int, default=8)
    common.add_argument("--dump-normalized", action="store_true", help="print the parsed problem and exit")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="constraint-qualification verdicts and chain report")
    c.add_argument("--conclude", action="store_true", help="exit code follows the subregularity conclusion")
    k = sub.add_parser("cones", parents=[common], help="tangent and normal cones of Lambda")
    k.add_argument("--point")
    k.add_argument("--direction")
    sub.add_parser("verify", parents=[common], help="empirical modulus table")
    w = sub.add_parser("witness", parents=[common], help="sequence falsifier for a given (u, zeta)")
    w.add_argument("--direction", required=True)
    w.add_argument("--zeta", required=True)
    w.add_argument("--mode", choices=("quasi", "pseudo"), default="pseudo")
    return p


COMMANDS = {"check": cmd_check, "cones": cmd_cones, "verify": cmd_verify, "witness": cmd_witness}


def run(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        inst, pfile = load(args.file)
        if args.dump_normalized:
            sys.stdout.write(json.dumps(normalized(inst, pfile), sort_keys=True, indent=2) + "\n")
            return EXIT_OK
        return COMMANDS[args.command](args, inst, pfile)
    except (ProblemError, C.InfeasiblePoint, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    except ChainInconsistency as e:
        sys.stderr.write(f"internal inconsistency: {e}\n")
        return EXIT_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
