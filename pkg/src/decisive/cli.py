"""Command-line front end; every command writes a JSON run report."""
from __future__ import annotations

import argparse
import random
import sys
import time
from fractions import Fraction
from itertools import product
from pathlib import Path

from . import creatures as cr
from . import decision as dc
from . import homogenize as hm
from . import rank as rk
from . import serialize as se
from . import towers as tw
from . import verify as vf
from .errors import DecisiveError, SchemaError
from .extnat import bit_budget, budget
from .fixtures import random_homogenization_instance
from .schedules import parse_schedule

# which library operations each subcommand exercises
DISPATCH = {
    "rank": ["rank.ns", "rank.interval_witness", "rank.rank_ge"],
    "construct": [
        "rank.choose_J", "rank.psi", "rank.minimal_block", "rank.prenorm_witness", "creatures.norm",
        "creatures.halve", "creatures.decisive_witness", "towers.psi_upper",
    ],
    "verify": [
        "verify.verify", "creatures.big_extract", "rank.pigeonhole_index", "rank.prenorm", "creatures.unhalve",
        "creatures.in_sigma", "creatures.halve",
    ],
    "homogenize": [
        "homogenize.multi_homogenize", "homogenize.homogenize_product", "homogenize.boost", "homogenize.avoid",
        "homogenize.homogeneous_solutions", "towers.exp_tower",
    ],
    "towers gen": ["towers.gen_sequences", "towers.check_assumption", "towers.phi_r", "towers.psi_upper"],
    "towers check": ["towers.check_assumption", "towers.check_grid", "towers.ext_compare"],
    "towers grid": ["towers.gen_grid", "towers.check_grid", "towers.phi_r", "towers.psi_upper"],
    "decide": [
        "decision.and_value", "decision.decision_status", "decision.leq", "decision.leq_n",
        "decision.basic_step", "decision.pure_decide", "decision.deciding_successor",
    ],
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers


def _fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from None


def parse_set(text: str) -> list[int]:
    """``0-3,7`` -> [0, 1, 2, 3, 7]; empty text is the empty set."""
    out: set = set()
    for part in filter(None, (t.strip() for t in text.split(","))):
        lo, dash, hi = part.partition("-")
        try:
            if dash:
                a, b = int(lo), int(hi)
                if a > b or a < 0:
                    raise ValueError
                out.update(range(a, b + 1))
            else:
                out.add(int(part))
        except ValueError:
            raise UsageError(f"bad set element {part!r}") from None
    return sorted(out)


def _params(args) -> rk.RankParams:
    return rk.RankParams(B=args.B, n=args.n, flarge=args.schedule, r=args.r)


def _check(name: str, ok, **detail) -> dict:
    status = ok if isinstance(ok, str) else ("pass" if ok else "fail")
    return {"check": name, "status": status, **detail}


def _load_creature(path: str) -> cr.Creature:
    return se.creature_from_json(se.load_json(path), path)


def _muted(v):
    return v if isinstance(v, (int, str)) else str(v)


# ------------------------------------------------------------------ commands


def cmd_rank(args, out):
    params = rk.RankParams(B=args.B, n=args.n, flarge=args.schedule)
    u = parse_set(args.set)
    value = rk.ns(u, params)
    w = rk.interval_witness(u, params)
    out.append(str(value))
    detail = {"set": u, "ns": value}
    if w is not None:
        detail["cuts"] = list(w.cuts)
    return {"B": args.B, "n": args.n, "schedule": args.schedule.key, "set": u}, [_check("ns", "pass", **detail)]


def cmd_construct(args, out):
    params = _params(args)
    J = rk.choose_J(params)
    Psi = rk.psi(params)
    out.append(f"J={J}")
    out.append(f"Psi={Psi}")
    if args.J is not None:
        J = args.J
    full = cr.SplitCreature(J, rk.full_cube(J), 0, params)
    out.append(f"max_norm={full.norm}")
    detail = {"J": rk.choose_J(params), "Psi": Psi, "cube_J": J, "prenorm": full.prenorm, "max_norm": str(full.norm)}
    detail["block_ends"] = [rk.minimal_block(0, k, params) for k in range(1, params.target_rank() + 1)]
    detail["psi_symbolic"] = str(tw.psi_upper(args.n, args.B, args.r, "symbolic", args.schedule))
    if full.norm_gt(1):
        detail["half"] = {"k": full.halve().k}
        w = full.decisive_witness()
        detail["decisive_witness"] = None if w is None else {"K": w[0]}
    if args.out:
        Path(args.out).write_text(se.canonical(se.creature_to_json(full)) + "\n")
    return params.to_dict(), [_check("construct", "pass", **detail)]


def _property(args):
    name = args.property
    if name == "big":
        return vf.Big(args.B)
    if name == "hereditarily-big":
        return vf.HereditarilyBig(args.B, args.depth)
    if name == "halving":
        return vf.Halving()
    if name == "decisive":
        return vf.Decisive(args.dec_n, args.depth)
    raise UsageError(f"unknown property {name!r}")


def cmd_verify(args, out):
    c = _load_creature(args.creature)
    mode = vf.Exhaustive(args.cap) if args.mode == "exhaustive" else vf.Sample(args.samples, args.seed)
    rep = vf.verify(c, _property(args), args.r, mode)
    out.append(f"{rep.property}: {rep.status}")
    params = {"property": rep.property, "r": str(args.r) if args.r is not None else None, "mode": args.mode,
              "creature": se.creature_to_json(c)}
    checks = [_check(rep.property, rep.status, count=rep.count, counterexamples=rep.counterexamples,
                     detail=rep.detail)]
    if args.property == "big" and isinstance(c, cr.SplitCreature) and c.norm_gt(1):
        checks.append(_extract_check(c, args))
    return params, checks


def _extract_check(c: cr.SplitCreature, args, rounds: int = 32):
    """Pigeonhole extraction on seeded B-colorings: homogeneous, a successor, half the width."""
    rng = random.Random(args.seed)
    vals = sorted(c.val)
    B = min(args.B, len(c.witness.blocks))
    bad = []
    for _ in range(rounds):
        F = {v: rng.randrange(B) for v in vals}
        d = c.big_extract(F)
        if not (d.in_sigma_of(c) and len({F[v] for v in d.val}) == 1 and 2 * d.x >= c.x):
            bad.append({"coloring": {c.format_value(v): F[v] for v in vals}})
    if bad:
        return _check("extract", "fail", colors=B, rounds=rounds, counterexamples=bad[:3])
    return _check("extract", "pass", colors=B, rounds=rounds)


def _instance_from_json(d: dict, where: str):
    systems = [se.system_from_json(s, f"{where}.systems[{i}]") for i, s in enumerate(d.get("systems", []))]
    cs = [se.creature_from_json(c, f"{where}.creatures[{i}]", systems) for i, c in enumerate(d["creatures"])]
    domain = list(product(*(sorted(c.val, key=c.format_value) for c in cs)))
    table = se._need(d.get("F", {}), "table", f"{where}.F")
    F = {}
    for x in domain:
        key = ",".join(c.format_value(v) for c, v in zip(cs, x))
        if key not in table:
            raise SchemaError(f"{where}.F.table: no color for {key!r}")
        F[x] = table[key]
    return cs, F, d.get("m", 1), int(d.get("t", 1))


def _random_instance(args):
    rng = random.Random(args.seed)
    _systems, cs, F, m, t = random_homogenization_instance(rng, args.k, args.nvals)
    return cs, F, m, t


def _describe(c: cr.Creature):
    if isinstance(c, cr.TabularCreature):
        return c.cid
    return se.creature_to_json(c)


def cmd_homogenize(args, out):
    if args.instance:
        d = se.load_json(args.instance)
        cs, F, m, t = _instance_from_json(d, args.instance)
        params = {"instance": d, "op": args.op}
    else:
        cs, F, m, t = _random_instance(args)
        params = {"random": {"k": args.k, "nvals": args.nvals}, "op": args.op}
    checks = []
    try:
        if args.op == "multi":
            res = hm.multi_homogenize(hm.HomogenizationInstance(cs, F, m, t))
            units = len(cs)
        elif args.op == "product":
            res = hm.homogenize_product(cs, F, args.B, args.delta)
            units = len(cs) + args.delta
        elif args.op == "boost":
            res = [hm.boost(c, args.B, args.delta, len(cs)) for c in cs]
            units = args.delta
        else:
            X = set(args.avoid or [])
            res = [hm.avoid(c, {v for v in c.val if c.format_value(v) in X}, args.B, args.delta) for c in cs]
            units = args.delta + 1
        ok = all(d.in_sigma_of(c) and d.drop_ok(c, units) for c, d in zip(cs, res))
        if args.op in ("multi", "product"):
            ok = ok and len({F[x] for x in product(*(sorted(d.val, key=d.format_value) for d in res))}) == 1
        out.append("success" if ok else "invalid output")
        checks.append(_check(args.op, ok, result=[_describe(d) for d in res]))
        found = True
    except (hm.HomogenizationFailed, DecisiveError) as exc:
        if isinstance(exc, SchemaError):
            raise
        out.append(f"failed: {exc}")
        checks.append(_check(args.op, "fail", error=f"{type(exc).__name__}: {exc}"))
        found = False
    if args.oracle:
        sols = hm.homogeneous_solutions(cs, F, len(cs))
        agree = bool(sols) == found
        out.append(f"oracle: {len(sols)} solutions")
        checks.append(_check("oracle", agree, solutions=len(sols)))
    return params, checks


def cmd_towers(args, out):
    if args.towers_cmd == "gen":
        t = tw.gen_sequences(args.E, args.L, args.schedule)
        rep = tw.check_assumption(t)
        data = t.to_json()
    elif args.towers_cmd == "grid":
        g, rep = tw.gen_grid(args.N, args.schedule)
        data = g.to_json()
    else:
        d = se.load_json(args.tables)
        if "E" in d:
            rep = tw.check_assumption(se.tables_from_json(d, args.tables))
        else:
            rep = tw.check_grid(se.grid_from_json(d, args.tables))
        data = None
    bad = [i for i in rep["items"] if i["status"] != "pass"]
    out.append(f"{len(rep['items']) - len(bad)}/{len(rep['items'])} certified")
    if data is not None and args.out:
        Path(args.out).write_text(se.canonical(data) + "\n")
    params = {"towers": args.towers_cmd, "schedule": args.schedule.key}
    params.update({k: getattr(args, k) for k in ("E", "L", "N") if getattr(args, k, None) is not None})
    return params, [_check("towers " + args.towers_cmd, not bad, items=len(rep["items"]), uncertified=bad)]


def cmd_decide(args, out):
    if args.toy:
        rng = random.Random(args.seed)
        p = dc.random_toy_condition(rng, N=args.depth, system=dc.toy_system(H=args.H))
        tau = dc.random_name(rng, p, bottom=args.bottom)
    else:
        if not (args.condition and args.name):
            raise UsageError("decide needs a condition and a name file, or --toy")
        p = se.condition_from_json(se.load_json(args.condition), args.condition, Path(args.condition).parent)
        tau = se.name_from_json(se.load_json(args.name), args.name)
    if args.trunk:
        p = dc.and_value(p, [int(v) if v.lstrip("-").isdigit() else v for v in args.trunk.split(",")])
    params = {"condition": se.condition_to_json(p), "name": se.name_to_json(tau), "M": args.M, "op": args.op,
              "target": args.target}
    checks = [_check("status", "pass", decided_below=dc.decision_status(p, tau))]
    if args.op == "basic":
        log: list = []
        q, flag = dc.basic_step(p, args.M, tau, args.target, log=log)
        out.append(f"flag={flag}")
        detail = {"flag": flag, "q": se.condition_to_json(q),
                  "steps": [{"value": _muted(s.value), "outcome": _muted(s.outcome), "h": s.h} for s in log]}
        checks.append(_check("basic_step", dc.leq(q, p), **detail))
        if flag == dc.HALF:
            hit = dc.deciding_successor(q, tau, args.target)
            checks.append(_check("dichotomy", hit is None,
                                 counterexample=None if hit is None else [_muted(hit[0]), [sorted(v) for v in hit[1]]]))
        else:
            checks.append(_check("dichotomy", dc.decision_status(q, tau) is not None))
    else:
        res: list = []
        q = dc.pure_decide(p, args.M, tau, shortcut=not args.no_shortcut, result=res)
        ok, h = dc.leq_n(q, p, args.M, with_h=True)
        st = dc.decision_status(q, tau)
        out.append(f"decided-below({st})")
        checks.append(_check("pure_decide", ok and st is not None, h=h, decided_below=st,
                             q=se.condition_to_json(q)))
    return params, checks


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--schedule", default="default", help="default | const:<v> | table:<v,...> | file:<path>")
    common.add_argument("--bit-budget", type=int, default=None, help="bits allowed in exact comparisons")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--mode", choices=["exhaustive", "sample"], default="exhaustive")
    common.add_argument("--report", default=None, help="write the JSON report here ('-' for stdout)")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    ap = argparse.ArgumentParser(prog="decisive", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("rank", parents=[common], help="rank ns of a finite set")
    p.add_argument("--B", type=int, default=2)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--set", default="", help="elements, e.g. 0-3,7")

    p = sub.add_parser("construct", parents=[common], help="J and Psi for given parameters")
    p.add_argument("--B", type=int, default=2)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--r", type=_fraction, default=Fraction(1))
    p.add_argument("--J", type=int, default=None, help="build the full creature at this J instead")
    p.add_argument("--out", help="write the full creature as JSON")

    p = sub.add_parser("verify", parents=[common], help="check a creature property")
    p.add_argument("creature")
    p.add_argument("--property", required=True, choices=["big", "hereditarily-big", "halving", "decisive"])
    p.add_argument("--B", type=int, default=2)
    p.add_argument("--r", type=_fraction, default=None, help="allowed norm drop (default: the creature's r)")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--dec-n", type=int, default=1, help="n in decisiveness")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--cap", type=int, default=vf.DEFAULT_CAP)

    p = sub.add_parser("homogenize", parents=[common], help="homogenize a coloring of a product")
    p.add_argument("instance", nargs="?")
    p.add_argument("--op", choices=["multi", "product", "boost", "avoid"], default="multi")
    p.add_argument("--B", type=int, default=2)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--avoid", nargs="*", help="values to avoid (op avoid)")
    p.add_argument("--k", type=int, default=2, help="random instance: number of creatures")
    p.add_argument("--nvals", type=int, default=4, help="random instance: values per creature")
    p.add_argument("--oracle", action="store_true", help="compare with exhaustive search")

    p = sub.add_parser("towers", help="parameter tables")
    tsub = p.add_subparsers(dest="towers_cmd", required=True)
    t = tsub.add_parser("gen", parents=[common])
    t.add_argument("--E", type=int, default=3)
    t.add_argument("--L", type=int, default=5)
    t.add_argument("--out")
    t = tsub.add_parser("check", parents=[common])
    t.add_argument("tables")
    t = tsub.add_parser("grid", parents=[common])
    t.add_argument("--N", type=int, default=4)
    t.add_argument("--out")

    p = sub.add_parser("decide", parents=[common], help="decision experiments on finite conditions")
    p.add_argument("condition", nargs="?")
    p.add_argument("name", nargs="?")
    p.add_argument("--op", choices=["basic", "pure"], default="basic")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--target", choices=["essential", "value"], default="essential")
    p.add_argument("--trunk", help="extend the trunk by these comma-separated values first")
    p.add_argument("--toy", action="store_true", help="use a seeded random toy condition and name")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--H", type=_fraction, default=Fraction(3))
    p.add_argument("--bottom", type=float, default=0.3)
    p.add_argument("--no-shortcut", action="store_true", help="run the chain even if p already decides")
    return ap


COMMANDS = {
    "rank": cmd_rank,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "homogenize": cmd_homogenize,
    "towers": cmd_towers,
    "decide": cmd_decide,
}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    lines: list[str] = []
    start = time.perf_counter()
    try:
        args.schedule = parse_schedule(args.schedule)
        with budget(args.bit_budget if args.bit_budget is not None else bit_budget()):
            params, checks = COMMANDS[args.cmd](args, lines)
    except (UsageError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DecisiveError as exc:
        params = {}
        checks = [_check(args.cmd, "error", error=f"{type(exc).__name__}: {exc}")]
        lines.append(f"error: {type(exc).__name__}: {exc}")
    wall = time.perf_counter() - start if args.timing else None
    report = se.make_report(argv, params, checks, args.seed, wall)
    for line in lines:
        print(line, file=stdout)
    if args.report == "-":
        stdout.write(se.dump_report(report))
    elif args.report:
        Path(args.report).write_text(se.dump_report(report))
    return 0 if report["status"] == "pass" else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
