"""JSON forms of creatures, colorings, conditions, names, parameter tables and reports.

Every loader validates what it reads and reports the offending location.
ExtNats travel in prefix notation, bitstrings as strings, and BOTTOM as "_".
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any

from .creatures import Creature, SplitCreature, TabularCreature, TabularCreatureSystem
from .decision import BOTTOM, FiniteCondition, NameTable, _sort_vals
from .errors import DecisiveError, SchemaError
from .extnat import ExtNat, _parse_raw, from_raw, parse, to_text
from .rank import RankParams, from_bitstring
from .schedules import parse_schedule
from .towers import Grid, ParamTables, Recip

SCHEMA = "decisive-report/1"
BOTTOM_TEXT = "_"


def _need(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"{where}: missing field {key!r}")
    return data[key]


def _wrap(where: str, fn, *args):
    try:
        return fn(*args)
    except SchemaError as exc:
        raise SchemaError(f"{where}: {exc}") from None
    except DecisiveError as exc:
        raise SchemaError(f"{where}: {exc}") from None
    except (TypeError, ValueError, KeyError) as exc:
        raise SchemaError(f"{where}: {type(exc).__name__}: {exc}") from None


# ------------------------------------------------------------------ ExtNat and friends


def ext_to_json(x) -> str:
    return to_text(x)


def ext_from_json(s) -> ExtNat:
    return parse(str(s))


def recip_from_text(s: str) -> Recip:
    raw, j = _parse_raw(s.replace(" ", ""), 0)
    if not (isinstance(raw, tuple) and raw[0] == "recip" and len(raw[1]) == 1):
        raise SchemaError(f"bad reciprocal {s!r}")
    return Recip(from_raw(raw[1][0]))


def params_to_json(p: RankParams) -> dict:
    return p.to_dict()


def params_from_json(d: dict, where: str = "params") -> RankParams:
    return _wrap(
        where,
        lambda: RankParams(
            B=int(d.get("B", 2)),
            n=int(d.get("n", 0)),
            flarge=parse_schedule(str(d.get("flarge", "default"))),
            r=Fraction(str(d.get("r", "1"))),
        ),
    )


# ------------------------------------------------------------------ creatures


def system_to_json(system: TabularCreatureSystem) -> dict:
    return system.to_json()


def system_from_json(d: dict, where: str = "system") -> TabularCreatureSystem:
    if d.get("kind", "tabular") != "tabular":
        raise SchemaError(f"{where}: expected a tabular system")
    r = _need(d, "r", where)
    entries = _need(d, "creatures", where)
    return _wrap(where, TabularCreatureSystem, Fraction(str(r)), entries)


def creature_to_json(c: Creature) -> dict:
    if isinstance(c, SplitCreature):
        return {
            "kind": "split",
            "J": c.J,
            "k": c.k,
            "c": sorted(c.bitstrings()),
            "params": params_to_json(c.params),
        }
    if isinstance(c, TabularCreature):
        return {"kind": "tabular-creature", "system": system_to_json(c.system), "creature": c.cid}
    raise SchemaError(f"cannot serialize {type(c).__name__}")


def creature_from_json(d: dict, where: str = "creature", systems: list | None = None) -> Creature:
    kind = _need(d, "kind", where)
    if kind == "split":
        J = int(_need(d, "J", where))
        values = _need(d, "c", where)
        bad = [v for v in values if not isinstance(v, str) or len(v) != J]
        if bad:
            raise SchemaError(f"{where}.c: {bad[0]!r} is not a bitstring of length {J}")
        params = params_from_json(d.get("params", {}), f"{where}.params")
        cs = _wrap(f"{where}.c", lambda: frozenset(from_bitstring(v) for v in values))
        return _wrap(where, SplitCreature, J, cs, int(d.get("k", 0)), params)
    if kind == "tabular-creature":
        ref = _need(d, "system", where)
        if isinstance(ref, int):
            if systems is None or not 0 <= ref < len(systems):
                raise SchemaError(f"{where}.system: no system with index {ref}")
            system = systems[ref]
        else:
            system = system_from_json(ref, f"{where}.system")
        cid = _need(d, "creature", where)
        return _wrap(where, system.__getitem__, cid)
    raise SchemaError(f"{where}: unknown creature kind {kind!r}")


# ------------------------------------------------------------------ colorings


def _key_text(x) -> str:
    return ",".join(map(str, x)) if isinstance(x, tuple) else str(x)


def coloring_to_json(F: dict) -> dict:
    return {"kind": "coloring", "table": {_key_text(k): v for k, v in sorted(F.items(), key=lambda t: _key_text(t[0]))}}


def coloring_from_json(d: dict, domain: list, where: str = "coloring") -> dict:
    """Coloring keyed like ``domain`` (values or value tuples); every element must be colored."""
    table = _need(d, "table", where)
    out = {}
    for x in domain:
        key = _key_text(x)
        if key not in table:
            raise SchemaError(f"{where}.table: no color for {key!r}")
        out[x] = table[key]
    extra = set(table) - {_key_text(x) for x in domain}
    if extra:
        raise SchemaError(f"{where}.table: {sorted(extra)[0]!r} is outside the domain")
    return out


# ------------------------------------------------------------------ conditions and names


def _system_index(systems: list, system):
    for i, s in enumerate(systems):
        if s is system:
            return i
    systems.append(system)
    return len(systems) - 1


def condition_to_json(p: FiniteCondition) -> dict:
    systems: list = []
    levels = []
    for c in p.creatures:
        if isinstance(c, TabularCreature):
            levels.append({"kind": "tabular-creature", "system": _system_index(systems, c.system), "creature": c.cid})
        else:
            levels.append(creature_to_json(c))
    return {
        "kind": "condition",
        "trunk": list(p.trunk),
        "levels": levels,
        "r": [str(x) for x in p.r],
        "systems": [system_to_json(s) for s in systems],
    }


def condition_from_json(d: dict, where: str = "condition", base: Path | None = None) -> FiniteCondition:
    systems = [system_from_json(s, f"{where}.systems[{i}]") for i, s in enumerate(d.get("systems", []))]
    cs = []
    for i, lv in enumerate(_need(d, "levels", where)):
        loc = f"{where}.levels[{i}]"
        if isinstance(lv, str):
            path = Path(lv) if base is None else base / lv
            lv = _wrap(loc, lambda: json.loads(path.read_text()))
        cs.append(creature_from_json(lv, loc, systems))
    r = d.get("r") or ()
    return _wrap(where, FiniteCondition, tuple(_need(d, "trunk", where)), cs, tuple(Fraction(str(x)) for x in r))


def name_to_json(tau: NameTable) -> dict:
    table = {}
    for b, v in tau.as_dict().items():
        table[_key_text(b)] = BOTTOM_TEXT if v is BOTTOM else v
    return {"kind": "name", "levels": tau.levels, "table": table}


def name_from_json(d: dict, where: str = "name") -> NameTable:
    levels = _need(d, "levels", where)
    table = _need(d, "table", where)
    mapping = {}
    for b in product(*[_sort_vals(lv) for lv in levels]):
        key = _key_text(b)
        if key not in table:
            raise SchemaError(f"{where}.table: missing branch {key!r}")
        v = table[key]
        mapping[b] = BOTTOM if v == BOTTOM_TEXT else v
    return _wrap(where, NameTable.from_mapping, levels, mapping)


# ------------------------------------------------------------------ parameter tables


def tables_from_json(d: dict, where: str = "tables") -> ParamTables:
    def conv():
        return ParamTables(
            E=int(d["E"]),
            L=int(d["L"]),
            f=[[parse(x) for x in row] for row in d["f"]],
            g=[[parse(x) for x in row] for row in d["g"]],
            fmax=[parse(x) for x in d["fmax"]],
            phi_lt=[parse(x) for x in d["phi_lt"]],
            r=[recip_from_text(x) for x in d["r"]],
            schedule=parse_schedule(d.get("schedule", "default")),
        )

    return _wrap(where, conv)


def grid_from_json(d: dict, where: str = "grid") -> Grid:
    def pairs(m):
        return {tuple(int(t) for t in k.split(",")): parse(v) for k, v in m.items()}

    def conv():
        return Grid(
            N=int(d["N"]),
            f=pairs(d["f"]),
            g=pairs(d["g"]),
            phi_lt=[parse(x) for x in d["phi_lt"]],
            r=[recip_from_text(x) for x in d["r"]],
            schedule=parse_schedule(d.get("schedule", "default")),
        )

    return _wrap(where, conv)


# ------------------------------------------------------------------ files and reports


def load_json(path, where: str | None = None) -> Any:
    where = where or str(path)
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"{where}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{where}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def digest(obj) -> str:
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


def make_report(command: list, params: dict, checks: list, seed=None, wall_clock=None) -> dict:
    """A versioned run report; wall-clock is included only when given."""
    status = "pass"
    if any(c.get("status") in ("fail", "error") for c in checks):
        status = "fail"
    rep = {
        "schema": SCHEMA,
        "command": list(command),
        "params": params,
        "digest": digest(params),
        "seed": seed,
        "status": status,
        "checks": checks,
    }
    if wall_clock is not None:
        rep["wall_clock"] = round(wall_clock, 6)
    return rep


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"


__all__ = [
    "SCHEMA",
    "ext_to_json",
    "ext_from_json",
    "recip_from_text",
    "params_to_json",
    "params_from_json",
    "system_to_json",
    "system_from_json",
    "creature_to_json",
    "creature_from_json",
    "coloring_to_json",
    "coloring_from_json",
    "condition_to_json",
    "condition_from_json",
    "name_to_json",
    "name_from_json",
    "tables_from_json",
    "grid_from_json",
    "load_json",
    "canonical",
    "digest",
    "make_report",
    "dump_report",
]
