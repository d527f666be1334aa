"""Creatures: split creatures (c, k) over 2^J and explicit tabular systems.

Every creature exposes the same small interface used by the homogenization
and decision code:

``val``, ``norm``, ``r``, ``in_sigma_of(c)``, ``sigma()``, ``children()``,
``halve()``, ``unhalve(d)``, ``big_successor(F, drop)``, ``big_extract(F)``,
``decisive_witness()``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Hashable, Iterable, Iterator, Mapping

from .errors import (
    InvalidCreature,
    KindMismatch,
    NoWitness,
    NormTooSmall,
    PreconditionViolated,
)
from .norms import NormValue
from .rank import (
    DEFAULT_J_CAP,
    PrenormWitness,
    RankParams,
    pigeonhole_index,
    prenorm,
    prenorm_witness,
    to_bitstring,
)

Coloring = Callable[[Hashable], Hashable]


def as_coloring(F) -> Coloring:
    if callable(F):
        return F
    if isinstance(F, Mapping):
        return F.__getitem__
    raise TypeError("a coloring is a callable or a mapping")


def color_classes(values: Iterable, F) -> dict:
    F = as_coloring(F)
    classes: dict = {}
    for v in values:
        classes.setdefault(F(v), set()).add(v)
    return {col: frozenset(cls) for col, cls in classes.items()}


def _sorted_colors(colors):
    try:
        return sorted(colors)
    except TypeError:
        return sorted(colors, key=repr)


def half_offset(P: int, k: int) -> int:
    """The k-value of the halved creature for prenorm P."""
    return k + (P - k) // 2


class Creature:
    kind = "abstract"

    @property
    def val(self) -> frozenset:
        raise NotImplementedError

    @property
    def norm(self) -> NormValue:
        raise NotImplementedError

    @property
    def r(self) -> Fraction:
        raise NotImplementedError

    def norm_gt(self, t) -> bool:
        return self.norm.gt_const(t)

    def format_value(self, v) -> str:
        return str(v)

    def drop_ok(self, c: "Creature", units) -> bool:
        """nor(self) >= nor(c) - units * r."""
        return self.norm.ge(c.norm, -Fraction(units) * c.r)

    def is_small(self, K: int) -> bool:
        return len(self.val) <= K

    def _same_kind(self, c: "Creature"):
        if type(c) is not type(self):
            raise KindMismatch(f"{self.kind} vs {c.kind}")

    def big_successors(self, F, drop) -> Iterator["Creature"]:
        """All successors that are F-homogeneous and lose at most ``drop`` norm."""
        F = as_coloring(F)
        for d in self.sigma():
            cols = {F(v) for v in d.val}
            if len(cols) == 1 and d.norm.ge(self.norm, -Fraction(drop)):
                yield d


# ------------------------------------------------------------------ split creatures


@dataclass(frozen=True)
class SplitCreature(Creature):
    J: int
    c: frozenset
    k: int
    params: RankParams = field(default_factory=RankParams)

    kind = "split"

    def __post_init__(self):
        object.__setattr__(self, "c", frozenset(self.c))
        if self.k < 0:
            raise InvalidCreature("k must be a natural number")
        if not self.c:
            raise InvalidCreature("c must be nonempty")
        if any(b < 0 or b >> self.J for b in self.c):
            raise InvalidCreature("value outside 2^J")
        if self.J > DEFAULT_J_CAP:
            raise InvalidCreature(f"J={self.J} exceeds the cap {DEFAULT_J_CAP}")
        if self.k > self.prenorm - 1:
            raise InvalidCreature(f"invariant k <= prenorm(c)-1 violated: k={self.k}, prenorm={self.prenorm}")

    @cached_property
    def witness(self) -> PrenormWitness:
        return prenorm_witness(self.c, self.J, self.params)

    @property
    def prenorm(self) -> int:
        return self.witness.value

    @property
    def x(self) -> int:
        return self.prenorm - self.k

    @property
    def val(self) -> frozenset:
        return self.c

    @property
    def r(self) -> Fraction:
        return self.params.r

    @property
    def norm(self) -> NormValue:
        return NormValue.exact_log(self.x, self.params.r)

    def with_values(self, d: Iterable[int], k: int | None = None) -> "SplitCreature":
        return SplitCreature(self.J, frozenset(d), self.k if k is None else k, self.params)

    def format_value(self, v) -> str:
        return to_bitstring(v, self.J)

    def bitstrings(self) -> list[str]:
        return sorted(to_bitstring(b, self.J) for b in self.c)

    def __repr__(self):
        return f"SplitCreature(J={self.J}, |c|={len(self.c)}, k={self.k}, prenorm={self.prenorm})"

    # -- Sigma
    def in_sigma_of(self, c: Creature) -> bool:
        self._same_kind(c)
        if (self.J, self.params) != (c.J, c.params):
            raise KindMismatch("split creatures with different J or parameters")
        return self.c <= c.c and self.k >= c.k

    def sigma(self) -> Iterator["SplitCreature"]:
        """Every (d, k') with d subset of c and k' >= k; exponential in |c|."""
        vals = sorted(self.c)
        for size in range(len(vals), 0, -1):
            for sub in combinations(vals, size):
                P = prenorm(sub, self.J, self.params)
                for k2 in range(self.k, P):
                    yield SplitCreature(self.J, frozenset(sub), k2, self.params)

    def children(self) -> list["SplitCreature"]:
        out = []
        if self.k + 1 <= self.prenorm - 1:
            out.append(self.with_values(self.c, self.k + 1))
        if len(self.c) > 1:
            for b in sorted(self.c):
                sub = self.c - {b}
                if prenorm(sub, self.J, self.params) >= self.k + 1:
                    out.append(self.with_values(sub))
        return out

    # -- halving
    def halve(self) -> "SplitCreature":
        if not self.norm_gt(1):
            raise NormTooSmall("halving needs nor(c) > 1")
        return self.with_values(self.c, half_offset(self.prenorm, self.k))

    def unhalve(self, d: "SplitCreature") -> "SplitCreature":
        h = self.halve()
        if not d.in_sigma_of(h):
            raise PreconditionViolated("d is not a successor of half(c)")
        if not d.norm_gt(0):
            raise PreconditionViolated("un-halving needs nor(d) > 0")
        out = self.with_values(d.c, self.k)
        assert out.drop_ok(self, 1) and out.val <= d.val
        return out

    # -- bigness
    def big_successor(self, F, drop=None) -> "SplitCreature | None":
        """Best F-homogeneous successor; the full color class with unchanged k is optimal."""
        drop = self.r if drop is None else Fraction(drop)
        best = None
        for col, cls in color_classes(self.c, F).items():
            P = prenorm(cls, self.J, self.params)
            if P - self.k >= 1 and (best is None or P > best[0]):
                best = (P, cls)
        if best is None:
            return None
        d = self.with_values(best[1])
        return d if d.norm.ge(self.norm, -drop) else None

    def big_extract(self, F) -> "SplitCreature":
        """Homogeneous successor found by pigeonhole over the prenorm witness blocks."""
        if not self.norm_gt(1):
            raise PreconditionViolated("bigness extraction needs nor(c) > 1")
        classes = color_classes(self.c, F)
        blocks = self.witness.blocks
        if len(classes) > len(blocks):
            raise PreconditionViolated(f"{len(classes)} colors but only {len(blocks)} witness blocks")
        pieces = [classes[col] for col in _sorted_colors(classes)]
        pieces += [frozenset()] * (len(blocks) - len(pieces))
        try:
            i = pigeonhole_index(self.c, self.witness.u, pieces, blocks)
        except NoWitness as exc:  # impossible when the witness is correct
            raise AssertionError(f"pigeonhole failed on a valid witness: {exc}") from None
        d = self.with_values(pieces[i])
        assert 2 * d.x >= self.x
        return d

    # -- decisiveness
    def decisive_witness(self):
        """(K, d_minus, d_plus) read off the prenorm witness, or None."""
        if not self.norm_gt(1):
            raise NormTooSmall("decisiveness needs nor(c) > 1")
        w = self.witness
        blocks = w.blocks
        j1 = w.witness.cuts[1]
        K = 1 << j1
        if K > len(blocks):
            return None
        low = (1 << j1) - 1
        first = sum(1 << i for i in blocks[0])
        reps: dict = {}
        for b in sorted(self.c, key=lambda v: to_bitstring(v, self.J)):
            reps.setdefault(b & first, b)
        d_minus = self.with_values(reps.values())
        classes = color_classes(self.c, lambda b: b & low)
        pieces = [classes[col] for col in sorted(classes)]
        pieces += [frozenset()] * (len(blocks) - len(pieces))
        i = pigeonhole_index(self.c, w.u, pieces, blocks)
        assert i >= 1, "pigeonhole index 0 in the decisiveness construction"
        d_plus = self.with_values(pieces[i])
        return K, d_minus, d_plus


# ------------------------------------------------------------------ tabular systems


@dataclass
class _Entry:
    val: frozenset
    norm: Fraction
    succ: tuple
    half: Hashable | None = None
    witness: tuple | None = None  # (K, small, big)


class TabularCreatureSystem:
    """Finite explicit creating pair, used as a fixture for the algorithms."""

    def __init__(self, r, entries: Mapping):
        self.r = Fraction(r)
        self.entries: dict = {}
        for cid, e in entries.items():
            if isinstance(e, _Entry):
                self.entries[cid] = e
                continue
            w = e.get("witness")
            if isinstance(w, Mapping):
                w = (int(w["K"]), w["small"], w["big"])
            self.entries[cid] = _Entry(
                frozenset(e["val"]),
                Fraction(str(e["norm"])),
                tuple(e.get("succ", ())),
                e.get("half"),
                tuple(w) if w is not None else None,
            )
        self._closure = self._close()
        self.validate()

    def _close(self) -> dict:
        out = {}
        for cid in self.entries:
            seen = {cid}
            todo = deque([cid])
            while todo:
                x = todo.popleft()
                for y in self.entries[x].succ:
                    if y not in self.entries:
                        raise InvalidCreature(f"creature {x!r} lists unknown successor {y!r}")
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            out[cid] = frozenset(seen)
        return out

    def validate(self):
        for cid, e in self.entries.items():
            if not e.val:
                raise InvalidCreature(f"creature {cid!r}: empty value set")
            if e.norm < 0:
                raise InvalidCreature(f"creature {cid!r}: negative norm")
            if len(e.val) == 1 and e.norm != 0:
                raise InvalidCreature(f"creature {cid!r}: a single value forces norm 0")
            for did in self._closure[cid]:
                d = self.entries[did]
                if not d.val <= e.val:
                    raise InvalidCreature(f"{did!r} in Sigma({cid!r}) but val is not a subset")
                if d.norm > e.norm:
                    raise InvalidCreature(f"{did!r} in Sigma({cid!r}) but its norm is larger")
            if e.half is not None:
                if e.half not in self._closure[cid]:
                    raise InvalidCreature(f"half of {cid!r} is not a successor")
                if self.entries[e.half].norm < e.norm - self.r:
                    raise InvalidCreature(f"half of {cid!r} loses more than r")
            if e.witness is not None:
                K, s, b = e.witness
                for x in (s, b):
                    if x not in self._closure[cid]:
                        raise InvalidCreature(f"witness {x!r} of {cid!r} is not a successor")

    def __getitem__(self, cid) -> "TabularCreature":
        if cid not in self.entries:
            raise KeyError(cid)
        return TabularCreature(self, cid)

    def creatures(self) -> list["TabularCreature"]:
        return [TabularCreature(self, cid) for cid in self.entries]

    def successors(self, cid) -> frozenset:
        return self._closure[cid]

    def to_json(self) -> dict:
        out = {}
        for cid, e in self.entries.items():
            item = {"val": sorted(e.val, key=repr), "norm": str(e.norm), "succ": list(e.succ)}
            if e.half is not None:
                item["half"] = e.half
            if e.witness is not None:
                K, s, b = e.witness
                item["witness"] = {"K": K, "small": s, "big": b}
            out[str(cid)] = item
        return {"kind": "tabular", "r": str(self.r), "creatures": out}


@dataclass(frozen=True, eq=False)
class TabularCreature(Creature):
    system: TabularCreatureSystem
    cid: Hashable

    kind = "tabular"

    def __eq__(self, other):
        return isinstance(other, TabularCreature) and other.system is self.system and other.cid == self.cid

    def __hash__(self):
        return hash((id(self.system), self.cid))

    def __repr__(self):
        return f"TabularCreature({self.cid!r})"

    @property
    def entry(self) -> _Entry:
        return self.system.entries[self.cid]

    @property
    def val(self) -> frozenset:
        return self.entry.val

    @property
    def r(self) -> Fraction:
        return self.system.r

    @property
    def norm(self) -> NormValue:
        return NormValue.rational(self.entry.norm)

    def in_sigma_of(self, c: Creature) -> bool:
        self._same_kind(c)
        if c.system is not self.system:
            raise KindMismatch("creatures from different tabular systems")
        return self.cid in self.system.successors(c.cid)

    def sigma(self) -> Iterator["TabularCreature"]:
        for did in sorted(self.system.successors(self.cid), key=repr):
            yield TabularCreature(self.system, did)

    def children(self) -> list["TabularCreature"]:
        return [TabularCreature(self.system, d) for d in self.entry.succ if d != self.cid]

    def _best(self, cands) -> "TabularCreature | None":
        cands = list(cands)
        if not cands:
            return None
        return min(cands, key=lambda d: (-d.entry.norm, repr(d.cid)))

    def halve(self) -> "TabularCreature":
        if not self.norm_gt(1):
            raise NormTooSmall("halving needs nor(c) > 1")
        if self.entry.half is None:
            raise PreconditionViolated(f"no half declared for {self.cid!r}")
        return TabularCreature(self.system, self.entry.half)

    def unhalve(self, d: "TabularCreature") -> "TabularCreature":
        h = self.halve()
        if not d.in_sigma_of(h):
            raise PreconditionViolated("d is not a successor of half(c)")
        if not d.norm_gt(0):
            raise PreconditionViolated("un-halving needs nor(d) > 0")
        out = self._best(e for e in self.sigma() if e.drop_ok(self, 1) and e.val <= d.val)
        if out is None:
            raise PreconditionViolated(f"{self.cid!r} cannot un-halve {d.cid!r}")
        return out

    def big_successor(self, F, drop=None) -> "TabularCreature | None":
        drop = self.r if drop is None else Fraction(drop)
        return self._best(self.big_successors(F, drop))

    def big_extract(self, F) -> "TabularCreature":
        if not self.norm_gt(1):
            raise PreconditionViolated("bigness extraction needs nor(c) > 1")
        d = self.big_successor(F)
        if d is None:
            raise PreconditionViolated(f"{self.cid!r} has no homogeneous successor for this coloring")
        return d

    def decisive_witness(self):
        if not self.norm_gt(1):
            raise NormTooSmall("decisiveness needs nor(c) > 1")
        w = self.entry.witness
        if w is None:
            return None
        K, s, b = w
        return K, TabularCreature(self.system, s), TabularCreature(self.system, b)


# ------------------------------------------------------------------ module-level API


def norm(c: Creature) -> NormValue:
    return c.norm


def in_sigma(d: Creature, c: Creature) -> bool:
    return d.in_sigma_of(c)


def halve(c: Creature) -> Creature:
    return c.halve()


def unhalve(d: Creature, c: Creature) -> Creature:
    return c.unhalve(d)


def big_extract(c: Creature, F) -> Creature:
    return c.big_extract(F)


def decisive_witness(c: Creature):
    return c.decisive_witness()


def sigma_upto(c: Creature, depth: int | None) -> list[Creature]:
    """Successors reachable in at most ``depth`` immediate steps (all of them for None)."""
    if depth is None:
        return list(c.sigma())
    seen = {c}
    order = [c]
    frontier = [c]
    for _ in range(depth):
        nxt = []
        for x in frontier:
            for y in x.children():
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    nxt.append(y)
        frontier = nxt
    return order
