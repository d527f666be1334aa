"""Brute-force checkers for bigness, halving and decisiveness of a single creature."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .creatures import Creature, sigma_upto
from .errors import NormTooSmall, PreconditionViolated, SearchSpaceExceeded
from .extnat import Order, compare, ext, power, pow2

DEFAULT_CAP = 10**7
MAX_COUNTEREXAMPLES = 5


# ------------------------------------------------------------------ properties and modes


@dataclass(frozen=True)
class Big:
    B: object  # int or ExtNat

    @property
    def name(self):
        return f"big({self.B})"


@dataclass(frozen=True)
class HereditarilyBig:
    B: object
    depth: int | None = 2

    @property
    def name(self):
        return f"hereditarily-big({self.B},depth={self.depth})"


@dataclass(frozen=True)
class Halving:
    @property
    def name(self):
        return "halving"


@dataclass(frozen=True)
class Decisive:
    n: int
    depth: int | None = 1

    @property
    def name(self):
        return f"decisive({self.n},depth={self.depth})"


@dataclass(frozen=True)
class Exhaustive:
    cap: int = DEFAULT_CAP


@dataclass(frozen=True)
class Sample:
    count: int = 1000
    seed: int = 0


@dataclass
class Report:
    property: str
    status: str  # pass | fail | vacuous
    count: int = 0
    counterexamples: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "vacuous")

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "status": self.status,
            "count": self.count,
            "counterexamples": self.counterexamples,
            "detail": self.detail,
        }


# ------------------------------------------------------------------ colorings


def _effective_colors(B, nvals: int) -> int:
    """Colorings into more colors than values are relabelings of ones into nvals colors."""
    B = ext(B)
    v = B.exact()
    if v is not None:
        return min(v, nvals)
    if compare(B, nvals) is not Order.LT:
        return nvals
    raise PreconditionViolated(f"cannot size the color set {B}")


def count_partitions(n: int, b: int) -> int:
    """Number of partitions of an n-set into at most b blocks."""
    # row[j] = Stirling number S(i, j)
    row = [1] + [0] * b
    for _ in range(n):
        new = [0] * (b + 1)
        for j in range(1, b + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return sum(row) if n else 1


def falling(b: int, j: int) -> int:
    out = 1
    for i in range(j):
        out *= b - i
    return out


def partitions(n: int, b: int):
    """Restricted growth strings of length n using at most b blocks."""
    if n == 0:
        yield ()
        return
    word = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield tuple(word)
            return
        for col in range(min(used + 1, b)):
            word[i] = col
            yield from rec(i + 1, max(used, col + 1))

    yield from rec(1, 1)


def _colorings(values: list, B, mode, stats: dict):
    n = len(values)
    b = _effective_colors(B, n)
    if isinstance(mode, Exhaustive):
        total = count_partitions(n, b)
        if total > mode.cap:
            raise SearchSpaceExceeded(total, mode.cap)
        Bv = ext(B).exact()
        for word in partitions(n, b):
            if Bv is not None:
                stats["colorings"] += falling(Bv, max(word) + 1 if word else 0)
            yield dict(zip(values, word))
    else:
        rng = random.Random(mode.seed)
        for _ in range(mode.count):
            stats["colorings"] += 1
            yield {v: rng.randrange(b) for v in values}


def _show_coloring(c: Creature, F: dict) -> dict:
    return {c.format_value(v): col for v, col in sorted(F.items(), key=lambda t: c.format_value(t[0]))}


# ------------------------------------------------------------------ checks


def _check_big(c: Creature, B, drop: Fraction, mode) -> Report:
    prop = Big(B)
    if ext(B).exact() == 1:
        return Report(prop.name, "pass", 0, detail={"reason": "every creature is 1-big"})
    if not c.norm_gt(1):
        return Report(prop.name, "vacuous", detail={"reason": "nor(c) <= 1"})
    values = sorted(c.val, key=c.format_value)
    stats = {"colorings": 0}
    count = 0
    bad = []
    for F in _colorings(values, B, mode, stats):
        count += 1
        if c.big_successor(F, drop) is None:
            if len(bad) < MAX_COUNTEREXAMPLES:
                bad.append({"coloring": _show_coloring(c, F)})
    status = "fail" if bad else "pass"
    return Report(prop.name, status, count, bad, {"colorings_covered": stats["colorings"]})


def _check_hereditary(c: Creature, B, depth, drop: Fraction, mode) -> Report:
    prop = HereditarilyBig(B, depth)
    if not c.norm_gt(1):
        return Report(prop.name, "vacuous", detail={"reason": "nor(c) <= 1"})
    checked = 0
    bad = []
    for d in sigma_upto(c, depth):
        if not d.norm_gt(1):
            continue
        checked += 1
        rep = _check_big(d, B, drop, mode)
        if rep.status == "fail":
            bad.append({"successor": repr(d), "coloring": rep.counterexamples[0]["coloring"]})
            if len(bad) >= MAX_COUNTEREXAMPLES:
                break
    return Report(prop.name, "fail" if bad else "pass", checked, bad, {"depth": depth})


def _check_halving(c: Creature, drop: Fraction, mode) -> Report:
    name = Halving().name
    if not c.norm_gt(1):
        return Report(name, "vacuous", detail={"reason": "nor(c) <= 1"})
    try:
        h = c.halve()
    except (NormTooSmall, PreconditionViolated) as exc:
        return Report(name, "fail", 0, [{"error": str(exc)}])
    bad = []
    if not h.in_sigma_of(c) or not h.norm.ge(c.norm, -drop):
        bad.append({"half": repr(h), "error": "half(c) loses more than r"})
    succ = [d for d in h.sigma() if d.norm_gt(0)]
    if isinstance(mode, Exhaustive):
        if len(succ) > mode.cap:
            raise SearchSpaceExceeded(len(succ), mode.cap)
    else:
        rng = random.Random(mode.seed)
        succ = [rng.choice(succ) for _ in range(mode.count)] if succ else []
    for d in succ:
        try:
            e = c.unhalve(d)
        except PreconditionViolated as exc:
            bad.append({"successor": repr(d), "error": str(exc)})
            continue
        if not (e.in_sigma_of(c) and e.norm.ge(c.norm, -drop) and e.val <= d.val):
            bad.append({"successor": repr(d), "unhalved": repr(e)})
        if len(bad) >= MAX_COUNTEREXAMPLES:
            break
    return Report(name, "fail" if bad else "pass", len(succ), bad)


def _check_decisive(c: Creature, n: int, depth, drop: Fraction, mode) -> Report:
    name = Decisive(n, depth).name
    if not c.norm_gt(1):
        return Report(name, "vacuous", detail={"reason": "nor(c) <= 1"})
    w = c.decisive_witness()
    if w is None:
        return Report(name, "fail", 0, [{"error": "no decisive witness available"}])
    K, small, big = w
    bad = []
    for label, d in (("small", small), ("big", big)):
        if not d.in_sigma_of(c):
            bad.append({label: repr(d), "error": "not a successor"})
        if not d.norm.ge(c.norm, -drop):
            bad.append({label: repr(d), "error": "norm drop exceeds r"})
    if len(small.val) > K:
        bad.append({"small": repr(small), "error": f"|val| = {len(small.val)} > K = {K}"})
    B = pow2(power(K, n)) if n else 2
    rep = _check_hereditary(big, B, depth, drop, mode)
    if rep.status == "fail":
        bad.append({"big": repr(big), "error": "not hereditarily big", "sub": rep.counterexamples})
    return Report(name, "fail" if bad else "pass", 1 + rep.count, bad, {"K": K, "bigness": str(B)})


def verify(c: Creature, prop, r=None, mode=None) -> Report:
    """Check one property of one creature; ``r`` overrides the allowed norm drop."""
    drop = c.r if r is None else Fraction(r)
    mode = Exhaustive() if mode is None else mode
    if isinstance(prop, Big):
        return _check_big(c, prop.B, drop, mode)
    if isinstance(prop, HereditarilyBig):
        return _check_hereditary(c, prop.B, prop.depth, drop, mode)
    if isinstance(prop, Halving):
        return _check_halving(c, drop, mode)
    if isinstance(prop, Decisive):
        return _check_decisive(c, prop.n, prop.depth, drop, mode)
    raise PreconditionViolated(f"unknown property {prop!r}")


__all__ = [
    "Big",
    "HereditarilyBig",
    "Halving",
    "Decisive",
    "Exhaustive",
    "Sample",
    "Report",
    "verify",
    "partitions",
    "count_partitions",
]
