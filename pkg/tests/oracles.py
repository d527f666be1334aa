"""Independent brute-force references used by the tests."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

from decisive.schedules import parse_schedule


def flarge_int(schedule, m: int):
    """flarge(m) as an int, or None when it does not fit."""
    return schedule(m).exact()


def make_brute_ns(B: int, n: int, schedule):
    """ns by trying every cut sequence 0 = j0 < j1 < ... < jM."""

    @lru_cache(maxsize=None)
    def rank_ge(u: frozenset, k: int) -> bool:
        if k == 0:
            return True
        if k == 1:
            return bool(u)
        if not u:
            return False
        top = max(u) + 1
        inner = k - 1
        # positions 1..top; choose the cut set
        for size in range(1, top + 1):
            for cuts in combinations(range(1, top + 1), size):
                M = len(cuts)
                f = flarge_int(schedule, cuts[0] + n)
                if f is None or M < max(B, f):
                    continue
                bounds = (0,) + cuts
                if all(rank_ge(frozenset(x for x in u if bounds[i] <= x < bounds[i + 1]), inner) for i in range(M)):
                    return True
        return False

    def ns(u) -> int:
        u = frozenset(u)
        k = 0
        while rank_ge(u, k + 1):
            k += 1
        return k

    return ns


def brute_prenorm(c, J: int, ns) -> int:
    """max ns(u) over every u whose projection of c is full."""
    best = 0
    for size in range(J + 1):
        for u in combinations(range(J), size):
            pats = {tuple(b >> i & 1 for i in u) for b in c}
            if len(pats) == 1 << size:
                best = max(best, ns(u))
    return best


def projection_full(piece, block) -> bool:
    pats = {tuple(b >> i & 1 for i in block) for b in piece}
    return len(pats) == 1 << len(block)


def subsets_of(xs):
    xs = list(xs)
    for m in range(1 << len(xs)):
        yield [x for i, x in enumerate(xs) if m >> i & 1]


TOY_SCHEDULES = [
    (2, 0, "default"),
    (2, 0, "const:2"),
    (3, 0, "const:2"),
    (2, 0, "table:2,3,5"),
    (2, 1, "const:3"),
]


def toy_params():
    return [(B, n, parse_schedule(s)) for B, n, s in TOY_SCHEDULES]


def all_value_maps(values, colors):
    values = list(values)
    for cols in product(range(colors), repeat=len(values)):
        yield dict(zip(values, cols))
