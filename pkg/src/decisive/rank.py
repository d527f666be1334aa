"""Rank function on finite sets of naturals and the prenorm on sets of binary strings.

Sets of naturals are handled as sorted tuples.  Sets of binary strings of
length J are handled as frozensets of int masks, bit i holding coordinate i.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BudgetExceeded, NoWitness, PreconditionViolated, SchemaError
from .schedules import DefaultSchedule, Schedule

DEFAULT_J_CAP = 20
DEFAULT_WORK_CAP = 2_000_000


def _as_fraction(r) -> Fraction:
    if isinstance(r, str):
        r = Fraction(r)
    r = Fraction(r)
    if r <= 0:
        raise SchemaError("r must be positive")
    return r


@dataclass(frozen=True)
class RankParams:
    B: int = 2
    n: int = 0
    flarge: Schedule = field(default_factory=DefaultSchedule)
    r: Fraction = Fraction(1)

    def __post_init__(self):
        if self.B < 1:
            raise SchemaError("B must be at least 1")
        if self.n < 0:
            raise SchemaError("n must be a natural number")
        object.__setattr__(self, "r", _as_fraction(self.r))

    @property
    def a(self) -> float:
        return 2.0 ** (1 / self.r)

    def target_rank(self) -> int:
        """The least integer >= a^(n+1), computed exactly."""
        # a^(n+1) = 2^((n+1) q / p) for r = p/q
        p, q = self.r.numerator, self.r.denominator
        e = (self.n + 1) * q
        if e % p == 0:
            return 1 << (e // p)
        # least t with t^p >= 2^e
        lo = 1 << (e // p)
        hi = 1 << (e // p + 1)
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**p >= (1 << e):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def threshold(self, j1: int) -> int | None:
        """max(B, flarge(j1+n)) as an int, or None when it is astronomically large."""
        f = self.flarge.small(j1 + self.n)
        return None if f is None else max(self.B, f)

    def to_dict(self) -> dict:
        return {"B": self.B, "n": self.n, "r": str(self.r), "flarge": self.flarge.key}


@dataclass(frozen=True)
class IntervalWitness:
    level: int
    cuts: tuple

    @property
    def M(self) -> int:
        return len(self.cuts) - 1


# ------------------------------------------------------------------ ns

_lock = threading.Lock()
_rank_memo: dict = {}
_end_memo: dict = {}
_prenorm_memo: dict = {}


def clear_caches() -> None:
    with _lock:
        _rank_memo.clear()
        _end_memo.clear()
        _prenorm_memo.clear()


def _key(u: tuple, k: int, params: RankParams):
    return (u, k, params.B, params.n, params.flarge)


def _greedy_blocks(u: tuple, k: int, params: RankParams) -> list[tuple]:
    """Split u into consecutive minimal pieces of rank >= k, left to right."""
    blocks = []
    start = 0
    for i in range(len(u)):
        piece = u[start : i + 1]
        if rank_ge(piece, k, params):
            blocks.append(piece)
            start = i + 1
    return blocks


def rank_ge(u: Sequence[int], k: int, params: RankParams) -> bool:
    """True iff ns(u) >= k."""
    u = tuple(u)
    if k <= 0:
        return True
    if k == 1:
        return bool(u)
    if len(u) < 2:
        return False
    key = _key(u, k, params)
    hit = _rank_memo.get(key)
    if hit is not None:
        return hit
    res = _rank_ge_uncached(u, k, params)
    with _lock:
        _rank_memo[key] = res
    return res


def _rank_ge_uncached(u: tuple, k: int, params: RankParams) -> bool:
    # first block: minimal prefix of rank >= k-1
    for i in range(len(u)):
        if rank_ge(u[: i + 1], k - 1, params):
            break
    else:
        return False
    j1 = u[i] + 1
    need = params.threshold(j1)
    rest = len(u) - i - 1
    if need is None or need - 1 > rest:
        # every block is nonempty, so too few elements remain
        return False
    count = 1 + len(_greedy_blocks(u[i + 1 :], k - 1, params))
    return count >= need


def ns(u: Iterable[int], params: RankParams) -> int:
    u = tuple(sorted(set(u)))
    if any(x < 0 for x in u):
        raise ValueError("ns is defined on sets of naturals")
    k = 0
    while rank_ge(u, k + 1, params):
        k += 1
    return k


def interval_witness(u: Iterable[int], params: RankParams) -> IntervalWitness | None:
    """Greedy cuts certifying the rank of u, or None when ns(u) <= 1."""
    u = tuple(sorted(set(u)))
    k = ns(u, params)
    if k < 2:
        return None
    blocks = _greedy_blocks(u, k - 1, params)
    return IntervalWitness(k - 1, (0,) + tuple(b[-1] + 1 for b in blocks))


# ------------------------------------------------------------------ intervals


class _Work:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def tick(self, amount: int = 1):
        self.used += amount
        if self.used > self.cap:
            raise BudgetExceeded(f"block-end computation exceeded {self.cap} steps")


def block_end(k: int, s: int, params: RankParams, work_cap: int = DEFAULT_WORK_CAP) -> int:
    """Minimal b > s with ns([s, b-1]) >= k."""
    if k < 1:
        raise PreconditionViolated("block_end needs k >= 1")
    return _be(k, s, params, _Work(work_cap))


def _be(k: int, s: int, params: RankParams, work: _Work) -> int:
    if k == 1:
        return s + 1
    key = (k, s, params.B, params.n, params.flarge)
    hit = _end_memo.get(key)
    if hit is not None:
        return hit
    e = _be(k - 1, s, params, work)
    need = params.threshold(e)
    if need is None:
        raise BudgetExceeded(f"flarge({e + params.n}) exceeds the bit budget")
    work.tick(need)
    for _ in range(need - 1):
        e = _be(k - 1, e, params, work)
    with _lock:
        _end_memo[key] = e
    return e


def minimal_block(a_start: int, k: int, params: RankParams, work_cap: int = DEFAULT_WORK_CAP) -> int:
    return block_end(k, a_start, params, work_cap)


def choose_J(params: RankParams, work_cap: int = DEFAULT_WORK_CAP) -> int:
    """Minimal J with ns([0, J-1]) >= ceil(a^(n+1))."""
    return block_end(params.target_rank(), 0, params, work_cap)


def psi(params: RankParams, work_cap: int = DEFAULT_WORK_CAP) -> int:
    return 1 << choose_J(params, work_cap)


# ------------------------------------------------------------------ prenorm


def bits_of(mask: int) -> tuple:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_of(coords: Iterable[int]) -> int:
    m = 0
    for i in coords:
        m |= 1 << i
    return m


def projects_fully(c: Iterable[int], umask: int) -> bool:
    """True iff the restriction of c to the coordinates in umask is all of 2^u."""
    size = 1 << bin(umask).count("1")
    if not isinstance(c, (list, tuple, set, frozenset)):
        c = list(c)
    if len(c) < size:
        return False
    return len({b & umask for b in c}) == size


def shattered_sets(c: Iterable[int], J: int) -> list[int]:
    """All u subset of [0, J-1] (as masks) with full projection; there are at most |c|."""
    c = list(c)
    out = []

    def grow(umask: int, nxt: int):
        out.append(umask)
        for i in range(nxt, J):
            m = umask | (1 << i)
            if projects_fully(c, m):
                grow(m, i + 1)

    grow(0, 0)
    return out


def maximal_shattered(c: Iterable[int], J: int) -> list[int]:
    fam = shattered_sets(c, J)
    members = set(fam)
    return [u for u in fam if not any(u | (1 << i) in members for i in range(J) if not u >> i & 1)]


@dataclass(frozen=True)
class PrenormWitness:
    value: int
    u: tuple
    witness: IntervalWitness | None

    @property
    def blocks(self) -> list[tuple]:
        if self.witness is None:
            return [self.u] if self.u else []
        cuts = self.witness.cuts
        return [tuple(x for x in self.u if cuts[i] <= x < cuts[i + 1]) for i in range(len(cuts) - 1)]


def _check_c(c, J: int, cap: int):
    if J > cap:
        raise PreconditionViolated(f"J={J} exceeds the configured cap {cap}")
    if not c:
        raise PreconditionViolated("c must be nonempty")
    if any(b < 0 or b >> J for b in c):
        raise PreconditionViolated("value outside 2^J")


def prenorm_witness(c: Iterable[int], J: int, params: RankParams, cap: int = DEFAULT_J_CAP) -> PrenormWitness:
    """Prenorm with a canonical witness u.

    Among the u of maximal rank P the one with the most greedy blocks at
    level P-1 wins, ties going to the lexicographically least coordinate tuple.
    """
    c = frozenset(c)
    key = (c, J, params.B, params.n, params.flarge)
    hit = _prenorm_memo.get(key)
    if hit is not None:
        return hit
    _check_c(c, J, cap)
    best = None
    for umask in maximal_shattered(c, J):
        u = bits_of(umask)
        k = ns(u, params)
        nblocks = len(_greedy_blocks(u, k - 1, params)) if k >= 2 else 0
        cand = (-k, -nblocks, u)
        if best is None or cand < best:
            best = cand
    k = -best[0]
    out = PrenormWitness(k, best[2], interval_witness(best[2], params))
    with _lock:
        _prenorm_memo[key] = out
    return out


def prenorm(c: Iterable[int], J: int, params: RankParams, cap: int = DEFAULT_J_CAP) -> int:
    return prenorm_witness(c, J, params, cap).value


def pigeonhole_index(c, u, pieces: Sequence, blocks: Sequence) -> int:
    """Least i such that pieces[i] restricted to blocks[i] is all of 2^blocks[i]."""
    c = frozenset(c)
    umask = mask_of(u)
    bmasks = [mask_of(b) for b in blocks]
    if len(pieces) != len(blocks):
        raise PreconditionViolated("need one block per piece")
    if not projects_fully(c, umask):
        raise PreconditionViolated("c does not project fully onto u")
    covered = set().union(*map(frozenset, pieces)) if pieces else set()
    if not c <= covered:
        raise PreconditionViolated("pieces do not cover c")
    used = 0
    for m in bmasks:
        if m & used or m & ~umask:
            raise PreconditionViolated("blocks must be disjoint subsets of u")
        used |= m
    for i, (piece, m) in enumerate(zip(pieces, bmasks)):
        if projects_fully(piece, m):
            return i
    raise NoWitness("no piece projects fully onto its block")


# ------------------------------------------------------------------ text helpers


def to_bitstring(mask: int, J: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(J))


def from_bitstring(s: str) -> int:
    if set(s) - {"0", "1"}:
        raise SchemaError(f"bad bitstring {s!r}")
    return sum(1 << i for i, ch in enumerate(s) if ch == "1")


def full_cube(J: int) -> frozenset:
    return frozenset(range(1 << J))


__all__ = [
    "RankParams",
    "IntervalWitness",
    "PrenormWitness",
    "ns",
    "rank_ge",
    "interval_witness",
    "block_end",
    "minimal_block",
    "choose_J",
    "psi",
    "prenorm",
    "prenorm_witness",
    "pigeonhole_index",
    "shattered_sets",
    "maximal_shattered",
    "projects_fully",
    "to_bitstring",
    "from_bitstring",
    "full_cube",
    "bits_of",
    "mask_of",
    "clear_caches",
]
