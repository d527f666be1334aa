"""Finite-depth conditions, names with unresolved entries, and pure decision.

A condition of depth N holds a single value at each trunk level and a creature at
every level from the trunk length up to N.  A name assigns an outcome (or BOTTOM,
meaning "not determined within the horizon") to each full branch.  Whether a
condition decides a name depends only on the value sets, and shrinking value sets
can only help; the successor searches below rely on that.
"""
from __future__ import annotations

import random
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .creatures import Creature
from .norms import NormValue
from .errors import (
    HorizonExhausted,
    NormTooSmall,
    PreconditionViolated,
    SchemaError,
    SearchSpaceExceeded,
)

BOTTOM = None
DEC = "dec"
HALF = "half"
DEFAULT_NODE_BUDGET = 10**6


def _sort_vals(vals) -> list:
    try:
        return sorted(vals)
    except TypeError:
        return sorted(vals, key=repr)


# ------------------------------------------------------------------ conditions


@dataclass(frozen=True)
class FiniteCondition:
    trunk: tuple
    creatures: tuple
    r: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "trunk", tuple(self.trunk))
        object.__setattr__(self, "creatures", tuple(self.creatures))
        rs = tuple(Fraction(x) for x in self.r) if self.r else None
        if rs is None:
            # trunk levels carry no creature; their r is never used
            first = self.creatures[0].r if self.creatures else Fraction(1)
            rs = (first,) * len(self.trunk) + tuple(c.r for c in self.creatures)
        if len(rs) != self.N:
            raise SchemaError(f"need {self.N} per-level r values, got {len(rs)}")
        object.__setattr__(self, "r", rs)
        for i, c in enumerate(self.creatures):
            if not c.norm_gt(0):
                raise PreconditionViolated(f"level {self.n0 + i} creature has norm 0")

    @property
    def n0(self) -> int:
        return len(self.trunk)

    @property
    def N(self) -> int:
        return len(self.trunk) + len(self.creatures)

    def __getitem__(self, i: int):
        """The trunk value or the creature at level i."""
        return self.trunk[i] if i < self.n0 else self.creatures[i - self.n0]

    def val(self, i: int) -> frozenset:
        return frozenset([self.trunk[i]]) if i < self.n0 else self.creatures[i - self.n0].val

    def vals(self) -> tuple:
        return tuple(self.val(i) for i in range(self.N))

    def val_below(self, n: int) -> list:
        """val(p, <n) in lexicographic order."""
        return list(product(*(_sort_vals(self.val(i)) for i in range(n))))

    def branches(self) -> list:
        return self.val_below(self.N)

    def replace(self, level: int, creature: Creature) -> "FiniteCondition":
        cs = list(self.creatures)
        cs[level - self.n0] = creature
        return FiniteCondition(self.trunk, cs, self.r)

    def __repr__(self):
        return f"FiniteCondition(trunk={self.trunk!r}, creatures={list(self.creatures)!r})"


def and_value(p: FiniteCondition, s: Sequence) -> FiniteCondition:
    """p with its first len(s) levels replaced by the values s."""
    s = tuple(s)
    if len(s) > p.N:
        raise SchemaError(f"value tuple of length {len(s)} exceeds depth {p.N}")
    if len(s) <= p.n0:
        return FiniteCondition(s + p.trunk[len(s):], p.creatures, p.r)
    return FiniteCondition(s, p.creatures[len(s) - p.n0:], p.r)


def leq(q: FiniteCondition, p: FiniteCondition) -> bool:
    """q <= p: longer trunk, and each level a successor (trunk values as singletons)."""
    if q.N != p.N or q.n0 < p.n0:
        return False
    for i in range(q.N):
        if i < p.n0:
            if q.trunk[i] != p.trunk[i]:
                return False
        elif i < q.n0:
            if q.trunk[i] not in p.val(i):
                return False
        elif not q[i].in_sigma_of(p[i]):
            return False
    return True


def leq_star(q: FiniteCondition, p: FiniteCondition) -> bool:
    """Same trunk length, trunk values arbitrary, upper creatures successors."""
    if q.N != p.N or q.n0 != p.n0:
        return False
    return all(q[i].in_sigma_of(p[i]) for i in range(p.n0, p.N))


def leq_n(q: FiniteCondition, p: FiniteCondition, n: int, with_h: bool = False):
    """q <=_n p; with ``with_h`` also return the least witnessing h (or None)."""
    found = None
    if leq(q, p):
        for h in range(n, q.N + 1):
            if any(q[i] != p[i] for i in range(h)):
                break
            # trunk entries have norm 0
            if all(q[i].norm.ge_const(n) if i >= q.n0 else n <= 0 for i in range(h, q.N)):
                found = h
                break
    return (found is not None, found) if with_h else found is not None


# ------------------------------------------------------------------ names


class NameTable:
    """Outcomes on the full product of level value sets; code -1 stands for BOTTOM."""

    def __init__(self, levels: Sequence[Sequence], codes, outcomes: Sequence):
        self.levels = [list(lv) for lv in levels]
        self.index = [{v: j for j, v in enumerate(lv)} for lv in self.levels]
        self.codes = np.asarray(codes, dtype=np.int64)
        self.outcomes = list(outcomes)
        shape = tuple(len(lv) for lv in self.levels)
        if self.codes.shape != shape:
            raise SchemaError(f"name table has shape {self.codes.shape}, expected {shape}")
        if self.codes.size and (self.codes.min() < -1 or self.codes.max() >= len(self.outcomes)):
            raise SchemaError("name table code out of range")
        self._memo: dict = {}

    @classmethod
    def from_function(cls, levels: Sequence[Sequence], f: Callable) -> "NameTable":
        levels = [_sort_vals(lv) for lv in levels]
        outcomes: list = []
        pos: dict = {}
        codes = np.full(tuple(len(lv) for lv in levels), -1, dtype=np.int64)
        for idx in np.ndindex(*codes.shape):
            v = f(tuple(levels[i][j] for i, j in enumerate(idx)))
            if v is BOTTOM:
                continue
            if v not in pos:
                pos[v] = len(outcomes)
                outcomes.append(v)
            codes[idx] = pos[v]
        return cls(levels, codes, outcomes)

    @classmethod
    def from_mapping(cls, levels: Sequence[Sequence], table: dict) -> "NameTable":
        levels = [_sort_vals(lv) for lv in levels]
        missing = [b for b in product(*levels) if b not in table]
        if missing:
            raise SchemaError(f"name table misses branch {missing[0]!r}")
        return cls.from_function(levels, table.__getitem__)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def __call__(self, branch: Sequence):
        code = int(self.codes[tuple(self.index[i][v] for i, v in enumerate(branch))])
        return BOTTOM if code < 0 else self.outcomes[code]

    def as_dict(self) -> dict:
        return {b: self(b) for b in product(*self.levels)}

    def restrict(self, vals: Sequence[frozenset]) -> np.ndarray:
        try:
            idx = [[self.index[i][v] for v in _sort_vals(vs)] for i, vs in enumerate(vals)]
        except KeyError as exc:
            raise PreconditionViolated(f"value {exc.args[0]!r} is not covered by the name") from None
        return self.codes[np.ix_(*idx)]

    def status(self, vals: Sequence[frozenset]):
        """Least n such that each piece over val(<n) is constant and resolved, else None."""
        key = tuple(vals)
        if key in self._memo:
            return self._memo[key]
        A = self.restrict(vals)
        out = None
        for n in range(len(vals) + 1):
            rows = A.reshape(int(np.prod(A.shape[:n], dtype=np.int64)), -1)
            if bool(((rows == rows[:, :1]).all(axis=1) & (rows[:, 0] >= 0)).all()):
                out = n
                break
        self._memo[key] = out
        return out

    def constant_value(self, vals: Sequence[frozenset]):
        """(True, v) if the name is resolved and constant on the product, else (False, None)."""
        A = self.restrict(vals)
        c = int(A.flat[0])
        if c >= 0 and bool((A == c).all()):
            return True, self.outcomes[c]
        return False, None


def _check_depth(p: FiniteCondition, tau: NameTable):
    if tau.depth != p.N:
        raise SchemaError(f"name has depth {tau.depth}, condition has depth {p.N}")


def decision_status(p: FiniteCondition, tau: NameTable):
    """Least n with p <n-deciding tau, or None when undecided within the horizon."""
    _check_depth(p, tau)
    return tau.status(p.vals())


# ------------------------------------------------------------------ the basic step


@dataclass
class StepLog:
    """What happened for each extension of the trunk by one value."""

    value: object
    outcome: object  # DEC, an outcome (value mode), or HALF
    h: int | None


@dataclass
class _Budget:
    cap: int
    used: int = 0

    def spend(self, k: int = 1):
        self.used += k
        if self.used > self.cap:
            raise SearchSpaceExceeded(self.used, self.cap)


_candidate_memo: dict = {}


def _profile_candidates(c: Creature, rule: tuple) -> list:
    """Candidates for one level: rule ("drop", r) or ("atleast", M), always norm-positive."""
    key = (c, rule)
    if key not in _candidate_memo:
        kind, t = rule
        if kind == "drop":
            ok = lambda d: d.norm_gt(0) and d.norm.ge(c.norm, -t)  # noqa: E731
        else:
            ok = lambda d: d.norm_gt(0) and d.norm.ge_const(t)  # noqa: E731
        _candidate_memo[key] = minimal_candidates(c, ok)
    return _candidate_memo[key]


def minimal_candidates(c: Creature, admissible: Callable[[Creature], bool]) -> list:
    """Admissible successors with inclusion-minimal value sets, best norm per value set."""
    best: dict = {}
    for d in c.sigma():
        if not admissible(d):
            continue
        cur = best.get(d.val)
        if cur is None or d.norm > cur.norm:
            best[d.val] = d
    keys = [v for v in best if not any(w < v for w in best)]
    keys.sort(key=lambda v: (len(v), _sort_vals(v) if _is_sortable(v) else repr(v)))
    return [best[v] for v in keys]


def _is_sortable(v) -> bool:
    try:
        sorted(v)
        return True
    except TypeError:
        return False


def _decides(tau: NameTable, vals, mode: str):
    if mode == "essential":
        return (tau.status(vals) is not None), DEC
    ok, v = tau.constant_value(vals)
    return ok, v


def _search_dec(p: FiniteCondition, M, tau: NameTable, mode: str, budget: _Budget):
    """A successor of p (trunk already extended) satisfying some norm profile and deciding."""
    n1 = p.n0
    head = [frozenset([v]) for v in p.trunk]
    hits = []
    for h in range(n1, p.N + 1):
        pools = []
        for m in range(n1, p.N):
            rule = ("drop", p.r[m]) if m < h else ("atleast", Fraction(M))
            pools.append(_profile_candidates(p[m], rule))
        for ds in product(*pools):
            budget.spend()
            ok, v = _decides(tau, head + [d.val for d in ds], mode)
            if ok:
                if mode == "essential":
                    return FiniteCondition(p.trunk, ds, p.r), v, h
                hits.append((FiniteCondition(p.trunk, ds, p.r), v, h))
                break
    if hits:
        # value mode: the least decided outcome, first found
        return min(hits, key=lambda t: repr(t[1]))
    return None


def _halve_above(p: FiniteCondition) -> FiniteCondition:
    try:
        return FiniteCondition(p.trunk, [c.halve() for c in p.creatures], p.r)
    except NormTooSmall as exc:
        raise NormTooSmall(f"basic step undefined: {exc}") from None


def basic_step(p: FiniteCondition, M, tau: NameTable, mode: str = "essential",
               node_budget: int = DEFAULT_NODE_BUDGET, log: list | None = None):
    """(q, flag): try to decide on each one-value trunk extension, halve on failure, homogenize.

    In ``value`` mode the attempts must decide tau outright; the level-n0 coloring
    then uses the decided outcomes, which ``log`` records.
    """
    if mode not in ("essential", "value"):
        raise PreconditionViolated(f"unknown mode {mode!r}")
    _check_depth(p, tau)
    n0 = p.n0
    if n0 >= p.N:
        raise PreconditionViolated("the condition has no creature levels")
    for i in range(n0, p.N):
        if not p[i].norm_gt(1):
            raise NormTooSmall(f"basic step undefined: nor(p({i})) <= 1")
    budget = _Budget(node_budget)
    base = p[n0]
    cur = FiniteCondition(p.trunk + (_sort_vals(base.val)[0],), p.creatures[1:], p.r)
    colors = {}
    steps = log if log is not None else []
    for a in _sort_vals(base.val):
        ext = FiniteCondition(p.trunk + (a,), cur.creatures, p.r)
        found = _search_dec(ext, M, tau, mode, budget)
        if found is not None:
            cur, outcome, h = found
            colors[a] = outcome
            steps.append(StepLog(a, outcome, h))
        else:
            cur = _halve_above(ext)
            colors[a] = HALF
            steps.append(StepLog(a, HALF, None))
    d = base.big_successor(lambda v: colors[v], p.r[n0])
    if d is None:
        raise NormTooSmall(f"level {n0} creature has no homogeneous successor losing at most r")
    q = FiniteCondition(p.trunk, (d,) + cur.creatures, p.r)
    flag = HALF if colors[_sort_vals(d.val)[0]] == HALF else DEC
    # postconditions
    steps_n = len(base.val)
    assert d.norm.ge(base.norm, -p.r[n0])
    M_norm = NormValue.rational(Fraction(M))
    for m in range(n0 + 1, p.N):
        lower = min(p[m].norm, M_norm)
        assert q[m].norm.ge(lower, -steps_n * p.r[m]), f"norm profile violated at level {m}"
    if flag == DEC:
        st = decision_status(q, tau)
        assert st is not None and (mode == "essential" or st <= n0 + 1)
    return q, flag


# ------------------------------------------------------------------ pure decision


@dataclass
class PureResult:
    q: FiniteCondition
    n: int
    h: int | None
    status: int | None
    steps: list = field(default_factory=list)


def decision_level(p: FiniteCondition, M) -> int:
    """Least n >= max(trunk length, M) with nor(p(m)) > M + 5 for all m >= n."""
    n = max(p.n0, int(M))
    for m in range(p.N - 1, max(p.n0, int(M)) - 1, -1):
        if not p[m].norm_gt(Fraction(M) + 5):
            return m + 1
    return n


def pure_decide(p: FiniteCondition, M, tau: NameTable, shortcut: bool = True,
                node_budget: int = DEFAULT_NODE_BUDGET, result: list | None = None) -> FiniteCondition:
    """q <=_M p essentially deciding tau, by chaining basic steps over val(p, <n)."""
    _check_depth(p, tau)
    if shortcut and decision_status(p, tau) is not None:
        if result is not None:
            result.append(PureResult(p, p.n0, p.N, decision_status(p, tau)))
        return p
    n = decision_level(p, M)
    if n >= p.N:
        raise NormTooSmall(f"no level above which every norm exceeds {Fraction(M) + 5}")
    steps = []
    cur = p
    for s in p.val_below(n):
        r_k = and_value(cur, s)
        q_k, flag = basic_step(r_k, Fraction(M) + 5, tau, "essential", node_budget)
        steps.append((s, flag))
        cur = FiniteCondition(p.trunk, list(p.creatures[: n - p.n0]) + list(q_k.creatures), p.r)
    q = cur
    st = decision_status(q, tau)
    if st is None:
        raise HorizonExhausted(
            "no essentially deciding extension within the horizon: "
            + ", ".join(f"{s}:{f}" for s, f in steps if f == HALF)
        )
    ok, h = leq_n(q, p, M, with_h=True)
    assert ok, "pure decision output is not a <=_M extension"
    if result is not None:
        result.append(PureResult(q, n, h, st, steps))
    return q


# ------------------------------------------------------------------ brute-force oracles


def brute_status(vals: Sequence[frozenset], tau: Callable):
    """decision_status by listing branches; independent of the array code."""
    branches = list(product(*(_sort_vals(v) for v in vals)))
    outs = {b: tau(b) for b in branches}
    for n in range(len(vals) + 1):
        pieces: dict = {}
        for b, v in outs.items():
            pieces.setdefault(b[:n], set()).add(v)
        if all(len(o) == 1 and BOTTOM not in o for o in pieces.values()):
            return n
    return None


def deciding_successor(q: FiniteCondition, tau: Callable, mode: str = "essential", cap: int = 10**6):
    """A norm-positive q' <= q with trunk length n0+1 deciding tau, or None.

    Successors are enumerated up to equal value sets, which is exhaustive
    because deciding only depends on the value sets.
    """
    n0 = q.n0
    pools = [list({d.val for d in q[m].sigma() if d.norm_gt(0)}) for m in range(n0 + 1, q.N)]
    seen = 0
    for a in _sort_vals(q[n0].val):
        head = [frozenset([v]) for v in q.trunk] + [frozenset([a])]
        for combo in product(*pools):
            seen += 1
            if seen > cap:
                raise SearchSpaceExceeded(seen, cap)
            vals = head + list(combo)
            st = brute_status(vals, tau)
            if st is not None and (mode == "essential" or st <= n0 + 1):
                return a, combo
    return None


def deciding_extension_exists(p: FiniteCondition, tau: Callable, M, cap: int = 10**6) -> bool:
    """Some q <=_M p essentially decides tau, by exhaustive search over upper levels.

    A <=_M extension agrees with p below some h >= M and has norms >= M from h
    on; trunk growth is covered because deciding only depends on value sets.
    """
    seen = 0
    for h in range(max(int(M), 0), p.N + 1):
        if h < p.n0:
            continue
        pools = []
        for m in range(h, p.N):
            vs = {d.val for d in p[m].sigma() if d.norm.ge_const(M) and d.norm_gt(0)}
            if M <= 0:
                vs |= {frozenset([v]) for v in p.val(m)}
            pools.append(list(vs))
        head = [p.val(i) for i in range(h)]
        for combo in product(*pools):
            seen += 1
            if seen > cap:
                raise SearchSpaceExceeded(seen, cap)
            if brute_status(head + list(combo), tau) is not None:
                return True
    return False


# ------------------------------------------------------------------ toy family


@lru_cache(maxsize=None)
def toy_system(H=Fraction(3), r=Fraction(1, 4), depth: int = 16, values=(0, 1, 2)):
    """A graded halving system on three values whose full creatures are (2, r)-big."""
    from .fixtures import graded_system

    return graded_system(list(values), {2: Fraction(H) - Fraction(r), 3: Fraction(H)}, Fraction(r), depth)


def random_toy_condition(rng: random.Random, N: int | None = None, system=None, n0: int | None = None,
                         max_grade: int = 2) -> FiniteCondition:
    from .fixtures import cid

    system = toy_system() if system is None else system
    N = rng.randint(2, 5) if N is None else N
    n0 = rng.randrange(0, N - 1) if n0 is None else n0
    V = [0, 1, 2]
    trunk = tuple(rng.choice(V) for _ in range(n0))
    cs = []
    for i in range(n0, N):
        A = V if i == n0 or rng.random() < 0.6 else sorted(rng.sample(V, 2))
        cs.append(system[cid(A, rng.randint(0, max_grade))])
    return FiniteCondition(trunk, cs)


def random_name(rng: random.Random, p: FiniteCondition, bottom: float = 0.3, outcomes: int = 2,
                values=(0, 1, 2)) -> NameTable:
    """A name depending on a random set of levels, BOTTOM with probability ``bottom`` per key."""
    levels = [list(values)] * p.N
    T = sorted(rng.sample(range(p.N), rng.randint(0, p.N)))
    table: dict = {}

    def f(b):
        key = tuple(b[i] for i in T)
        if key not in table:
            table[key] = BOTTOM if rng.random() < bottom else rng.randrange(outcomes)
        return table[key]

    return NameTable.from_function(levels, f)


__all__ = [
    "BOTTOM",
    "DEC",
    "HALF",
    "FiniteCondition",
    "NameTable",
    "StepLog",
    "PureResult",
    "and_value",
    "leq",
    "leq_star",
    "leq_n",
    "decision_status",
    "minimal_candidates",
    "basic_step",
    "decision_level",
    "pure_decide",
    "brute_status",
    "deciding_successor",
    "deciding_extension_exists",
    "toy_system",
    "random_toy_condition",
    "random_name",
]
