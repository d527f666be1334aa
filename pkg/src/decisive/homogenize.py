"""Iterated big successors, avoiding small sets, and multi-dimensional homogenization."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

from .creatures import Creature, as_coloring
from .errors import (
    BudgetExceeded,
    HomogenizationFailed,
    Incomparable,
    PreconditionViolated,
    WitnessUnavailable,
)
from .extnat import Order, compare, ext, pow2, power
from .towers import exp_tower

NOT_IN_X = "NotInX"


def _sort_vals(vals) -> list:
    try:
        return sorted(vals)
    except TypeError:
        return sorted(vals, key=repr)


def _witness(c: Creature):
    if not c.norm_gt(1):
        raise WitnessUnavailable(f"{c!r} has norm <= 1, so no decisive witness applies")
    w = c.decisive_witness()
    if w is None:
        raise WitnessUnavailable(f"{c!r} has no decisive witness")
    return w


# ------------------------------------------------------------------ boost / avoid


def boost_chain(c: Creature, delta: int) -> list:
    """[(K_0, d_1), (K_1, d_2), ...]: the chain of big successors of length delta."""
    chain = []
    d = c
    for _ in range(delta):
        K, _small, big = _witness(d)
        chain.append((K, big))
        d = big
    return chain


def boost(c: Creature, B, delta: int, n: int = 1) -> Creature:
    """A hereditarily EXP(B,n,delta)-big successor losing at most delta*r."""
    if delta == 0:
        return c
    if not c.norm.gt_const(1 + delta * c.r):
        raise PreconditionViolated(f"boost needs nor(c) > 1 + {delta}r")
    chain = boost_chain(c, delta)
    d = chain[-1][1]
    assert d.in_sigma_of(c) and d.drop_ok(c, delta)
    return d


def avoid(c: Creature, X, B, delta: int, n: int = 1) -> Creature:
    """A successor with values disjoint from X losing at most (delta+1)*r."""
    X = frozenset(X)
    if not X:
        return boost(c, B, delta, n)
    bound = exp_tower(B, n, delta)
    try:
        small_enough = compare(len(X), bound) is Order.LT
    except Incomparable as exc:
        raise BudgetExceeded(str(exc)) from None
    if not small_enough:
        raise PreconditionViolated(f"|X| = {len(X)} is not below EXP(B,n,delta) = {bound}")
    if not c.norm.gt_const(1 + (delta + 1) * c.r):
        raise PreconditionViolated(f"avoid needs nor(c) > 1 + {delta + 1}r")
    d0 = boost(c, B, delta, n)
    F = lambda v: v if v in X else NOT_IN_X  # noqa: E731
    d = d0.big_successor(F, c.r)
    if d is None:
        raise HomogenizationFailed("no homogeneous successor for the X coloring")
    if d.val & X:
        raise HomogenizationFailed("homogeneous class landed inside X")
    assert d.in_sigma_of(c) and d.drop_ok(c, delta + 1)
    return d


# ------------------------------------------------------------------ multi-dimensional


@dataclass
class HomogenizationInstance:
    creatures: list
    F: object  # callable on value tuples, or a mapping keyed by them
    m: int | object = 1
    t: int = 1

    @property
    def k(self) -> int:
        return len(self.creatures)

    def bound(self):
        return pow2(power(ext(self.m), self.t))


@dataclass
class StepRecord:
    k: int
    M: int
    kinds: tuple  # "small" / "big" per creature
    m: object
    t: int

    def to_json(self):
        return {"k": self.k, "M": self.M, "kinds": list(self.kinds), "m": str(self.m), "t": self.t}


def _is_constant(cs: Sequence[Creature], F) -> bool:
    seen = None
    for x in product(*(_sort_vals(c.val) for c in cs)):
        v = F(x)
        if seen is None:
            seen = (v,)
        elif v != seen[0]:
            return False
    return True


def _options(c: Creature, M: int) -> list:
    """Ways to pick an M-small or M-big successor, small first."""
    K, small, big = _witness(c)
    out = []
    if len(small.val) <= M:
        out.append(("small", small))
    if K >= M:
        out.append(("big", big))
    return out


def _multi(cs: list, F: Callable, m, t: int, trace: list) -> list:
    k = len(cs)
    if _is_constant(cs, F):
        return list(cs)
    if k == 1:
        c = cs[0]
        d = c.big_successor(lambda v: F((v,)), c.r)
        if d is None:
            raise HomogenizationFailed(f"{c!r} has no homogeneous successor")
        return [d]
    K, small_k, big_k = _witness(cs[-1])
    M = K
    try:
        ok = compare(M, pow2(power(ext(m), t))) is Order.GT
    except Incomparable as exc:
        raise BudgetExceeded(f"cannot certify M > 2^(m^t): {exc}") from None
    if not ok:
        raise PreconditionViolated(f"decisiveness parameter M={M} is not above 2^({m}^{t})")
    choices = [_options(c, M) for c in cs[:-1]]
    if any(not opts for opts in choices):
        raise WitnessUnavailable("a creature has neither an M-small nor an M-big successor")
    last_err = None
    for pick in product(*choices):
        kinds = [kind for kind, _ in pick]
        ds = [d for _, d in pick]
        if kinds[0] == "small":
            kinds.append("big")
            ds.append(big_k)
        else:
            kinds.append("small")
            ds.append(small_k)
        try:
            out = _split_and_recurse(ds, kinds, F, M, m, t, trace)
        except (HomogenizationFailed, WitnessUnavailable, PreconditionViolated) as exc:
            last_err = exc
            continue
        trace.append(StepRecord(k, M, tuple(kinds), m, t))
        return out
    raise HomogenizationFailed(f"every successor choice failed: {last_err}")


def _split_and_recurse(ds, kinds, F, M, m, t, trace) -> list:
    S = [i for i, kind in enumerate(kinds) if kind == "small"]
    L = [i for i, kind in enumerate(kinds) if kind == "big"]
    Y = list(product(*(_sort_vals(ds[i].val) for i in S)))

    def merge(x, y):
        full = [None] * len(ds)
        for i, v in zip(L, x):
            full[i] = v
        for i, v in zip(S, y):
            full[i] = v
        return tuple(full)

    def F_star(x):
        return tuple(F(merge(x, y)) for y in Y)

    dL = _multi([ds[i] for i in L], F_star, M, len(S) + 1, trace)
    # F* is constant on the product of the dL, so any x works; take the least
    x0 = tuple(_sort_vals(d.val)[0] for d in dL)

    def F_2star(y):
        return F(merge(x0, y))

    dS = _multi([ds[i] for i in S], F_2star, m, t, trace)
    out = [None] * len(ds)
    for i, d in zip(L, dL):
        out[i] = d
    for i, d in zip(S, dS):
        out[i] = d
    return out


def multi_homogenize(instance: HomogenizationInstance, trace: list | None = None) -> list:
    """Successors d_i of the c_i with F constant on their product, each losing at most k*r."""
    cs = list(instance.creatures)
    k = len(cs)
    if k == 0:
        raise PreconditionViolated("need at least one creature")
    for c in cs:
        if not c.norm.gt_const(1 + c.r * (k - 1)):
            raise PreconditionViolated(f"{c!r} needs norm above 1 + r(k-1)")
    F = as_coloring(instance.F)
    trace = [] if trace is None else trace
    out = _multi(cs, F, instance.m, instance.t, trace)
    for c, d in zip(cs, out):
        assert d.in_sigma_of(c) and d.drop_ok(c, k), "norm drop bound violated"
    assert _is_constant(out, F)
    return out


def _codomain_size(cs, F) -> int:
    return len({F(x) for x in product(*(_sort_vals(c.val) for c in cs))})


def homogenize_product(creatures: Sequence[Creature], F, B, delta: int, trace: list | None = None) -> list:
    """Boost every creature by delta, then homogenize; total drop at most r*(delta+k)."""
    cs = list(creatures)
    k = len(cs)
    F = as_coloring(F)
    bound = exp_tower(B, k, delta)
    if compare(_codomain_size(cs, F), bound) is Order.GT:
        raise PreconditionViolated(f"F takes more than EXP(B,k,delta) = {bound} values")
    for c in cs:
        if not c.norm.gt_const(1 + c.r * (delta + k - 1)):
            raise PreconditionViolated(f"{c!r} needs norm above 1 + r(delta+k-1)")
    if _is_constant(cs, F):
        return cs
    boosted = [boost(c, B, delta, k) for c in cs]
    if delta >= 1:
        m, t = exp_tower(B, k, delta - 1), k
    else:
        m, t = ext(max(1, (ext(B).exact() - 1).bit_length())), 1
    out = _multi(boosted, F, m, t, [] if trace is None else trace)
    for c, d in zip(cs, out):
        assert d.in_sigma_of(c) and d.drop_ok(c, delta + k)
    assert _is_constant(out, F)
    return out


def homogeneous_solutions(cs: Sequence[Creature], F, drop_units: int) -> list:
    """Every successor tuple with F constant and per-creature drop at most drop_units*r."""
    F = as_coloring(F)
    pools = [[d for d in c.sigma() if d.drop_ok(c, drop_units)] for c in cs]
    return [ds for ds in product(*pools) if _is_constant(ds, F)]


__all__ = [
    "NOT_IN_X",
    "boost",
    "boost_chain",
    "avoid",
    "HomogenizationInstance",
    "StepRecord",
    "multi_homogenize",
    "homogenize_product",
    "homogeneous_solutions",
]
