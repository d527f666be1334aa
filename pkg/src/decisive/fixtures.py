"""Small explicit creature systems for experiments and tests.

The graded subset system has creatures (A, j) for nonempty A inside a value
set V and a grade 0 <= j <= depth.  Its norm is max(0, w(|A|) - j*r) with w
non-decreasing and w(1) = 0, and (B, j') is a successor of (A, j) iff B is a
subset of A and j' >= j.  Halving raises the grade by one.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Sequence

from .creatures import TabularCreatureSystem


def cid(A, j: int) -> str:
    return "".join(map(str, sorted(A))) + f"|{j}"


def graded_system(
    values: Sequence,
    weights: Mapping[int, Fraction],
    r,
    depth: int,
    witness_K: int | None = None,
    rng: random.Random | None = None,
    big_same_set: bool = False,
) -> TabularCreatureSystem:
    """The graded subset system; with ``witness_K`` every creature gets a declared witness.

    Declared witnesses use parameter ``witness_K``; small and big successors are
    drawn (with ``rng``, else deterministically) among the successors losing at
    most r.  Such witnesses are bookkeeping devices: they are not checked for
    hereditary bigness.  With ``big_same_set`` the big successor keeps the value
    set and moves one grade up, which is genuinely big when weights are flat.
    """
    r = Fraction(r)
    V = sorted(values)
    w = {s: Fraction(x) for s, x in weights.items()}
    w[1] = Fraction(0)

    def nor(A, j):
        return max(Fraction(0), w[len(A)] - j * r)

    entries = {}
    subsets = [A for s in range(1, len(V) + 1) for A in combinations(V, s)]
    for A in subsets:
        for j in range(depth + 1):
            succ = []
            if j < depth:
                succ.append(cid(A, j + 1))
            if len(A) > 1:
                succ += [cid(tuple(x for x in A if x != v), j) for v in A]
            entries[cid(A, j)] = {"val": list(A), "norm": nor(A, j), "succ": succ}
    for A in subsets:
        for j in range(depth + 1):
            c = entries[cid(A, j)]
            if j < depth:
                c["half"] = cid(A, j + 1)
            if witness_K is None:
                continue
            cands = [
                cid(B, j2)
                for B in subsets
                if set(B) <= set(A)
                for j2 in range(j, depth + 1)
                if nor(B, j2) >= nor(A, j) - r
            ]
            small_c = [x for x in cands if len(entries[x]["val"]) <= witness_K]
            if not small_c:
                continue
            if rng is None:
                small, big = small_c[-1], cands[0]
            else:
                small, big = rng.choice(small_c), rng.choice(cands)
            if big_same_set:
                big = cid(A, min(j + 1, depth))
            c["witness"] = {"K": witness_K, "small": small, "big": big}
    return TabularCreatureSystem(r, entries)


def halving_system(H=Fraction(3), r=Fraction(1, 2), depth: int | None = None) -> TabularCreatureSystem:
    """A genuinely halving graded system on three values.

    The default depth is the least one at which the top grade has norm <= 1, so
    every creature with norm > 1 has a half.
    """
    H, r = Fraction(H), Fraction(r)
    if depth is None:
        depth = max(0, math.ceil((H - 1) / r))
    return graded_system([0, 1, 2], {2: H - r, 3: H}, r, depth)


def random_homogenization_instance(rng: random.Random, k: int, nvals: int, ncolors: int = 2, deep: bool = True):
    """(systems, creatures, F table, m, t) with declared witnesses above 2^(m^t).

    The witnesses are bookkeeping only: with at most a handful of values no
    creature of norm above 1 + r can be hereditarily 2-big.
    """
    r = Fraction(1, rng.choice([2, 4]))
    H = 1 + r * (k + 1) + Fraction(rng.randrange(0, 3), 4)
    # mostly flat weights: big homogeneous pieces stay affordable
    weights = {s: max(Fraction(0), H - (nvals - s) * r * rng.choice([0, 0, 0, 1])) for s in range(2, nvals + 1)}
    # keep weights non-decreasing
    for s in range(3, nvals + 1):
        weights[s] = max(weights[s], weights[s - 1])
    m, t = 1, 1
    K = 1 << (rng.randrange(3, 9))  # comfortably above 2^(m^t) = 2
    systems = []
    creatures = []
    for i in range(k):
        vals = [f"{chr(97 + i)}{v}" for v in range(nvals)]
        sysm = graded_system(vals, weights, r, depth=k + 2 if deep else k, witness_K=K, rng=rng)
        systems.append(sysm)
        creatures.append(sysm[cid(vals, 0)])
    keys = list(product(*(sorted(c.val) for c in creatures)))
    # F depends on a random set of coordinates, with a biased color distribution
    T = [i for i in range(k) if rng.random() < 0.7]
    bias = rng.choice([0.5, 0.2, 0.05])
    table: dict = {}
    F = {}
    for x in keys:
        key = tuple(x[i] for i in T)
        if key not in table:
            table[key] = 0 if rng.random() > bias else rng.randrange(1, max(ncolors, 2))
        F[x] = table[key] % ncolors
    return systems, creatures, F, m, t
