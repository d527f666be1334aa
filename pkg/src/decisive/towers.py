"""Tower arithmetic: EXP, the Psi upper bound, and the growth-parameter tables.

Soundness of the symbolic Psi bound
-----------------------------------
For a non-decreasing schedule the greedy block end ``J(n, B, r)`` (the least J
with ns([0, J-1]) >= ceil(2^((n+1)/r))) is non-decreasing in B and in n and
non-increasing in r: every threshold max(B, flarge(e+n)) grows with B and n,
block ends grow with thresholds, and the target rank grows as r shrinks.
The atom :class:`PsiBound` stands for the natural number ``J(n, B, r) + B``.
It is a well-defined upper bound on J, it is strictly above B, and it is
strictly increasing in B, so ``2^PsiBound >= 2^J = Psi`` and two bounds over
the same schedule are ordered whenever their arguments are ordered
componentwise.  When J can be computed within the work cap the atom collapses
to the exact integer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import BudgetExceeded, Incomparable, PreconditionViolated
from .extnat import (
    Atom,
    Exact,
    ExtNat,
    Order,
    add,
    compare,
    ext,
    from_raw,
    lg_ceil,
    lower_int,
    mul,
    pow2,
    power,
    raw_text,
    register_atom,
    scale,
    try_compare,
)
from .rank import RankParams, choose_J
from .schedules import DefaultSchedule, Schedule, parse_schedule

PSI_WORK_CAP = 200_000

ext_compare = compare


# ------------------------------------------------------------------ EXP


def exp_tower(B, n: int, m: int) -> ExtNat:
    """EXP(B,n,0) = B and EXP(B,n,m+1) = 2^(EXP(B,n,m)^n)."""
    if n < 1 or ext(B).exact() == 0:
        raise PreconditionViolated("EXP needs B >= 1 and n >= 1")
    x = ext(B)
    for _ in range(m):
        x = pow2(power(x, n))
    return x


# ------------------------------------------------------------------ reciprocals


@dataclass(frozen=True)
class Recip:
    """The rational 1/den for an ExtNat den >= 1."""

    den: ExtNat

    def fraction(self) -> Fraction | None:
        v = self.den.exact()
        return None if v is None else Fraction(1, v)

    def __str__(self):
        return f"recip({self.den})"


def as_recip(r) -> Recip:
    if isinstance(r, Recip):
        return r
    r = Fraction(r)
    if r.numerator != 1:
        raise PreconditionViolated(f"r = {r} is not a reciprocal")
    return Recip(Exact(r.denominator))


def phi_r(level_sizes: Callable[[int], ExtNat], n: int, mode: str = "product"):
    """(phi(<n), r(n)).

    ``onedim``: phi(=m) = size(m) and r(n) = 1/(n phi(<n)).
    ``product``: phi(=m) = size(m)^m and r(n) = 1/(n^2 phi(<n)).
    r(0) is taken to be 1.
    """
    if mode not in ("onedim", "product"):
        raise PreconditionViolated(f"unknown phi mode {mode!r}")
    phi = ext(1)
    for m in range(n):
        size = ext(level_sizes(m))
        phi = mul(phi, size if mode == "onedim" else power(size, m))
    if n == 0:
        return phi, Recip(Exact(1))
    factor = n if mode == "onedim" else n * n
    return phi, Recip(scale(phi, factor))


# ------------------------------------------------------------------ Psi


@dataclass(frozen=True)
class PsiBound(Atom):
    __hash__ = Atom.__hash__

    n: int
    B: ExtNat
    r: Recip
    schedule: Schedule = field(default_factory=DefaultSchedule)

    def __str__(self):
        key = self.schedule.key.replace(",", ";")
        return f"psi({self.n},{self.B},{self.r},{key})"

    def strict_lower(self) -> ExtNat:
        return self.B

    def lower_int(self) -> int:
        return lower_int(self.B) + 1

    def cmp_same_kind(self, other: "PsiBound") -> Order | None:
        if self.schedule != other.schedule:
            return None
        for a, b, sign in ((self, other, Order.GT), (other, self, Order.LT)):
            ob = try_compare(a.B, b.B)
            od = try_compare(b.r.den, a.r.den)  # larger denominator means smaller r
            if a.n >= b.n and ob is Order.GT and od in (Order.GT, Order.EQ):
                return sign
        return None


def psi_bound(n: int, B, r, schedule: Schedule | None = None, work_cap: int = PSI_WORK_CAP) -> ExtNat:
    """An ExtNat >= J(n, B, r); exact J + B when it can be computed."""
    schedule = schedule or DefaultSchedule()
    B = ext(B)
    r = as_recip(r)
    Bv, rv = B.exact(), r.fraction()
    if Bv is not None and rv is not None:
        try:
            J = choose_J(RankParams(Bv, n, schedule, rv), work_cap)
            return Exact(J + Bv)
        except BudgetExceeded:
            pass
    return PsiBound(n, B, r, schedule)


def psi_upper(n: int, B, r, mode: str = "symbolic", schedule: Schedule | None = None) -> ExtNat:
    """Psi(n, B, r) itself (exact mode) or a certified upper bound (symbolic mode)."""
    schedule = schedule or DefaultSchedule()
    if mode == "exact":
        Bv = ext(B).exact()
        rv = as_recip(r).fraction() if not isinstance(r, Fraction) else r
        if Bv is None or rv is None:
            raise BudgetExceeded("exact Psi needs exact B and r")
        return pow2(choose_J(RankParams(Bv, n, schedule, rv)))
    if mode == "symbolic":
        return pow2(psi_bound(n, B, r, schedule))
    raise PreconditionViolated(f"unknown Psi mode {mode!r}")


def _parse_psi(args) -> ExtNat:
    n = int(args[0])
    B = from_raw(args[1])
    r = args[2]
    rr = Recip(from_raw(r[1][0])) if isinstance(r, tuple) and r[0] == "recip" else as_recip(Fraction(raw_text(r)))
    schedule = parse_schedule(raw_text(args[3]).replace(";", ","))
    return PsiBound(n, B, rr, schedule)


register_atom("psi", _parse_psi)


# ------------------------------------------------------------------ Assumption tables


def _lg(x: ExtNat) -> ExtNat:
    return Exact(0) if x.exact() == 0 else lg_ceil(x)


@dataclass
class ParamTables:
    E: int
    L: int
    f: list  # f[eps][m]
    g: list
    fmax: list
    phi_lt: list
    r: list  # Recip per level
    schedule: Schedule = field(default_factory=DefaultSchedule)

    def to_json(self) -> dict:
        return {
            "E": self.E,
            "L": self.L,
            "schedule": self.schedule.key,
            "f": [[str(x) for x in row] for row in self.f],
            "g": [[str(x) for x in row] for row in self.g],
            "fmax": [str(x) for x in self.fmax],
            "phi_lt": [str(x) for x in self.phi_lt],
            "r": [str(x) for x in self.r],
        }


def gen_sequences(E: int, L: int, schedule: Schedule | None = None) -> ParamTables:
    """Tables f_eps(m), g_eps(m) for eps < E, m < L built level by level.

    g_eps(m) = 2^X with X = lg phi(<m) + m lg f_{eps-1}(m) + lg g_{eps-1}(m)
    + lg fmax(m-1) + 1 (terms present when their index exists), and
    f_eps(m) = 2^psi_bound(m, g_eps(m), r(m)).
    """
    schedule = schedule or DefaultSchedule()
    if E < 1 or L < 1:
        raise PreconditionViolated("need E, L >= 1")
    f = [[None] * L for _ in range(E)]
    g = [[None] * L for _ in range(E)]
    fmax, phis, rs = [], [], []
    for m in range(L):
        phi, r = phi_r(lambda i: fmax[i], m, "product")
        phis.append(phi)
        rs.append(r)
        for e in range(E):
            terms = [_lg(phi), 1]
            if e > 0:
                terms.append(scale(_lg(f[e - 1][m]), m))
                terms.append(_lg(g[e - 1][m]))
            if m > 0:
                terms.append(_lg(fmax[m - 1]))
            g[e][m] = pow2(add(*terms))
            f[e][m] = psi_upper(m, g[e][m], r, "symbolic", schedule)
        fmax.append(f[E - 1][m])
    tables = ParamTables(E, L, f, g, fmax, phis, rs, schedule)
    rep = check_assumption(tables)
    if not rep["ok"]:
        bad = [it for it in rep["items"] if it["status"] != "pass"][:3]
        raise Incomparable(f"generated tables are not certified: {bad}")
    return tables


def _status(fn) -> str:
    try:
        return "pass" if fn() else "fail"
    except (Incomparable, BudgetExceeded):
        return "incomparable"


def check_assumption(t: ParamTables) -> dict:
    """Every bullet instance of the growth assumption, each certified or not."""
    items = []

    def item(bullet, status, **where):
        items.append({"bullet": bullet, "status": status, **where})

    for m in range(t.L):
        phi = t.phi_lt[m]
        for e in range(t.E):
            fe, ge = t.f[e][m], t.g[e][m]
            item("fmax", _status(lambda: compare(t.fmax[m], fe) is not Order.LT), eps=e, m=m)
            psi = psi_upper(m, ge, t.r[m], "symbolic", t.schedule)
            item("f>=Psi", _status(lambda: compare(fe, psi) is not Order.LT), eps=e, m=m)
            item("g>phi", _status(lambda: compare(ge, phi) is Order.GT), eps=e, m=m)
            if m + 1 < t.L:
                item("g(m+1)>=fmax(m)", _status(lambda: compare(t.g[e][m + 1], t.fmax[m]) is not Order.LT), eps=e, m=m)
            for e2 in range(t.E):
                if e2 == e:
                    continue
                f2 = t.f[e2][m]
                item("distinct", _status(lambda: compare(fe, f2) is not Order.EQ), eps=e, eps2=e2, m=m)

                def gap():
                    if compare(fe, f2) is not Order.GT:
                        return True
                    return compare(mul(phi, power(f2, m)), ge) is Order.LT

                item("g>>f'", _status(gap), eps=e, eps2=e2, m=m)
    return {"ok": all(i["status"] == "pass" for i in items), "items": items}


# ------------------------------------------------------------------ grid


@dataclass
class Grid:
    N: int
    f: dict  # (n, l) -> ExtNat, l from -1 to n
    g: dict  # (n, l) -> ExtNat, l from 0 to n
    phi_lt: list
    r: list
    schedule: Schedule = field(default_factory=DefaultSchedule)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "schedule": self.schedule.key,
            "f": {f"{n},{l}": str(v) for (n, l), v in sorted(self.f.items())},
            "g": {f"{n},{l}": str(v) for (n, l), v in sorted(self.g.items())},
            "phi_lt": [str(x) for x in self.phi_lt],
            "r": [str(x) for x in self.r],
        }


def gen_grid(N: int, schedule: Schedule | None = None):
    """Triangular grid f_{n,l}, g_{n,l} for n < N, 0 <= l <= n, with its report."""
    schedule = schedule or DefaultSchedule()
    f: dict = {(0, -1): Exact(0)}
    g: dict = {}
    phis, rs = [], []
    fmax = []
    for n in range(N):
        if n > 0:
            f[(n, -1)] = f[(n - 1, n - 1)]
        phi, r = phi_r(lambda i: fmax[i], n, "product")
        phis.append(phi)
        rs.append(r)
        for l in range(n + 1):
            prev = f[(n, l - 1)]
            g[(n, l)] = pow2(add(_lg(phi), scale(_lg(prev), n), _lg(prev), 1))
            f[(n, l)] = psi_upper(n, g[(n, l)], r, "symbolic", schedule)
        fmax.append(f[(n, n)])
    grid = Grid(N, f, g, phis, rs, schedule)
    return grid, check_grid(grid)


def check_grid(grid: Grid) -> dict:
    items = []

    def item(rule, status, n, l):
        items.append({"rule": rule, "status": status, "n": n, "l": l})

    for n in range(grid.N):
        phi = grid.phi_lt[n]
        if n > 0:
            item("seam", "pass" if grid.f[(n, -1)] == grid.f[(n - 1, n - 1)] else "fail", n, -1)
        for l in range(n + 1):
            prev, gv, fv = grid.f[(n, l - 1)], grid.g[(n, l)], grid.f[(n, l)]
            item("f(l-1)<g", _status(lambda: compare(prev, gv) is Order.LT), n, l)
            item("g<f", _status(lambda: compare(gv, fv) is Order.LT), n, l)
            psi = psi_upper(n, gv, grid.r[n], "symbolic", grid.schedule)
            item("f>=Psi", _status(lambda: compare(fv, psi) is not Order.LT), n, l)
            item("g>=phi*f^n", _status(lambda: compare(gv, mul(phi, power(prev, n))) is not Order.LT), n, l)
    return {"ok": all(i["status"] == "pass" for i in items), "items": items}


__all__ = [
    "ext_compare",
    "exp_tower",
    "Recip",
    "phi_r",
    "PsiBound",
    "psi_bound",
    "psi_upper",
    "ParamTables",
    "gen_sequences",
    "check_assumption",
    "Grid",
    "gen_grid",
    "check_grid",
]
