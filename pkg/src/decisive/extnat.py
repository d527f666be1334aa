"""Exact-or-symbolic natural numbers.

Values below the bit budget are plain integers (:class:`Exact`).  Anything
larger is kept in a small normal form:

* :class:`Pow2` -- ``coef * 2**exp`` with an odd integer ``coef`` and an
  ExtNat exponent,
* :class:`Lin` -- a non-negative integer combination of atoms plus a constant,
* :class:`Atom` subclasses registered by other modules (the Psi bound).

Comparisons are certified: :func:`compare` returns an :class:`Order` only when
a sound argument exists and raises :class:`Incomparable` otherwise.  ``==`` on
the node classes is structural equality of normal forms, not numeric equality.
"""
from __future__ import annotations

import contextlib
import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Union

from .errors import BudgetExceeded, Incomparable, SchemaError

DEFAULT_BIT_BUDGET = 1 << 20

_state = {"bits": DEFAULT_BIT_BUDGET}

# longest int printed in decimal; beyond this hex or pow2 text is used
_DECIMAL_BITS = 12_000

# exponent cap used when deriving small integer lower bounds
_LOWER_EXP_CAP = 64


def bit_budget() -> int:
    return _state["bits"]


def set_bit_budget(bits: int) -> None:
    if bits < 64:
        raise ValueError("bit budget must be at least 64")
    _state["bits"] = bits


@contextlib.contextmanager
def budget(bits: int):
    old = _state["bits"]
    set_bit_budget(bits)
    try:
        yield
    finally:
        _state["bits"] = old


class Order(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1

    @classmethod
    def of(cls, a, b) -> "Order":
        return cls((a > b) - (a < b))

    def flip(self) -> "Order":
        return Order(-self.value)


class ExtNat:
    """Base class; see module docstring."""

    def __hash__(self):
        # nodes are immutable trees; cache the structural hash
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
            object.__setattr__(self, "_hash", h)
        return h

    def exact(self) -> int | None:
        return None

    def __lt__(self, other):
        return compare(self, other) is Order.LT

    def __le__(self, other):
        return compare(self, other) is not Order.GT

    def __gt__(self, other):
        return compare(self, other) is Order.GT

    def __ge__(self, other):
        return compare(self, other) is not Order.LT

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        return power(self, m)


@dataclass(frozen=True)
class Exact(ExtNat):
    __hash__ = ExtNat.__hash__
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("ExtNat values are natural numbers")

    def exact(self) -> int:
        return self.value

    def __str__(self):
        v = self.value
        if v.bit_length() <= _DECIMAL_BITS:
            return str(v)
        # decimal conversion of huge ints is refused by the interpreter
        tz = (v & -v).bit_length() - 1
        odd = v >> tz
        if odd == 1:
            return f"pow2({tz})"
        if odd.bit_length() <= _DECIMAL_BITS:
            return f"mul({odd},pow2({tz}))"
        return hex(v)


@dataclass(frozen=True, eq=True)
class Pow2(ExtNat):
    __hash__ = ExtNat.__hash__
    exp: ExtNat
    coef: int = 1

    def __str__(self):
        inner = f"pow2({self.exp})"
        return inner if self.coef == 1 else f"mul({self.coef},{inner})"


class Atom(ExtNat):
    """Opaque symbolic value contributed by another module.

    Subclasses are frozen dataclasses and may override the hooks below.
    """

    def strict_lower(self) -> ExtNat | None:
        """An ExtNat strictly below this value, or None."""
        return None

    def lower_int(self) -> int:
        return 1

    def cmp_same_kind(self, other: "Atom") -> Order | None:
        return None


@dataclass(frozen=True)
class Lin(ExtNat):
    __hash__ = ExtNat.__hash__
    terms: tuple  # ((atom, coeff), ...) sorted by str(atom)
    const: int = 0

    def __str__(self):
        parts = [str(a) if c == 1 else f"mul({c},{a})" for a, c in self.terms]
        if self.const:
            parts.append(str(self.const))
        return "add(" + ",".join(parts) + ")"


Like = Union[ExtNat, int]


def ext(x: Like) -> ExtNat:
    if isinstance(x, ExtNat):
        return x
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError(f"not a natural number: {x!r}")
    return Exact(x)


def _fits(bits: int) -> bool:
    return bits <= bit_budget()


# ---------------------------------------------------------------- construction


def pow2(e: Like, coef: int = 1) -> ExtNat:
    """``coef * 2**e`` in normal form."""
    e = ext(e)
    if coef < 1:
        raise ValueError("coefficient must be positive")
    tz = (coef & -coef).bit_length() - 1
    if tz:
        coef >>= tz
        e = add(e, tz)
    ev = e.exact()
    if ev is not None and _fits(ev + coef.bit_length()):
        return Exact(coef << ev)
    return Pow2(e, coef)


def _linear_parts(x: ExtNat) -> tuple[dict, int]:
    if isinstance(x, Exact):
        return {}, x.value
    if isinstance(x, Lin):
        return {a: c for a, c in x.terms}, x.const
    return {x: 1}, 0


def _build_lin(terms: dict, const: int) -> ExtNat:
    terms = {a: c for a, c in terms.items() if c}
    if any(c < 0 for c in terms.values()) or const < 0:
        raise ValueError("negative linear form")
    if not terms:
        if not _fits(const.bit_length()):
            raise BudgetExceeded(f"constant of {const.bit_length()} bits exceeds bit budget")
        return Exact(const)
    if len(terms) == 1 and const == 0:
        (a, c), = terms.items()
        if c == 1:
            return a
    return Lin(tuple(sorted(terms.items(), key=lambda t: str(t[0]))), const)


def add(*xs: Like) -> ExtNat:
    terms: dict = {}
    const = 0
    for x in xs:
        t, c = _linear_parts(ext(x))
        const += c
        for a, k in t.items():
            terms[a] = terms.get(a, 0) + k
    return _build_lin(terms, const)


def scale(x: Like, m: int) -> ExtNat:
    """``m * x`` for a natural number ``m``."""
    x = ext(x)
    if m == 0:
        return Exact(0)
    xv = x.exact()
    if xv is not None and _fits(xv.bit_length() + m.bit_length()):
        return Exact(xv * m)
    if isinstance(x, Pow2):
        return pow2(x.exp, x.coef * m)
    if xv is not None:
        return mul(x, m)
    t, c = _linear_parts(x)
    return _build_lin({a: k * m for a, k in t.items()}, c * m)


def _as_scaled(x: ExtNat):
    """(odd coef, exponent) with x = coef * 2**exponent, or None."""
    if isinstance(x, Pow2):
        return x.coef, x.exp
    if isinstance(x, Exact) and x.value > 0:
        v = x.value
        tz = (v & -v).bit_length() - 1
        return v >> tz, Exact(tz)
    return None


def mul(x: Like, y: Like) -> ExtNat:
    x, y = ext(x), ext(y)
    xv, yv = x.exact(), y.exact()
    if xv is not None and yv is not None and _fits(xv.bit_length() + yv.bit_length()):
        return Exact(xv * yv)
    if xv == 0 or yv == 0:
        return Exact(0)
    if xv == 1:
        return y
    if yv == 1:
        return x
    sx, sy = _as_scaled(x), _as_scaled(y)
    if sx and sy:
        return pow2(add(sx[1], sy[1]), sx[0] * sy[0])
    if xv is not None:
        return scale(y, xv)
    if yv is not None:
        return scale(x, yv)
    raise BudgetExceeded(f"product {x} * {y} has no normal form")


def power(x: Like, m: int) -> ExtNat:
    x = ext(x)
    if m < 0:
        raise ValueError("negative exponent")
    if m == 0:
        return Exact(1)
    xv = x.exact()
    if xv is not None:
        if xv <= 1:
            return Exact(xv)
        if _fits(xv.bit_length() * m):
            return Exact(xv**m)
    s = _as_scaled(x)
    if s is None:
        raise BudgetExceeded(f"power {x}^{m} has no normal form")
    coef, e = s
    if coef != 1 and not _fits(coef.bit_length() * m):
        raise BudgetExceeded("coefficient of power exceeds bit budget")
    return pow2(scale(e, m), coef**m)


def lg_ceil(x: Like) -> ExtNat:
    """An ExtNat >= log2(x); exact ceiling for exact inputs.  lg_ceil(0) is 0."""
    x = ext(x)
    xv = x.exact()
    if xv is not None:
        return Exact(0 if xv <= 1 else (xv - 1).bit_length())
    if isinstance(x, Pow2):
        return add(x.exp, (x.coef - 1).bit_length())
    raise BudgetExceeded(f"no logarithm bound for {x}")


def ext_max(*xs: Like) -> ExtNat:
    best = ext(xs[0])
    for x in xs[1:]:
        x = ext(x)
        if compare(x, best) is Order.GT:
            best = x
    return best


# ---------------------------------------------------------------- comparison


def compare(x: Like, y: Like) -> Order:
    """Certified ordering of two ExtNats; raises Incomparable when undecided."""
    x, y = ext(x), ext(y)
    res = _compare(x, y)
    if res is None:
        raise Incomparable(f"cannot order {x} and {y} within budget")
    return res


def try_compare(x: Like, y: Like) -> Order | None:
    return _compare(ext(x), ext(y))


def _ge(x: ExtNat, y: ExtNat) -> bool:
    return _compare(x, y) in (Order.GT, Order.EQ)


_memo: dict = {}


def _compare(x: ExtNat, y: ExtNat) -> Order | None:
    key = (x, y, _state["bits"])
    try:
        return _memo[key]
    except KeyError:
        pass
    res = _compare_uncached(x, y)
    if len(_memo) > 200_000:
        _memo.clear()
    _memo[key] = res
    return res


def _compare_uncached(x: ExtNat, y: ExtNat) -> Order | None:
    if x == y:
        return Order.EQ
    xv, yv = x.exact(), y.exact()
    if xv is not None and yv is not None:
        return Order.of(xv, yv)
    if xv == 0:
        return Order.LT
    if yv == 0:
        return Order.GT
    sx, sy = _as_scaled(x), _as_scaled(y)
    if sx and sy:
        return _cmp_scaled(sx, sy)
    if isinstance(x, (Lin, Exact)) or isinstance(y, (Lin, Exact)):
        res = _cmp_linear(x, y)
        if res is not None:
            return res
    res = _dominates(x, y)
    if res is not None:
        return res
    res = _dominates(y, x)
    if res is not None:
        return res.flip()
    if isinstance(x, Atom) and type(x) is type(y):
        return x.cmp_same_kind(y)
    return None


def _dominates(a: ExtNat, b: ExtNat) -> Order | None:
    if isinstance(a, Pow2) and _ge(a.exp, b):
        # c * 2**e > e >= b
        return Order.GT
    if isinstance(a, Atom):
        lo = a.strict_lower()
        if lo is not None and _ge(lo, b):
            return Order.GT
    return None


def _cmp_scaled(sx, sy) -> Order | None:
    (c1, e1), (c2, e2) = sx, sy
    diff, const = _lin_diff(e1, e2)
    if not diff:
        d = const
        if d >= 0:
            if d > c2.bit_length():
                return Order.GT
            return Order.of(c1 << d, c2)
        if -d > c1.bit_length():
            return Order.LT
        return Order.of(c1, c2 << -d)
    low, high = _lin_bounds(e1, e2)
    o = _compare(e1, e2)
    if o is None:
        return None
    if o is Order.EQ:
        return Order.of(c1, c2)
    # exponents are naturals, so a strict order means a gap of at least one
    if o is Order.GT:
        low = max(low or 1, 1)
        if low >= c2.bit_length():
            return Order.GT
    if o is Order.LT:
        high = min(high if high is not None else -1, -1)
        if -high >= c1.bit_length():
            return Order.LT
    return None


def _lin_diff(x: ExtNat, y: ExtNat) -> tuple[dict, int]:
    tx, cx = _linear_parts(x)
    ty, cy = _linear_parts(y)
    diff = dict(tx)
    for a, k in ty.items():
        diff[a] = diff.get(a, 0) - k
    return {a: k for a, k in diff.items() if k}, cx - cy


def lower_int(x: ExtNat) -> int:
    """A small certified integer lower bound."""
    v = x.exact()
    if v is not None:
        return v
    if isinstance(x, Pow2):
        return x.coef << min(lower_int(x.exp), _LOWER_EXP_CAP)
    if isinstance(x, Lin):
        return sum(c * lower_int(a) for a, c in x.terms) + x.const
    if isinstance(x, Atom):
        return x.lower_int()
    return 0


def _lin_bounds(x: ExtNat, y: ExtNat) -> tuple[int | None, int | None]:
    """Certified integer bounds (low, high) on x - y from the linear forms, or None."""
    diff, const = _lin_diff(x, y)
    # Cancelling a negative atom against a dominating positive one keeps a
    # valid lower bound; the mirror move keeps a valid upper bound.
    lo_ok = hi_ok = True
    lo_bonus = hi_bonus = 0
    changed = True
    while changed and diff:
        changed = False
        pos = [a for a, k in diff.items() if k > 0]
        neg = [a for a, k in diff.items() if k < 0]
        for b in neg:
            for a in pos:
                o = _compare(a, b)
                ka, kb = diff[a], -diff[b]
                if o in (Order.GT, Order.EQ) and ka >= kb and lo_ok:
                    hi_ok = hi_ok and o is Order.EQ
                    if o is Order.GT:
                        lo_bonus += kb
                    diff[a] = ka - kb
                    del diff[b]
                elif o in (Order.LT, Order.EQ) and kb >= ka and hi_ok:
                    lo_ok = lo_ok and o is Order.EQ
                    if o is Order.LT:
                        hi_bonus += ka
                    diff[b] = -(kb - ka)
                    del diff[a]
                else:
                    continue
                diff = {t: k for t, k in diff.items() if k}
                changed = True
                break
            if changed:
                break
    low = high = None
    if lo_ok and all(k > 0 for k in diff.values()):
        low = const + lo_bonus + sum(k * lower_int(a) for a, k in diff.items())
    if hi_ok and all(k < 0 for k in diff.values()):
        high = const - hi_bonus - sum(-k * lower_int(a) for a, k in diff.items())
    return low, high


def _cmp_linear(x: ExtNat, y: ExtNat) -> Order | None:
    low, high = _lin_bounds(x, y)
    if low is not None and low > 0:
        return Order.GT
    if high is not None and high < 0:
        return Order.LT
    if low == 0 and high == 0:
        return Order.EQ
    return None


# ---------------------------------------------------------------- text form

_ATOM_PARSERS: dict[str, Callable[[list], ExtNat]] = {}


def register_atom(name: str, parser: Callable[[list], ExtNat]) -> None:
    _ATOM_PARSERS[name] = parser


def to_text(x: Like) -> str:
    return str(ext(x))


def parse(text: str) -> ExtNat:
    """Inverse of :func:`to_text` for the prefix notation."""
    node, pos = _parse_at(text.replace(" ", ""), 0)
    if pos != len(text.replace(" ", "")):
        raise SchemaError(f"trailing input in {text!r}")
    return node


def _parse_raw(s: str, i: int):
    """Parse a term into a nested (name, args) tree or a literal string."""
    j = i
    while j < len(s) and s[j] not in "(),":
        j += 1
    head = s[i:j]
    if j < len(s) and s[j] == "(":
        args = []
        j += 1
        if s[j] == ")":
            return (head, args), j + 1
        while True:
            arg, j = _parse_raw(s, j)
            args.append(arg)
            if s[j] == ",":
                j += 1
                continue
            if s[j] == ")":
                return (head, args), j + 1
            raise SchemaError(f"bad ExtNat text near {s[j:]!r}")
    return head, j


def _parse_at(s: str, i: int):
    raw, j = _parse_raw(s, i)
    return from_raw(raw), j


def from_raw(raw) -> ExtNat:
    if isinstance(raw, str):
        try:
            return Exact(int(raw, 16) if raw.startswith("0x") else int(raw))
        except ValueError:
            raise SchemaError(f"bad ExtNat literal {raw!r}") from None
    name, args = raw
    if name == "pow2":
        return pow2(from_raw(args[0]))
    if name == "mul":
        return mul(from_raw(args[0]), from_raw(args[1]))
    if name == "add":
        return add(*(from_raw(a) for a in args))
    if name in _ATOM_PARSERS:
        return _ATOM_PARSERS[name](args)
    raise SchemaError(f"unknown ExtNat constructor {name!r}")


def raw_text(raw) -> str:
    if isinstance(raw, str):
        return raw
    name, args = raw
    return f"{name}(" + ",".join(raw_text(a) for a in args) + ")"


def ext_iterable(xs: Iterable[Like]) -> list[ExtNat]:
    return [ext(x) for x in xs]
