"""Growth schedules m -> flarge(m) used by the rank function."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import SchemaError
from .extnat import ExtNat, Exact, pow2


class Schedule:
    key: str

    def __call__(self, m: int) -> ExtNat:
        raise NotImplementedError

    def small(self, m: int) -> int | None:
        """flarge(m) as an int when it is exact, else None (astronomically large)."""
        return self(m).exact()


@dataclass(frozen=True)
class DefaultSchedule(Schedule):
    """flarge(m) = 2^(2^(m^2))."""

    @property
    def key(self) -> str:
        return "default"

    def __call__(self, m: int) -> ExtNat:
        return pow2(pow2(m * m))


@dataclass(frozen=True)
class ConstSchedule(Schedule):
    value: int = 2

    def __post_init__(self):
        if self.value < 2:
            raise SchemaError("flarge values must be at least 2")

    @property
    def key(self) -> str:
        return f"const:{self.value}"

    def __call__(self, m: int) -> ExtNat:
        return Exact(self.value)


@dataclass(frozen=True)
class TableSchedule(Schedule):
    """Explicit values; the last entry repeats forever."""

    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise SchemaError("empty flarge table")
        if min(vals) < 2:
            raise SchemaError("flarge values must be at least 2")
        if any(a > b for a, b in zip(vals, vals[1:])):
            # greedy rank computation relies on a non-decreasing schedule
            raise SchemaError("flarge table must be non-decreasing")
        object.__setattr__(self, "values", vals)

    @property
    def key(self) -> str:
        return "table:" + ",".join(map(str, self.values))

    def __call__(self, m: int) -> ExtNat:
        return Exact(self.values[min(m, len(self.values) - 1)])


def parse_schedule(text: str) -> Schedule:
    """Accepts ``default``, ``const:<v>``, ``table:<v1>,<v2>,...`` or ``file:<path>``."""
    if text == "default":
        return DefaultSchedule()
    kind, _, rest = text.partition(":")
    try:
        if kind == "const":
            return ConstSchedule(int(rest))
        if kind == "table":
            return TableSchedule(tuple(int(v) for v in rest.split(",")))
        if kind == "file":
            content = Path(rest).read_text()
            try:
                data = json.loads(content)
            except json.JSONDecodeError:
                data = content.split()
            if isinstance(data, dict):
                data = data["values"]
            return TableSchedule(tuple(int(v) for v in data))
    except (ValueError, KeyError, OSError) as exc:
        raise SchemaError(f"bad schedule {text!r}: {exc}") from None
    raise SchemaError(f"unknown schedule {text!r}")
