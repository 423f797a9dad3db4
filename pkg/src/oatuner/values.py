"""Exact fixed-point representation of tunable handover parameters.

All parameter arithmetic runs on an integer lattice of 1e-4 base units
(m, m/s, or N), called ticks. Every range constant and every value the
tuner can generate (bound moves by one step, midpoints of tick sums)
stays on this lattice, so comparisons against the step threshold are
exact instead of float-fragile.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation

__all__ = [
    "TICKS_PER_UNIT",
    "NotRepresentable",
    "InvalidRange",
    "ParameterValue",
    "ParameterSpec",
    "HandoverParams",
    "PARAMETER_ORDER",
    "make_spec",
    "default_specs",
    "spec_by_name",
    "midpoint",
    "near_average_defaults",
    "ticks_from_decimal",
    "ticks_to_decimal_str",
]

TICKS_PER_UNIT = 10000  # 1 tick = 1e-4 m, m/s, or N


class NotRepresentable(ValueError):
    """Raised when a decimal input is not a multiple of 1e-4 base units."""


class InvalidRange(ValueError):
    pass


def ticks_from_decimal(value) -> int:
    """Convert a decimal input (str, int, float, Decimal) to exact ticks.

    Floats are accepted for convenience but go through their shortest
    decimal repr, so 0.075 means 750 ticks, not the binary float nearby.
    """
    if isinstance(value, bool):
        raise NotRepresentable(f"not a number: {value!r}")
    if isinstance(value, int):
        return value * TICKS_PER_UNIT
    try:
        d = Decimal(str(value))
    except InvalidOperation as exc:
        raise NotRepresentable(f"not a number: {value!r}") from exc
    scaled = d * TICKS_PER_UNIT
    ticks = int(scaled)
    if scaled != ticks:
        raise NotRepresentable(f"{value!r} is not a multiple of 1e-4")
    return ticks


def ticks_to_decimal_str(ticks: int) -> str:
    """Canonical decimal string for a tick count, e.g. 4500 -> '0.45'."""
    d = Decimal(ticks) / TICKS_PER_UNIT
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    if s in ("", "-0"):
        s = "0"
    return s


@dataclass(frozen=True)
class ParameterValue:
    ticks: int
    unit: str
    # set on midpoints whose tick sum was odd; never for Table I specs
    rounded: bool = field(default=False, compare=False)

    @classmethod
    def from_decimal(cls, value, unit: str) -> "ParameterValue":
        return cls(ticks_from_decimal(value), unit)

    def as_float(self) -> float:
        return self.ticks / TICKS_PER_UNIT

    def __str__(self) -> str:
        return ticks_to_decimal_str(self.ticks)

    def __format__(self, spec):
        return format(str(self), spec)


@dataclass(frozen=True)
class ParameterSpec:
    """One tunable quantity: name, unit, and an inclusive [min, max] range
    walked in increments of step."""

    name: str
    unit: str
    min_ticks: int
    max_ticks: int
    step_ticks: int

    def __post_init__(self):
        if self.min_ticks >= self.max_ticks:
            raise InvalidRange(f"{self.name}: min must be < max")
        if self.step_ticks <= 0:
            raise InvalidRange(f"{self.name}: step must be > 0")
        if self.step_ticks > self.max_ticks - self.min_ticks:
            raise InvalidRange(f"{self.name}: step exceeds the range")

    @property
    def min(self) -> ParameterValue:
        return ParameterValue(self.min_ticks, self.unit)

    @property
    def max(self) -> ParameterValue:
        return ParameterValue(self.max_ticks, self.unit)

    @property
    def step(self) -> ParameterValue:
        return ParameterValue(self.step_ticks, self.unit)

    def contains(self, ticks: int) -> bool:
        return self.min_ticks <= ticks <= self.max_ticks

    def value(self, ticks: int) -> ParameterValue:
        return ParameterValue(ticks, self.unit)

    def half_step_lattice(self):
        """All ticks of the form min + k*(step/2) inside the range.

        step/2 may itself be fractional in ticks; k is advanced so that
        min + k*step/2 floors onto the tick lattice, matching midpoint
        rounding.
        """
        pts = []
        k = 0
        while True:
            t = self.min_ticks + (k * self.step_ticks) // 2
            if t > self.max_ticks:
                break
            pts.append(t)
            k += 1
        return pts

    def as_doc(self) -> dict:
        return {
            "name": self.name,
            "unit": self.unit,
            "min": ticks_to_decimal_str(self.min_ticks),
            "step": ticks_to_decimal_str(self.step_ticks),
            "max": ticks_to_decimal_str(self.max_ticks),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ParameterSpec":
        return make_spec(doc["name"], doc["min"], doc["max"], doc["step"], doc["unit"])


def make_spec(name, min_value, max_value, step, unit) -> ParameterSpec:
    """Validate raw decimal bounds into an exact-tick ParameterSpec."""
    return ParameterSpec(
        name=name,
        unit=unit,
        min_ticks=ticks_from_decimal(min_value),
        max_ticks=ticks_from_decimal(max_value),
        step_ticks=ticks_from_decimal(step),
    )


# Range table: name, unit, (min, step, max) in base units.
_TABLE = (
    ("v_max", "m/s", ("0.1", "0.1", "0.8")),
    ("x", "m", ("0.8", "0.025", "1.0")),
    ("y", "m", ("-0.2", "0.075", "0.2")),
    ("z", "m", ("0.15", "0.025", "0.35")),
    ("f_min", "N", ("13", "2", "23")),
)

PARAMETER_ORDER = tuple(name for name, _, _ in _TABLE)


def default_specs():
    """The five built-in parameter ranges, in tuning order."""
    return [
        make_spec(name, lo, hi, st, unit)
        for name, unit, (lo, st, hi) in _TABLE
    ]


def spec_by_name(name: str) -> ParameterSpec:
    for spec in default_specs():
        if spec.name == name:
            return spec
    raise KeyError(name)


def midpoint(spec: ParameterSpec) -> ParameterValue:
    """(min + max) / 2 in ticks; odd tick sums round toward min and the
    result carries rounded=True."""
    total = spec.min_ticks + spec.max_ticks
    # floor division rounds toward -inf, i.e. toward min, for sums >= 0
    # and < 0 alike because min <= max
    ticks = total // 2
    return ParameterValue(ticks, spec.unit, rounded=bool(total % 2))


@dataclass(frozen=True)
class HandoverParams:
    """One full parameter vector for a single handover."""

    v_max: ParameterValue
    x: ParameterValue
    y: ParameterValue
    z: ParameterValue
    f_min: ParameterValue

    def get(self, name: str) -> ParameterValue:
        if name not in PARAMETER_ORDER:
            raise KeyError(name)
        return getattr(self, name)

    def with_value(self, name: str, value: ParameterValue) -> "HandoverParams":
        if name not in PARAMETER_ORDER:
            raise KeyError(name)
        return replace(self, **{name: value})

    def location(self):
        """Handover target point (x, y, z) in meters as floats."""
        return (self.x.as_float(), self.y.as_float(), self.z.as_float())

    def as_doc(self) -> dict:
        return {name: str(self.get(name)) for name in PARAMETER_ORDER}

    @classmethod
    def from_doc(cls, doc, specs=None) -> "HandoverParams":
        specs = specs if specs is not None else default_specs()
        by_name = {s.name: s for s in specs}
        kwargs = {}
        for name in PARAMETER_ORDER:
            spec = by_name[name]
            kwargs[name] = ParameterValue.from_decimal(doc[name], spec.unit)
        return cls(**kwargs)

    def validate(self, specs=None):
        specs = specs if specs is not None else default_specs()
        for spec in specs:
            v = self.get(spec.name)
            if not spec.contains(v.ticks):
                raise InvalidRange(
                    f"{spec.name}={v} outside [{spec.min}, {spec.max}]"
                )
        return self


def near_average_defaults() -> HandoverParams:
    """Midpoint of every range: the fixed vector used for warm-up practice."""
    mids = {spec.name: midpoint(spec) for spec in default_specs()}
    return HandoverParams(**mids)
