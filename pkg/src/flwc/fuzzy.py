"""Mamdani fuzzy inference mapping (SoC, stay time) to a charging weight.

Both inputs and the output live on the normalized universe [0, 1]. Rules fire
with min-AND, consequents are clipped with min-implication and aggregated with
max, and the crisp weight is the centroid of the aggregated set sampled on a
uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

SOC_LABELS = ("VL", "L", "M", "H", "VH")
STAY_LABELS = ("VS", "S", "M", "L", "VL_long")
WEIGHT_LABELS = ("LW", "MW", "HW")

DEFAULT_RESOLUTION = 1001


class FuzzyError(ValueError):
    """Base class for fuzzy engine errors."""


class InputDomainError(FuzzyError):
    """A crisp input lies outside the normalized universe [0, 1]."""


class ConfigurationError(FuzzyError):
    """Malformed membership function, variable, or rule base."""


class EmptyAggregateError(FuzzyError):
    """Defuzzification was asked to take the centroid of an empty set."""


def _check_unit(x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise InputDomainError(f"input {x!r} outside [0, 1]")
    return x


@dataclass(frozen=True)
class Trapezoidal:
    """Trapezoid with feet ``a``, ``d`` and plateau ``[b, c]``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        pts = (self.a, self.b, self.c, self.d)
        if any(not (0.0 <= p <= 1.0) for p in pts):
            raise ConfigurationError(f"breakpoints {self.breakpoints} not inside [0, 1]")
        if not (pts[0] <= pts[1] <= pts[2] <= pts[3]):
            raise ConfigurationError(f"breakpoints {self.breakpoints} not ordered")

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.a, self.b, self.c, self.d)

    @property
    def support(self) -> Tuple[float, float]:
        return (self.a, self.d)

    @property
    def kind(self) -> str:
        return "trap"

    def __call__(self, x):
        """Vectorized degree; ``x`` may be a scalar or an array."""
        a, b, c, d = self.a, self.b, self.c, self.d
        x = np.asarray(x, dtype=float)
        y = np.zeros_like(x)
        y[(x >= b) & (x <= c)] = 1.0
        if b > a:
            m = (x > a) & (x < b)
            y[m] = (x[m] - a) / (b - a)
        if d > c:
            m = (x > c) & (x < d)
            y[m] = (d - x[m]) / (d - c)
        return y if y.ndim else float(y)


@dataclass(frozen=True)
class Triangular(Trapezoidal):
    """Triangle with feet ``a``, ``c`` and apex ``b``."""

    def __init__(self, a: float, b: float, c: float):
        super().__init__(a, b, b, c)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.a, self.b, self.d)

    @property
    def kind(self) -> str:
        return "tri"

    def __repr__(self):
        return f"Triangular({self.a}, {self.b}, {self.d})"


MembershipFunction = Union[Triangular, Trapezoidal]


def make_mf(kind: str, params: Sequence[float]) -> MembershipFunction:
    params = [float(p) for p in params]
    if kind == "tri":
        if len(params) != 3:
            raise ConfigurationError(f"tri needs 3 breakpoints, got {len(params)}")
        return Triangular(*params)
    if kind == "trap":
        if len(params) != 4:
            raise ConfigurationError(f"trap needs 4 breakpoints, got {len(params)}")
        return Trapezoidal(*params)
    raise ConfigurationError(f"unknown membership shape {kind!r}")


def mf_eval(mf: MembershipFunction, x: float) -> float:
    return float(mf(_check_unit(x)))


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    terms: Tuple[Tuple[str, MembershipFunction], ...]

    def __post_init__(self):
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"duplicate labels in {self.name}: {labels}")

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.terms)

    def __getitem__(self, label: str) -> MembershipFunction:
        for name, mf in self.terms:
            if name == label:
                return mf
        raise ConfigurationError(f"variable {self.name} has no term {label!r}")

    def covers_universe(self, step: float = 1e-3) -> bool:
        """True when every sampled x in [0, 1] has some term with degree > 0."""
        xs = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
        top = np.max([mf(xs) for _, mf in self.terms], axis=0)
        return bool(np.all(top > 0.0))


def fuzzify(var: LinguisticVariable, x: float) -> Dict[str, float]:
    x = _check_unit(x)
    return {label: float(mf(x)) for label, mf in var.terms}


@dataclass(frozen=True)
class Rule:
    soc_label: str
    stay_label: str
    weight_label: str

    def __str__(self):
        return f"{self.soc_label} {self.stay_label} -> {self.weight_label}"


@dataclass(frozen=True)
class RuleBase:
    """Complete 5x5 table from (SoC term, stay term) to a weight term."""

    rules: Tuple[Rule, ...]

    def __post_init__(self):
        if len(self.rules) != len(SOC_LABELS) * len(STAY_LABELS):
            raise ConfigurationError(f"expected 25 rules, got {len(self.rules)}")
        seen = set()
        for r in self.rules:
            if r.soc_label not in SOC_LABELS:
                raise ConfigurationError(f"unknown SoC label {r.soc_label!r}")
            if r.stay_label not in STAY_LABELS:
                raise ConfigurationError(f"unknown stay label {r.stay_label!r}")
            if r.weight_label not in WEIGHT_LABELS:
                raise ConfigurationError(f"unknown weight label {r.weight_label!r}")
            key = (r.soc_label, r.stay_label)
            if key in seen:
                raise ConfigurationError(f"duplicate rule for {key}")
            seen.add(key)

    @classmethod
    def from_matrix(cls, matrix: Mapping[str, Sequence[str]]) -> "RuleBase":
        """Build from rows keyed by stay label, columns in SoC label order."""
        rules = []
        for stay in STAY_LABELS:
            row = matrix[stay]
            if len(row) != len(SOC_LABELS):
                raise ConfigurationError(f"row {stay} must have 5 entries")
            rules.extend(Rule(soc, stay, w) for soc, w in zip(SOC_LABELS, row))
        return cls(tuple(rules))

    @classmethod
    def constant(cls, weight_label: str = "MW") -> "RuleBase":
        return cls.from_matrix({s: [weight_label] * 5 for s in STAY_LABELS})

    def lookup(self, soc_label: str, stay_label: str) -> str:
        for r in self.rules:
            if r.soc_label == soc_label and r.stay_label == stay_label:
                return r.weight_label
        raise KeyError((soc_label, stay_label))

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)


# Rows are stay terms, columns SoC terms VL..VH. Monotone: weight rises with
# SoC (less energy to deliver) and falls with stay length.
DEFAULT_RULE_MATRIX = {
    "VS": ["MW", "MW", "HW", "HW", "HW"],
    "S": ["MW", "MW", "MW", "HW", "HW"],
    "M": ["LW", "MW", "MW", "MW", "HW"],
    "L": ["LW", "LW", "MW", "MW", "MW"],
    "VL_long": ["LW", "LW", "LW", "MW", "MW"],
}


def default_rule_base() -> RuleBase:
    return RuleBase.from_matrix(DEFAULT_RULE_MATRIX)


def _shoulders_and_peaks(mid: Triangular, long_end: MembershipFunction) -> list:
    return [
        Trapezoidal(0.0, 0.0, 0.3, 0.5),
        Triangular(0.1, 0.3, 0.5),
        mid,
        Triangular(0.5, 0.7, 0.9),
        long_end,
    ]


def default_variables() -> Tuple[LinguisticVariable, LinguisticVariable, LinguisticVariable]:
    """SoC, stay and weight variables with the published typos corrected.

    The medium terms are centred at 0.5 with feet 0.3/0.7, and the very-long
    stay term mirrors the very-high SoC term.
    """
    right = Trapezoidal(0.7, 0.9, 1.0, 1.0)
    soc = LinguisticVariable(
        "soc", tuple(zip(SOC_LABELS, _shoulders_and_peaks(Triangular(0.3, 0.5, 0.7), right)))
    )
    stay = LinguisticVariable(
        "stay_time",
        tuple(zip(STAY_LABELS, _shoulders_and_peaks(Triangular(0.3, 0.5, 0.7), right))),
    )
    return soc, stay, weight_variable()


def raw_table_variables() -> Tuple[LinguisticVariable, LinguisticVariable, LinguisticVariable]:
    """Variables exactly as printed in the published parameter table.

    The stay variable here does not cover the right end of the universe, so
    a FIS built from it can raise :class:`EmptyAggregateError` for long stays.
    """
    soc = LinguisticVariable(
        "soc",
        tuple(zip(SOC_LABELS, _shoulders_and_peaks(
            Triangular(0.0, 0.5, 0.7), Trapezoidal(0.7, 0.9, 1.0, 1.0)))),
    )
    stay = LinguisticVariable(
        "stay_time",
        tuple(zip(STAY_LABELS, _shoulders_and_peaks(
            Triangular(0.0, 0.5, 0.7), Trapezoidal(0.0, 0.0, 0.3, 0.5)))),
    )
    return soc, stay, weight_variable()


def weight_variable() -> LinguisticVariable:
    return LinguisticVariable(
        "weight",
        (
            ("LW", Trapezoidal(0.0, 0.0, 0.3, 0.5)),
            ("MW", Triangular(0.3, 0.5, 0.7)),
            ("HW", Trapezoidal(0.5, 0.7, 1.0, 1.0)),
        ),
    )


def fire_rules(
    rules: Iterable[Rule],
    soc_in: Mapping[str, float],
    stay_in: Mapping[str, float],
) -> Dict[str, float]:
    """Min-AND each rule and max-aggregate strengths per consequent.

    Labels missing from a fuzzified input count as degree 0. Every weight
    label is present in the result.
    """
    clip = {w: 0.0 for w in WEIGHT_LABELS}
    for r in rules:
        if r.weight_label not in clip:
            raise ConfigurationError(f"unknown weight label {r.weight_label!r}")
        if r.soc_label not in SOC_LABELS or r.stay_label not in STAY_LABELS:
            raise ConfigurationError(f"rule {r} references an unknown label")
        strength = min(soc_in.get(r.soc_label, 0.0), stay_in.get(r.stay_label, 0.0))
        if strength > clip[r.weight_label]:
            clip[r.weight_label] = strength
    return clip


def aggregate(var: LinguisticVariable, clip_levels: Mapping[str, float], ys: np.ndarray) -> np.ndarray:
    """Sampled max-of-clipped-terms membership of the output set."""
    mu = np.zeros_like(ys)
    for label, level in clip_levels.items():
        if level > 0.0:
            np.maximum(mu, np.minimum(level, var[label](ys)), out=mu)
    return mu


def defuzzify_cog(
    var: LinguisticVariable,
    clip_levels: Mapping[str, float],
    resolution: int = DEFAULT_RESOLUTION,
) -> float:
    if resolution < 100:
        raise ValueError(f"resolution must be >= 100, got {resolution}")
    if not any(level > 0.0 for level in clip_levels.values()):
        raise EmptyAggregateError("no output term fired; centroid undefined")
    ys = np.linspace(0.0, 1.0, resolution)
    mu = aggregate(var, clip_levels, ys)
    total = mu.sum()
    if total <= 0.0:
        raise EmptyAggregateError("aggregated output set has zero area")
    return float(np.dot(ys, mu) / total)


@dataclass(frozen=True)
class FuzzySystem:
    """Two-input, one-output Mamdani system. Immutable, so safe to share."""

    soc: LinguisticVariable
    stay: LinguisticVariable
    weight: LinguisticVariable
    rules: RuleBase = field(default_factory=default_rule_base)
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if tuple(self.soc.labels) != SOC_LABELS:
            raise ConfigurationError(f"soc terms must be {SOC_LABELS}")
        if tuple(self.stay.labels) != STAY_LABELS:
            raise ConfigurationError(f"stay_time terms must be {STAY_LABELS}")
        if tuple(self.weight.labels) != WEIGHT_LABELS:
            raise ConfigurationError(f"weight terms must be {WEIGHT_LABELS}")

    @classmethod
    def default(cls, rules: RuleBase | None = None, resolution: int = DEFAULT_RESOLUTION):
        soc, stay, weight = default_variables()
        return cls(soc, stay, weight, rules or default_rule_base(), resolution)

    def compute_weight(self, soc: float, stay: float) -> float:
        return compute_weight(self, soc, stay)


def compute_weight(fis: FuzzySystem, soc: float, stay: float) -> float:
    soc_in = fuzzify(fis.soc, soc)
    stay_in = fuzzify(fis.stay, stay)
    clip = fire_rules(fis.rules, soc_in, stay_in)
    return defuzzify_cog(fis.weight, clip, fis.resolution)


# ---------------------------------------------------------------- file formats


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_rules(text: str) -> RuleBase:
    """Parse ``<soc_label> <stay_label> -> <weight_label>`` lines."""
    rules = []
    for lineno, line in _content_lines(text):
        lhs, sep, rhs = line.partition("->")
        parts = lhs.split()
        if not sep or len(parts) != 2 or len(rhs.split()) != 1:
            raise ConfigurationError(f"line {lineno}: cannot parse rule {line!r}")
        rules.append(Rule(parts[0], parts[1], rhs.strip()))
    return RuleBase(tuple(rules))


def load_rules(path) -> RuleBase:
    return parse_rules(Path(path).read_text())


def format_rules(rules: RuleBase) -> str:
    return "".join(f"{r}\n" for r in rules)


def parse_membership(text: str) -> Dict[str, LinguisticVariable]:
    """Parse ``<variable> <label> tri|trap <breakpoints...>`` lines.

    Returns variables keyed by name, terms in file order.
    """
    terms: Dict[str, List[Tuple[str, MembershipFunction]]] = {}
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) < 4:
            raise ConfigurationError(f"line {lineno}: cannot parse term {line!r}")
        name, label, kind, *params = parts
        try:
            mf = make_mf(kind, params)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: {exc}") from None
        terms.setdefault(name, []).append((label, mf))
    return {name: LinguisticVariable(name, tuple(ts)) for name, ts in terms.items()}


def load_membership(path) -> Dict[str, LinguisticVariable]:
    return parse_membership(Path(path).read_text())


def format_membership(*variables: LinguisticVariable) -> str:
    lines = []
    for var in variables:
        for label, mf in var.terms:
            pts = " ".join(repr(float(p)) for p in mf.breakpoints)
            lines.append(f"{var.name} {label} {mf.kind} {pts}\n")
    return "".join(lines)


def system_from_files(rules_path=None, membership_path=None, resolution: int = DEFAULT_RESOLUTION) -> FuzzySystem:
    soc, stay, weight = default_variables()
    if membership_path is not None:
        loaded = load_membership(membership_path)
        soc = loaded.get("soc", soc)
        stay = loaded.get("stay_time", stay)
        weight = loaded.get("weight", weight)
    rules = load_rules(rules_path) if rules_path is not None else default_rule_base()
    return FuzzySystem(soc, stay, weight, rules, resolution)
