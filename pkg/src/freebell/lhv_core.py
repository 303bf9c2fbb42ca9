"""Deterministic local-hidden-variable layer for two parties.

A local realistic model fixes a quadruple ``(x1, x2, y1, y2)`` of potential
outcomes.  Averaging the CHSH indicator sum over such quadruples gives the
"mathematical" CHSH value, which can never exceed 2.  When the settings are
not chosen freely, the measured conditional probabilities may differ from
their mathematical counterparts; the entrywise difference measures the lack
of freedom and enlarges the bound to ``2 + delta_chsh``.

Probabilities here are coincidence probabilities ``P(X = Y | kl)``.  The
key-distribution layer works with anti-coincidences; use
:func:`to_anticoincidence` to convert.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

NORMALIZATION_TOL = 1e-12

QUANTUM_CHSH = 1.0 + math.sqrt(2.0)
LHV_CHSH_BOUND = 2.0
LOGICAL_CHSH_BOUND = 3.0

SETTING_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))

DeltaMode = Literal["aggregate", "uniform_signed", "all_positive"]


def _check_outcome(value: int) -> int:
    if value not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {value!r}")
    return value


@dataclass(frozen=True)
class LhvQuadruple:
    """Potential outcomes of Alice (x1, x2) and Bob (y1, y2)."""

    x1: int
    x2: int
    y1: int
    y2: int

    def __post_init__(self) -> None:
        for v in (self.x1, self.x2, self.y1, self.y2):
            _check_outcome(v)

    def alice(self, k: int) -> int:
        return self.x1 if k == 1 else self.x2

    def bob(self, l: int) -> int:
        return self.y1 if l == 1 else self.y2

    def coincides(self, k: int, l: int) -> bool:
        return self.alice(k) == self.bob(l)

    def indicator_sum(self) -> int:
        """``1{x1=y1} + 1{x1=y2} + 1{x2=y1} - 1{x2=y2}``; always 0 or 2."""
        return (
            int(self.x1 == self.y1)
            + int(self.x1 == self.y2)
            + int(self.x2 == self.y1)
            - int(self.x2 == self.y2)
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.x2, self.y1, self.y2)


def enumerate_quadruples() -> list[LhvQuadruple]:
    """All 16 quadruples, lexicographic in ``(x1, x2, y1, y2)`` with -1 < +1."""
    return [LhvQuadruple(*q) for q in itertools.product((-1, 1), repeat=4)]


_QUADRUPLES = tuple(enumerate_quadruples())
_QUAD_INDEX = {q: i for i, q in enumerate(_QUADRUPLES)}


@dataclass(frozen=True)
class QuadrupleDistribution:
    """Weights over the 16 quadruples, in :func:`enumerate_quadruples` order.

    Unnormalized input is rejected rather than rescaled.
    """

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if len(w) != 16:
            raise ValueError(f"expected 16 weights, got {len(w)}")
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise ValueError("weights must be finite and non-negative")
        total = math.fsum(w)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1 (tolerance {NORMALIZATION_TOL})")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls) -> QuadrupleDistribution:
        return cls((1.0 / 16,) * 16)

    @classmethod
    def point_mass(cls, quad: LhvQuadruple | tuple[int, int, int, int]) -> QuadrupleDistribution:
        if not isinstance(quad, LhvQuadruple):
            quad = LhvQuadruple(*quad)
        w = [0.0] * 16
        w[_QUAD_INDEX[quad]] = 1.0
        return cls(tuple(w))

    @classmethod
    def from_mapping(cls, masses: dict[LhvQuadruple, float]) -> QuadrupleDistribution:
        w = [0.0] * 16
        for quad, m in masses.items():
            w[_QUAD_INDEX[quad]] += m
        return cls(tuple(w))

    def items(self) -> Iterator[tuple[LhvQuadruple, float]]:
        return zip(_QUADRUPLES, self.weights)

    def coincidence(self, k: int, l: int) -> float:
        """Mathematical probability ``P(X_k = Y_l)``."""
        return math.fsum(w for q, w in self.items() if q.coincides(k, l))


def _check_prob(p: float, name: str = "probability") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p!r}")
    return p


@dataclass(frozen=True)
class CondProbTable:
    """Per-setting probabilities indexed as ``table[k, l]`` for ``k, l in {1, 2}``."""

    p11: float
    p12: float
    p21: float
    p22: float

    def __post_init__(self) -> None:
        for name in ("p11", "p12", "p21", "p22"):
            object.__setattr__(self, name, _check_prob(getattr(self, name), name))

    def __getitem__(self, kl: tuple[int, int]) -> float:
        k, l = kl
        return getattr(self, f"p{k}{l}")

    def values(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p12, self.p21, self.p22)

    def chsh_sum(self) -> float:
        return self.p11 + self.p12 + self.p21 - self.p22

    @classmethod
    def from_distribution(cls, dist: QuadrupleDistribution) -> CondProbTable:
        """Table of the mathematical coincidences ``P(X_k = Y_l)``."""
        return cls(*(dist.coincidence(k, l) for k, l in SETTING_PAIRS))


@dataclass(frozen=True)
class DeltaTable:
    d11: float
    d12: float
    d21: float
    d22: float

    def __post_init__(self) -> None:
        for name in ("d11", "d12", "d21", "d22"):
            v = float(getattr(self, name))
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {v!r}")
            object.__setattr__(self, name, v)

    def __getitem__(self, kl: tuple[int, int]) -> float:
        k, l = kl
        return getattr(self, f"d{k}{l}")

    def chsh_combination(self) -> float:
        return self.d11 + self.d12 + self.d21 - self.d22


def to_anticoincidence(table: CondProbTable) -> CondProbTable:
    """``P(X = Y)`` to ``P(X = -Y)`` and back (the map is an involution)."""
    return CondProbTable(*(1.0 - p for p in table.values()))


def chsh_math_value(dist: QuadrupleDistribution) -> float:
    """Expected indicator sum under ``dist``; lies in [0, 2]."""
    if not isinstance(dist, QuadrupleDistribution):
        raise TypeError("dist must be a QuadrupleDistribution")
    return math.fsum(w * q.indicator_sum() for q, w in dist.items())


def chsh_measured_value(table: CondProbTable) -> float:
    return table.chsh_sum()


def delta_chsh(measured: CondProbTable, math_table: CondProbTable) -> tuple[DeltaTable, float]:
    """Entrywise ``measured - math`` and the CHSH combination of the differences.

    ``chsh_measured_value(measured) == math_table.chsh_sum() + delta`` up to
    rounding.
    """
    deltas = DeltaTable(*(m - t for m, t in zip(measured.values(), math_table.values())))
    return deltas, deltas.chsh_combination()


_MODE_DIVISOR = {"aggregate": 1.0, "uniform_signed": 4.0, "all_positive": 2.0}


def minimal_delta(mode: DeltaMode, s_target: float) -> float:
    """Smallest lack of freedom that lets an LHV model reach ``s_target``.

    ``aggregate`` is the required Delta_CHSH itself.  ``uniform_signed`` takes
    ``d11 = d12 = d21 = -d22`` so all four terms add; ``all_positive`` takes
    every entry equal and positive, so ``d22`` cancels one of the others.
    """
    if mode not in _MODE_DIVISOR:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(_MODE_DIVISOR)}")
    if not 0.0 <= s_target <= LOGICAL_CHSH_BOUND:
        raise ValueError(f"s_target must lie in [0, 3], got {s_target!r}")
    return max(s_target - LHV_CHSH_BOUND, 0.0) / _MODE_DIVISOR[mode]


def conspiracy_strategy() -> dict[tuple[int, int], LhvQuadruple]:
    """Quadruple the source emits once it knows the joint setting ``(k, l)``.

    All-coincident pairs everywhere except ``(2, 2)``, where ``y2`` is flipped.
    """
    same = LhvQuadruple(1, 1, 1, 1)
    return {(1, 1): same, (1, 2): same, (2, 1): same, (2, 2): LhvQuadruple(1, 1, 1, -1)}


def conspiracy_model_extremal() -> tuple[CondProbTable, QuadrupleDistribution]:
    """Setting-aware source reaching the logical bound ``S_delta = 3``.

    Returns the measured coincidence table and the mixture of emitted
    quadruples under uniformly chosen settings, which is the mathematical
    ensemble the measured data must be compared against.
    """
    strategy = conspiracy_strategy()
    measured = CondProbTable(*(float(strategy[kl].coincides(*kl)) for kl in SETTING_PAIRS))
    masses: dict[LhvQuadruple, float] = {}
    for quad in strategy.values():
        masses[quad] = masses.get(quad, 0.0) + 0.25
    return measured, QuadrupleDistribution.from_mapping(masses)


def correlation_from_prob(p: float) -> float:
    """Correlation ``E = 2p - 1`` of two dichotomic variables."""
    return 2.0 * _check_prob(p) - 1.0


def quantum_optimum_table() -> CondProbTable:
    """Singlet-optimal coincidences reaching ``S_delta = 1 + sqrt(2)``."""
    c = math.cos(math.pi / 8) ** 2
    return CondProbTable(c, c, c, 1.0 - c)


def vertex_chsh_values() -> np.ndarray:
    """Indicator sum of each deterministic quadruple (the polytope vertices)."""
    return np.array([q.indicator_sum() for q in _QUADRUPLES])
