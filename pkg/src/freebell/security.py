"""Information-theoretic security of the BBM-CHSH protocol versus setting knowledge.

``S(q)`` and the key error rate ``D(q)`` are affine in ``q``, so every
threshold is obtained by inverting a line.  Entropies are in bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from freebell.lhv_core import LHV_CHSH_BOUND, QUANTUM_CHSH
from freebell.qkd import Q_MAX, Q_MIN, analytic_chsh, check_q, chsh_coefficients, delta_chsh_qkd
from freebell.quantum_model import COS2_PI_8, SIN2_PI_8

CRITICAL_ERROR_RATE = 0.5 * (1.0 - 1.0 / math.sqrt(2.0))


def shannon_entropy(p: float) -> float:
    """Binary entropy ``-p lg p - (1-p) lg(1-p)`` with ``0 lg 0 = 0``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def error_rate(q: float) -> float:
    """Correlated fraction in the key subensembles, ``(1-q)/7 (5/2 + 2 sin^2(pi/8))``."""
    q = check_q(q)
    return (1.0 - q) / 7.0 * (2.5 + 2.0 * SIN2_PI_8)


def mutual_info_ab(q: float) -> float:
    return 1.0 - shannon_entropy(error_rate(q))


def optimal_eve_info(d: float) -> float:
    """Eve's information under the optimal attack without setting knowledge."""
    d = float(d)
    if not 0.0 <= d <= 0.5:
        raise ValueError(f"error rate must lie in [0, 1/2], got {d!r}")
    # rounding can push 1/2 + sqrt(1/4) a hair above 1
    return 1.0 - shannon_entropy(min(0.5 + math.sqrt(d - d * d), 1.0))


def mutual_info_ae(q: float) -> float:
    """Alice-Eve information; Eve is ignorant exactly when she guessed Alice's setting wrongly."""
    q = check_q(q)
    return 1.0 - 4.0 * (1.0 - q) / 7.0


def mutual_info_be(q: float) -> float:
    q = check_q(q)
    return 1.0 - (1.0 - q) / 7.0 * (2.0 + 4.0 * shannon_entropy(COS2_PI_8))


def _line(f) -> tuple[float, float]:
    """Intercept and slope of an affine function of q."""
    slope = (f(Q_MAX) - f(Q_MIN)) / (Q_MAX - Q_MIN)
    return f(Q_MAX) - slope, slope


def mutual_info_be_coefficients() -> tuple[float, float]:
    return _line(mutual_info_be)


def error_rate_coefficients() -> tuple[float, float]:
    return _line(error_rate)


@dataclass(frozen=True)
class Thresholds:
    q_cl: float
    q_qm: float
    q_0: float
    d_0: float


def thresholds() -> Thresholds:
    """Knowledge at which S reaches 2 and 1 + sqrt(2), and D falls to D_0."""
    s0, s1 = chsh_coefficients()
    d0, d1 = error_rate_coefficients()
    return Thresholds(
        q_cl=(LHV_CHSH_BOUND - s0) / s1,
        q_qm=(QUANTUM_CHSH - s0) / s1,
        q_0=(CRITICAL_ERROR_RATE - d0) / d1,
        d_0=CRITICAL_ERROR_RATE,
    )


def csiszar_korner_extractable(i_ab: float, i_ae: float, i_be: float) -> bool:
    """Key extractable by error correction and privacy amplification alone."""
    for name, v in (("i_ab", i_ab), ("i_ae", i_ae), ("i_be", i_be)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    return i_ab > min(i_ae, i_be)


class Region(str, enum.Enum):
    NO_VIOLATION_ABORT = "NO_VIOLATION_ABORT"
    VIOLATION_BUT_ABORT = "VIOLATION_BUT_ABORT"
    INSECURE_UNDETECTED = "INSECURE_UNDETECTED"
    SUPRA_QUANTUM_FLAG = "SUPRA_QUANTUM_FLAG"


@dataclass(frozen=True)
class Verdict:
    """Security region, plus a flag when the simulated CHSH value exceeds 1 + sqrt(2)."""

    region: Region
    supra_quantum: bool = False

    @property
    def labels(self) -> tuple[Region, ...]:
        return (self.region, Region.SUPRA_QUANTUM_FLAG) if self.supra_quantum else (self.region,)

    def __str__(self) -> str:
        return "+".join(r.value for r in self.labels)


def security_verdict(q: float) -> Verdict:
    """Region of ``q``: boundaries belong to the lower region (``q == q_0`` aborts)."""
    q = check_q(q)
    t = thresholds()
    if q <= t.q_cl:
        region = Region.NO_VIOLATION_ABORT
    elif q <= t.q_0:
        region = Region.VIOLATION_BUT_ABORT
    else:
        region = Region.INSECURE_UNDETECTED
    return Verdict(region, supra_quantum=q > t.q_qm)


def adapted_bound_equivalence(q: float) -> bool:
    """Whether S(q) breaks the enlarged bound ``2 + Delta_CHSH(q)``."""
    q = check_q(q)
    return analytic_chsh(q) > LHV_CHSH_BOUND + delta_chsh_qkd(q)


@dataclass(frozen=True)
class SecurityCurves:
    q: float
    s: float
    d: float
    i_ab: float
    i_ae: float
    i_be: float
    i_be_tilde: float
    delta_chsh: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


CURVE_FIELDS = ("q", "s", "d", "i_ab", "i_ae", "i_be", "i_be_tilde", "delta_chsh")


def security_curves(q: float) -> SecurityCurves:
    q = check_q(q)
    d = error_rate(q)
    return SecurityCurves(
        q=q,
        s=analytic_chsh(q),
        d=d,
        i_ab=mutual_info_ab(q),
        i_ae=mutual_info_ae(q),
        i_be=mutual_info_be(q),
        i_be_tilde=optimal_eve_info(d),
        delta_chsh=delta_chsh_qkd(q),
    )


def q_grid(q_min: float = Q_MIN, q_max: float = Q_MAX, steps: int = 876) -> np.ndarray:
    """Evenly spaced knowledge values, both ends included (default spacing 1e-3)."""
    return np.linspace(check_q(q_min), check_q(q_max), int(steps))
