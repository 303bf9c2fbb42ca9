"""N-party Mermin bounds with and without setting freedom.

Each party ``j`` picks a setting ``k_j`` in {1, 2}.  The Mermin expression is
a signed sum of the probabilities that the product of the N outcomes equals
+1.  The sign of a term depends on how many parties picked their second
setting::

    s(k) = sin(m * pi / 2),   m = sum_j (k_j - 1)

so ``sum_k s(k) * prod_j x_j[k_j]`` is the imaginary part of
``prod_j (x_j[1] + i x_j[2])``.  This labelling is the one for which the
closed forms of :func:`lhv_bound` and :func:`quantum_max` hold for every N.
Writing the exponent as ``sum_j k_j`` instead flips the sign of every term
when N = 2 mod 4, and the LHV maximum then no longer equals ``lhv_bound``.

Closed forms return :class:`fractions.Fraction` (every quantity is dyadic),
so identities between them hold exactly.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

BRUTE_FORCE_MAX_N = 12
_CHUNK = 1 << 22

SettingVector = tuple[int, ...]


def _check_n(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"n must be an integer, got {type(n).__name__}")
    if n < 2:
        raise ValueError(f"need at least 2 parties, got n={n}")
    return int(n)


def _check_setting(k: Sequence[int]) -> SettingVector:
    k = tuple(int(v) for v in k)
    if len(k) < 2:
        raise ValueError("a setting vector needs at least 2 entries")
    if any(v not in (1, 2) for v in k):
        raise ValueError(f"settings must be 1 or 2, got {k}")
    return k


def setting_vectors(n: int) -> list[SettingVector]:
    """All ``2**n`` setting vectors in lexicographic order."""
    return list(itertools.product((1, 2), repeat=_check_n(n)))


def sign_coefficient(k: Sequence[int]) -> int:
    """Exact ``sin(m * pi / 2)`` with ``m`` the number of second settings."""
    k = _check_setting(k)
    return _SIN_QUARTER[(sum(k) - len(k)) % 4]


_SIN_QUARTER = (0, 1, 0, -1)


def _sqrt2_power_sin(n: int) -> int:
    """``2**(n/2) * sin(n*pi/4)`` as an exact integer, by ``n mod 8``."""
    r = n % 8
    if r in (0, 4):
        return 0
    if r in (2, 6):
        mag = 2 ** (n // 2)
        return mag if r == 2 else -mag
    mag = 2 ** ((n - 1) // 2)
    return mag if r in (1, 3) else -mag


def sign_sum(n: int) -> int:
    """``sum_k s(k)`` over all setting vectors; equals ``2**(n/2) sin(n pi/4)``."""
    return _sqrt2_power_sin(_check_n(n))


def lhv_bound(n: int) -> Fraction:
    """Local realistic bound ``B(N) = (2**floor(N/2) + 2**(N/2) sin(N pi/4)) / 2``."""
    n = _check_n(n)
    return Fraction(2 ** (n // 2) + _sqrt2_power_sin(n), 2)


def quantum_max(n: int) -> Fraction:
    """GHZ value ``(2**(N-1) + 2**(N/2) sin(N pi/4)) / 2``."""
    n = _check_n(n)
    return Fraction(2 ** (n - 1) + _sqrt2_power_sin(n), 2)


def min_delta_merm(n: int) -> Fraction:
    """Smallest Delta_Merm compatible with the GHZ value: ``2**(N-2) - 2**floor((N-2)/2)``."""
    n = _check_n(n)
    return Fraction(2 ** (n - 2) - 2 ** ((n - 2) // 2))


def per_setting_delta(n: int) -> Fraction:
    """Uniform, sign-adapted Delta_N = 1/2 - 1/2**floor((N+1)/2).

    Satisfies ``2**(n-1) * per_setting_delta(n) == min_delta_merm(n)``.
    """
    n = _check_n(n)
    return Fraction(1, 2) - Fraction(1, 2 ** ((n + 1) // 2))


def _check_table(values: Mapping[Sequence[int], float], n: int | None, name: str) -> tuple[int, dict]:
    table = {_check_setting(k): float(v) for k, v in values.items()}
    if not table:
        raise ValueError(f"{name} is empty")
    if n is None:
        n = len(next(iter(table)))
    if any(len(k) != n for k in table):
        raise ValueError(f"{name} mixes setting vectors of different lengths")
    missing = [k for k in setting_vectors(n) if k not in table]
    if missing:
        raise ValueError(f"{name} is missing setting vector(s) {missing[:4]}" + (" ..." if len(missing) > 4 else ""))
    return n, table


def mermin_measured_value(probs: Mapping[Sequence[int], float], n: int | None = None) -> float:
    """``M_delta = sum_k s(k) P(prod X = 1 | k)`` from measured probabilities."""
    n, table = _check_table(probs, n, "probs")
    for k, p in table.items():
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability for {k} outside [0, 1]: {p!r}")
    return math.fsum(sign_coefficient(k) * p for k, p in table.items())


def delta_merm_from_deltas(deltas: Mapping[Sequence[int], float], n: int | None = None) -> float:
    """s-weighted sum of per-setting lack-of-freedom measures."""
    n, table = _check_table(deltas, n, "deltas")
    for k, d in table.items():
        if not -1.0 <= d <= 1.0:
            raise ValueError(f"delta for {k} outside [-1, 1]: {d!r}")
    return math.fsum(sign_coefficient(k) * d for k, d in table.items())


def sign_adapted_deltas(n: int, delta: float) -> dict[SettingVector, float]:
    """``+delta`` where s = +1, ``-delta`` where s = -1, 0 elsewhere."""
    return {k: sign_coefficient(k) * delta for k in setting_vectors(n)}


def ghz_probabilities(n: int) -> dict[SettingVector, float]:
    """Optimal GHZ statistics: correlation ``s(k)``, hence ``P = (1 + s(k)) / 2``."""
    return {k: (1 + sign_coefficient(k)) / 2 for k in setting_vectors(n)}


def all_positive_required_delta(n: int) -> float:
    """Common positive Delta needed when every per-setting measure is equal.

    Equal entries contribute ``delta * sign_sum(n)``, so the answer is
    ``min_delta_merm(n) / sign_sum(n)``.  Returns ``inf`` when no positive
    value works (zero or negative sign sum with a positive requirement).
    """
    need = min_delta_merm(n)
    total = sign_sum(n)
    if need == 0:
        return 0.0
    if total <= 0:
        return math.inf
    return float(need / total)


def all_positive_infeasible_from(n_max: int = 40) -> int | None:
    """Smallest ``n0`` such that the all-positive choice fails for all ``n0 <= n <= n_max``.

    Failure means the required common Delta lies outside [-1, 1] (or does not
    exist).  Returns ``None`` if it is feasible at ``n_max``.
    """
    n_max = _check_n(n_max)
    n0 = None
    for n in range(n_max, 1, -1):
        if all_positive_required_delta(n) <= 1.0:
            break
        n0 = n
    return n0


# --- enumeration oracle ---------------------------------------------------
#
# A party's assignment is an index in 0..3: bit 0 set means outcome -1 under
# setting 1, bit 1 set means -1 under setting 2.  The parties are split into
# a left and a right block; every (left, right) pair of block assignments is
# one full LHV assignment, so the outer product below visits all 4**n.


def _residue_sums(parties: int) -> np.ndarray:
    """Per block assignment, sums of outcome products grouped by residue.

    Row ``a``, column ``r`` is the sum over setting choices of the block's
    parties with (number of second settings) = r mod 4 of the product of
    their outcomes.  Shape ``(4**parties, 4)``.
    """
    idx = np.arange(4**parties, dtype=np.int64)
    c = np.zeros((idx.size, 4), dtype=np.int64)
    c[:, 0] = 1
    for j in range(parties):
        first = (1 - 2 * ((idx >> (2 * j)) & 1))[:, None]
        second = (1 - 2 * ((idx >> (2 * j + 1)) & 1))[:, None]
        c = first * c + second * c[:, [3, 0, 1, 2]]
    return c


def _row_extrema(left: np.ndarray, right: np.ndarray, offset: int) -> tuple[int, int]:
    """Min and max over all (left row, right row) pairs of the Mermin expression.

    Twice the expression is ``offset + sum over r of s_r * c[r]`` with
    ``c[r] = sum_{r1 + r2 = r mod 4} left[r1] * right[r2]``, using
    ``1{prod = 1} = (1 + prod) / 2``.
    """
    doubled = np.full((left.shape[0], right.shape[0]), offset, dtype=np.int64)
    for r1 in range(4):
        diff = right[:, (1 - r1) % 4] - right[:, (3 - r1) % 4]
        doubled += np.outer(left[:, r1], diff)
    return int(doubled.min()) // 2, int(doubled.max()) // 2


def _check_cap(n: int) -> int:
    n = _check_n(n)
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"brute-force enumeration is capped at n <= {BRUTE_FORCE_MAX_N} "
            f"(4**n assignments); got n={n}"
        )
    return n


def brute_force_extrema(n: int, workers: int = 1) -> tuple[int, int]:
    """Min and max of the LHV Mermin expression over all ``2**(2n)`` assignments.

    Left-block rows are processed in fixed chunks and reduced with min/max,
    so the result does not depend on ``workers``.
    """
    n = _check_cap(n)
    left = _residue_sums(n // 2)
    right = _residue_sums(n - n // 2)
    offset = sum(sign_coefficient(k) for k in setting_vectors(n))
    step = max(1, _CHUNK // right.shape[0])
    blocks = [left[i : i + step] for i in range(0, left.shape[0], step)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_row_extrema, blocks, [right] * len(blocks), [offset] * len(blocks)))
    else:
        parts = [_row_extrema(b, right, offset) for b in blocks]
    return min(p[0] for p in parts), max(p[1] for p in parts)


def brute_force_bound(n: int, workers: int = 1) -> int:
    """Maximum of the LHV Mermin expression by exhaustive enumeration."""
    return brute_force_extrema(n, workers)[1]
