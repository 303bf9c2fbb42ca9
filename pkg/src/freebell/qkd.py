"""BBM-CHSH key distribution against an eavesdropper who partly predicts settings.

In every run Eve favours one of the 8 joint settings (uniformly at random)
and sends the product state that is optimal for it.  The actual setting
equals the favoured one with probability ``q`` and is one of the other 7
with probability ``(1 - q) / 7`` each.  ``q = 1/8`` is no knowledge, ``q = 1``
is perfect knowledge.

All probabilities here are anti-correlation probabilities ``P(X = -Y | ij)``;
anti-correlation is the error-free event in the key subensembles.

Monte Carlo reproducibility
---------------------------
Runs are grouped into fixed blocks of :data:`BLOCK_SIZE`.  Block ``b`` draws
from ``PCG64(SeedSequence(seed, spawn_key=(b,)))`` in a fixed order, so a
ledger depends only on ``(q, runs, seed)`` and not on how blocks are
distributed over workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from freebell import ARTIFACT_NAME, __version__
from freebell.quantum_model import (
    GEOMETRY,
    HALF_ANGLE_COS2,
    ProductPair,
    product_anticorrelation,
    up_probability,
)

Q_MIN = 1.0 / 8.0
Q_MAX = 1.0
BLOCK_SIZE = 1 << 16
RNG_NAME = "numpy.PCG64/SeedSequence(seed, spawn_key=(block,))"


@dataclass(frozen=True, order=True)
class JointSetting:
    """Alice's analyzer ``i`` in {1, 2} and Bob's ``j`` in {1, 2, 3, 4}."""

    i: int
    j: int

    def __post_init__(self) -> None:
        if self.i not in (1, 2) or self.j not in (1, 2, 3, 4):
            raise ValueError(f"invalid joint setting ({self.i}, {self.j})")

    @property
    def index(self) -> int:
        return 4 * (self.i - 1) + (self.j - 1)

    @classmethod
    def from_index(cls, index: int) -> JointSetting:
        return ALL_SETTINGS[index]

    @property
    def kind(self) -> str:
        if self.j >= 3:
            return "test"
        return "key" if self.i == self.j else "discard"

    @property
    def label(self) -> str:
        return f"{self.i}{self.j}"

    def __str__(self) -> str:
        return f"({self.i},{self.j})"


ALL_SETTINGS = tuple(JointSetting(i, j) for i in (1, 2) for j in (1, 2, 3, 4))
TEST_SETTINGS = tuple(s for s in ALL_SETTINGS if s.kind == "test")
KEY_SETTINGS = tuple(s for s in ALL_SETTINGS if s.kind == "key")
DISCARD_SETTINGS = tuple(s for s in ALL_SETTINGS if s.kind == "discard")

S13, S14, S23, S24 = (JointSetting(1, 3), JointSetting(1, 4), JointSetting(2, 3), JointSetting(2, 4))
# P(13) + P(23) + P(24) - P(14)
CHSH_SIGNS = {S13: 1, S23: 1, S24: 1, S14: -1}


def check_q(q: float) -> float:
    q = float(q)
    if not Q_MIN <= q <= Q_MAX:
        raise ValueError(f"setting knowledge q must lie in [1/8, 1], got {q!r}")
    return q


@dataclass(frozen=True)
class KnowledgeModel:
    """Eve's prediction: favoured setting with probability ``q``, others ``(1-q)/7``."""

    q: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", check_q(self.q))

    def probability(self, favored: JointSetting, actual: JointSetting) -> float:
        return self.q if actual == favored else (1.0 - self.q) / 7.0

    def distribution(self, favored: JointSetting) -> dict[JointSetting, float]:
        return {s: self.probability(favored, s) for s in ALL_SETTINGS}


def eve_attack_state(favored: JointSetting, coin: int) -> ProductPair:
    """Product state Eve sends when she favours ``favored``.

    ``coin`` 0 (heads) or 1 (tails) picks one of two globally flipped
    variants, keeping Alice's and Bob's local outcomes unbiased.  Bob's state
    is anti-aligned with his analyzer except for ``(1, 4)``, where the CHSH
    sign is negative and Eve aims for correlation instead.
    """
    if coin not in (0, 1):
        raise ValueError(f"coin must be 0 or 1, got {coin!r}")
    a = GEOMETRY.alice(favored.i)
    b = GEOMETRY.bob(favored.j)
    if favored == S14:
        pair = ProductPair(a, b)
    else:
        pair = ProductPair(a, b.flipped())
    if coin == 0:
        return pair
    # the tails branch flips both particles
    return pair.flipped()


def sample_favored(rng: np.random.Generator) -> JointSetting:
    return ALL_SETTINGS[int(rng.integers(0, 8))]


def sample_actual(favored: JointSetting, model: KnowledgeModel, rng: np.random.Generator) -> JointSetting:
    if rng.random() < model.q:
        return favored
    return ALL_SETTINGS[(favored.index + 1 + int(rng.integers(0, 7))) % 8]


def measure_pair(pair: ProductPair, setting: JointSetting, rng: np.random.Generator) -> tuple[int, int]:
    """Independent local measurements of Alice along alpha_i and Bob along beta_j."""
    u = up_probability(GEOMETRY.alice(setting.i), pair.phi_a)
    v = up_probability(GEOMETRY.bob(setting.j), pair.phi_b)
    x = 1 if rng.random() < u else -1
    y = 1 if rng.random() < v else -1
    return x, y


# --- closed forms -------------------------------------------------------


def _coin_averaged_anticorrelation(favored: JointSetting, setting: JointSetting) -> float:
    a = GEOMETRY.alice(setting.i)
    b = GEOMETRY.bob(setting.j)
    return 0.5 * sum(product_anticorrelation(eve_attack_state(favored, c), a, b) for c in (0, 1))


# Row: favoured setting, column: measured setting.
_ATTACK_ANTICORRELATION = np.array(
    [[_coin_averaged_anticorrelation(g, s) for s in ALL_SETTINGS] for g in ALL_SETTINGS]
)


def analytic_anticorrelation(setting: JointSetting, q: float) -> float:
    """``P(X = -Y | ij)``: attack outcomes weighted by Eve's guess given the actual setting.

    With a uniform favoured setting the posterior of each guess is ``q`` for
    the actual setting and ``(1 - q) / 7`` for the rest.
    """
    model = KnowledgeModel(q)
    column = _ATTACK_ANTICORRELATION[:, setting.index]
    return math.fsum(model.probability(g, setting) * column[g.index] for g in ALL_SETTINGS)


def _chsh(values: dict[JointSetting, float]) -> float:
    return math.fsum(sign * values[s] for s, sign in CHSH_SIGNS.items())


def analytic_chsh(q: float) -> float:
    """CHSH value ``S(q)`` seen by Alice and Bob; affine from S(1/8) to 3."""
    return _chsh({s: analytic_anticorrelation(s, q) for s in TEST_SETTINGS})


def chsh_coefficients() -> tuple[float, float]:
    """Intercept and slope of ``S(q) = intercept + slope * q``."""
    s0 = analytic_chsh(Q_MIN)
    s1 = analytic_chsh(Q_MAX)
    slope = (s1 - s0) / (Q_MAX - Q_MIN)
    return s1 - slope, slope


def math_counterpart(setting: JointSetting) -> float:
    """Mathematical ``P(X_i = -Y_j)``: the statistics without setting knowledge."""
    return analytic_anticorrelation(setting, Q_MIN)


def delta_table_qkd(q: float) -> dict[JointSetting, float]:
    return {s: analytic_anticorrelation(s, q) - math_counterpart(s) for s in ALL_SETTINGS}


def delta_chsh_qkd(q: float) -> float:
    """``D13 + D23 + D24 - D14`` of the lack-of-freedom measures."""
    deltas = delta_table_qkd(check_q(q))
    return _chsh(deltas)


def analytic_error_rate(q: float) -> float:
    """Probability of correlated outcomes in the key subensemble ``(1, 1)``."""
    return 1.0 - analytic_anticorrelation(KEY_SETTINGS[0], q)


# --- simulation ---------------------------------------------------------

# Attack state directions indexed by [favoured setting index, coin].
_ATTACK_PHI_A = np.array([[eve_attack_state(g, c).phi_a.eighths for c in (0, 1)] for g in ALL_SETTINGS])
_ATTACK_PHI_B = np.array([[eve_attack_state(g, c).phi_b.eighths for c in (0, 1)] for g in ALL_SETTINGS])
_ALICE_ANGLE = np.array([GEOMETRY.alice(s.i).eighths for s in ALL_SETTINGS])
_BOB_ANGLE = np.array([GEOMETRY.bob(s.j).eighths for s in ALL_SETTINGS])

_OUTCOME_KEYS = ("++", "+-", "-+", "--")


@dataclass
class RunLedger:
    """Aggregated run records.

    ``counts[s, a, b]`` counts runs with actual setting index ``s``, Alice's
    outcome ``a`` and Bob's ``b`` (index 0 is +1, index 1 is -1).  Ledgers over
    disjoint blocks combine by adding counts.
    """

    q: float
    runs: int
    seed: int
    counts: np.ndarray = field(default_factory=lambda: np.zeros((8, 2, 2), dtype=np.int64))
    block_size: int = BLOCK_SIZE

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(8, 2, 2)
        if int(self.counts.sum()) != self.runs:
            raise ValueError(f"counts sum to {int(self.counts.sum())}, ledger claims {self.runs} runs")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunLedger):
            return NotImplemented
        return (
            self.q == other.q
            and self.runs == other.runs
            and self.seed == other.seed
            and self.block_size == other.block_size
            and np.array_equal(self.counts, other.counts)
        )

    def subensemble_size(self, setting: JointSetting) -> int:
        return int(self.counts[setting.index].sum())

    def anticorrelated(self, setting: JointSetting) -> int:
        c = self.counts[setting.index]
        return int(c[0, 1] + c[1, 0])

    def alice_plus(self) -> int:
        return int(self.counts[:, 0, :].sum())

    def to_dict(self) -> dict[str, Any]:
        counts = {
            s.label: {key: int(v) for key, v in zip(_OUTCOME_KEYS, self.counts[s.index].ravel())}
            for s in ALL_SETTINGS
        }
        return {
            "artifact": ARTIFACT_NAME,
            "version": __version__,
            "rng": RNG_NAME,
            "block_size": self.block_size,
            "q": self.q,
            "runs": self.runs,
            "seed": self.seed,
            "counts": counts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunLedger:
        counts = np.zeros((8, 2, 2), dtype=np.int64)
        for s in ALL_SETTINGS:
            row = data["counts"][s.label]
            counts[s.index] = np.array([row[k] for k in _OUTCOME_KEYS]).reshape(2, 2)
        return cls(
            q=float(data["q"]),
            runs=int(data["runs"]),
            seed=int(data["seed"]),
            counts=counts,
            block_size=int(data.get("block_size", BLOCK_SIZE)),
        )

    @classmethod
    def from_json(cls, text: str) -> RunLedger:
        return cls.from_dict(json.loads(text))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _simulate_block(q: float, seed: int, block: int, size: int) -> np.ndarray:
    """Counts for one block, shape (8, 2, 2).

    Mirrors sample_favored -> eve_attack_state -> sample_actual -> measure_pair
    with one draw of each per run, in that order.
    """
    rng = _block_rng(seed, block)
    favored = rng.integers(0, 8, size)
    coin = rng.integers(0, 2, size)
    hit = rng.random(size) < q
    other = rng.integers(0, 7, size)
    ux = rng.random(size)
    uy = rng.random(size)

    actual = np.where(hit, favored, (favored + 1 + other) % 8)
    p_up_a = HALF_ANGLE_COS2[(_ALICE_ANGLE[actual] - _ATTACK_PHI_A[favored, coin]) % 8]
    p_up_b = HALF_ANGLE_COS2[(_BOB_ANGLE[actual] - _ATTACK_PHI_B[favored, coin]) % 8]
    x_minus = (ux >= p_up_a).astype(np.int64)
    y_minus = (uy >= p_up_b).astype(np.int64)
    flat = actual * 4 + x_minus * 2 + y_minus
    return np.bincount(flat, minlength=32).reshape(8, 2, 2).astype(np.int64)


def _block_sizes(runs: int, block_size: int) -> list[int]:
    full, rest = divmod(runs, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_simulation(q: float, runs: int, seed: int, workers: int = 1) -> RunLedger:
    """Simulate ``runs`` protocol rounds.  Bit-exact for given ``(q, runs, seed)``."""
    q = check_q(q)
    if isinstance(runs, bool) or int(runs) != runs or runs < 1:
        raise ValueError(f"runs must be a positive integer, got {runs!r}")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    runs, seed = int(runs), int(seed)
    sizes = _block_sizes(runs, BLOCK_SIZE)
    args = [(q, seed, b, n) for b, n in enumerate(sizes)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_block, *zip(*args)))
    else:
        parts = [_simulate_block(*a) for a in args]
    counts = np.sum(parts, axis=0, dtype=np.int64)
    return RunLedger(q=q, runs=runs, seed=seed, counts=counts)


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n: int


@dataclass(frozen=True)
class Statistics:
    """Frequencies estimated from a ledger; standard errors are binomial."""

    anticorrelation: dict[JointSetting, Estimate]
    s_hat: Estimate
    d_hat: Estimate
    alice_plus: Estimate


def _binomial(successes: int, n: int) -> Estimate:
    p = successes / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), n)


def estimate_statistics(ledger: RunLedger) -> Statistics:
    """Per-setting anti-correlation frequencies, CHSH estimate and key error rate.

    Discarded settings are reported but enter neither ``s_hat`` nor ``d_hat``.
    """
    for s in TEST_SETTINGS + KEY_SETTINGS:
        if ledger.subensemble_size(s) == 0:
            raise ValueError(f"subensemble {s} is empty; cannot estimate statistics")
    freqs = {}
    for s in ALL_SETTINGS:
        n = ledger.subensemble_size(s)
        freqs[s] = _binomial(ledger.anticorrelated(s), n) if n else Estimate(math.nan, math.nan, 0)
    s_value = math.fsum(sign * freqs[s].value for s, sign in CHSH_SIGNS.items())
    s_se = math.sqrt(math.fsum(freqs[s].std_error ** 2 for s in CHSH_SIGNS))
    s_n = sum(freqs[s].n for s in CHSH_SIGNS)

    key_n = sum(ledger.subensemble_size(s) for s in KEY_SETTINGS)
    key_err = key_n - sum(ledger.anticorrelated(s) for s in KEY_SETTINGS)
    return Statistics(
        anticorrelation=freqs,
        s_hat=Estimate(s_value, s_se, s_n),
        d_hat=_binomial(key_err, key_n),
        alice_plus=_binomial(ledger.alice_plus(), ledger.runs),
    )


def z_score(estimate: float, expected: float, std_error: float) -> float:
    """Signed z-score; a zero standard error gives 0 on exact agreement, else inf."""
    diff = estimate - expected
    if std_error > 0:
        return diff / std_error
    return 0.0 if abs(diff) <= 1e-12 else math.copysign(math.inf, diff)


@dataclass(frozen=True)
class Comparison:
    name: str
    estimate: float
    expected: float
    std_error: float

    @property
    def z(self) -> float:
        return z_score(self.estimate, self.expected, self.std_error)


def compare_with_analytic(stats: Statistics, q: float) -> list[Comparison]:
    """Monte Carlo estimates next to their closed forms: 8 settings, S, D."""
    rows = [
        Comparison(f"P(X=-Y|{s.label})", e.value, analytic_anticorrelation(s, q), e.std_error)
        for s, e in stats.anticorrelation.items()
        if e.n
    ]
    rows.append(Comparison("S", stats.s_hat.value, analytic_chsh(q), stats.s_hat.std_error))
    rows.append(Comparison("D", stats.d_hat.value, analytic_error_rate(q), stats.d_hat.std_error))
    return rows
