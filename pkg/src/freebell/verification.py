"""End-to-end verification battery behind ``freebell verify``.

Each check returns a :class:`CheckResult`; tolerances are fixed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from freebell import lhv_core, mermin, qkd, security
from freebell.quantum_model import COS2_PI_8

MC_Q_VALUES = (0.125, 0.3, 0.5, 0.63, 0.8, 1.0)
MC_RUNS = 1_000_000
MC_SEED = 20070521
MC_SIGMAS = 3.0
MC_MAX_EXCURSIONS = 2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_minimal_freedom() -> CheckResult:
    target = lhv_core.QUANTUM_CHSH
    got = {m: lhv_core.minimal_delta(m, target) for m in ("aggregate", "uniform_signed", "all_positive")}
    rounded = {"aggregate": 0.414, "uniform_signed": 0.104, "all_positive": 0.207}
    exact = {
        "aggregate": math.sqrt(2) - 1,
        "uniform_signed": (math.sqrt(2) - 1) / 4,
        "all_positive": (math.sqrt(2) - 1) / 2,
    }
    ok = all(abs(got[m] - rounded[m]) <= 5e-4 and abs(got[m] - exact[m]) <= 1e-12 for m in got)
    return CheckResult("minimal freedom", ok, ", ".join(f"{m}={v:.6f}" for m, v in got.items()))


def check_chsh_vertices() -> CheckResult:
    values = [
        lhv_core.chsh_math_value(lhv_core.QuadrupleDistribution.point_mass(q))
        for q in lhv_core.enumerate_quadruples()
    ]
    ok = max(values) == 2.0 and min(values) == 0.0 and set(values) <= {0.0, 2.0}
    return CheckResult("CHSH vertex oracle", ok, f"max={max(values)}, min={min(values)} over {len(values)} vertices")


def check_mermin_oracle() -> CheckResult:
    bad = [n for n in range(2, 9) if mermin.brute_force_bound(n) != mermin.lhv_bound(n)]
    return CheckResult("Mermin oracle", not bad, "brute force = B(n) for n=2..8" if not bad else f"mismatch at n={bad}")


def check_delta_n_law() -> CheckResult:
    law = all(
        2 ** (n - 1) * mermin.per_setting_delta(n) == mermin.quantum_max(n) - mermin.lhv_bound(n)
        for n in range(2, 31)
    )
    seq = [mermin.per_setting_delta(n) for n in range(2, 31)]
    monotone = all(a <= b < Fraction(1, 2) for a, b in zip(seq, seq[1:]))
    d3 = mermin.per_setting_delta(3) == Fraction(1, 4)
    ones = {k: 0.3 for k in mermin.setting_vectors(4)}
    cancel = mermin.delta_merm_from_deltas(ones) == 0.0
    ok = law and monotone and d3 and cancel
    return CheckResult(
        "Delta_N law", ok, f"identity n=2..30 {law}, monotone {monotone}, Delta_3=1/4 {d3}, N=4 cancel {cancel}"
    )


def check_s_line() -> CheckResult:
    intercept, slope = qkd.chsh_coefficients()
    exact_intercept = (5 + 4 * COS2_PI_8) / 7
    ok = (
        abs(intercept - exact_intercept) <= 1e-6
        and abs(slope - (3 - exact_intercept)) <= 1e-6
        and abs(intercept - 1.2) <= 5e-3
        and abs(slope - 1.8) <= 5e-3
        and qkd.analytic_chsh(1.0) == 3.0
    )
    return CheckResult("S(q) line", ok, f"S = {intercept:.6f} + {slope:.6f} q, S(1) = {qkd.analytic_chsh(1.0)}")


def check_thresholds() -> CheckResult:
    t = security.thresholds()
    ok = (
        abs(t.q_cl - 0.44382) <= 5e-3
        and abs(t.q_cl - 0.44) <= 5e-3
        and abs(t.q_qm - 0.67421) <= 5e-3
        and abs(t.q_qm - 0.67) <= 5e-3
        and abs(t.q_0 - 0.63294) <= 5e-3
        and abs(t.q_0 - 0.63) <= 5e-3
        and abs(t.d_0 - 0.146447) <= 1e-6
    )
    return CheckResult(
        "thresholds", ok, f"q_cl={t.q_cl:.5f} q_qm={t.q_qm:.5f} q_0={t.q_0:.5f} d_0={t.d_0:.6f}"
    )


def check_information_curves() -> CheckResult:
    grid = security.q_grid()
    ae = all(abs(security.mutual_info_ae(q) - (3 / 7 + 4 * q / 7)) <= 1e-12 for q in grid)
    b0, b1 = security.mutual_info_be_coefficients()
    be_line = abs(b0 - 0.37) <= 5e-3 and abs(b1 - 0.63) <= 5e-3
    below = all(security.mutual_info_ab(q) < security.mutual_info_be(q) - 1e-9 for q in grid[:-1])
    at_one = security.mutual_info_ab(1.0) == security.mutual_info_be(1.0)
    q0 = security.thresholds().q_0
    tilde = abs(security.mutual_info_ab(q0) - security.optimal_eve_info(security.error_rate(q0))) <= 1e-9
    no_key = not any(
        security.csiszar_korner_extractable(
            security.mutual_info_ab(q), security.mutual_info_ae(q), security.mutual_info_be(q)
        )
        for q in grid
    )
    ok = ae and be_line and below and at_one and tilde and no_key
    return CheckResult(
        "information curves",
        ok,
        f"I_BE = {b0:.4f} + {b1:.4f} q; I_AB<I_BE off q=1 {below}; equality at 1 {at_one}; "
        f"I_AB(q_0)=I~_BE {tilde}; no key {no_key}",
    )


def check_adapted_bound() -> CheckResult:
    grid = security.q_grid()
    base = qkd.analytic_chsh(qkd.Q_MIN)
    const = all(abs(qkd.analytic_chsh(q) - qkd.delta_chsh_qkd(q) - base) <= 1e-12 for q in grid)
    never = not any(security.adapted_bound_equivalence(q) for q in grid)
    ok = const and never and base <= 2.0 and abs(base - 1.4268) <= 5e-4
    return CheckResult("adapted bound", ok, f"S - Delta_CHSH = {base:.6f}, never violated {never}")


def check_monte_carlo(runs: int = MC_RUNS, seed: int = MC_SEED, workers: int = 1) -> CheckResult:
    excursions = []
    total = 0
    d_08 = math.nan
    for q in MC_Q_VALUES:
        stats = qkd.estimate_statistics(qkd.run_simulation(q, runs, seed, workers=workers))
        for c in qkd.compare_with_analytic(stats, q):
            total += 1
            if abs(c.z) > MC_SIGMAS:
                excursions.append(f"{c.name}@q={q} z={c.z:.2f}")
        if q == 0.8:
            d_08 = stats.d_hat.value
    near = abs(d_08 - 0.0798) <= 3 * math.sqrt(0.0798 * (1 - 0.0798) / (runs / 4))
    ok = len(excursions) <= MC_MAX_EXCURSIONS and near
    detail = f"{total - len(excursions)}/{total} within {MC_SIGMAS:g} sigma, d_hat(0.8)={d_08:.5f}"
    if excursions:
        detail += "; excursions: " + ", ".join(excursions)
    return CheckResult("Monte Carlo agreement", ok, detail)


def check_reproducibility(runs: int = 200_000, seed: int = 7) -> CheckResult:
    a = qkd.run_simulation(0.63, runs, seed, workers=1).to_json()
    b = qkd.run_simulation(0.63, runs, seed, workers=1).to_json()
    c = qkd.run_simulation(0.63, runs, seed, workers=3).to_json()
    ok = a == b == c
    return CheckResult("reproducibility", ok, "identical ledgers for 1, 1 and 3 workers" if ok else "ledgers differ")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_minimal_freedom,
    check_chsh_vertices,
    check_mermin_oracle,
    check_delta_n_law,
    check_s_line,
    check_thresholds,
    check_information_curves,
    check_adapted_bound,
    check_monte_carlo,
    check_reproducibility,
)


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]
