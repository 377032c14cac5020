"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) for just the summary lines.
"""

import math
import time

import numpy as np
import pytest

from bergman.exceptions import NumericConsistencyError
from bergman.fefferman import (
    ball_defining_field,
    bergman_defining_field,
    boundary_order_fit,
    default_radii,
    fefferman_chain,
    fefferman_step,
    perturbed_ball_defining_field,
)
from bergman.geometry import (
    asymptotic_fit,
    b_invariant,
    einstein_constant,
    einstein_diagnostics,
    einstein_residual,
    j_operator,
    kernel_ma_identity,
    leading_block_det,
    ma_residual,
    metric_det,
)
from bergman.groups import cyclic_diagonal
from bergman.harness.config import random_ball_points
from bergman.harness.experiments import generic_defining_field
from bergman.kernels import (
    b3_example_closed_form,
    b3_example_potential,
    ball_kernel,
    disc_quotient_closed_form,
    log_field,
    quotient_kernel,
)
from battery import FIELDS, battery_points
from test_fdoracle import oracle_error

B3 = cyclic_diagonal(3, [1, 1, 1], 2)
SEED = 20191119


@pytest.fixture
def verdict(capsys):
    """Print one summary line per criterion, then assert it."""

    def report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return report


def test_1_ball_einstein(verdict):
    start = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3, 4):
        u = log_field(ball_kernel(n))
        for z in random_ball_points(n, 50, 0.95, SEED + n):
            worst = max(worst, einstein_residual(u, z))
    elapsed = time.perf_counter() - start
    verdict(1, "ball Einstein identity", worst < 1e-8 and elapsed < 10,
            f"max residual {worst:.2e} (< 1e-8), {elapsed:.2f}s (< 10s)")


def test_2_ball_b_invariant(verdict):
    worst = 0.0
    for n in (1, 2, 3, 4):
        k = ball_kernel(n)
        u = log_field(k)
        const = einstein_constant(n)
        for z in random_ball_points(n, 50, 0.95, SEED + n):
            d = einstein_diagnostics(u, z, kernel=k)
            worst = max(worst, abs(d.b_invariant / const - 1))
    b2 = b_invariant(ball_kernel(2), [0.5, 0])
    ok = worst < 1e-9 and abs(b2 - 9 * math.pi**2 / 2) < 1e-9 * b2
    verdict(2, "ball B-invariant constancy", ok,
            f"max |B/C_n - 1| {worst:.2e} (< 1e-9); n=2 value {b2:.4f}")


def test_3_disc_quotient_ma(verdict):
    start = time.perf_counter()
    worst = 0.0
    radii = np.linspace(0.05, 0.95, 37)[1:-1]
    angles = (0.0, 0.4, 1.3, 2.9)
    for r in range(1, 7):
        u = log_field(disc_quotient_closed_form(r))
        c = 2 * math.pi * r
        for x in radii:
            for a in angles:
                worst = max(worst, abs(ma_residual(u, [x * np.exp(1j * a)], c)))
    elapsed = time.perf_counter() - start
    verdict(3, "n=1 quotient Monge-Ampere", worst < 1e-10 and elapsed < 5,
            f"max |residual| {worst:.2e} (< 1e-10), {elapsed:.2f}s (< 5s)")


def test_4_b3_example(verdict):
    start = time.perf_counter()
    averaged, closed = quotient_kernel(B3), b3_example_closed_form()
    a = abs(averaged.value([0, 0, 0])) < 1e-12 and abs(closed.value([0, 0, 0])) < 1e-12

    rng = np.random.default_rng(SEED)
    worst_b = 0.0
    for _ in range(20):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        z = rng.uniform(0.1, 0.9) * v / np.linalg.norm(v)
        ka, kc = averaged.value(z).real, closed.value(z).real
        worst_b = max(worst_b, abs(ka - kc) / abs(kc))
    b = worst_b < 1e-10

    u = b3_example_potential()
    gaps = {t: abs(leading_block_det(u, [t, 0, 0]) - 20) for t in (1e-1, 1e-2, 1e-3)}
    c = all(gap < 100 * t**2 for t, gap in gaps.items())

    res = einstein_residual(log_field(averaged), [0.2, 0.1, 0.1])
    d = res > 1e-2
    elapsed = time.perf_counter() - start
    verdict(4, "B^3/{+-I} example", a and b and c and d and elapsed < 5,
            f"(a) K(0)=0 {a}; (b) rel err {worst_b:.1e}; "
            f"(c) |det-20| {', '.join(f'{g:.1e}' for g in gaps.values())}; "
            f"(d) residual {res:.3f}; {elapsed:.2f}s")


def test_5_kernel_identity(verdict):
    worst = 0.0
    for n in (2, 3):
        k = ball_kernel(n)
        for z in random_ball_points(n, 30, 0.95, SEED + 10 * n):
            worst = max(worst, kernel_ma_identity(k, z).relative)
    verdict(5, "ball kernel J identity", worst < 1e-9, f"max relative residual {worst:.2e} (< 1e-9)")


def test_6_bergman_defining(verdict):
    worst_r = worst_j = 0.0
    for n in (1, 2, 3):
        rF = bergman_defining_field(ball_kernel(n))
        for z in random_ball_points(n, 20, 0.95, SEED + n):
            worst_r = max(worst_r, abs(rF.value(z).real - (1 - np.vdot(z, z).real)))
            worst_j = max(worst_j, abs(j_operator(rF, z) - 1))
    verdict(6, "ball Bergman defining function", worst_r < 1e-10 and worst_j < 1e-9,
            f"|r_F - (1-|z|^2)| {worst_r:.1e} (< 1e-10), |J - 1| {worst_j:.1e} (< 1e-9)")


def _orders(seed, direction):
    chain = fefferman_chain(seed, eval_order=2)
    return [boundary_order_fit(u, direction, default_radii()) for u in chain]


def test_7_fefferman_orders(verdict):
    start = time.perf_counter()
    fits = _orders(perturbed_ball_defining_field(2, 0.1), [1, 0])
    stated = all(f.status == "exact" or f.slope >= s - 0.2 for s, f in enumerate(fits, 1))

    # the stated seed is a holomorphic rescaling of the ball, so J(u^s) - 1 vanishes
    # identically; a seed with a genuine non-ball part shows the order gain itself
    generic = _orders(generic_defining_field(2, 0.1), [0, 1])
    gain = all(f.status == "fitted" and f.slope >= s - 0.2 for s, f in enumerate(generic, 1))

    r = ball_defining_field(2)
    change = 0.0
    for z in random_ball_points(2, 10, 0.95, SEED):
        u = r
        for s in (2, 3):
            u = fefferman_step(u, s)
            change = max(change, abs(u.value(z) - r.value(z)))
    fixed = change < 1e-10
    elapsed = time.perf_counter() - start

    def fmt(fs):
        return ", ".join("exact" if f.status == "exact" else f"{f.slope:.2f}" for f in fs)

    verdict(7, "Fefferman order gain", stated and gain and fixed and elapsed < 30,
            f"stated seed [{fmt(fits)}]; generic seed [{fmt(generic)}] (>= s-0.2); "
            f"ball fixed-point change {change:.1e}; {elapsed:.2f}s")


def test_8_det_asymptotics(verdict):
    u = log_field(quotient_kernel(B3))
    samples = [(t, metric_det(u, [t, 0, 0]).value.real) for t in default_radii()]
    fit = asymptotic_fit(samples)
    ok = abs(fit.p - 4) <= 0.05 and abs(fit.A / 64 - 1) <= 0.02 and fit.q >= 1.9
    verdict(8, "quotient det g asymptotics", ok,
            f"p {fit.p:.4f} (4 +- 0.05), A {fit.A:.3f} (64 +- 2%), q {fit.q:.2f} (>= 1.9)")


def test_9_b_limit(verdict):
    t = 1 - 5e-3
    b = b_invariant(quotient_kernel(B3), [t, 0, 0])
    dev = abs(b * math.factorial(3) / (4**3 * math.pi**3) - 1)
    verdict(9, "quotient B-invariant boundary limit", dev < 0.01, f"|B/C_3 - 1| {dev:.2e} at 1-t=5e-3 (< 0.01)")


def test_10_oracle_equivalence(verdict):
    start = time.perf_counter()
    worst, count = 0.0, 0
    for name, n, build in FIELDS:
        for z in battery_points(n):
            try:
                worst = max(worst, oracle_error(build, n, z))
            except NumericConsistencyError:
                worst = math.inf
            count += 1
    elapsed = time.perf_counter() - start
    verdict(10, "jet vs finite-difference oracle", worst < 1e-6 and len(FIELDS) >= 20 and elapsed < 60,
            f"{len(FIELDS)} fields x 10 points ({count}), max rel err {worst:.1e} (< 1e-6), {elapsed:.2f}s")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
