import math

import numpy as np
import pytest

from bergman.exceptions import (
    DegenerateFit,
    InsufficientSamples,
    NotPositiveDefinite,
)
from bergman.geometry import (
    asymptotic_fit,
    b_invariant,
    cholesky,
    einstein_constant,
    einstein_diagnostics,
    einstein_residual,
    is_positive_definite,
    j_operator,
    j_operator_jet,
    kernel_ma_identity,
    leading_block_det,
    ma_constant,
    ma_report,
    ma_residual,
    metric,
    metric_det,
    ricci,
)
from bergman.groups import cyclic_diagonal
from bergman.jets import jet_const
from bergman.kernels import (
    ExpressionField,
    b3_example_potential,
    ball_kernel,
    disc_quotient_closed_form,
    log_field,
    norm_squared,
    quotient_kernel,
)
from conftest import random_points


def ball_potential(n):
    return log_field(ball_kernel(n))


def ball_defining(n):
    return ExpressionField(n, lambda zs, zb: 1 - norm_squared(zs, zb))


B2_Z2 = cyclic_diagonal(2, [1, 1], 2)
B3 = cyclic_diagonal(3, [1, 1, 1], 2)


class TestMetric:
    def test_ball_origin(self):
        assert np.allclose(metric(ball_potential(2), [0, 0]), 3 * np.eye(2), atol=1e-13)

    def test_ball_off_center(self):
        g = metric(ball_potential(2), [0.5, 0])
        assert np.allclose(g, np.diag([16 / 3, 4]), atol=1e-12)

    def test_ball_closed_form(self, rng):
        n = 3
        for z in random_points(rng, n, 5):
            s = 1 - np.vdot(z, z).real
            expected = (n + 1) * (np.eye(n) / s + np.outer(z.conj(), z) / s**2)
            assert np.allclose(metric(ball_potential(n), z), expected, rtol=1e-11)

    def test_disc_quotient(self):
        # 2 r^2 |z|^{2(r-1)} / (1 - |z|^{2r})^2 at r = 2, z = 0.5
        g = metric(log_field(disc_quotient_closed_form(2)), [0.5])
        assert g[0, 0].real == pytest.approx(8 * 0.25 / 0.87890625, rel=1e-12)

    def test_det_off_center(self):
        G = metric_det(ball_potential(2), [0.5, 0]).value
        assert G.real == pytest.approx(64 / 3, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_det_closed_form(self, n, rng):
        for z in random_points(rng, n, 4):
            G = metric_det(ball_potential(n), z).value.real
            assert G * (1 - np.vdot(z, z).real) ** (n + 1) == pytest.approx((n + 1) ** n, rel=1e-9)

    def test_trivial_quotient(self, rng):
        u = log_field(quotient_kernel(cyclic_diagonal(2, [1, 1], 1)))
        for z in random_points(rng, 2, 3):
            assert np.allclose(metric(u, z), metric(ball_potential(2), z), rtol=1e-10)


class TestBInvariant:
    def test_ball_n2(self):
        assert b_invariant(ball_kernel(2), [0.5, 0]) == pytest.approx(9 * math.pi**2 / 2, rel=1e-12)

    def test_ball_n3_origin(self):
        assert b_invariant(ball_kernel(3), [0, 0, 0]) == pytest.approx(64 * math.pi**3 / 6, rel=1e-12)

    def test_b3_boundary(self):
        t = 0.995
        b = b_invariant(quotient_kernel(B3), [t, 0, 0])
        assert abs(b / einstein_constant(3) - 1) < 0.01

    def test_disc_quotients_constant(self, rng):
        for r in (2, 3):
            k = disc_quotient_closed_form(r)
            for z in random_points(rng, 1, 4, 0.1, 0.9):
                assert b_invariant(k, z) == pytest.approx(einstein_constant(1), rel=1e-9)


class TestRicci:
    def test_ball_origin(self):
        assert np.allclose(ricci(ball_potential(2), [0, 0]), -3 * np.eye(2), atol=1e-12)

    def test_ball_off_center(self):
        z = [0.2, 0.1, 0.4]
        u = ball_potential(3)
        assert np.allclose(ricci(u, z), -metric(u, z), atol=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_ball_residual(self, n, rng):
        u = ball_potential(n)
        for z in random_points(rng, n, 10, 0, 0.95):
            assert einstein_residual(u, z) < 1e-8

    def test_disc_quotient_is_einstein(self):
        assert einstein_residual(log_field(disc_quotient_closed_form(3)), [0.4]) < 1e-8

    def test_b2_quotient_not_einstein(self):
        assert einstein_residual(log_field(quotient_kernel(B2_Z2)), [0.1, 0]) > 0.01

    def test_b3_not_einstein(self):
        assert einstein_residual(log_field(quotient_kernel(B3)), [0.2, 0.1, 0.1]) > 0.01

    def test_diagnostics_bundle(self):
        d = einstein_diagnostics(ball_potential(2), [0.5, 0], kernel=ball_kernel(2))
        assert d.G == pytest.approx(64 / 3)
        assert d.b_invariant == pytest.approx(9 * math.pi**2 / 2)
        assert d.residual_norm < 1e-12


class TestCholesky:
    def test_factor(self, rng):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = a @ a.conj().T + np.eye(3)
        L = cholesky(h)
        assert np.allclose(L @ L.conj().T, h)

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.diag([1.0, -1.0]))
        assert not is_positive_definite(np.diag([1.0, 0.0]))


class TestJ:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_ball_defining(self, n, rng):
        r = ball_defining(n)
        for z in random_points(rng, n, 3):
            assert j_operator(r, z) == pytest.approx(1, abs=1e-10)

    def test_constant_field(self):
        c = ExpressionField(2, lambda zs, zb: zs[0] * 0 + 3.0)
        assert j_operator(c, [0.1, 0.2]) == 0

    def test_jet_is_constant(self):
        j = j_operator_jet(ball_defining(2), [0.3, 0.1j], extra_order=6)
        assert j.allclose(jet_const(1, 4, 6), atol=1e-12)

    def test_jet_value_consistency(self, rng):
        u = ExpressionField(2, lambda zs, zb: (1 - norm_squared(zs, zb)) * (1 + zs[0] * zb[1] * 0.1 + zb[0] * zs[1] * 0.1))
        for z in random_points(rng, 2, 30, 0, 0.8):
            assert j_operator_jet(u, z, 2).value.real == pytest.approx(j_operator(u, z), abs=1e-14)

    def test_homogeneity(self):
        r = ball_defining(2)
        lam = 2.0
        scaled = ExpressionField(2, lambda zs, zb: (1 - norm_squared(zs, zb)) * lam)
        z = [0.5, 0]
        assert j_operator(scaled, z) == pytest.approx(lam**3 * j_operator(r, z))


class TestMongeAmpere:
    @pytest.mark.parametrize("r", [1, 2, 3, 4])
    def test_disc(self, r):
        u = log_field(disc_quotient_closed_form(r))
        c = 2 * math.pi * r
        assert ma_constant(1, r) == pytest.approx(c)
        for x in (0.2, 0.5, 0.9):
            assert abs(ma_residual(u, [x], c)) < 1e-10 * (1 + abs(metric(u, [x])[0, 0]))

    @pytest.mark.parametrize("r", range(1, 7))
    def test_disc_averaged_away_from_origin(self, r):
        # near 0 the group sum cancels down to |z|^{2(r-1)}; away from it the route is sound
        u = log_field(quotient_kernel(cyclic_diagonal(1, [1], r)))
        for x in np.linspace(0.4, 0.95, 12):
            assert abs(ma_residual(u, [x], 2 * math.pi * r)) < 1e-10

    def test_ball(self, rng):
        u = ball_potential(2)
        c = 9 * math.pi**2 / 2
        for z in random_points(rng, 2, 20):
            rep = ma_report(u, z, c)
            assert abs(rep.residual) / rep.rhs < 1e-9

    def test_b3_block_limit(self):
        u = b3_example_potential()
        c = ma_constant(3, 2)
        for t in (1e-1, 1e-2, 1e-3):
            assert abs(leading_block_det(u, [t, 0, 0]) - 20) < 100 * t**2
        rep = ma_report(u, [1e-3, 0, 0], c)
        assert rep.rhs < 1e-3 and abs(rep.residual) > 1


class TestKernelIdentity:
    def test_ball_n2(self):
        assert kernel_ma_identity(ball_kernel(2), [0.3, 0.4]).relative < 1e-9

    def test_ball_n3_origin(self):
        res = kernel_ma_identity(ball_kernel(3), [0, 0, 0])
        assert res.lhs == pytest.approx(-einstein_constant(3) * (6 / math.pi**3) ** 5, rel=1e-9)

    def test_quotient_fails(self):
        assert kernel_ma_identity(quotient_kernel(B2_Z2), [0.1, 0.1]).relative > 1e-3


class TestAsymptoticFit:
    def test_ball(self):
        u = ball_potential(2)
        ts = 1 - 0.2 * 2.0 ** -np.arange(10)
        fit = asymptotic_fit([(t, metric_det(u, [t, 0]).value.real) for t in ts])
        assert fit.p == pytest.approx(3, abs=0.01)
        assert fit.A == pytest.approx(9, rel=1e-6)
        assert not fit.correction_detected

    def test_b3(self):
        u = log_field(quotient_kernel(B3))
        ts = 1 - 0.2 * 2.0 ** -np.arange(10)
        fit = asymptotic_fit([(t, metric_det(u, [t, 0, 0]).value.real) for t in ts])
        assert fit.p == pytest.approx(4, abs=0.05)
        assert fit.q >= 1.9

    def test_synthetic_recovery(self):
        ts = 1 - 0.3 * 2.0 ** -np.arange(12)
        s = 1 - ts**2
        v = 5 * s**-2.5 * (1 + 0.7 * s**1.5)
        fit = asymptotic_fit(zip(ts, v))
        assert fit.A == pytest.approx(5, rel=1e-6)
        assert fit.p == pytest.approx(2.5, abs=1e-6)
        assert fit.q == pytest.approx(1.5, abs=1e-4)

    def test_constant(self):
        with pytest.raises(DegenerateFit):
            asymptotic_fit([(0.1 * i, 2.0) for i in range(1, 9)])

    def test_too_few(self):
        with pytest.raises(InsufficientSamples):
            asymptotic_fit([(0.1 * i, i) for i in range(1, 5)])
