import math

import numpy as np
import pytest
from scipy import integrate

from xxzbell import bethe
from xxzbell.bethe import Branch, QuadratureConfig, classify, ground_energy_at, ground_energy_derivative
from xxzbell.errors import AccuracyError, DomainError

LN2 = math.log(2.0)


def real_line_energy(delta):
    """Independent oracle for -1 < delta < 1: real-axis integral representation.

    e0 = delta/4 - sin(g) * int_0^inf sinh((pi-g)x) / (sinh(pi x) cosh(g x)) dx,
    with delta = cos(g); the integrand is rewritten with decaying exponentials.
    """
    g = math.acos(delta)

    def f(x):
        if x == 0.0:
            return (math.pi - g) / math.pi
        num = 1.0 - math.exp(-2.0 * (math.pi - g) * x)
        den = (1.0 - math.exp(-2.0 * math.pi * x)) * (1.0 + math.exp(-2.0 * g * x))
        return 2.0 * num / den * math.exp(-2.0 * g * x)

    val, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-14, limit=500)
    return delta / 4.0 - math.sin(g) * val


def antiferro_series(delta):
    """Independent oracle for delta > 1: e0 = delta/4 - sinh(l) [1/2 + 2 sum_n 1/(exp(2 n l) + 1)]."""
    lam = math.acosh(delta)
    total, n = 0.0, 1
    while True:
        term = 1.0 / (math.exp(2.0 * n * lam) + 1.0) if 2.0 * n * lam < 700 else 0.0
        total += term
        if term < 1e-18:
            break
        n += 1
    return delta / 4.0 - math.sinh(lam) * (0.5 + 2.0 * total)


class TestClassify:
    def test_gapless(self):
        p = classify(0.5)
        assert p.branch is Branch.GAPLESS
        assert p.spectral == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_isotropic(self):
        assert classify(1.0).branch is Branch.ISOTROPIC
        assert classify(1.0).spectral is None

    def test_antiferro(self):
        p = classify(2.0)
        assert p.branch is Branch.ANTIFERRO
        assert p.spectral == pytest.approx(math.acosh(2.0) / math.pi, abs=1e-14)
        assert math.cosh(math.pi * p.spectral) == pytest.approx(2.0, abs=1e-12)

    def test_ferro_boundary(self):
        assert classify(-1.0).branch is Branch.FERRO
        assert classify(-1.0 + 1e-15).branch is Branch.GAPLESS

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite(self, bad):
        with pytest.raises(DomainError):
            classify(bad)

    @pytest.mark.parametrize("delta", np.linspace(-0.999, 0.999, 37))
    def test_gapless_invariant(self, delta):
        p = classify(delta)
        assert 0.0 < p.spectral < 1.0
        assert math.cos(math.pi * p.spectral) == pytest.approx(delta, abs=1e-12)


class TestGroundEnergy:
    def test_isotropic_closed_form(self):
        assert ground_energy_at(1.0) == 0.25 - LN2

    def test_ferro(self):
        assert ground_energy_at(-2.0) == -0.5
        assert ground_energy_at(-1.0) == -0.25

    def test_xx_point(self):
        assert ground_energy_at(0.0) == pytest.approx(-1.0 / math.pi, abs=1e-12)

    @pytest.mark.parametrize("delta", [-0.95, -0.7, -0.3, 0.2, 0.5, 0.8, 0.97])
    def test_gapless_matches_real_line_oracle(self, delta):
        assert ground_energy_at(delta) == pytest.approx(real_line_energy(delta), abs=1e-11)

    @pytest.mark.parametrize("delta", [1.001, 1.05, 1.5, 2.0, 3.0, 5.0])
    def test_antiferro_matches_series(self, delta):
        assert ground_energy_at(delta) == pytest.approx(antiferro_series(delta), abs=1e-11)

    def test_continuity_at_minus_one(self):
        gaps = [abs(ground_energy_at(-1 - e) - ground_energy_at(-1 + e)) for e in (1e-2, 1e-3, 1e-4)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[-1] < 1e-3

    def test_continuity_at_one(self):
        # slope near 1 is about 0.148
        for d in (1.0 - 1e-3, 1.0 + 1e-3):
            assert abs(ground_energy_at(d) - (0.25 - LN2)) < 2e-4

    def test_realness_on_grid(self):
        cfg = QuadratureConfig()
        for delta in np.linspace(-1, 1, 202)[1:-1]:
            val = bethe.contour_integral(classify(delta), cfg)
            assert abs(val.imag) < cfg.abs_tol

    def test_integrand_decay_at_truncation(self):
        cfg = QuadratureConfig()
        T = cfg.truncation
        for delta in (-0.999, -0.5, 0.0, 0.5, 0.999):
            nu = classify(delta).spectral
            for t in (-T, T):
                assert abs(bethe._gapless_integrand(t, nu)) < cfg.abs_tol / (10 * T)
        for delta in (1.0001, 2.0, 10.0):
            phi = classify(delta).spectral
            assert abs(bethe._antiferro_integrand(T, phi)) < cfg.abs_tol / (10 * T)

    def test_accuracy_error_carries_estimate(self):
        cfg = QuadratureConfig(abs_tol=1e-10, max_subdivisions=1)
        with pytest.raises(AccuracyError) as info:
            ground_energy_at(0.3, cfg)
        assert info.value.estimate > 0

    def test_config_validation(self):
        with pytest.raises(DomainError):
            QuadratureConfig(abs_tol=0.0)
        with pytest.raises(DomainError):
            QuadratureConfig(truncation=-1.0)


class TestDerivative:
    def test_ferro(self):
        assert ground_energy_derivative(-2.0) == 0.25
        assert ground_energy_derivative(-1.0) == 0.25

    def test_xx_point(self):
        assert ground_energy_derivative(0.0) == pytest.approx(-1.0 / math.pi**2, abs=1e-9)

    def test_isotropic_both_sides(self):
        expected = (1.0 - 4.0 * LN2) / 12.0
        assert ground_energy_derivative(1.0, side="left") == pytest.approx(expected, abs=1e-8)
        assert ground_energy_derivative(1.0, side="right") == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("delta", [1.2, 2.0, 3.0])
    def test_antiferro_against_series_difference(self, delta):
        h = 1e-5
        oracle = (antiferro_series(delta + h) - antiferro_series(delta - h)) / (2 * h)
        assert ground_energy_derivative(delta) == pytest.approx(oracle, abs=1e-8)

    @pytest.mark.parametrize("delta", [-0.9, -0.4, 0.3, 0.9])
    def test_gapless_against_oracle_difference(self, delta):
        h = 1e-5
        oracle = (real_line_energy(delta + h) - real_line_energy(delta - h)) / (2 * h)
        assert ground_energy_derivative(delta) == pytest.approx(oracle, abs=1e-7)

    def test_near_boundary_uses_one_side(self):
        # within 10 h of delta = 1 the stencil must not cross into the other branch
        d = ground_energy_derivative(1.0 - 2e-5)
        assert d == pytest.approx((1.0 - 4.0 * LN2) / 12.0, abs=1e-5)

    def test_right_limit_at_minus_one_does_not_converge(self):
        with pytest.raises(AccuracyError):
            ground_energy_derivative(-1.0, side="right")

    def test_bad_side(self):
        with pytest.raises(DomainError):
            ground_energy_derivative(0.0, side="up")
