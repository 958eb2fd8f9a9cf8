import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from ppw_metasurface import specfun
from ppw_metasurface.errors import DomainError

# probe points straddle both branch switches
GRID = np.concatenate([np.logspace(-6, 2, 240), [4.999, 5.0, 5.001, 24.999, 25.0, 25.001, 100.0]])


def _envelope(n, x):
    return float(mp.sqrt(mp.besselj(n, x) ** 2 + mp.bessely(n, x) ** 2))


class TestBesselValues:
    def test_origin(self):
        assert specfun.bessel_j(0, 0.0) == 1.0
        assert specfun.bessel_j(1, 0.0) == 0.0
        assert specfun.bessel_j(2, 0.0) == 0.0

    def test_j0_at_one(self):
        assert specfun.bessel_j(0, 1.0) == pytest.approx(0.765197686557967, rel=1e-14)
        assert specfun.bessel_j(0, 1.0) == pytest.approx(float(oracles.j_series(0, 1)), rel=1e-15)

    def test_y_at_one(self):
        assert specfun.bessel_y(1, 1.0) == pytest.approx(-0.781212821300289, rel=1e-14)
        assert specfun.bessel_y(0, 1.0) == pytest.approx(0.088256964215677, rel=1e-13)
        assert specfun.bessel_y(1, 1.0) == pytest.approx(float(oracles.y1_series(1)), rel=1e-15)
        assert specfun.bessel_y(0, 1.0) == pytest.approx(float(oracles.y0_series(1)), rel=1e-14)

    def test_hankel_at_one(self):
        h = specfun.hankel2(0, 1.0)
        assert h.real == pytest.approx(0.765197686557967, rel=1e-14)
        assert h.imag == pytest.approx(-0.088256964215677, rel=1e-13)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_envelope_accuracy_against_mpmath(self, n):
        j = specfun.bessel_j(n, GRID)
        y = specfun.bessel_y(n, GRID)
        for x, cj, cy in zip(GRID, j, y):
            env = _envelope(n, x)
            assert abs(cj - float(mp.besselj(n, x))) <= 1e-14 * env
            assert abs(cy - float(mp.bessely(n, x))) <= 1e-14 * env

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_relative_accuracy_away_from_zeros(self, n):
        for x in GRID:
            env = _envelope(n, x)
            for value, ref in ((specfun.bessel_j(n, x), mp.besselj(n, x)),
                               (specfun.bessel_y(n, x), mp.bessely(n, x))):
                if abs(ref) > 0.1 * env:
                    assert abs(value - float(ref)) <= 1e-12 * abs(ref)

    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_small_argument_j_relative(self, n):
        for x in np.logspace(-6, 0, 25):
            assert specfun.bessel_j(n, x) == pytest.approx(float(oracles.j_series(n, x)), rel=1e-14)

    def test_series_oracle_agrees_with_mpmath(self):
        # guards the hand-written oracle itself
        for x in (0.3, 1.0, 2.5, 4.0):
            assert abs(oracles.y1_series(x) - mp.bessely(1, x)) < mp.mpf(10) ** -30
            assert abs(oracles.y0_series(x) - mp.bessely(0, x)) < mp.mpf(10) ** -30

    def test_y_diverges_toward_origin(self):
        values = [specfun.bessel_y(0, x) for x in (1e-2, 1e-4, 1e-6)]
        assert values[0] > values[1] > values[2]
        assert values[2] < -8

    def test_large_argument_asymptote(self):
        assert abs(specfun.hankel2(0, 50.0)) == pytest.approx(math.sqrt(2 / (math.pi * 50)), rel=1e-2)

    def test_vectorised_matches_scalar(self):
        x = np.array([[0.5, 7.0], [30.0, 99.0]])
        h = specfun.hankel2_all(x)
        assert h.shape == (3, 2, 2)
        for n in range(3):
            for idx in np.ndindex(x.shape):
                assert h[n][idx] == specfun.hankel2(n, float(x[idx]))


class TestBesselIdentities:
    def test_wronskian_at_2_5(self):
        x = 2.5
        w = specfun.bessel_j(1, x) * specfun.bessel_y(0, x) - specfun.bessel_j(0, x) * specfun.bessel_y(1, x)
        assert w == pytest.approx(2 / (math.pi * x), rel=1e-14)

    def test_recurrence_at_3_7(self):
        x = 3.7
        lhs = specfun.hankel2(2, x)
        rhs = (2 / x) * specfun.hankel2(1, x) - specfun.hankel2(0, x)
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=100.0))
    def test_wronskian_property(self, x):
        w = specfun.bessel_j(1, x) * specfun.bessel_y(0, x) - specfun.bessel_j(0, x) * specfun.bessel_y(1, x)
        assert abs(w - 2 / (math.pi * x)) <= 1e-12 * 2 / (math.pi * x)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=100.0))
    def test_recurrence_property(self, x):
        h0, h1, h2 = specfun.hankel2_all(x)
        assert abs(h2 - (2 / x) * h1 + h0) <= 1e-12 * abs(h2)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=100.0))
    def test_hankel_is_j_minus_jy(self, x):
        for n in range(3):
            assert specfun.hankel2(n, x) == complex(specfun.bessel_j(n, x), -specfun.bessel_y(n, x))


class TestBesselDomain:
    @pytest.mark.parametrize("fn", [specfun.bessel_j, specfun.bessel_y, specfun.hankel2])
    def test_negative_argument(self, fn):
        with pytest.raises(DomainError):
            fn(0, -1.0)

    @pytest.mark.parametrize("fn", [specfun.bessel_y, specfun.hankel2])
    def test_zero_rejected_for_singular(self, fn):
        with pytest.raises(DomainError):
            fn(0, 0.0)

    @pytest.mark.parametrize("order", [-1, 3, 0.5])
    def test_bad_order(self, order):
        with pytest.raises(DomainError):
            specfun.bessel_j(order, 1.0)

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            specfun.bessel_j(0, float("nan"))

    def test_array_with_one_bad_entry(self):
        with pytest.raises(DomainError):
            specfun.hankel2_all(np.array([1.0, -2.0]))


class TestElliptic:
    def test_degenerate_values(self):
        assert specfun.elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
        assert specfun.elliptic_e(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
        assert specfun.elliptic_e(1.0) == 1.0

    def test_half(self):
        assert specfun.elliptic_k(0.5) == pytest.approx(1.854074677301372, rel=1e-14)
        assert specfun.elliptic_e(0.5) == pytest.approx(1.350643881047676, rel=1e-14)

    def test_against_extended_precision(self):
        for m in np.concatenate([np.linspace(0, 0.99, 34), [0.999, 0.99999, 1 - 1e-9]]):
            assert specfun.elliptic_k(m) == pytest.approx(float(oracles.agm_k(m)), rel=1e-13)
            assert specfun.elliptic_e(m) == pytest.approx(float(mp.ellipe(m)), rel=1e-13)

    def test_e_against_quadrature(self):
        for m in (0.1, 0.5, 0.9):
            assert specfun.elliptic_e(m) == pytest.approx(float(oracles.quad_e(m)), rel=1e-14)

    def test_legendre_at_0_3(self):
        k3, k7 = specfun.elliptic_k(0.3), specfun.elliptic_k(0.7)
        e3, e7 = specfun.elliptic_e(0.3), specfun.elliptic_e(0.7)
        assert e3 * k7 + e7 * k3 - k3 * k7 == pytest.approx(math.pi / 2, rel=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=0.01, max_value=0.99))
    def test_legendre_property(self, m):
        k, k1 = specfun.elliptic_k(m), specfun.elliptic_k(1 - m)
        e, e1 = specfun.elliptic_e(m), specfun.elliptic_e(1 - m)
        assert abs(e * k1 + e1 * k - k * k1 - math.pi / 2) <= 1e-12 * math.pi / 2

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=0.0, max_value=0.999), st.floats(min_value=1e-6, max_value=1e-3))
    def test_monotonicity(self, m, dm):
        m2 = min(m + dm, 0.9999)
        if m2 > m:
            assert specfun.elliptic_k(m2) > specfun.elliptic_k(m)
            assert specfun.elliptic_e(m2) < specfun.elliptic_e(m)

    def test_e_never_exceeds_k(self):
        m = np.linspace(0, 0.999, 200)
        assert np.all(specfun.elliptic_e(m) <= specfun.elliptic_k(m))

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.elliptic_k(1.0)
        with pytest.raises(DomainError):
            specfun.elliptic_k(-0.1)
        with pytest.raises(DomainError):
            specfun.elliptic_e(1.5)

    def test_array_input(self):
        out = specfun.elliptic_k(np.array([0.0, 0.5]))
        assert out.shape == (2,)
        assert out[1] == specfun.elliptic_k(0.5)
