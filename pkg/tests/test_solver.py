from concurrent.futures import ThreadPoolExecutor

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppw_metasurface.coupling import assemble_interaction, excitation_field, greens_freespace, greens_waveguide
from ppw_metasurface.errors import SingularSystemError
from ppw_metasurface.polarizability import effective_tensors, scene_self_term
from ppw_metasurface.scene import Element, Feed, Scene, random_scene
from ppw_metasurface.solver import (MU_0, factorize, fixed_point_residual, local_fields, power_radiated,
                                    power_report, power_supplied, solve_moments)


def _with_loss(scene, delta):
    return scene.with_elements([Element(e.position, e.l1, e.l2, delta) for e in scene.elements])


class TestSolve:
    def test_single_element_is_uncoupled(self):
        scene = Scene(10e9, 5.21e-3, [Element((0.01, 0.0), 3.6e-3, 2.5e-3)], [Feed((0.0, 0.045), 1.0)])
        m = solve_moments(scene)
        expected = effective_tensors(scene)[0] @ excitation_field(scene)
        assert np.allclose(m, expected, rtol=1e-14, atol=0)

    def test_zero_currents(self, ref_scene):
        assert np.array_equal(solve_moments(ref_scene, np.zeros(2)), np.zeros(20))

    def test_reference_residual(self, ref_scene):
        m = solve_moments(ref_scene)
        assert m.shape == (20,)
        assert fixed_point_residual(ref_scene, None, m) < 1e-10

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 20), st.integers(0, 2 ** 32 - 1))
    def test_random_residual(self, n, seed):
        scene = random_scene(np.random.default_rng(seed), n)
        assert fixed_point_residual(scene, None, solve_moments(scene)) < 1e-10

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
    def test_linearity(self, n, seed):
        rng = np.random.default_rng(seed)
        scene = random_scene(rng, n)
        i1, i2 = (rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(2))
        a, b = 0.7 - 0.2j, -1.3 + 0.5j
        lhs = solve_moments(scene, a * i1 + b * i2)
        rhs = a * solve_moments(scene, i1) + b * solve_moments(scene, i2)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(lhs)

    def test_factorisation_reused(self, ref_scene):
        system = factorize(ref_scene)
        assert system.condition < 1e12
        assert np.array_equal(system.moments(), solve_moments(ref_scene))

    def test_singular_system_reports_condition(self):
        # A^-1 = G12 on both elements puts (v, v) in the null space
        k = 2 * np.pi * 10e9 / 299792458
        h = 5.21e-3
        r1, r2 = np.array([0.0, 0.0]), np.array([0.021, 0.008])
        g12 = greens_waveguide(r1 - r2, k, h) + greens_freespace(r1 - r2, k)
        g0 = -(k ** 3 / (3 * np.pi) + k ** 2 / (8 * h))
        override = np.linalg.inv(g12 + 1j * g0 * np.eye(2))
        scene = Scene(10e9, h, [Element(r1, 3e-3, 2e-3, 0.0, override), Element(r2, 3e-3, 2e-3, 0.0, override)],
                      [Feed((0.0, 0.045), 1.0)])
        with pytest.raises(SingularSystemError) as info:
            solve_moments(scene)
        assert info.value.condition > 1e12

    def test_concurrent_solves_do_not_interfere(self):
        scenes = [random_scene(np.random.default_rng(s), 12) for s in range(8)]
        serial = [solve_moments(s) for s in scenes]
        with ThreadPoolExecutor(4) as pool:
            parallel = list(pool.map(solve_moments, scenes))
        for a, b in zip(serial, parallel):
            assert np.array_equal(a, b)


class TestResidual:
    def test_perturbation_detected(self, ref_scene):
        m = solve_moments(ref_scene)
        bumped = m * 1.01
        assert fixed_point_residual(ref_scene, None, bumped) > 1e-6

    def test_zero_moments(self, ref_scene):
        assert fixed_point_residual(ref_scene, None, np.zeros(20)) == pytest.approx(1.0, rel=1e-15)


def _damped_iteration(scene, tol=1e-13, max_iter=20000):
    a = effective_tensors(scene)
    n = scene.n_elements
    abar = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        abar[2 * i:2 * i + 2, 2 * i:2 * i + 2] = a[i]
    g = assemble_interaction(scene)
    h0 = excitation_field(scene)
    op = abar @ g
    rho = max(abs(np.linalg.eigvals(op)))
    # damping w makes m <- (1-w) m + w A(h0 + G m) contract when rho < 1
    w = 1.0 if rho < 0.5 else 0.5
    m = np.zeros(2 * n, dtype=complex)
    for _ in range(max_iter):
        new = (1 - w) * m + w * (abar @ (h0 + g @ m))
        if np.linalg.norm(new - m) <= tol * np.linalg.norm(new):
            return new, rho
        m = new
    return m, rho


class TestBruteForce:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
    def test_fixed_point_matches_direct(self, n, seed):
        scene = random_scene(np.random.default_rng(seed), n, min_spacing=0.02)
        m_iter, rho = _damped_iteration(scene)
        if rho >= 1:
            return
        m = solve_moments(scene)
        assert np.linalg.norm(m_iter - m) <= 1e-8 * np.linalg.norm(m)


class TestPower:
    def test_lossless_reference_balance(self, ref_scene):
        report = power_report(ref_scene)
        assert np.all(report.supplied > 0)
        assert np.allclose(report.ratios, 1.0, rtol=1e-9, atol=0)
        tol = 1e-9 * report.supplied.max()
        assert np.all(np.abs(report.margins) <= tol)

    def test_supplied_against_extended_precision(self, ref_scene):
        m = solve_moments(ref_scene)
        fields = local_fields(ref_scene, m)
        tensors = effective_tensors(ref_scene)
        mp.mp.dps = 40
        for n in range(ref_scene.n_elements):
            h = mp.matrix([mp.mpc(v) for v in fields[n]])
            im_a = mp.matrix([[mp.mpf(tensors[n][i, j].imag) for j in range(2)] for i in range(2)])
            quad = (h.H * im_a * h)[0, 0]
            ref = -mp.mpf(ref_scene.omega) * mp.mpf(MU_0) / 2 * mp.re(quad)
            got = power_supplied(n, m, ref_scene, tensors=tensors, fields=fields)
            assert got == pytest.approx(float(ref), rel=1e-12)

    def test_loss_makes_ratio_strictly_below_one(self, ref_scene):
        delta = 0.1 * abs(scene_self_term(ref_scene).value)
        report = power_report(_with_loss(ref_scene, delta))
        assert np.all(report.margins > 0)
        assert np.all(report.ratios < 1)

    def test_zero_currents(self, ref_scene):
        report = power_report(ref_scene, currents=np.zeros(2))
        assert np.all(report.supplied == 0) and np.all(report.radiated == 0)
        assert np.all(np.isnan(report.ratios))

    def test_zero_field_gives_zero(self, ref_scene):
        fields = np.zeros((10, 2), dtype=complex)
        m = np.zeros(20, dtype=complex)
        assert power_supplied(0, m, ref_scene, fields=fields) == 0
        assert power_radiated(0, m, ref_scene, fields=fields) == 0

    def test_unit_moment_radiates_known_power(self, ref_scene):
        # field chosen so that A_0 h = (1, 0)
        tensors = effective_tensors(ref_scene)
        fields = np.zeros((10, 2), dtype=complex)
        fields[0] = np.linalg.solve(tensors[0], [1.0, 0.0])
        g0 = scene_self_term(ref_scene).value
        got = power_radiated(0, None, ref_scene, tensors=tensors, fields=fields)
        assert got == pytest.approx(0.5 * ref_scene.omega * MU_0 * abs(g0), rel=1e-13)

    def test_negative_definite_im_a_supplies_power(self, ref_scene):
        tensors = effective_tensors(ref_scene)
        assert np.all(np.linalg.eigvalsh(np.imag(tensors)) < 0)
        fields = np.ones((10, 2), dtype=complex)
        for n in range(10):
            assert power_supplied(n, None, ref_scene, tensors=tensors, fields=fields) > 0

    def test_totals(self, ref_scene):
        report = power_report(ref_scene)
        assert report.total_supplied == pytest.approx(report.supplied.sum())
        assert report.total_radiated == pytest.approx(report.radiated.sum())
