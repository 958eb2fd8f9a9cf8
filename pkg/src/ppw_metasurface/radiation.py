"""Radiated fields, channel matrices and pattern metrics.

Observation points are Cartesian 3-vectors relative to the TX centre (the
origin). In near-field mode every dipole has its own spherical frame toward
the observation point and its (theta, phi) components are projected onto the
common frame of the TX centre. Far-field mode uses the steering-vector form:
common angles for all dipoles, path loss 1/R and phase R - u.r_n.

Channel rows alternate theta (even, 0-based) and phi (odd) components.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .errors import CoincidentPointsError
from .scene import MIN_SEPARATION, AngularGrid
from .solver import solve_moments

ETA_0 = float(np.sqrt(constants.mu_0 / constants.epsilon_0))
NEAR_FIELD = "nf"
FAR_FIELD = "ff"
THREADS_ENV = "PPW_THREADS"

_CHUNK_ENTRIES = 1 << 19


@dataclass(frozen=True, eq=False)
class SphericalBasis:
    theta: float
    phi: float
    theta_hat: np.ndarray
    phi_hat: np.ndarray


def _angles(vec):
    vec = np.asarray(vec, dtype=float)
    r = np.linalg.norm(vec, axis=-1)
    if np.any(r < MIN_SEPARATION):
        raise CoincidentPointsError("observation point coincides with a source point")
    rho = np.hypot(vec[..., 0], vec[..., 1])
    theta = np.arctan2(rho, vec[..., 2])
    # polar axis: phi is undefined, fix it to 0
    phi = np.where(rho > 0, np.arctan2(vec[..., 1], vec[..., 0]), 0.0)
    phi = np.where(phi <= -np.pi, np.pi, phi)
    return r, theta, phi


def _unit_vectors(theta, phi):
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    theta_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phi_hat = np.stack([-sp, cp, np.zeros_like(cp)], axis=-1)
    return theta_hat, phi_hat


def _as3(points):
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] == 2:
        pts = np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1)
    return pts


def spherical_basis(point, origin=(0.0, 0.0, 0.0)):
    """Angles and transverse unit vectors of ``point`` seen from ``origin``."""
    _, theta, phi = _angles(_as3(point) - _as3(origin))
    theta_hat, phi_hat = _unit_vectors(theta, phi)
    return SphericalBasis(float(theta), float(phi), theta_hat, phi_hat)


def _projection(th_c, ph_c, th_l, ph_l):
    # dot products of the common and local (theta_hat, phi_hat) pairs written in
    # angle differences, exact for identical frames and free of cancellation near I
    dphi = ph_c - ph_l
    ct_c, ct_l = np.cos(th_c), np.cos(th_l)
    sin_d = np.sin(dphi)
    t00 = np.cos(th_c - th_l) - 2.0 * ct_c * ct_l * np.sin(0.5 * dphi) ** 2
    t01 = ct_c * sin_d
    t10 = -ct_l * sin_d
    t11 = np.cos(dphi)
    return np.stack([np.stack([t00, t01], axis=-1), np.stack([t10, t11], axis=-1)], axis=-2)


def projection_matrix(dipole_position, observation, center=(0.0, 0.0, 0.0)):
    """2x2 map from the dipole's local (theta, phi) frame to the common frame at ``center``."""
    common = spherical_basis(observation, center)
    local = spherical_basis(observation, dipole_position)
    return _projection(common.theta, common.phi, local.theta, local.phi)


def _dipoles3(scene):
    return _as3(scene.element_positions)


def _local_geometry(scene, points):
    d = points[:, None, :] - _dipoles3(scene)[None, :, :]
    return _angles(d)


def _interleave(even, odd):
    out = np.empty(even.shape[:-1] + (2 * even.shape[-1],), dtype=complex)
    out[..., 0::2] = even
    out[..., 1::2] = odd
    return out


def _focusing_nf(scene, points):
    r, theta, phi = _local_geometry(scene, points)
    wave = np.exp(-1j * scene.k * r) / r
    cp, sp, ct = np.cos(phi), np.sin(phi), np.cos(theta)
    a_theta = _interleave(sp * wave, -cp * wave)
    a_phi = _interleave(cp * ct * wave, sp * ct * wave)
    return a_theta, a_phi


def _projections(scene, points):
    _, th_c, ph_c = _angles(points)
    _, th_l, ph_l = _local_geometry(scene, points)
    return _projection(th_c[:, None], ph_c[:, None], th_l, ph_l)


def _project(t, a_theta, a_phi):
    out_theta = np.empty_like(a_theta)
    out_phi = np.empty_like(a_phi)
    for parity in (0, 1):
        at = a_theta[..., parity::2]
        ap = a_phi[..., parity::2]
        out_theta[..., parity::2] = t[..., 0, 0] * at + t[..., 0, 1] * ap
        out_phi[..., parity::2] = t[..., 1, 0] * at + t[..., 1, 1] * ap
    return out_theta, out_phi


def _focusing_ff(scene, points):
    r, theta, phi = _angles(points)
    u = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)], axis=-1)
    path = r[:, None] - u @ scene.element_positions.T
    wave = np.exp(-1j * scene.k * path) / r[:, None]
    cp, sp, ct = np.cos(phi)[:, None], np.sin(phi)[:, None], np.cos(theta)[:, None]
    a_theta = _interleave(sp * wave, -cp * wave)
    a_phi = _interleave(cp * ct * wave, sp * ct * wave)
    return a_theta, a_phi


def _single(points):
    pts = _as3(points)
    return pts.ndim == 1, np.atleast_2d(pts)


def focusing_vectors_nf(scene, point):
    """Local focusing vectors (a_theta, a_phi), each length 2N (or (L, 2N))."""
    single, pts = _single(point)
    a_theta, a_phi = _focusing_nf(scene, pts)
    return (a_theta[0], a_phi[0]) if single else (a_theta, a_phi)


def focusing_vectors_ff(scene, point):
    """Far-field steering vectors for the direction and radius of ``point``."""
    single, pts = _single(point)
    a_theta, a_phi = _focusing_ff(scene, pts)
    return (a_theta[0], a_phi[0]) if single else (a_theta, a_phi)


def project_focusing(scene, point, a_theta, a_phi):
    """Apply T_{n->l} to each (theta, phi) entry pair of the local vectors."""
    single, pts = _single(point)
    t = _projections(scene, pts)
    out = _project(t, np.atleast_2d(a_theta), np.atleast_2d(a_phi))
    return (out[0][0], out[1][0]) if single else out


def _common_vectors(scene, points, mode):
    if mode == NEAR_FIELD:
        a_theta, a_phi = _focusing_nf(scene, points)
        return _project(_projections(scene, points), a_theta, a_phi)
    if mode == FAR_FIELD:
        return _focusing_ff(scene, points)
    raise ValueError(f"mode must be {NEAR_FIELD!r} or {FAR_FIELD!r}, got {mode!r}")


def channel_matrix(scene, points, mode=NEAR_FIELD):
    """Dual-polarised channel H (2L, 2N) from stacked moments to (E_theta, E_phi)."""
    pts = np.atleast_2d(_as3(points)).reshape(-1, 3)
    a_theta, a_phi = _common_vectors(scene, pts, mode)
    scale = ETA_0 * scene.k ** 2 / (2.0 * np.pi)
    return scale * np.stack([a_theta, a_phi], axis=1).reshape(2 * len(pts), -1)


def scattered_field(scene, moments, points, mode=NEAR_FIELD):
    """(E_theta, E_phi) [V/m] at ``points`` for stacked ``moments``."""
    single, pts = _single(points)
    a_theta, a_phi = _common_vectors(scene, pts, mode)
    scale = ETA_0 * scene.k ** 2 / (2.0 * np.pi)
    m = np.asarray(moments, dtype=complex)
    e_theta, e_phi = scale * (a_theta @ m), scale * (a_phi @ m)
    return (e_theta[0], e_phi[0]) if single else (e_theta, e_phi)


def dipole_field_local(scene, moments, n, point):
    """Per-dipole field of element ``n`` in its own local spherical frame."""
    pts = _as3(point)
    r, theta, phi = _angles(pts - _dipoles3(scene)[n])
    mx, my = np.asarray(moments, dtype=complex)[2 * n:2 * n + 2]
    amp = ETA_0 * scene.k ** 2 * np.exp(-1j * scene.k * r) / (2.0 * np.pi * r)
    e_theta = amp * (mx * np.sin(phi) - my * np.cos(phi))
    e_phi = amp * (mx * np.cos(phi) + my * np.sin(phi)) * np.cos(theta)
    return e_theta, e_phi


def received_signal(scene, points, currents=None, noise=None, mode=NEAR_FIELD, moments=None):
    """y = H m + n with m solved from the currents (i = V s is just a current vector)."""
    m = solve_moments(scene, currents) if moments is None else moments
    y = channel_matrix(scene, points, mode) @ m
    return y if noise is None else y + np.asarray(noise, dtype=complex)


def _intensity_from_moments(scene, moments, points, mode):
    e_theta, e_phi = scattered_field(scene, moments, points, mode)
    r = np.linalg.norm(np.atleast_2d(_as3(points)), axis=-1)
    return r ** 2 / (2.0 * ETA_0) * (np.abs(e_theta) ** 2 + np.abs(e_phi) ** 2)


def intensity(scene, currents, points, mode=NEAR_FIELD, moments=None):
    """U = R^2 / (2 eta) |E|^2 [W], R measured from the TX centre."""
    single, pts = _single(points)
    m = solve_moments(scene, currents) if moments is None else moments
    u = _intensity_from_moments(scene, m, pts, mode)
    return float(u[0]) if single else u


def thread_count(workers=None):
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "0") or 0)
    return workers if workers > 0 else (os.cpu_count() or 1)


def pattern(scene, observation, currents=None, moments=None, workers=None):
    """Intensity U on the observation grid, shape ``observation.grid.shape``.

    Chunks are evaluated on a thread pool and reassembled in order, so the
    result does not depend on the worker count.
    """
    m = solve_moments(scene, currents) if moments is None else moments
    pts = observation.points().reshape(-1, 3)
    step = max(1, _CHUNK_ENTRIES // max(1, scene.n_elements))
    chunks = [pts[i:i + step] for i in range(0, len(pts), step)]
    run = lambda c: _intensity_from_moments(scene, m, c, observation.mode)
    n_workers = min(thread_count(workers), len(chunks))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts).reshape(observation.grid.shape)


def _weights(grid):
    return grid.weights() if isinstance(grid, AngularGrid) else np.asarray(grid, dtype=float)


def pattern_error_raw(u1, u2, grid):
    """Integral of |U1/int U1 - U2/int U2| dOmega (0 for identical shapes, at most 2)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    w = _weights(grid)
    if u1.shape != u2.shape or u1.shape != w.shape:
        raise ValueError(f"pattern shapes differ: {u1.shape}, {u2.shape}, grid {w.shape}")
    i1, i2 = np.sum(u1 * w), np.sum(u2 * w)
    if not (i1 > 0 and i2 > 0):
        raise ValueError("pattern has zero solid-angle integral")
    return float(np.sum(np.abs(u1 / i1 - u2 / i2) * w))


def pattern_error(u1, u2, grid):
    """Pattern-normalised solid-angle error in percent (0..200)."""
    return 100.0 * pattern_error_raw(u1, u2, grid)
