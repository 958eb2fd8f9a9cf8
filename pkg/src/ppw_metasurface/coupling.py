"""Element-to-element interaction matrix and feed excitation matrix.

Stacked vectors interleave components per element: index ``2n`` is x and
``2n + 1`` is y (0-based). All angle factors are built from direction
cosines, which is the four-quadrant form of atan(dy/dx).
"""

import numpy as np

from .errors import CoincidentPointsError
from .scene import MIN_SEPARATION
from .specfun import hankel2, hankel2_all


def _direction(delta):
    delta = np.asarray(delta, dtype=float)
    dx, dy = delta[..., 0], delta[..., 1]
    rho = np.hypot(dx, dy)
    if np.any(rho < MIN_SEPARATION):
        raise CoincidentPointsError(f"points closer than {MIN_SEPARATION} m")
    return rho, dx / rho, dy / rho


def _stack2x2(xx, xy, yx, yy):
    return np.stack([np.stack([xx, xy], axis=-1), np.stack([yx, yy], axis=-1)], axis=-2)


def greens_waveguide(delta, k, h):
    """Parallel-plate guide coupling for separation(s) ``delta`` (..., 2) -> (..., 2, 2).

    G_xx = G_yy = -j k^2/(8h) [H0(k rho) - cos(2 psi) H2(k rho)]
    G_xy = G_yx = -j k^2/(8h) sin(2 psi) H2(k rho)
    """
    rho, c, s = _direction(delta)
    h0, _, h2 = hankel2_all(k * rho)
    pref = -1j * k ** 2 / (8.0 * h)
    gxx = pref * (h0 - (c * c - s * s) * h2)
    gxy = pref * (2.0 * c * s) * h2
    return _stack2x2(gxx, gxy, gxy, gxx)


def greens_freespace(delta, k):
    """Free-space magnetic dyadic over the ground plane, image already doubled."""
    rho, c, s = _direction(delta)
    kr = k * rho
    a = 3.0 / kr ** 2 + 3j / kr - 1.0
    b = 1.0 - 1j / kr - 1.0 / kr ** 2
    pref = k ** 2 * np.exp(-1j * kr) / (2.0 * np.pi * rho)
    return _stack2x2(pref * (a * c * c + b), pref * a * c * s,
                     pref * a * c * s, pref * (a * s * s + b))


def blocks_to_matrix(blocks):
    """(N, M, 2, 2) blocks -> (2N, 2M) interleaved matrix."""
    n, m = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * m)


def assemble_interaction(scene):
    """Interaction matrix (2N, 2N): WG + FS kernels off the diagonal, zero self-blocks."""
    pos = scene.element_positions
    n = len(pos)
    k = scene.k
    blocks = np.zeros((n, n, 2, 2), dtype=complex)
    if n > 1:
        ii, jj = np.triu_indices(n, k=1)
        delta = pos[ii] - pos[jj]
        rho = np.hypot(delta[:, 0], delta[:, 1])
        close = rho < MIN_SEPARATION
        if np.any(close):
            a, b = int(ii[close][0]), int(jj[close][0])
            raise CoincidentPointsError(f"elements {a} and {b} coincide", (a, b))
        g = greens_waveguide(delta, k, scene.plate_height) + greens_freespace(delta, k)
        blocks[ii, jj] = g
        blocks[jj, ii] = g
    return blocks_to_matrix(blocks)


def feed_matrix(scene):
    """Feed-to-element field matrix H_f (2N, N_b); h0 = H_f @ currents.

    Row 2n:   (j k/4) H1(k|r_n - p_i|) (p_y - r_y)/rho
    Row 2n+1: (-j k/4) H1(k|r_n - p_i|) (p_x - r_x)/rho
    """
    r = scene.element_positions
    p = scene.feed_positions
    k = scene.k
    delta = p[None, :, :] - r[:, None, :]
    rho = np.hypot(delta[..., 0], delta[..., 1])
    if np.any(rho < MIN_SEPARATION):
        n, i = np.argwhere(rho < MIN_SEPARATION)[0]
        raise CoincidentPointsError(f"feed {i} coincides with element {n}", (int(n), int(i)))
    h1 = hankel2(1, k * rho)
    out = np.empty((2 * len(r), len(p)), dtype=complex)
    out[0::2] = (1j * k / 4.0) * h1 * delta[..., 1] / rho
    out[1::2] = (-1j * k / 4.0) * h1 * delta[..., 0] / rho
    return out


def excitation_field(scene, currents=None):
    """h0 = H_f i, using the scene's feed currents unless ``currents`` is given."""
    i = scene.currents if currents is None else np.asarray(currents, dtype=complex)
    return feed_matrix(scene) @ i
