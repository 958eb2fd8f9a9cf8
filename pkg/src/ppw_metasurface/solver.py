"""Coupled-dipole solve and per-element power accounting.

The moments satisfy ``(Abar^-1 - Gbar) m = H_f i``. The system is factorised
by LU with partial pivoting; it is never inverted explicitly.
"""

from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from .coupling import assemble_interaction, feed_matrix, greens_freespace, greens_waveguide
from .errors import SingularSystemError
from .polarizability import CONDITION_LIMIT, effective_tensors, scene_self_term

MU_0 = constants.mu_0


def _block_diag(blocks):
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for i, b in enumerate(blocks):
        out[2 * i:2 * i + 2, 2 * i:2 * i + 2] = b
    return out


def inverse_polarizabilities(scene, tensors=None):
    """Per-element inverses of the effective tensors, shape (N, 2, 2)."""
    tensors = effective_tensors(scene) if tensors is None else tensors
    conds = np.linalg.cond(tensors, 1)
    bad = np.flatnonzero(~(conds < CONDITION_LIMIT))
    if bad.size:
        n = int(bad[0])
        raise SingularSystemError(f"effective polarizability of element {n} is singular "
                                  f"(cond={conds[n]:.3g})", float(conds[n]))
    return np.linalg.inv(tensors)


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    """Factorised system for one scene; reusable for any number of current vectors."""

    scene: object
    tensors: np.ndarray
    interaction: np.ndarray
    feed: np.ndarray
    lu: tuple
    condition: float

    def moments(self, currents=None):
        i = self.scene.currents if currents is None else np.asarray(currents, dtype=complex)
        return lu_solve(self.lu, self.feed @ i)


def factorize(scene):
    """Assemble and LU-factorise Abar^-1 - Gbar; raises on ill-conditioning."""
    tensors = effective_tensors(scene)
    inv = inverse_polarizabilities(scene, tensors)
    interaction = assemble_interaction(scene)
    system = _block_diag(inv) - interaction
    anorm = np.abs(system).sum(axis=0).max()
    lu = lu_factor(system, check_finite=True)
    rcond, info = zgecon(lu[0], anorm)
    condition = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or not condition < CONDITION_LIMIT:
        raise SingularSystemError(f"coupled-dipole system is ill-conditioned "
                                  f"(cond estimate {condition:.3g})", condition)
    return CoupledSystem(scene, tensors, interaction, feed_matrix(scene), lu, condition)


def solve_moments(scene, currents=None):
    """Stacked dipole moments m (2N,) [A m^2] for the feed currents."""
    return factorize(scene).moments(currents)


def fixed_point_residual(scene, currents, moments):
    """||Abar^-1 m - h0 - Gbar m|| / ||h0||, rebuilt block by block.

    Nothing from the solve is reused: kernels are evaluated row by row and
    polarizabilities are re-derived.
    """
    currents = scene.currents if currents is None else np.asarray(currents, dtype=complex)
    m = np.asarray(moments, dtype=complex).reshape(-1, 2)
    pos = scene.element_positions
    k, h = scene.k, scene.plate_height
    inv = inverse_polarizabilities(scene)
    h0 = (feed_matrix(scene) @ currents).reshape(-1, 2)
    residual = np.empty_like(m)
    for n in range(len(pos)):
        others = np.arange(len(pos)) != n
        delta = pos[n] - pos[others]
        coupled = np.einsum("jab,jb->a", greens_waveguide(delta, k, h) + greens_freespace(delta, k), m[others])
        residual[n] = inv[n] @ m[n] - h0[n] - coupled
    scale = np.linalg.norm(h0)
    norm = np.linalg.norm(residual)
    return norm / scale if scale > 0 else norm


def local_fields(scene, moments, currents=None):
    """h_loc = h0 + Gbar m, shape (N, 2)."""
    currents = scene.currents if currents is None else np.asarray(currents, dtype=complex)
    h0 = feed_matrix(scene) @ currents
    return (h0 + assemble_interaction(scene) @ moments).reshape(-1, 2)


def _quadratic(vec, mat):
    return float(np.real(np.conj(vec) @ mat @ vec))


def power_supplied(n, moments, scene, currents=None, tensors=None, fields=None):
    """P_sup,n = -(w mu0 / 2) h_loc^H Im{A_n} h_loc [W]."""
    tensors = effective_tensors(scene) if tensors is None else tensors
    h = (local_fields(scene, moments, currents) if fields is None else fields)[n]
    return -0.5 * scene.omega * MU_0 * _quadratic(h, np.imag(tensors[n]))


def power_radiated(n, moments, scene, currents=None, tensors=None, fields=None):
    """P_rad,n = -(w mu0 / 2) h_loc^H A_n^H Im{G(0)} A_n h_loc [W]."""
    tensors = effective_tensors(scene) if tensors is None else tensors
    h = (local_fields(scene, moments, currents) if fields is None else fields)[n]
    a = tensors[n]
    g0 = scene_self_term(scene).matrix
    return -0.5 * scene.omega * MU_0 * _quadratic(h, a.conj().T @ g0 @ a)


@dataclass(frozen=True, eq=False)
class PowerReport:
    supplied: np.ndarray
    radiated: np.ndarray

    @property
    def total_supplied(self):
        return float(self.supplied.sum())

    @property
    def total_radiated(self):
        return float(self.radiated.sum())

    @property
    def margins(self):
        return self.supplied - self.radiated

    @property
    def ratios(self):
        """P_rad / P_sup per element; NaN where nothing is supplied."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.supplied > 0, self.radiated / self.supplied, np.nan)


def power_report(scene, currents=None, moments=None):
    """Supplied and radiated power for every element."""
    system = factorize(scene)
    m = system.moments(currents) if moments is None else moments
    fields = local_fields(scene, m, currents)
    n = scene.n_elements
    sup = np.array([power_supplied(i, m, scene, tensors=system.tensors, fields=fields) for i in range(n)])
    rad = np.array([power_radiated(i, m, scene, tensors=system.tensors, fields=fields) for i in range(n)])
    return PowerReport(sup, rad)
