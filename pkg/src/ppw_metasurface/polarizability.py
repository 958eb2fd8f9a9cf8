"""Element polarizabilities, the guide self-term and passivity.

Intrinsic (quasi-static) tensors come from the closed-form elliptic-iris
magnetic polarizabilities, scaled by 1/4 for an aperture between the guide
and free space. The effective tensor adds radiation reaction,

    A = A' (I - j Im{G(0)} A')^-1,

so that Im{A^-1} + Im{G(0)} = Im{A'^-1} >= 0 holds by construction.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularSystemError
from .specfun import elliptic_e, elliptic_k

INTRINSIC = "intrinsic"
EFFECTIVE = "effective"

CONDITION_LIMIT = 1e12
PASSIVITY_RTOL = 1e-9
APERTURE_FACTOR = 0.25

# below this parameter m the closed forms are evaluated from their power series
_SERIES_M = 1e-2

I2 = np.eye(2)


@dataclass(frozen=True, eq=False)
class PolarizabilityTensor:
    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex).reshape(2, 2))


@dataclass(frozen=True)
class SelfTerm:
    """Im{G(0)} = value * I2 with ``value`` < 0 [1/m^3]."""

    value: float

    @property
    def matrix(self):
        return self.value * I2


@dataclass(frozen=True)
class PassivityReport:
    min_eigenvalue: float
    passive: bool


def _central_binomial_sq(n):
    # ((2n)! / (4^n n!^2))^2
    return (math.comb(2 * n, n) / 4.0 ** n) ** 2


def _series_sums(m):
    s1 = s2 = 0.0
    n = 1
    while True:
        c_prev, c_n = _central_binomial_sq(n - 1), _central_binomial_sq(n)
        power = m ** (n - 1)
        t1 = c_n * (2 * n / (2 * n - 1)) * power
        t2 = (c_prev - 2 * n * c_n / (2 * n - 1)) * power
        s1 += t1
        s2 += t2
        if abs(t1) < 1e-18 and abs(t2) < 1e-18:
            return s1, s2
        n += 1


def elliptic_iris_polarizabilities(l1, l2):
    """Free-space magnetic polarizabilities (alpha_xx, alpha_yy) of an elliptic iris.

    ``l1`` is the semi-major axis (along x), ``l2`` the semi-minor. With
    eccentricity parameter m = 1 - (l2/l1)^2::

        alpha_xx = 4 pi l1^3 m / (3 [K(m) - E(m)])
        alpha_yy = 4 pi l1^3 m (1 - m) / (3 [E(m) - (1 - m) K(m)])

    The circular limit is 16 a^3 / 3 for both entries.
    """
    l1 = float(l1)
    l2 = float(l2)
    if not (l1 > 0 and l2 > 0):
        raise DomainError(f"iris semi-axes must be positive, got l1={l1}, l2={l2}")
    if l2 > l1:
        raise DomainError(f"semi-minor axis l2={l2} exceeds semi-major l1={l1}")
    ratio = l2 / l1
    m = 1.0 - ratio * ratio
    scale = 4.0 * math.pi * l1 ** 3 / 3.0
    if m < _SERIES_M:
        # K - E = (pi/2) m S1,  E - (1-m) K = (pi/2) m S2
        s1, s2 = _series_sums(m)
        axx = scale / (0.5 * math.pi * s1)
        ayy = scale * ratio * ratio / (0.5 * math.pi * s2)
    else:
        big_k, big_e = elliptic_k(m), elliptic_e(m)
        axx = scale * m / (big_k - big_e)
        ayy = scale * m * ratio * ratio / (big_e - ratio * ratio * big_k)
    return axx, ayy


def intrinsic_elliptic_iris(l1, l2):
    """Intrinsic aperture tensor: a quarter of the free-space iris values, diagonal."""
    axx, ayy = elliptic_iris_polarizabilities(l1, l2)
    return PolarizabilityTensor(np.diag([APERTURE_FACTOR * axx, APERTURE_FACTOR * ayy]), INTRINSIC)


def with_loss(intrinsic, loss_delta):
    """Add ohmic loss: (A')^-1 -> (A')^-1 + j*loss_delta*I2."""
    if loss_delta < 0:
        raise DomainError(f"loss_delta must be nonnegative, got {loss_delta}")
    if loss_delta == 0:
        return intrinsic
    inv = _checked_inverse(intrinsic.matrix, "intrinsic polarizability")
    return PolarizabilityTensor(np.linalg.inv(inv + 1j * loss_delta * I2), INTRINSIC)


def self_term(k, h):
    """Im{G(0)} for the guide plus doubled free-space kernel: -(k^3/(3 pi) + k^2/(8 h))."""
    if not (k > 0 and h > 0):
        raise DomainError(f"self_term requires k > 0 and h > 0, got k={k}, h={h}")
    return SelfTerm(-(k ** 3 / (3.0 * math.pi) + k ** 2 / (8.0 * h)))


def _checked_inverse(matrix, what):
    cond = np.linalg.cond(matrix, 1)
    if not cond < CONDITION_LIMIT:
        raise SingularSystemError(f"{what} is numerically singular (cond={cond:.3g})", cond)
    return np.linalg.inv(matrix)


def rr_correct(intrinsic, self_term):
    """Radiation-reaction corrected (effective) polarizability."""
    if intrinsic.kind != INTRINSIC:
        raise ValueError("rr_correct expects an intrinsic tensor")
    a_prime = intrinsic.matrix
    denom = I2 - 1j * self_term.value * a_prime
    # scale of I - j g0 A' is at least 1, so sigma_min is measured against that too
    sv = np.linalg.svd(denom, compute_uv=False)
    cond = max(sv[0], 1.0) / sv[-1] if sv[-1] > 0 else np.inf
    if not cond < CONDITION_LIMIT:
        raise SingularSystemError(f"RR correction denominator is singular (cond={cond:.3g})", cond)
    # A' D^-1 = (D^-T A'^T)^T
    effective = np.linalg.solve(denom.T, a_prime.T).T
    return PolarizabilityTensor(effective, EFFECTIVE)


def passivity_check(effective, self_term):
    """Smallest eigenvalue of the Hermitian part of Im{A^-1} + Im{G(0)}.

    Passive when it is no lower than ``-1e-9 * |g0|``.
    """
    inv = _checked_inverse(effective.matrix, "effective polarizability")
    margin = np.imag(inv) + self_term.value * I2
    herm = 0.5 * (margin + margin.conj().T)
    lowest = float(np.linalg.eigvalsh(herm)[0])
    return PassivityReport(lowest, lowest >= -PASSIVITY_RTOL * abs(self_term.value))


def element_intrinsic(element):
    """Intrinsic tensor of a scene element, including any override and loss."""
    if element.intrinsic_override is not None:
        base = PolarizabilityTensor(np.array(element.intrinsic_override), INTRINSIC)
    else:
        base = intrinsic_elliptic_iris(element.l1, element.l2)
    return with_loss(base, element.loss_delta)


def scene_self_term(scene):
    return self_term(scene.k, scene.plate_height)


def effective_tensors(scene):
    """Stacked effective polarizabilities of all elements, shape (N, 2, 2)."""
    g0 = scene_self_term(scene)
    return np.array([rr_correct(element_intrinsic(e), g0).matrix for e in scene.elements])
