"""Bessel, Hankel and complete elliptic integral kernels.

Real-argument Bessel functions J_n, Y_n for orders 0..2 and the Hankel
function of the second kind H^(2)_n = J_n - j*Y_n. Three regimes are used:

* ``x < 5``: power series (Y via the logarithmic Neumann form).
* ``5 <= x < 25``: Miller backward recurrence for J normalised by
  ``J0 + 2*sum(J_2k) = 1``; Y0 and Y1 from the Neumann expansions in J_n.
* ``x >= 25``: Hankel asymptotic expansion, truncated at the smallest term.

Absolute error is below ~1e-15 of the envelope |H_n(x)| on (0, 1e4]. The
asymptotic branch loses phase accuracy in proportion to ulp(x) beyond that.

Elliptic integrals take the *parameter* ``m`` (m = k**2), not the modulus.
"""

import math

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061

_SERIES_LIMIT = 5.0
_ASYMPTOTIC_LIMIT = 25.0
_TINY = 1e-18
_ORDERS = (0, 1, 2)


def _check_order(order):
    if order not in _ORDERS:
        raise DomainError(f"unsupported Bessel order {order!r}; expected 0, 1 or 2")


def _series_j(n, x):
    q = -(x * x) / 4.0
    term = (x / 2.0) ** n / math.factorial(n)
    lead = np.abs(term)
    total = term.copy()
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + n))
        total += term
        if np.all(np.abs(term) <= _TINY * np.maximum(lead, _TINY)):
            return total


def _series_y01(x, j0, j1):
    q = (x * x) / 4.0
    log_term = np.log(x / 2.0)

    # Y0 = 2/pi [ (ln(x/2) + gamma) J0 + sum_{k>=1} (-1)^(k+1) H_k q^k / (k!)^2 ]
    term = np.ones_like(x)
    harmonic = 0.0
    acc0 = np.zeros_like(x)
    k = 0
    while True:
        k += 1
        harmonic += 1.0 / k
        term = -term * q / (k * k)
        contrib = -harmonic * term
        acc0 += contrib
        if np.all(np.abs(contrib) <= _TINY):
            break
    y0 = (2.0 / np.pi) * ((log_term + EULER_GAMMA) * j0 + acc0)

    # Y1 = -2/(pi x) + 2/pi ln(x/2) J1
    #      - x/(2 pi) sum_{k>=0} (psi(k+1) + psi(k+2)) (-q)^k / (k!(k+1)!)
    term = np.ones_like(x)
    psi_k1 = -EULER_GAMMA
    acc1 = (psi_k1 + psi_k1 + 1.0) * term
    k = 0
    while True:
        k += 1
        psi_k1 += 1.0 / k
        term = -term * q / (k * (k + 1))
        contrib = (2.0 * psi_k1 + 1.0 / (k + 1)) * term
        acc1 += contrib
        if np.all(np.abs(contrib) <= _TINY):
            break
    y1 = -2.0 / (np.pi * x) + (2.0 / np.pi) * log_term * j1 - x / (2.0 * np.pi) * acc1
    return y0, y1


def _miller(x):
    """J0..J2, Y0, Y1 by backward recurrence on a moderate-argument batch."""
    top = int(1.5 * float(x.max())) + 40
    top += top % 2
    values = np.zeros((top + 2, x.size))
    values[top] = 1e-30
    for n in range(top, 0, -1):
        values[n - 1] = (2.0 * n / x) * values[n] - values[n + 1]
        big = np.abs(values[n - 1]) > 1e200
        if np.any(big):
            values[:, big] *= 1e-200
    norm = values[0] + 2.0 * values[2:top + 1:2].sum(axis=0)
    values /= norm

    evens = np.arange(2, top + 1, 2)
    k = evens // 2
    sign = np.where(k % 2 == 0, 1.0, -1.0)[:, None]
    neumann0 = (sign * values[evens] / k[:, None]).sum(axis=0)
    neumann1 = (sign * (values[evens - 1] - values[evens + 1]) / k[:, None]).sum(axis=0)

    j0, j1, j2 = values[0], values[1], values[2]
    log_term = np.log(x / 2.0) + EULER_GAMMA
    y0 = (2.0 / np.pi) * (log_term * j0 - 2.0 * neumann0)
    y1 = (2.0 / np.pi) * (-j0 / x + log_term * j1 + neumann1)
    return j0, j1, j2, y0, y1


def _asymptotic(n, x):
    mu = 4.0 * n * n
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    previous = np.full(x.shape, np.inf)
    k = 0
    while np.any(active) and k < 200:
        k += 1
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        size = np.abs(term)
        # stop at the smallest term of the divergent series
        active &= (size < previous) & (size > 1e-17)
        signed = np.where(active, term, 0.0)
        if k % 2:
            q += signed if (k // 2) % 2 == 0 else -signed
        else:
            p += signed if (k // 2) % 2 == 0 else -signed
        previous = np.where(active, size, previous)
    phase = (n / 2.0 + 0.25) * np.pi
    c, s = np.cos(x), np.sin(x)
    cos_chi = c * math.cos(phase) + s * math.sin(phase)
    sin_chi = s * math.cos(phase) - c * math.sin(phase)
    amp = np.sqrt(2.0 / (np.pi * x))
    return amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi)


def _jy_table(x):
    """Return (J, Y) arrays of shape (3,) + x.shape for orders 0, 1, 2.

    Y is NaN-free only for x > 0; callers validate the domain.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    j = np.zeros((3, flat.size))
    y = np.full((3, flat.size), -np.inf)

    small = flat < _SERIES_LIMIT
    mid = (flat >= _SERIES_LIMIT) & (flat < _ASYMPTOTIC_LIMIT)
    large = flat >= _ASYMPTOTIC_LIMIT

    if np.any(small):
        xs = flat[small]
        for n in _ORDERS:
            j[n, small] = _series_j(n, xs)
        pos = xs > 0
        if np.any(pos):
            xp = xs[pos]
            y0, y1 = _series_y01(xp, j[0, small][pos], j[1, small][pos])
            idx = np.flatnonzero(small)[pos]
            y[0, idx] = y0
            y[1, idx] = y1
            y[2, idx] = (2.0 / xp) * y1 - y0
    if np.any(mid):
        xm = flat[mid]
        j0, j1, j2, y0, y1 = _miller(xm)
        j[0, mid], j[1, mid], j[2, mid] = j0, j1, j2
        y[0, mid], y[1, mid] = y0, y1
        y[2, mid] = (2.0 / xm) * y1 - y0
    if np.any(large):
        xl = flat[large]
        for n in _ORDERS:
            j[n, large], y[n, large] = _asymptotic(n, xl)
    return j.reshape((3,) + x.shape), y.reshape((3,) + x.shape)


def _validated(x, allow_zero):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("Bessel argument is NaN")
    bad = arr < 0 if allow_zero else arr <= 0
    if np.any(bad):
        bound = "x >= 0" if allow_zero else "x > 0"
        raise DomainError(f"Bessel argument out of domain; requires {bound}")
    return arr


def _unwrap(value, like):
    return value.item() if np.ndim(like) == 0 else value


def bessel_j(order, x):
    """Bessel function of the first kind J_order(x), order in {0, 1, 2}, x >= 0."""
    _check_order(order)
    arr = _validated(x, allow_zero=True)
    j, _ = _jy_table(arr)
    return _unwrap(j[order], x)


def bessel_y(order, x):
    """Bessel function of the second kind Y_order(x), order in {0, 1, 2}, x > 0."""
    _check_order(order)
    arr = _validated(x, allow_zero=False)
    _, y = _jy_table(arr)
    return _unwrap(y[order], x)


def hankel2(order, x):
    """Hankel function of the second kind, H^(2)_order(x) = J - jY.

    Outgoing cylindrical wave under the exp(+j*omega*t) convention.
    """
    _check_order(order)
    arr = _validated(x, allow_zero=False)
    j, y = _jy_table(arr)
    return _unwrap(j[order] - 1j * y[order], x)


def hankel2_all(x):
    """H^(2)_0, H^(2)_1, H^(2)_2 at once; shape (3,) + shape(x)."""
    arr = _validated(x, allow_zero=False)
    j, y = _jy_table(arr)
    return j - 1j * y


# Stopping tolerance must stay above one ulp or the means can cycle forever.
def _agm_k(m):
    a, b = 1.0, math.sqrt(1.0 - m)
    while abs(a - b) > 1e-15 * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def elliptic_k(m):
    """Complete elliptic integral of the first kind K(m), parameter 0 <= m < 1."""
    if np.ndim(m):
        return np.vectorize(elliptic_k, otypes=[float])(m)
    m = float(m)
    if not 0.0 <= m < 1.0:
        raise DomainError(f"elliptic_k requires 0 <= m < 1, got {m!r}")
    return _agm_k(m)


def elliptic_e(m):
    """Complete elliptic integral of the second kind E(m), parameter 0 <= m <= 1.

    Uses the AGM with the accumulated sum of squared half-differences.
    """
    if np.ndim(m):
        return np.vectorize(elliptic_e, otypes=[float])(m)
    m = float(m)
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"elliptic_e requires 0 <= m <= 1, got {m!r}")
    if m == 1.0:
        return 1.0
    a, b = 1.0, math.sqrt(1.0 - m)
    total = 0.5 * m
    weight = 0.5
    while abs(a - b) > 1e-15 * a:
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        total += weight * c * c
    return math.pi / (a + b) * (1.0 - total)
