"""Hot inner loops, each in two flavours.

``*_nb`` functions are numba loops; ``*_np`` functions are the vectorized
numpy fallback.  The undecorated public names dispatch on
:data:`fwci._accel.USE_NUMBA`.  Both flavours must agree to rounding error;
``tests/test_kernels.py`` holds them to that.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc as _erfc

from . import _accel
from ._accel import njit
from .stats import _P_LOW, _ndtri_raw

# ---------------------------------------------------------------- moments


@njit
def _chunk_moments_nb(y):
    # shifted two-pass, mirroring the numpy version
    n = y.size
    if n == 0:
        return 0, 0.0, 0.0, True
    shift = y[0]
    s = 0.0
    for i in range(n):
        v = y[i]
        if not math.isfinite(v):
            return 0, 0.0, 0.0, False
        s += v - shift
    dm = s / n
    m2 = 0.0
    corr = 0.0
    for i in range(n):
        r = (y[i] - shift) - dm
        m2 += r * r
        corr += r
    m2 -= corr * corr / n
    return n, shift + (dm + corr / n), max(m2, 0.0), True


def _chunk_moments_np(y):
    if y.size == 0:
        return 0, 0.0, 0.0, True
    if not np.isfinite(y).all():
        return 0, 0.0, 0.0, False
    # shift by the first value so constant batches stay exact
    shift = float(y[0])
    dev = y - shift
    dm = float(dev.mean())
    r = dev - dm
    corr = float(r.sum())
    m2 = float(r @ r) - corr * corr / y.size
    return int(y.size), shift + (dm + corr / y.size), max(m2, 0.0), True


def chunk_moments(y):
    """``(count, mean, sum of squared deviations, all_finite)`` of a 1-D batch."""
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if _accel.USE_NUMBA:
        n, mean, m2, ok = _chunk_moments_nb(y)
        return int(n), float(mean), float(m2), bool(ok)
    return _chunk_moments_np(y)


# ---------------------------------------------------------- normal quantile

_ndtri_nb = njit(_ndtri_raw)


@njit
def _normal_from_uniform_nb(u, out):
    for i in range(u.size):
        out[i] = _ndtri_nb(u[i])


_A = np.array([-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
               1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00])
_B = np.array([-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
               6.680131188771972e01, -1.328068155288572e01, 1.0])
_C = np.array([-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
               -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00])
_D = np.array([7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
               3.754408661907416e00, 1.0])


def _normal_from_uniform_np(u):
    upper = u > 0.5
    q = np.where(upper, 1.0 - u, u)
    tail = q < _P_LOW
    x = np.empty_like(q)
    if tail.any():
        t = np.sqrt(-2.0 * np.log(q[tail]))
        x[tail] = np.polyval(_C, t) / np.polyval(_D, t)
    body = ~tail
    if body.any():
        w = q[body] - 0.5
        r = w * w
        x[body] = np.polyval(_A, r) * w / np.polyval(_B, r)
    ok = np.abs(x) < 37.0
    xs = x[ok]
    err = 0.5 * _erfc(-xs / math.sqrt(2.0)) - q[ok]
    x[ok] = xs - err * math.sqrt(2.0 * math.pi) * np.exp(0.5 * xs * xs)
    return np.where(upper, -x, x)


def normal_from_uniform(u):
    """Map uniforms on (0, 1) to standard normals by inverse CDF."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _accel.USE_NUMBA:
        out = np.empty_like(u)
        _normal_from_uniform_nb(u.ravel(), out.ravel())
        return out
    return _normal_from_uniform_np(u)


# ------------------------------------------------------------ single hump


@njit
def _hump_values_nb(x, a0, b0, b, c, h):
    n, d = x.shape
    out = np.empty(n)
    for i in range(n):
        prod = 1.0
        for j in range(d):
            t = (x[i, j] - h[j]) / c[j]
            prod *= 1.0 + b[j] * math.exp(-t * t)
        out[i] = a0 + b0 * prod
    return out


def _hump_values_np(x, a0, b0, b, c, h):
    t = (x - h) / c
    return a0 + b0 * np.prod(1.0 + b * np.exp(-t * t), axis=1)


def hump_values(x, a0, b0, b, c, h):
    """Evaluate ``a0 + b0 * prod_j (1 + b_j exp(-((x_j - h_j)/c_j)^2))`` row-wise."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    args = (float(a0), float(b0), np.asarray(b, dtype=np.float64),
            np.asarray(c, dtype=np.float64), np.asarray(h, dtype=np.float64))
    if _accel.USE_NUMBA:
        return _hump_values_nb(x, *args)
    return _hump_values_np(x, *args)


# ------------------------------------------------- Brownian bridge payoffs
#
# A bridge plan is five length-d arrays: the grid index filled at each step,
# its left and right neighbour indices (index 0 is B(0) = 0) and the weights
# wl, wr, sd in  B[m] = wl*B[l] + wr*B[r] + sd*z.


@njit
def _bridge_fill_nb(z, target, left, right, wl, wr, sd, out):
    n, d = z.shape
    for i in range(n):
        out[i, 0] = 0.0
        for j in range(d):
            out[i, target[j]] = wl[j] * out[i, left[j]] + wr[j] * out[i, right[j]] + sd[j] * z[i, j]


def _bridge_fill_np(z, target, left, right, wl, wr, sd, out):
    out[:, 0] = 0.0
    for j in range(z.shape[1]):
        out[:, target[j]] = wl[j] * out[:, left[j]] + wr[j] * out[:, right[j]] + sd[j] * z[:, j]


def bridge_fill(z, plan):
    """Brownian values on the grid, shape ``(n, d + 1)`` with column 0 = B(0)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    out = np.empty((z.shape[0], z.shape[1] + 1))
    fill = _bridge_fill_nb if _accel.USE_NUMBA else _bridge_fill_np
    fill(z, *plan, out)
    return out


@njit
def _asian_payoffs_nb(z, target, left, right, wl, wr, sd, coef, lin, strike, discount):
    n, d = z.shape
    path = np.empty(d + 1)
    out = np.empty(n)
    path[0] = 0.0
    for i in range(n):
        for j in range(d):
            path[target[j]] = wl[j] * path[left[j]] + wr[j] * path[right[j]] + sd[j] * z[i, j]
        logg = lin
        for k in range(d):
            logg += coef[k] * path[k + 1]
        g = math.exp(logg)
        out[i] = (g - strike) * discount if g > strike else 0.0
    return out


def _asian_payoffs_np(z, target, left, right, wl, wr, sd, coef, lin, strike, discount):
    path = np.empty((z.shape[0], z.shape[1] + 1))
    _bridge_fill_np(z, target, left, right, wl, wr, sd, path)
    g = np.exp(lin + path[:, 1:] @ coef)
    return np.maximum(g - strike, 0.0) * discount


def asian_payoffs(z, plan, coef, lin, strike, discount):
    """Discounted geometric-Asian call payoffs for rows of standard normals.

    ``log G = lin + coef . B(t_1..t_d)`` where ``B`` is built from ``z`` by
    the bridge ``plan``.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    args = (*plan, np.asarray(coef, dtype=np.float64), float(lin), float(strike), float(discount))
    if _accel.USE_NUMBA:
        return _asian_payoffs_nb(z, *args)
    return _asian_payoffs_np(z, *args)
