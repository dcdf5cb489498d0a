"""Numeric inner loops with two interchangeable implementations.

The wavelet lattice and the moving-window integrator are the only
per-sample loops hot enough to matter. Each has a compiled (numba) and a
plain-numpy version; both accumulate in the same order, term by term, so
results are bitwise identical and the selection is purely a speed knob.

Set EDGEVITALS_NO_NUMBA=1 to force the numpy versions (also used
automatically when numba is not importable).
"""

import os

import numpy as np

__all__ = ["USING_NUMBA", "down_convolve", "up_convolve_add", "moving_average"]


def _down_convolve_np(ext, fr):
    # out[k] = sum_m ext[2k+1+m] * fr[m]
    L = len(fr)
    n_out = (len(ext) - L + 1) // 2
    idx = 2 * np.arange(n_out) + 1
    acc = np.zeros(n_out)
    for m in range(L):
        acc += ext[idx + m] * fr[m]
    return acc


def _up_convolve_add_np(ua, ud, gl, gh):
    L = len(gl)
    n = len(ua) + L - 1
    acc_lo = np.zeros(n)
    acc_hi = np.zeros(n)
    for m in range(L):
        acc_lo[m: m + len(ua)] += ua * gl[m]
        acc_hi[m: m + len(ud)] += ud * gh[m]
    return acc_lo + acc_hi


def _moving_average_np(x, w):
    # running-sum form; the loop twin must mirror cumsum's sequential
    # addition order exactly or the two backends drift in the last bit
    n = len(x)
    off = (w - 1) // 2
    xp = np.zeros(n + w - 1)
    xp[w - 1 - off: w - 1 - off + n] = x
    cum = np.empty(n + w)
    cum[0] = 0.0
    np.cumsum(xp, out=cum[1:])
    return (cum[w:] - cum[:n]) / w


def _down_convolve_loop(ext, fr):
    L = len(fr)
    n_out = (len(ext) - L + 1) // 2
    out = np.empty(n_out)
    for k in range(n_out):
        s = 0.0
        base = 2 * k + 1
        for m in range(L):
            s += ext[base + m] * fr[m]
        out[k] = s
    return out


def _up_convolve_add_loop(ua, ud, gl, gh):
    L = len(gl)
    nu = len(ua)
    n = nu + L - 1
    out = np.empty(n)
    for i in range(n):
        s_lo = 0.0
        s_hi = 0.0
        for m in range(L):
            j = i - m
            if 0 <= j < nu:
                s_lo += ua[j] * gl[m]
                s_hi += ud[j] * gh[m]
        out[i] = s_lo + s_hi
    return out


def _moving_average_loop(x, w):
    n = len(x)
    off = (w - 1) // 2
    lead = w - 1 - off
    xp = np.zeros(n + w - 1)
    for i in range(n):
        xp[lead + i] = x[i]
    cum = np.empty(n + w)
    cum[0] = 0.0
    s = 0.0
    for i in range(n + w - 1):
        s = s + xp[i]
        cum[i + 1] = s
    out = np.empty(n)
    for k in range(n):
        out[k] = (cum[k + w] - cum[k]) / w
    return out


USING_NUMBA = False
if os.environ.get("EDGEVITALS_NO_NUMBA", "") not in ("1", "true", "yes"):
    try:
        from numba import njit

        down_convolve = njit(cache=True)(_down_convolve_loop)
        up_convolve_add = njit(cache=True)(_up_convolve_add_loop)
        moving_average = njit(cache=True)(_moving_average_loop)
        USING_NUMBA = True
    except ImportError:
        pass

if not USING_NUMBA:
    down_convolve = _down_convolve_np
    up_convolve_add = _up_convolve_add_np
    moving_average = _moving_average_np
