"""
Hot loops of the registration step.

Each kernel has a loop implementation (compiled with numba) and a vectorized
numpy implementation. ``criterion_grad`` and ``align_sweep`` dispatch to the
compiled version unless numba is missing or ``SHIFTFRECHET_NO_JIT`` is set.

Conventions: ``c`` is a ``(J, L)`` complex array of smoothed coefficients on
frequencies ``ks`` (float array of length ``L``); shifting curve ``j`` by
``theta_j`` multiplies ``c[j]`` by ``exp(i 2 pi ks theta_j)``.
"""

import math

import numpy as np

from ._jit import USE_JIT, njit

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# criterion value and gradient

def _criterion_grad_loops(c, ks, theta):
    J, L = c.shape
    d = np.empty((J, L), dtype=np.complex128)
    abar = np.zeros(L, dtype=np.complex128)
    for j in range(J):
        for l in range(L):
            ph = TWO_PI * ks[l] * theta[j]
            d[j, l] = c[j, l] * complex(math.cos(ph), math.sin(ph))
            abar[l] += d[j, l]
    for l in range(L):
        abar[l] /= J
    value = 0.0
    grad = np.zeros(J)
    for j in range(J):
        acc = 0.0
        for l in range(L):
            dr = d[j, l].real - abar[l].real
            di = d[j, l].imag - abar[l].imag
            value += dr * dr + di * di
            acc += ks[l] * (d[j, l].imag * abar[l].real - d[j, l].real * abar[l].imag)
        grad[j] = 2.0 * TWO_PI * acc / J
    return value / J, grad


def criterion_grad_numpy(c, ks, theta):
    d = c * np.exp(1j * TWO_PI * np.outer(theta, ks))
    abar = d.mean(axis=0)
    J = c.shape[0]
    value = float(np.sum(np.abs(d - abar) ** 2)) / J
    grad = 2.0 * TWO_PI / J * ((d * np.conj(abar)).imag @ ks)
    return value, grad


criterion_grad_numba = njit(_criterion_grad_loops)


# ---------------------------------------------------------------------------
# Procrustes alignment sweep: align every curve to a fixed mean

def _align_sweep_loops(c, ks, abar, candidates, theta):
    """For each curve pick the candidate shift maximizing
    ``Re sum_k c_jk exp(i 2 pi k s) conj(abar_k)``; keep ``theta_j`` unless a
    candidate is strictly better."""
    J, L = c.shape
    G = candidates.shape[0]
    cos_t = np.empty((G, L))
    sin_t = np.empty((G, L))
    for g in range(G):
        for l in range(L):
            ph = TWO_PI * ks[l] * candidates[g]
            cos_t[g, l] = math.cos(ph)
            sin_t[g, l] = math.sin(ph)
    wr = np.empty(L)
    wi = np.empty(L)
    out = theta.copy()
    for j in range(J):
        best = 0.0
        for l in range(L):
            w = c[j, l] * np.conj(abar[l])
            wr[l] = w.real
            wi[l] = w.imag
            ph = TWO_PI * ks[l] * theta[j]
            best += wr[l] * math.cos(ph) - wi[l] * math.sin(ph)
        for g in range(G):
            s = 0.0
            for l in range(L):
                s += wr[l] * cos_t[g, l] - wi[l] * sin_t[g, l]
            if s > best:
                best = s
                out[j] = candidates[g]
    return out


def align_sweep_numpy(c, ks, abar, candidates, theta):
    w = c * np.conj(abar)
    scores = (w @ np.exp(1j * TWO_PI * np.outer(ks, candidates))).real
    current = np.sum(w * np.exp(1j * TWO_PI * np.outer(theta, ks)), axis=1).real
    g = np.argmax(scores, axis=1)
    top = scores[np.arange(c.shape[0]), g]
    return np.where(top > current, candidates[g], theta)


align_sweep_numba = njit(_align_sweep_loops)


# ---------------------------------------------------------------------------
# dispatch

def _prep(c, ks, theta):
    return (np.ascontiguousarray(c, dtype=np.complex128),
            np.ascontiguousarray(ks, dtype=np.float64),
            np.ascontiguousarray(theta, dtype=np.float64))


def criterion_grad(c, ks, theta, use_jit=None):
    """Return ``(M(theta), grad M(theta))``."""
    c, ks, theta = _prep(c, ks, theta)
    if (USE_JIT if use_jit is None else use_jit) and criterion_grad_numba is not None:
        value, grad = criterion_grad_numba(c, ks, theta)
        return float(value), grad
    return criterion_grad_numpy(c, ks, theta)


def align_sweep(c, ks, abar, candidates, theta, use_jit=None):
    c, ks, theta = _prep(c, ks, theta)
    abar = np.ascontiguousarray(abar, dtype=np.complex128)
    candidates = np.ascontiguousarray(candidates, dtype=np.float64)
    if (USE_JIT if use_jit is None else use_jit) and align_sweep_numba is not None:
        return align_sweep_numba(c, ks, abar, candidates, theta)
    return align_sweep_numpy(c, ks, abar, candidates, theta)
