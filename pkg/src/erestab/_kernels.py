"""Hot loops of the monodromy integration.

Two interchangeable implementations of a fixed-step classical RK4 for

    X' = (A0 + (A1 + cos(2 theta) A2 + sin(2 theta) A3) / (1 + e cos(theta))) X,
    X(0) = I,

on ``[0, 2 pi]``.  The state update uses compensated (Kahan) summation so
that rounding does not accumulate over tens of thousands of steps.

The numba kernel is used when numba imports and ``ERE_BACKEND`` is not
``numpy``.  The pure-numpy kernel runs the same arithmetic with array
operations and serves as the fallback and as the reference for the
benchmark.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly by the import
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

__all__ = ["HAVE_NUMBA", "active_backend", "set_backend", "rk4_path", "rk4_path_numpy"]

_BACKEND_ENV = "ERE_BACKEND"


def _default_backend() -> str:
    requested = os.environ.get(_BACKEND_ENV, "").strip().lower()
    if requested == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


_backend = _default_backend()


def active_backend() -> str:
    """Name of the kernel backend in use (``"numba"`` or ``"numpy"``)."""
    return _backend


def set_backend(name: str) -> str:
    """Select the kernel backend at run time; returns the previous name."""
    global _backend
    name = name.strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba is not installed")
    previous, _backend = _backend, name
    return previous


def _sample_count(steps: int, stride: int) -> int:
    return (steps - 1) // stride + 2 if steps % stride else steps // stride + 1


def rk4_path_numpy(A0, A1, A2, A3, e, steps, stride):
    """Pure-numpy RK4 with compensated summation.

    Returns
    -------
    X : ndarray, shape (4, 4)
        Period map.
    thetas : ndarray
        Sample abscissae, always including ``0`` and ``2 pi``.
    samples : ndarray, shape (len(thetas), 4, 4)
    """
    h = 2.0 * math.pi / steps
    n_samples = _sample_count(steps, stride)
    thetas = np.empty(n_samples)
    samples = np.empty((n_samples, 4, 4))
    X = np.eye(4)
    comp = np.zeros((4, 4))
    thetas[0] = 0.0
    samples[0] = X
    slot = 1

    def generator(t):
        f = 1.0 / (1.0 + e * math.cos(t))
        return A0 + f * (A1 + math.cos(2.0 * t) * A2 + math.sin(2.0 * t) * A3)

    for k in range(steps):
        t = k * h
        G1 = generator(t)
        G2 = generator(t + 0.5 * h)
        G3 = generator(t + h)
        K1 = G1 @ X
        K2 = G2 @ (X + 0.5 * h * K1)
        K3 = G2 @ (X + 0.5 * h * K2)
        K4 = G3 @ (X + h * K3)
        increment = (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
        y = increment - comp
        s = X + y
        comp = (s - X) - y
        X = s
        if (k + 1) % stride == 0 or k + 1 == steps:
            thetas[slot] = (k + 1) * h
            samples[slot] = X
            slot += 1
    thetas[-1] = 2.0 * math.pi
    return X, thetas, samples


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _mm4(A, B, out):
        for i in range(4):
            for j in range(4):
                acc = 0.0
                for k in range(4):
                    acc += A[i, k] * B[k, j]
                out[i, j] = acc

    @njit(cache=True, nogil=True)
    def _generator(A0, A1, A2, A3, e, t, out):
        f = 1.0 / (1.0 + e * math.cos(t))
        c2 = math.cos(2.0 * t)
        s2 = math.sin(2.0 * t)
        for i in range(4):
            for j in range(4):
                out[i, j] = A0[i, j] + f * (A1[i, j] + c2 * A2[i, j] + s2 * A3[i, j])

    @njit(cache=True, nogil=True)
    def _rk4_path_numba(A0, A1, A2, A3, e, steps, stride, n_samples):
        h = 2.0 * math.pi / steps
        thetas = np.empty(n_samples)
        samples = np.empty((n_samples, 4, 4))
        X = np.eye(4)
        comp = np.zeros((4, 4))
        G1 = np.empty((4, 4))
        G2 = np.empty((4, 4))
        G3 = np.empty((4, 4))
        K1 = np.empty((4, 4))
        K2 = np.empty((4, 4))
        K3 = np.empty((4, 4))
        K4 = np.empty((4, 4))
        tmp = np.empty((4, 4))
        thetas[0] = 0.0
        samples[0] = X
        slot = 1
        for k in range(steps):
            t = k * h
            _generator(A0, A1, A2, A3, e, t, G1)
            _generator(A0, A1, A2, A3, e, t + 0.5 * h, G2)
            _generator(A0, A1, A2, A3, e, t + h, G3)
            _mm4(G1, X, K1)
            for i in range(4):
                for j in range(4):
                    tmp[i, j] = X[i, j] + 0.5 * h * K1[i, j]
            _mm4(G2, tmp, K2)
            for i in range(4):
                for j in range(4):
                    tmp[i, j] = X[i, j] + 0.5 * h * K2[i, j]
            _mm4(G2, tmp, K3)
            for i in range(4):
                for j in range(4):
                    tmp[i, j] = X[i, j] + h * K3[i, j]
            _mm4(G3, tmp, K4)
            for i in range(4):
                for j in range(4):
                    inc = (h / 6.0) * (K1[i, j] + 2.0 * K2[i, j] + 2.0 * K3[i, j] + K4[i, j])
                    y = inc - comp[i, j]
                    s = X[i, j] + y
                    comp[i, j] = (s - X[i, j]) - y
                    X[i, j] = s
            if (k + 1) % stride == 0 or k + 1 == steps:
                thetas[slot] = (k + 1) * h
                samples[slot] = X
                slot += 1
        thetas[n_samples - 1] = 2.0 * math.pi
        return X, thetas, samples


def rk4_path(A0, A1, A2, A3, e, steps, stride):
    """Dispatch to the active backend; arguments as :func:`rk4_path_numpy`."""
    arrays = [np.ascontiguousarray(a, dtype=np.float64) for a in (A0, A1, A2, A3)]
    if _backend == "numba":
        n_samples = _sample_count(int(steps), int(stride))
        return _rk4_path_numba(*arrays, float(e), int(steps), int(stride), n_samples)
    return rk4_path_numpy(*arrays, float(e), int(steps), int(stride))
