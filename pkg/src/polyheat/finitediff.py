"""Finite-difference machinery for the kernel identity checks.

Two pieces: Fornberg's algorithm for derivative weights on arbitrary
stencils, and an exact expansion of iterated radial Laplacians as a sum
of ordinary derivatives with inverse-power coefficients, so identities
of any order reduce to one stencil of kernel evaluations.
"""

from __future__ import annotations

import numpy as np

__all__ = ["fornberg_weights", "radial_iterated_laplacian_derivative", "apply_operator_terms"]


def fornberg_weights(x0: float, stencil: np.ndarray, max_order: int) -> np.ndarray:
    """Weights for derivatives 0..max_order at x0 from samples at ``stencil``.

    Returns an array W of shape (max_order+1, len(stencil)) with
    f^(k)(x0) ~= W[k] @ f(stencil).
    """
    stencil = np.asarray(stencil, dtype=float)
    npts = len(stencil)
    if max_order >= npts:
        raise ValueError("stencil too small for requested derivative order")
    W = np.zeros((max_order + 1, npts))
    W[0, 0] = 1.0
    c1 = 1.0
    c4 = stencil[0] - x0
    for i in range(1, npts):
        mn = min(i, max_order)
        c2 = 1.0
        c5 = c4
        c4 = stencil[i] - x0
        for j in range(i):
            c3 = stencil[i] - stencil[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    W[k, i] = c1 * (k * W[k - 1, i - 1] - c5 * W[k, i - 1]) / c2
                W[0, i] = -c1 * c5 * W[0, i - 1] / c2
            for k in range(mn, 0, -1):
                W[k, j] = (c4 * W[k, j] - k * W[k - 1, j]) / c3
            W[0, j] = c4 * W[0, j] / c3
        c1 = c2
    return W


def _compose_derivative(terms: dict) -> dict:
    """d/dr applied to sum_{(k,p)} c * r^(-p) * d^k."""
    out: dict = {}
    for (k, p), c in terms.items():
        if p:
            key = (k, p + 1)
            out[key] = out.get(key, 0.0) - p * c
        key = (k + 1, p)
        out[key] = out.get(key, 0.0) + c
    return out


def _compose_laplacian(terms: dict, a: float) -> dict:
    """Radial Laplacian (d^2/dr^2 + (a/r) d/dr), a = n-1, applied on the left."""
    out: dict = {}
    for (k, p), c in terms.items():
        # second derivative of r^(-p) d^k
        out[(k, p + 2)] = out.get((k, p + 2), 0.0) + p * (p + 1) * c
        out[(k + 1, p + 1)] = out.get((k + 1, p + 1), 0.0) - 2 * p * c
        out[(k + 2, p)] = out.get((k + 2, p), 0.0) + c
        # (a/r) times first derivative
        out[(k, p + 2)] = out.get((k, p + 2), 0.0) - a * p * c
        out[(k + 1, p + 1)] = out.get((k + 1, p + 1), 0.0) + a * c
    return {key: val for key, val in out.items() if val != 0.0}


def radial_iterated_laplacian_derivative(m: int, n: int) -> dict:
    """Coefficients of (Lap^(m-1) f)'(r) as {(deriv_order, inv_power): coeff}.

    For m=2, n arbitrary this reproduces the third-order combination
    f''' + (n-1)/r f'' - (n-1)/r^2 f'.
    """
    terms = {(0, 0): 1.0}
    for _ in range(m - 1):
        terms = _compose_laplacian(terms, float(n - 1))
    return _compose_derivative(terms)


def apply_operator_terms(terms: dict, derivs: np.ndarray, r: float) -> float:
    """Evaluate sum c * r^(-p) * f^(k)(r) given the derivative table."""
    total = 0.0
    for (k, p), c in sorted(terms.items()):
        total += c * derivs[k] * r ** (-p)
    return total
