"""Numeric hot loops with a numba path and a numpy fallback.

Set ``MAGINT_DISABLE_NUMBA=1`` to force the numpy implementations.
"""
from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("MAGINT_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def _plain(*args, **kwargs):
    if args and callable(args[0]):
        return args[0]
    return lambda f: f


if USE_NUMBA:
    from numba import njit
else:
    njit = _plain


def maybe_njit(fn):
    """Compile ``fn`` with numba when enabled, else return it unchanged."""
    return njit(cache=False, fastmath=False)(fn) if USE_NUMBA else fn


# -- truncated Taylor jets ---------------------------------------------------------
#
# A jet is a row of Taylor coefficients over the monomials of degree <= N.
# A pair table (I, J, K) lists every product monomial_I * monomial_J =
# monomial_K that survives truncation.

@njit(cache=True)
def _pair_mul_nb(a, b, ia, ib, io, m):
    n = a.shape[0]
    out = np.zeros((n, m), dtype=np.complex128)
    for p in range(n):
        for q in range(ia.shape[0]):
            out[p, io[q]] += a[p, ia[q]] * b[p, ib[q]]
    return out


def _pair_mul_np(a, b, ia, ib, S):
    return (a[:, ia] * b[:, ib]) @ S


class PairTable:
    """Multiplication table for jets of a fixed order and variable count.

    ``mul`` is the truncated product of two jets.  ``left`` applies a row
    vector to the multiplication operator of a jet: ``(v M_c)[J] =
    sum_K v[K] c[K - J]``, which is what composing operators from the left
    needs.
    """

    def __init__(self, I, J, K, m):
        self.I = np.asarray(I, dtype=np.int64)
        self.J = np.asarray(J, dtype=np.int64)
        self.K = np.asarray(K, dtype=np.int64)
        self.m = m
        self._S = {}

    def _scatter(self, which):
        S = self._S.get(which)
        if S is None:
            idx = self.K if which == "K" else self.J
            S = np.zeros((len(idx), self.m))
            S[np.arange(len(idx)), idx] = 1.0
            self._S[which] = S
        return S

    def mul(self, a, b, use_numba: bool | None = None):
        if USE_NUMBA if use_numba is None else use_numba:
            return _pair_mul_nb(np.ascontiguousarray(a), np.ascontiguousarray(b), self.I, self.J, self.K, self.m)
        return _pair_mul_np(a, b, self.I, self.J, self._scatter("K"))

    def left(self, v, c, use_numba: bool | None = None):
        if USE_NUMBA if use_numba is None else use_numba:
            return _pair_mul_nb(np.ascontiguousarray(v), np.ascontiguousarray(c), self.K, self.I, self.J, self.m)
        return _pair_mul_np(v, c, self.K, self.I, self._scatter("J"))


__all__ = ["USE_NUMBA", "njit", "maybe_njit", "PairTable"]
