"""Kummer's confluent hypergeometric function and the basis functions built on it.

Evaluation paths, all vectorized over the argument ``t``:

* ``|t| <= SERIES_LIMIT``: the Taylor series, summed with Neumaier compensation.
  Negative ``t`` below -1 goes through Kummer's transformation
  ``1F1(a; b; t) = exp(t) 1F1(b - a; b; -t)`` so the summed terms do not
  alternate over a long stretch.
* ``|t| > SERIES_LIMIT``: the exponentially scaled form
  ``exp(-u) 1F1(a; b; u) = sum_k Poisson(k; u) (a)_k / (b)_k``, which never
  forms ``exp(u)`` and therefore cannot overflow.

Every evaluator takes an optional ``log_scale`` and returns
``exp(log_scale) * value``; Gaussian envelopes such as ``exp(-c x**2)`` are
folded into the exponent instead of multiplying a huge and a tiny number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "KummerError",
    "KummerFunction",
    "BasisFunction",
    "eval_kummer",
    "eval_kummer_derivative",
    "eval_basis",
    "eval_basis_derivative",
    "apply_operator",
    "pochhammer_ratio",
    "SERIES_LIMIT",
    "TERM_BUDGET",
]

TERM_BUDGET = 500
SERIES_LIMIT = 50.0
# Poisson-weighted sums keep terms out to u + POISSON_WIDTH*sqrt(u) + 40
POISSON_WIDTH = 15.0
POISSON_LIMIT = 1.0e5
DEFAULT_TOL = 1e-16
_CHUNK = 256


class KummerError(ValueError):
    """Invalid Kummer parameters or a series that failed to converge."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class KummerFunction:
    """``1F1(a; b; t)`` with fixed parameters ``a`` and ``b``."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise KummerError(f"non-finite parameters a={self.a}, b={self.b}")
        if _is_nonpositive_integer(self.b):
            raise KummerError(f"b={self.b} is a pole of 1F1 (non-positive integer)")

    @property
    def terminating_degree(self) -> int | None:
        """Polynomial degree when ``a`` is a non-positive integer, else None."""
        if _is_nonpositive_integer(self.a):
            return int(-self.a)
        return None

    def __call__(self, t):
        return eval_kummer(self, t)


@dataclass(frozen=True)
class BasisFunction:
    """``t**monomial_power * 1F1(a; b; t)``."""

    kummer: KummerFunction
    monomial_power: int = 0

    def __post_init__(self):
        n = self.monomial_power
        if isinstance(n, bool) or int(n) != n or n < 0:
            raise KummerError(f"monomial power must be a non-negative integer, got {n}")

    def __call__(self, t):
        return eval_basis(self, t)


def pochhammer_ratio(a: float, b: float, k: int) -> float:
    """``(a)_k / (b)_k`` as a running product."""
    r = 1.0
    for j in range(k):
        r *= (a + j) / (b + j)
    return r


def _taylor(a: float, b: float, t: np.ndarray, tol: float) -> np.ndarray:
    """Neumaier-compensated Taylor sum of 1F1(a; b; t) for every entry of ``t``."""
    total = np.ones_like(t)
    comp = np.zeros_like(t)
    term = np.ones_like(t)
    active = t != 0.0
    tmax = float(np.max(np.abs(t), initial=0.0))
    for k in range(TERM_BUDGET):
        if not active.any():
            return total + comp
        term = term * ((a + k) / (b + k)) * t / (k + 1)
        new = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - new) + term, (term - new) + total)
        total = new
        if a + k == 0.0:
            # terminating series: every later term is exactly zero
            return total + comp
        # past this index successive term ratios stay below 1/2, so the whole
        # tail is bounded by |term|
        ratio = max(1.0, abs((a + k + 1) / (b + k + 1)))
        if k + 2 > 2.0 * tmax * ratio and k + 1 > abs(a) and k + 1 > abs(b):
            active &= ~(2.0 * np.abs(term) < tol * np.abs(total + comp))
    if active.any():
        raise KummerError(
            f"1F1({a}; {b}; t) did not converge within {TERM_BUDGET} terms for |t| up to {tmax}"
        )
    return total + comp


def _poisson_scaled(a: float, b: float, u: np.ndarray) -> np.ndarray:
    """``exp(-u) 1F1(a; b; u)`` for large positive ``u``."""
    umax = float(np.max(u))
    umin = float(np.min(u))
    if umax > POISSON_LIMIT:
        raise KummerError(f"argument {umax} outside the supported range (<= {POISSON_LIMIT})")
    kmax = int(math.ceil(umax + POISSON_WIDTH * math.sqrt(umax) + 40.0))
    kmin = max(0, int(math.floor(umin - POISSON_WIDTH * math.sqrt(umin) - 40.0)))
    k = np.arange(kmax + 1, dtype=float)
    ratios = np.ones(kmax + 1)
    ratios[1:] = np.cumprod((a + k[:-1]) / (b + k[:-1]))
    k, ratios = k[kmin:], ratios[kmin:]
    lgk = gammaln(k + 1.0)
    out = np.empty_like(u)
    for start in range(0, u.size, _CHUNK):
        uc = u[start:start + _CHUNK]
        # k runs along the contiguous axis so np.sum uses pairwise summation
        log_pmf = np.log(uc)[:, None] * k[None, :] - uc[:, None] - lgk[None, :]
        out[start:start + _CHUNK] = np.sum(np.exp(log_pmf) * ratios[None, :], axis=1)
    return out


def _kummer_scaled(a: float, b: float, t: np.ndarray, log_scale: np.ndarray, tol: float) -> np.ndarray:
    out = np.empty_like(t)
    terminating = _is_nonpositive_integer(a)
    near = np.abs(t) <= SERIES_LIMIT
    if terminating:
        near = np.ones_like(t, dtype=bool)

    direct = near & ((t >= -1.0) | terminating)
    if direct.any():
        out[direct] = np.exp(log_scale[direct]) * _taylor(a, b, t[direct], tol)

    reflected = near & ~direct
    if reflected.any():
        tr = t[reflected]
        out[reflected] = np.exp(log_scale[reflected] + tr) * _taylor(b - a, b, -tr, tol)

    far_pos = ~near & (t > 0)
    if far_pos.any():
        tp = t[far_pos]
        out[far_pos] = np.exp(log_scale[far_pos] + tp) * _poisson_scaled(a, b, tp)

    far_neg = ~near & (t < 0)
    if far_neg.any():
        # exp(t) 1F1(b-a; b; -t) = exp(t) exp(-t) * scaled sum
        out[far_neg] = np.exp(log_scale[far_neg]) * _poisson_scaled(b - a, b, -t[far_neg])
    return out


def _as_array(t, log_scale):
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    ls = np.broadcast_to(np.asarray(log_scale, dtype=float), t_arr.shape).astype(float)
    if not np.all(np.isfinite(t_arr)):
        raise KummerError("non-finite argument")
    return t_arr, ls, scalar


def eval_kummer(f: KummerFunction, t, log_scale=0.0, tol: float = DEFAULT_TOL):
    """Evaluate ``exp(log_scale) * 1F1(f.a; f.b; t)``.

    Parameters
    ----------
    f : KummerFunction
    t : float or array_like
    log_scale : float or array_like, optional
        Exponent folded into the result; broadcast against ``t``.
    tol : float, optional
        Relative stopping tolerance of the Taylor path.

    Returns
    -------
    float or ndarray
        Matches the shape of ``t``.

    Raises
    ------
    KummerError
        If the series does not converge within the term budget or the result
        overflows.
    """
    t_arr, ls, scalar = _as_array(t, log_scale)
    with np.errstate(over="ignore", invalid="ignore"):
        out = _kummer_scaled(f.a, f.b, t_arr, ls, tol)
    if not np.all(np.isfinite(out)):
        raise KummerError(f"1F1({f.a}; {f.b}; t) overflowed; pass a log_scale to keep it finite")
    return float(out[0]) if scalar else out


def eval_kummer_derivative(f: KummerFunction, k: int, t, log_scale=0.0):
    """k-th derivative ``(a)_k/(b)_k * 1F1(a + k; b + k; t)``."""
    if k < 0:
        raise KummerError(f"derivative order must be non-negative, got {k}")
    if k == 0:
        return eval_kummer(f, t, log_scale)
    shifted = KummerFunction(f.a + k, f.b + k)
    ratio = pochhammer_ratio(f.a, f.b, k)
    if ratio == 0.0:
        return 0.0 * eval_kummer(KummerFunction(0.0, 1.0), t)
    return ratio * eval_kummer(shifted, t, log_scale)


def eval_basis(bf: BasisFunction, t, log_scale=0.0):
    return eval_basis_derivative(bf, 0, t, log_scale)


def eval_basis_derivative(bf: BasisFunction, k: int, t, log_scale=0.0):
    """k-th t-derivative of ``t**n * 1F1(a; b; t)`` by the Leibniz rule."""
    n = bf.monomial_power
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros(t_arr.shape)
    for j in range(min(k, n) + 1):
        # d^j/dt^j t^n = n!/(n-j)! t^(n-j)
        mono = math.comb(k, j) * math.perm(n, j) * t_arr ** (n - j)
        total = total + mono * eval_kummer_derivative(bf.kummer, k - j, t_arr, log_scale)
    return float(total) if t_arr.ndim == 0 else total


def apply_operator(
    p2: Sequence[float],
    p1: Sequence[float],
    p0: Sequence[float],
    bf: BasisFunction,
    t,
):
    """Pointwise action ``p2(t) f''(t) + p1(t) f'(t) + p0(t) f(t)``.

    The polynomials are coefficient lists in increasing powers of ``t``.
    """
    polyval = np.polynomial.polynomial.polyval
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros(t_arr.shape)
    for order, coeffs in ((2, p2), (1, p1), (0, p0)):
        if len(coeffs) == 0 or not np.any(coeffs):
            continue
        out = out + polyval(t_arr, coeffs) * eval_basis_derivative(bf, order, t_arr)
    return float(out) if t_arr.ndim == 0 else out
