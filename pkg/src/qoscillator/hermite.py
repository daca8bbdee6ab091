"""Unified q-Hermite functions ``H_n(x; e^{-s^2})``.

One parametrization covers both oscillator families through ``c = (s + t)**2``
(``c = s**2`` for Macfarlane, ``c = 0`` for Dubna):

    H_n = (i/s)**n sum_m (-1)**m [n, m]_{e^{-s^2}} exp{(2m - n)(i s x - c/2)}

The three-term recursion is the default evaluator; the series is kept as
an independent oracle.  Because ``i s x - c/2 = i s (x + i c/(2s))``, the
Macfarlane function is the Dubna one evaluated at ``x + i s/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import DeformationParams, q_binomial
from .errors import DomainError

__all__ = [
    "Convention",
    "HermiteEval",
    "hermite",
    "hermite_series",
    "hermite_recursion_eval",
    "hermite_table",
    "second_recursion_residual",
    "classical_hermite",
]


class Convention(str, enum.Enum):
    UNIFIED_SERIES = "series"
    RECURSION = "recursion"


@dataclass(frozen=True)
class HermiteEval:
    n: int
    value: complex
    convention: Convention


def _level(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"degree must be an integer >= 0, got {n!r}")
    return int(n)


def _out(zc: np.ndarray, values: np.ndarray):
    return complex(values) if zc.ndim == 0 else values


def hermite_series(n: int, x, params: DeformationParams):
    """Explicit q-binomial sum.

    The terms reach ``~ (2/s)**n`` while the sum is ``O(H_n)``, so roundoff
    grows like ``eps * (2/s)**n``; use it as an oracle for moderate ``s``.
    """
    n = _level(n)
    s, c = params.s, params.s_plus_t**2
    z = math.exp(-s * s)
    xc = np.asarray(x, dtype=complex)
    u = 1j * s * xc - 0.5 * c
    total = np.zeros(xc.shape, dtype=complex)
    for m in range(n + 1):
        total += (-1) ** m * q_binomial(n, m, z) * np.exp((2 * m - n) * u)
    return _out(xc, (1j / s) ** n * total)


def hermite_table(n_max: int, x, params: DeformationParams) -> np.ndarray:
    """Rows ``H_0 .. H_{n_max}`` at ``x`` from the three-term recursion.

    ``H_{k+1} = (2i/s) sinh(c/2 - i s x) H_k - (1 - e^{-2 k s^2})/s**2 H_{k-1}``
    """
    n_max = _level(n_max)
    s, c = params.s, params.s_plus_t**2
    xc = np.asarray(x, dtype=complex)
    lead = (2j / s) * np.sinh(0.5 * c - 1j * s * xc)
    rows = np.empty((n_max + 1,) + xc.shape, dtype=complex)
    rows[0] = 1.0
    prev = np.zeros(xc.shape, dtype=complex)
    for k in range(n_max):
        # expm1 keeps (1 - e^{-2ks^2})/s^2 accurate as s -> 0
        nxt = lead * rows[k] + math.expm1(-2.0 * k * s * s) / (s * s) * prev
        prev = rows[k]
        rows[k + 1] = nxt
    return rows


def hermite_recursion_eval(n: int, x, params: DeformationParams):
    n = _level(n)
    xc = np.asarray(x, dtype=complex)
    return _out(xc, hermite_table(n, xc, params)[n])


def hermite(n: int, x, params: DeformationParams, convention: Convention = Convention.RECURSION):
    if Convention(convention) is Convention.UNIFIED_SERIES:
        return hermite_series(n, x, params)
    return hermite_recursion_eval(n, x, params)


def second_recursion_residual(n: int, x, params: DeformationParams) -> float:
    """Normalized residual of the shift recursion

        i s [e^{isx - c/2} + e^{-isx + c/2}] H_{n+1}(x)
            = e^{-n s^2} [e^{2isx - c} H_n(x - is) - e^{-2isx + c} H_n(x + is)]

    with all ``H`` taken from the recursion (shifted arguments are complex).
    """
    n = _level(n)
    s, c = params.s, params.s_plus_t**2
    xc = np.atleast_1d(np.asarray(x, dtype=complex))
    pref = 1j * s * (np.exp(1j * s * xc - 0.5 * c) + np.exp(-1j * s * xc + 0.5 * c))
    if np.any(np.abs(pref) < 1e-12 * s):
        raise DomainError("left-hand prefactor vanishes (cos sx = 0 for Dubna)")
    lhs = pref * hermite_recursion_eval(n + 1, xc, params)
    rhs = math.exp(-n * s * s) * (
        np.exp(2j * s * xc - c) * hermite_recursion_eval(n, xc - 1j * s, params)
        - np.exp(-2j * s * xc + c) * hermite_recursion_eval(n, xc + 1j * s, params)
    )
    res = np.abs(lhs - rhs) / np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return float(np.max(res))


def classical_hermite(n: int, x):
    """Physicists' Hermite polynomial; accepts complex arguments."""
    n = _level(n)
    xa = np.asarray(x)
    prev, cur = np.zeros_like(xa, dtype=np.result_type(xa, float)), np.ones_like(xa, dtype=np.result_type(xa, float))
    for k in range(n):
        prev, cur = cur, 2.0 * xa * cur - 2.0 * k * prev
    return cur.item() if xa.ndim == 0 else cur
