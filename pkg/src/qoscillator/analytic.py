"""Complex-evaluable functions and the part-functions of the ladder operators.

The ladder operators shift their argument by imaginary amounts, so every
function they act on must be evaluable off the real axis.  :class:`AnalyticMap`
wraps a vectorized closed-form evaluator; nothing in this package ever
extrapolates from samples on the real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .core import DeformationParams
from .errors import DomainError, PoleError, SingularOperatorError

__all__ = [
    "AnalyticMap",
    "GaussianSuperposition",
    "RedundantFactorSpec",
    "as_map",
    "constant",
    "eval_f",
    "f_map",
    "periodic_f_map",
    "f_square_norm",
    "shift",
    "q_derivative",
    "g_fourth_power",
    "part_g",
    "part_g_squared",
    "part_h",
    "big_F",
    "redundant_factor",
]

Evaluator = Callable[[np.ndarray], np.ndarray]


def _as_complex(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


@dataclass(frozen=True)
class AnalyticMap:
    """A function of one complex variable with a closed-form evaluator.

    ``fn`` receives a complex ndarray and must return an array of the same
    shape.  Calling the map accepts scalars or arrays; a scalar argument
    yields a Python ``complex``.
    """

    fn: Evaluator
    tag: str = "map"

    def __call__(self, z):
        arr = _as_complex(z)
        out = np.asarray(self.fn(arr), dtype=complex)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        if arr.ndim == 0:
            return complex(out)
        return out

    def __add__(self, other):
        other = as_map(other)
        return AnalyticMap(lambda z: self.fn(z) + other.fn(z), f"({self.tag} + {other.tag})")

    __radd__ = __add__

    def __sub__(self, other):
        other = as_map(other)
        return AnalyticMap(lambda z: self.fn(z) - other.fn(z), f"({self.tag} - {other.tag})")

    def __neg__(self):
        return AnalyticMap(lambda z: -self.fn(z), f"-{self.tag}")

    def __mul__(self, other):
        if isinstance(other, AnalyticMap):
            return AnalyticMap(lambda z: self.fn(z) * other.fn(z), f"{self.tag}*{other.tag}")
        c = complex(other)
        return AnalyticMap(lambda z: c * self.fn(z), f"{_fmt(c)}*{self.tag}")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, AnalyticMap):
            return AnalyticMap(lambda z: self.fn(z) / other.fn(z), f"{self.tag}/{other.tag}")
        c = complex(other)
        return AnalyticMap(lambda z: self.fn(z) / c, f"{self.tag}/{_fmt(c)}")


def _fmt(c: complex) -> str:
    return f"{c.real:g}" if c.imag == 0 else f"({c:g})"


def constant(value: complex, tag: str | None = None) -> AnalyticMap:
    c = complex(value)
    return AnalyticMap(lambda z: np.full(z.shape, c), tag or _fmt(c))


def as_map(obj) -> AnalyticMap:
    if isinstance(obj, AnalyticMap):
        return obj
    if callable(obj):
        return AnalyticMap(lambda z: obj(z), getattr(obj, "__name__", "callable"))
    return constant(obj)


@dataclass(frozen=True)
class GaussianSuperposition:
    """Finite family ``c_m`` of Gaussians centred on the lattice ``2*m*pi/s``.

    Infinite uniform families cannot be represented, which keeps the
    aperiodic ground state square integrable.
    """

    coefficients: Mapping[int, float]
    s: float

    def __post_init__(self):
        coeffs = {int(m): float(c) for m, c in dict(self.coefficients).items()}
        if not coeffs or all(c == 0.0 for c in coeffs.values()):
            raise DomainError("at least one coefficient must be nonzero")
        if coeffs.get(0, 0.0) == 0.0:
            raise DomainError("the central coefficient c_0 must be nonzero")
        if not all(math.isfinite(c) for c in coeffs.values()):
            raise DomainError("coefficients must be finite")
        if not self.s > 0.0:
            raise DomainError(f"scale s must be positive, got {self.s!r}")
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))

    @classmethod
    def single(cls, s: float, c0: float = 1.0) -> "GaussianSuperposition":
        return cls({0: c0}, s)

    @property
    def max_index(self) -> int:
        return max(abs(m) for m in self.coefficients)

    def centers(self) -> dict[int, float]:
        return {m: 2.0 * m * math.pi / self.s for m in self.coefficients}


@dataclass(frozen=True)
class RedundantFactorSpec:
    kappa: float = 0.0
    lam: float = 0.0
    mu: int = 0
    nu: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and math.isfinite(self.lam)):
            raise DomainError("exponents must be finite")
        if int(self.mu) != self.mu or int(self.nu) != self.nu:
            raise DomainError("mu and nu must be integers")

    @property
    def integer_exponents(self) -> bool:
        return float(self.kappa).is_integer() and float(self.lam).is_integer()


def eval_f(coeffs: GaussianSuperposition, z):
    """``sum_m c_m exp(-(z - 2 m pi/s)**2 / 2)``."""
    return f_map(coeffs)(z)


def f_map(coeffs: GaussianSuperposition) -> AnalyticMap:
    items = [(c, 2.0 * m * math.pi / coeffs.s) for m, c in coeffs.coefficients.items()]

    def fn(z):
        out = np.zeros(z.shape, dtype=complex)
        for c, center in items:
            d = z - center
            out += c * np.exp(-0.5 * d * d)
        return out

    return AnalyticMap(fn, f"f[{','.join(f'{m}:{c:g}' for m, c in coeffs.coefficients.items())}]")


def periodic_f_map(s: float) -> AnalyticMap:
    """Cell-wise Gaussian: on ``Re z`` in cell ``I_m`` use the single Gaussian ``f_m``.

    Imaginary shifts keep ``Re z`` fixed, so shifted evaluations stay in the
    cell of the base point.
    """
    period = 2.0 * math.pi / s

    def fn(z):
        center = np.round(z.real / period) * period
        d = z - center
        return np.exp(-0.5 * d * d)

    return AnalyticMap(fn, "f_periodic")


def f_square_norm(coeffs: GaussianSuperposition) -> float:
    """Closed form of ``int f(x)**2 dx`` over the real line."""
    s = coeffs.s
    total = 0.0
    for n, cn in coeffs.coefficients.items():
        for m, cm in coeffs.coefficients.items():
            total += cn * cm * math.exp(-((m - n) ** 2) * math.pi**2 / (s * s))
    return math.sqrt(math.pi) * total


def shift(fmap: AnalyticMap, a: complex) -> AnalyticMap:
    """``z -> fmap(z + a)``, the action of ``exp(a d/dz)``."""
    a = complex(a)
    if a == 0:
        return fmap
    inner = fmap.fn
    return AnalyticMap(lambda z: inner(z + a), f"{fmap.tag}(z{a:+g})")


def q_derivative(fmap: AnalyticMap, params: DeformationParams) -> AnalyticMap:
    """``D = i/(s-t) [exp(s p) - exp(t p)]`` with ``p = -i d/dz``.

    ``exp(s p)`` shifts the argument by ``-i s``.
    """
    s, t = params.s, params.t
    if s == t:
        raise SingularOperatorError("q-derivative is singular for s == t")
    pref = 1j / (s - t)
    a, b = -1j * s, -1j * t
    inner = fmap.fn
    return AnalyticMap(lambda z: pref * (inner(z + a) - inner(z + b)), f"D[{fmap.tag}]")


def g_fourth_power(params: DeformationParams) -> float:
    """Constant ``(e^{s^2} - e^{-s^2}) / s^2`` so that ``g**4 = const * cos(t z)**2``."""
    s = params.s
    return 2.0 * math.sinh(s * s) / (s * s)


def part_g(params: DeformationParams, z):
    """``g(z) = ((e^{s^2} - e^{-s^2})/s^2)**(1/4) sqrt(cos(t z))``, principal branch."""
    amp = g_fourth_power(params) ** 0.25
    zc = _as_complex(z)
    if params.t == 0.0:
        out = np.full(zc.shape, amp, dtype=complex)
    else:
        out = amp * np.sqrt(np.cos(params.t * zc))
    return complex(out) if zc.ndim == 0 else out


def part_g_squared(params: DeformationParams, z):
    """``g(z)**2`` without the square-root branch: ``sqrt(const) * cos(t z)``."""
    zc = _as_complex(z)
    out = math.sqrt(g_fourth_power(params)) * np.cos(params.t * zc)
    return complex(out) if zc.ndim == 0 else out


def part_h(params: DeformationParams, z, a0: float = 0.0):
    """``h(z) = -2 (s + t) z + a0``."""
    zc = _as_complex(z)
    out = -2.0 * params.s_plus_t * zc + a0
    return complex(out) if zc.ndim == 0 else out


def big_F(coeffs: GaussianSuperposition, params: DeformationParams, z):
    """``F(z) = (f(z + i s) / f(z))**2``; equals ``exp(s**2 - 2 i s z)`` on the lattice."""
    fm = f_map(coeffs)
    zc = _as_complex(z)
    base = np.atleast_1d(fm(zc))
    if np.any(base == 0):
        where = np.atleast_1d(zc)[base == 0][0]
        raise PoleError(f"f vanishes at z={where}; F has a pole there", location=complex(where))
    out = (np.atleast_1d(fm(zc + 1j * params.s)) / base) ** 2
    return complex(out[0]) if zc.ndim == 0 else out.reshape(zc.shape)


def redundant_factor(spec: RedundantFactorSpec, s: float, z):
    """``tanh^kappa[(2mu+1) pi z/(2s)] * coth^lambda[(2nu+1) pi z/(2s)]`` (principal powers)."""
    zc = _as_complex(z)
    out = np.ones(zc.shape, dtype=complex)
    if spec.kappa != 0:
        out = out * _int_or_principal_power(np.tanh((2 * spec.mu + 1) * math.pi * zc / (2 * s)), spec.kappa)
    if spec.lam != 0:
        th = np.tanh((2 * spec.nu + 1) * math.pi * zc / (2 * s))
        if spec.lam < 0:
            out = out * _int_or_principal_power(th, -spec.lam)
        else:
            hit = np.atleast_1d(np.abs(th) < 1e-300)
            if np.any(hit):
                bad = np.atleast_1d(zc)[hit][0]
                raise PoleError(f"coth has a pole at z={bad}", location=complex(bad))
            out = out * _int_or_principal_power(1.0 / th, spec.lam)
    return complex(out) if zc.ndim == 0 else out


def _int_or_principal_power(base: np.ndarray, exponent: float) -> np.ndarray:
    if float(exponent).is_integer():
        return base ** int(exponent)
    return base**exponent
