"""Ladder operators, Hamiltonian and the Dubna ``T`` operator.

Operators act on :class:`~qoscillator.analytic.AnalyticMap` objects by
composing exact imaginary shifts with pointwise arithmetic:

    A  psi = (f/g) exp(-i h) D[psi / (f g)]
    A+ psi = -(1/(f g)) D[(f/g) exp(i h) psi]

For the Dubna type ``g`` vanishes on the lattice ``x = (2k+1) pi/(2s)``.
Evaluating any composite whose outermost factor is ``1/g`` within
``POLE_RADIUS`` of that lattice raises :class:`PoleError` instead of
returning a huge number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analytic import (
    AnalyticMap,
    GaussianSuperposition,
    RedundantFactorSpec,
    f_map,
    g_fourth_power,
    periodic_f_map,
    q_derivative,
    redundant_factor,
)
from .core import DeformationParams
from .errors import DomainError, PoleError

__all__ = [
    "POLE_RADIUS",
    "LadderContext",
    "default_probes",
    "avoid_lattice",
    "singular_points",
    "apply_lowering",
    "apply_raising",
    "apply_raising_power",
    "apply_hamiltonian",
    "mutator_residual",
    "apply_T",
    "T_bilinear_residual",
    "T_linear_residual",
    "redundancy_residual",
    "normalized_residual",
]

POLE_RADIUS = 1e-6


@dataclass(frozen=True)
class LadderContext:
    """Everything needed to build ``A`` and ``A+``.

    ``periodic=True`` swaps the superposition for the cell-wise single
    Gaussian; ``redundant`` multiplies ``g**2`` by a redundant factor ``G``
    (verification only, it must not change the operators).
    """

    params: DeformationParams
    coeffs: GaussianSuperposition
    a0: float = 0.0
    periodic: bool = False
    redundant: RedundantFactorSpec | None = None
    g_scale: float = 1.0
    f: AnalyticMap = field(init=False, repr=False, compare=False)
    g: AnalyticMap = field(init=False, repr=False, compare=False)
    h: AnalyticMap = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.coeffs.s != self.params.s:
            raise DomainError(f"coefficient scale s={self.coeffs.s} differs from params.s={self.params.s}")
        p = self.params
        f = periodic_f_map(p.s) if self.periodic else f_map(self.coeffs)
        amp = g_fourth_power(p) ** 0.25 * self.g_scale
        t, spec = p.t, self.redundant
        if t == 0.0 and spec is None:
            g = AnalyticMap(lambda z: np.full(z.shape, complex(amp)), "g")
        else:

            def g_fn(z):
                out = amp * np.sqrt(np.cos(t * z))
                if spec is not None:
                    out = out * _continued_sqrt(spec, p.s, z)
                return out

            g = AnalyticMap(g_fn, "g" if spec is None else "g_G")
        c, a0 = -2.0 * p.s_plus_t, self.a0
        h = AnalyticMap(lambda z: c * z + a0, "h")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @classmethod
    def build(cls, params, coeffs=None, a0=0.0, **kw) -> "LadderContext":
        if coeffs is None:
            coeffs = GaussianSuperposition.single(params.s)
        elif not isinstance(coeffs, GaussianSuperposition):
            coeffs = GaussianSuperposition(coeffs, params.s)
        return cls(params, coeffs, a0, **kw)


def _continued_sqrt(spec: RedundantFactorSpec, s: float, z: np.ndarray) -> np.ndarray:
    """``sqrt(G)`` continued vertically from the real axis.

    The principal root of a negative ``G`` sits on the branch cut, so two
    shifted evaluations could pick unrelated signs.  Continuing from
    ``Re z`` keeps ``sqrt(G(x)) sqrt(G(x -+ is))`` equal to one common sign.
    """
    on_axis = redundant_factor(spec, s, z.real.astype(complex))
    return np.sqrt(on_axis) * np.sqrt(redundant_factor(spec, s, z) / on_axis)


def singular_points(params: DeformationParams, lo: float, hi: float) -> list[float]:
    """Zeros of ``g`` (Dubna) in ``[lo, hi]``; empty for Macfarlane."""
    if not params.is_dubna:
        return []
    s = params.s
    k_lo = math.ceil((2.0 * s * lo / math.pi - 1.0) / 2.0)
    k_hi = math.floor((2.0 * s * hi / math.pi - 1.0) / 2.0)
    return [(2 * k + 1) * math.pi / (2 * s) for k in range(k_lo, k_hi + 1)]


def _guard_poles(params: DeformationParams, z: np.ndarray) -> None:
    if not params.is_dubna:
        return
    s = params.s
    k = np.round((2.0 * s * np.real(z) / math.pi - 1.0) / 2.0)
    pole = (2.0 * k + 1.0) * math.pi / (2.0 * s)
    dist = np.hypot(np.real(z) - pole, np.imag(z))
    hit = np.atleast_1d(dist < POLE_RADIUS)
    if np.any(hit):
        loc = float(np.atleast_1d(pole)[hit][0])
        raise PoleError(f"composite has a pole of 1/g at x = pi(2k+1)/(2s) = {loc!r}", location=loc)


def default_probes(params: DeformationParams, count: int = 11, lo: float = -2.0, hi: float = 2.0) -> np.ndarray:
    """Chebyshev points on ``[lo, hi]`` pushed off the Dubna singular lattice."""
    k = np.arange(count)
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * count))[::-1]
    return avoid_lattice(params, x)


def avoid_lattice(params: DeformationParams, x, radius: float | None = None) -> np.ndarray:
    x = np.array(x, dtype=float)
    if not params.is_dubna:
        return x
    s = params.s
    radius = 1e-2 * s if radius is None else radius
    k = np.round((2.0 * s * x / math.pi - 1.0) / 2.0)
    pole = (2.0 * k + 1.0) * math.pi / (2.0 * s)
    close = np.abs(x - pole) < radius
    x[close] = pole[close] + np.where(x[close] >= pole[close], 2.0, -2.0) * radius
    return x


def apply_lowering(ctx: LadderContext, psi: AnalyticMap) -> AnalyticMap:
    f, g, h, p = ctx.f.fn, ctx.g.fn, ctx.h.fn, ctx.params
    inner = q_derivative(AnalyticMap(lambda z: psi.fn(z) / (f(z) * g(z))), p).fn

    def fn(z):
        _guard_poles(p, z)
        return f(z) / g(z) * np.exp(-1j * h(z)) * inner(z)

    return AnalyticMap(fn, f"A[{psi.tag}]")


def apply_raising(ctx: LadderContext, psi: AnalyticMap) -> AnalyticMap:
    f, g, h, p = ctx.f.fn, ctx.g.fn, ctx.h.fn, ctx.params
    inner = q_derivative(AnalyticMap(lambda z: f(z) / g(z) * np.exp(1j * h(z)) * psi.fn(z)), p).fn

    def fn(z):
        _guard_poles(p, z)
        return -inner(z) / (f(z) * g(z))

    return AnalyticMap(fn, f"A+[{psi.tag}]")


def apply_raising_power(ctx: LadderContext, psi: AnalyticMap, n: int) -> AnalyticMap:
    for _ in range(n):
        psi = apply_raising(ctx, psi)
    return psi


def apply_hamiltonian(ctx: LadderContext, psi: AnalyticMap) -> AnalyticMap:
    """``(1/2) [q A A+ + q**-1 A+ A] psi``."""
    q = ctx.params.q
    up_down = apply_lowering(ctx, apply_raising(ctx, psi)).fn
    down_up = apply_raising(ctx, apply_lowering(ctx, psi)).fn
    return AnalyticMap(lambda z: 0.5 * (q * up_down(z) + down_up(z) / q), f"H[{psi.tag}]")


def normalized_residual(lhs, rhs) -> np.ndarray:
    """``|lhs - rhs| / max(1, |lhs|, |rhs|)`` elementwise."""
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    return np.abs(lhs - rhs) / np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))


def _probe_array(probes: Sequence[float]) -> np.ndarray:
    x = np.asarray(probes, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("probe list is empty")
    return x


def mutator_residual(ctx: LadderContext, phi: AnalyticMap, probes: Sequence[float]) -> float:
    """Max over probes of ``|(q A A+ - q**-1 A+ A) phi - phi| / max(1, |phi|)``."""
    x = _probe_array(probes)
    q = ctx.params.q
    lhs = q * apply_lowering(ctx, apply_raising(ctx, phi))(x) - apply_raising(ctx, apply_lowering(ctx, phi))(x) / q
    ref = phi(x)
    return float(np.max(np.abs(lhs - ref) / np.maximum(1.0, np.abs(ref))))


def _require_dubna(ctx: LadderContext) -> None:
    if not ctx.params.is_dubna:
        raise DomainError("T is defined for Dubna type only")


def apply_T(ctx: LadderContext, psi: AnalyticMap) -> AnalyticMap:
    """``T psi = (1/g) cosh(i s d/dx) (psi/g)``."""
    _require_dubna(ctx)
    g, p = ctx.g.fn, ctx.params
    a = 1j * p.s

    def over_g(z):
        return psi.fn(z) / g(z)

    def fn(z):
        _guard_poles(p, z)
        return 0.5 * (over_g(z + a) + over_g(z - a)) / g(z)

    return AnalyticMap(fn, f"T[{psi.tag}]")


def T_bilinear_residual(ctx: LadderContext, psi: AnalyticMap, probes: Sequence[float]) -> float:
    """Residual of ``T**2 = s**2 q**-1 (A+ A + q/(1 - q**2))``."""
    _require_dubna(ctx)
    x = _probe_array(probes)
    s, q = ctx.params.s, ctx.params.q
    lhs = apply_T(ctx, apply_T(ctx, psi))(x)
    rhs = s * s / q * (apply_raising(ctx, apply_lowering(ctx, psi))(x) + q / (1.0 - q * q) * psi(x))
    return float(np.max(normalized_residual(lhs, rhs)))


def T_linear_residual(ctx: LadderContext, psi: AnalyticMap, probes: Sequence[float]) -> float:
    """Residual of ``T = s/(2 sin sx) [q**-1/2 e^{ih} A + q**1/2 e^{-ih} A+]``."""
    _require_dubna(ctx)
    x = _probe_array(probes)
    s, q = ctx.params.s, ctx.params.q
    sin = np.sin(s * x)
    if np.any(np.abs(sin) < 1e-8):
        raise DomainError(f"probe at a zero of sin(sx): {x[np.abs(sin) < 1e-8][0]!r}")
    hx = ctx.h(x)
    lhs = apply_T(ctx, psi)(x)
    rhs = (
        s
        / (2.0 * sin)
        * (
            np.exp(1j * hx) * apply_lowering(ctx, psi)(x) / math.sqrt(q)
            + math.sqrt(q) * np.exp(-1j * hx) * apply_raising(ctx, psi)(x)
        )
    )
    return float(np.max(normalized_residual(lhs, rhs)))


def redundancy_residual(
    ctx: LadderContext, spec: RedundantFactorSpec, psi: AnalyticMap, probes: Sequence[float]
) -> float:
    """Relative change of ``A psi`` when the Dubna ``g**2`` is multiplied by ``G``.

    ``A`` sees ``g`` only through ``g(x) g(x -+ is)``, which ``G(x) G(x + is) = 1``
    leaves unchanged up to a sign; ``g`` itself is fixed only up to sign, so
    each probe is compared up to an overall sign.
    """
    if not ctx.params.is_dubna:
        raise DomainError("redundant factors solve the Dubna g-equation; Macfarlane g is constant")
    x = _probe_array(probes)
    dressed = LadderContext(ctx.params, ctx.coeffs, ctx.a0, ctx.periodic, spec)
    plain = apply_lowering(ctx, psi)(x)
    other = apply_lowering(dressed, psi)(x)
    scale = max(1.0, float(np.max(np.abs(plain))))
    diff = np.minimum(np.abs(other - plain), np.abs(other + plain))
    return float(np.max(diff) / scale)
