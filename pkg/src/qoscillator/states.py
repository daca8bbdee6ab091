"""Eigenfunctions, global structure, quadrature and inner products.

Two global structures are supported:

* aperiodic -- one finite Gaussian superposition on the whole line, integrated
  over ``[-L, L]`` with ``L = 2 pi M / s + 8`` (``M`` the largest lattice index);
* periodic -- the single Gaussian ``f_m`` on every cell
  ``I_m = [(2m-1) pi/s, (2m+1) pi/s]``, normalized on one cell.

For the Dubna type ``g = const * sqrt(cos sx)`` is imaginary where
``cos sx < 0``.  Every state carries one factor ``g``, and the pairing uses
``g**2`` rather than ``|g|**2``; :func:`inner_product` realizes this through
the ``signature`` weight ``sign(cos sx)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence, Union

import numpy as np

from .analytic import AnalyticMap, GaussianSuperposition, part_g_squared
from .core import DeformationParams, energy, normalization
from .errors import ConfigurationError, ConvergenceError, DomainError, ResourceGuardError
from .hermite import hermite_table
from .operators import (
    LadderContext,
    apply_hamiltonian,
    apply_lowering,
    apply_raising,
    apply_T,
    default_probes,
    singular_points,
)

__all__ = [
    "Aperiodic",
    "Periodic",
    "GlobalStructure",
    "OscillatorModel",
    "QuadratureSpec",
    "ground_state",
    "eigenfunction",
    "eigenfunction_via_ladder",
    "integrate",
    "inner_product",
    "gram_matrix",
    "adjointness_residual",
    "eigen_residual",
    "pole_cancellation_residual",
    "t_expectation",
    "t_eigenvalue",
]

LADDER_GUARD = 8
GRAM_GUARD = 6


@dataclass(frozen=True)
class Aperiodic:
    coeffs: GaussianSuperposition


@dataclass(frozen=True)
class Periodic:
    cell_index: int = 0


GlobalStructure = Union[Aperiodic, Periodic]


@dataclass(frozen=True)
class QuadratureSpec:
    lower: float
    upper: float
    rtol: float = 1e-12
    max_subdivisions: int = 4000
    atol: float = 1e-13
    breakpoints: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)) or not self.lower < self.upper:
            raise DomainError(f"need finite lower < upper, got [{self.lower}, {self.upper}]")
        if not 1e-14 <= self.rtol <= 1e-3:
            raise DomainError(f"relative tolerance must lie in [1e-14, 1e-3], got {self.rtol}")
        if not self.atol >= 0.0:
            raise DomainError("atol must be non-negative")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be positive")


@dataclass(frozen=True)
class OscillatorModel:
    params: DeformationParams
    structure: GlobalStructure
    a0: float = 0.0
    g_scale: float = 1.0  # fault-injection hook; scales g inside every operator and state

    def __post_init__(self):
        if isinstance(self.structure, Aperiodic):
            if self.structure.coeffs.s != self.params.s:
                raise ConfigurationError("Gaussian scale of the structure differs from params.s")
        elif not isinstance(self.structure, Periodic):
            raise ConfigurationError(f"unknown global structure {self.structure!r}")

    @classmethod
    def aperiodic(cls, params, coeffs=None, a0=0.0) -> "OscillatorModel":
        if coeffs is None:
            coeffs = GaussianSuperposition.single(params.s)
        elif not isinstance(coeffs, GaussianSuperposition):
            coeffs = GaussianSuperposition(coeffs, params.s)
        return cls(params, Aperiodic(coeffs), a0)

    @classmethod
    def periodic(cls, params, cell_index=0, a0=0.0) -> "OscillatorModel":
        return cls(params, Periodic(int(cell_index)), a0)

    @property
    def is_periodic(self) -> bool:
        return isinstance(self.structure, Periodic)

    @cached_property
    def context(self) -> LadderContext:
        if self.is_periodic:
            single = GaussianSuperposition.single(self.params.s)
            return LadderContext(self.params, single, self.a0, periodic=True, g_scale=self.g_scale)
        return LadderContext(self.params, self.structure.coeffs, self.a0, g_scale=self.g_scale)

    def domain(self) -> tuple[float, float]:
        s = self.params.s
        if self.is_periodic:
            m = self.structure.cell_index
            return (2 * m - 1) * math.pi / s, (2 * m + 1) * math.pi / s
        half = 2.0 * math.pi * self.structure.coeffs.max_index / s + 8.0
        return -half, half

    def quadrature_spec(self, rtol: float = 1e-12, max_subdivisions: int = 4000) -> QuadratureSpec:
        lo, hi = self.domain()
        cuts = tuple(singular_points(self.params, lo, hi))
        return QuadratureSpec(lo, hi, rtol, max_subdivisions, breakpoints=cuts)

    @cached_property
    def signature(self) -> AnalyticMap | None:
        if not self.params.is_dubna:
            return None
        s = self.params.s
        return AnalyticMap(lambda z: np.sign(np.cos(s * z.real)).astype(complex), "sign(cos sx)")

    @cached_property
    def k0(self) -> float:
        ctx = self.context
        p = self.params
        weight = AnalyticMap(lambda z: ctx.f.fn(z) ** 2 * part_g_squared(p, z), "f^2 g^2")
        norm = integrate(weight, self.quadrature_spec()).real
        if not norm > 0.0:
            raise ConfigurationError(f"ground-state norm integral is not positive ({norm!r})")
        return norm**-0.5

    def inner(self, phi: AnalyticMap, chi: AnalyticMap, spec: QuadratureSpec | None = None) -> complex:
        return inner_product(phi, chi, spec or self.quadrature_spec(), signature=self.signature)


# --- quadrature ----------------------------------------------------------

_GL_ORDER = 15


@lru_cache(maxsize=None)
def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_rules(fmap: AnalyticMap, a: np.ndarray, b: np.ndarray):
    """Gauss-Legendre on each panel and on both halves, in one batched evaluation."""
    x, w = _gauss_legendre(_GL_ORDER)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    quarter = 0.5 * half
    whole_nodes = mid[:, None] + half[:, None] * x
    left_nodes = (a + quarter)[:, None] + quarter[:, None] * x
    right_nodes = (mid + quarter)[:, None] + quarter[:, None] * x
    nodes = np.concatenate([whole_nodes, left_nodes, right_nodes], axis=0)
    vals = np.asarray(fmap(nodes.astype(complex)), dtype=complex)
    k = len(a)
    whole = half * (vals[:k] @ w)
    left = quarter * (vals[k : 2 * k] @ w)
    right = quarter * (vals[2 * k :] @ w)
    l1 = quarter * (np.abs(vals[k : 2 * k]) @ w + np.abs(vals[2 * k :]) @ w)
    return left + right, np.abs(whole - left - right), l1


def _csum(values) -> complex:
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def integrate(fmap: AnalyticMap, spec: QuadratureSpec, breakpoints: Sequence[float] | None = None) -> complex:
    """Adaptive panel quadrature of ``fmap`` over ``[spec.lower, spec.upper]``.

    Each panel is integrated with a 15-point Gauss-Legendre rule and with the
    same rule on its two halves; the difference is the local error estimate.
    Panels whose error exceeds their share of ``max(rtol * int |f|, atol)``
    are bisected; ``atol`` only matters for integrals that vanish identically.
    Sums run in panel order, so results are reproducible bit for bit.
    """
    lo, hi = spec.lower, spec.upper
    cuts = set(spec.breakpoints if breakpoints is None else breakpoints)
    n0 = max(16, int(math.ceil((hi - lo) / 2.0)))
    edges = np.union1d(np.linspace(lo, hi, n0 + 1), [c for c in cuts if lo < c < hi])
    done: dict[float, tuple[float, complex, float, float]] = {}
    active_a, active_b = edges[:-1], edges[1:]
    splits = 0
    while True:
        val, err, l1 = _panel_rules(fmap, active_a, active_b)
        for i in range(len(active_a)):
            done[float(active_a[i])] = (float(active_b[i]), complex(val[i]), float(err[i]), float(l1[i]))
        order = sorted(done)
        total = _csum(done[k][1] for k in order)
        total_err = math.fsum(done[k][2] for k in order)
        scale = max(abs(total), math.fsum(done[k][3] for k in order))
        tol = max(spec.rtol * scale, spec.atol)
        if total_err <= tol:
            return total
        width = hi - lo
        bad = [k for k in order if done[k][2] > tol * (done[k][0] - k) / width]
        if not bad:
            bad = [max(order, key=lambda k: done[k][2])]
        splits += len(bad)
        if splits > spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not reach rtol={spec.rtol} within {spec.max_subdivisions} subdivisions "
                f"(estimate {total!r}, error {total_err:.3e})",
                estimate=total,
                error=total_err,
            )
        new_a, new_b = [], []
        for k in bad:
            b = done.pop(k)[0]
            m = 0.5 * (k + b)
            new_a += [k, m]
            new_b += [m, b]
        active_a, active_b = np.array(new_a), np.array(new_b)


def inner_product(
    phi: AnalyticMap, chi: AnalyticMap, spec: QuadratureSpec, signature: AnalyticMap | None = None
) -> complex:
    """``int conj(phi) chi dx``, optionally weighted by a real ``signature``."""
    if signature is None:
        integrand = AnalyticMap(lambda z: np.conj(phi.fn(z)) * chi.fn(z), "<phi|chi>")
    else:
        integrand = AnalyticMap(lambda z: np.conj(phi.fn(z)) * chi.fn(z) * signature.fn(z), "<phi|chi>_g")
    return integrate(integrand, spec)


# --- states --------------------------------------------------------------


def ground_state(model: OscillatorModel) -> tuple[AnalyticMap, float]:
    """``psi_0 = K_0 f g`` with ``K_0 = (int_I f^2 g^2)^(-1/2)``."""
    return eigenfunction(model, 0), model.k0


def _level(n, guard=None, override=False) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"level must be an integer >= 0, got {n!r}")
    if guard is not None and n > guard and not override:
        raise ResourceGuardError(f"n={n} exceeds the guard {guard}; pass override=True")
    return int(n)


def _prefactor(params: DeformationParams, n: int) -> float:
    s, c = params.s, params.s_plus_t**2
    log_p = n * math.log(s)
    for m in range(n):
        log_p -= 0.5 * (c + math.log(-math.expm1(-2.0 * s * s * (m + 1))))
    return math.exp(log_p)


def eigenfunction(model: OscillatorModel, n: int) -> AnalyticMap:
    """Closed form

        psi_n = K_0 f g s^n exp{i n [h + (s+t) x]}
                * prod_{m<n} {e^{(s+t)^2} (1 - e^{-2 s^2 (m+1)})}^{-1/2} H_n(x)
    """
    n = _level(n)
    ctx, p = model.context, model.params
    amp = model.k0 * _prefactor(p, n)
    f, g, h = ctx.f.fn, ctx.g.fn, ctx.h.fn
    st = p.s_plus_t

    def fn(z):
        out = amp * f(z) * g(z) * hermite_table(n, z, p)[n]
        if n:
            out = out * np.exp(1j * n * (h(z) + st * z))
        return out

    return AnalyticMap(fn, f"psi_{n}")


def eigenfunction_via_ladder(model: OscillatorModel, n: int, override: bool = False) -> AnalyticMap:
    """``N_n (A+)^n psi_0``; costs ``2^n`` shifted evaluations per point."""
    n = _level(n, LADDER_GUARD, override)
    psi = eigenfunction(model, 0)
    for _ in range(n):
        psi = apply_raising(model.context, psi)
    return normalization(n, model.params) * psi if n else psi


def gram_matrix(
    model: OscillatorModel, n_max: int, spec: QuadratureSpec | None = None, override: bool = False
) -> np.ndarray:
    n_max = _level(n_max, GRAM_GUARD, override)
    spec = spec or model.quadrature_spec()
    states = [eigenfunction(model, n) for n in range(n_max + 1)]
    out = np.empty((n_max + 1, n_max + 1), dtype=complex)
    for m, left in enumerate(states):
        for n, right in enumerate(states):
            try:
                out[m, n] = model.inner(left, right, spec)
            except ConvergenceError as exc:
                raise ConvergenceError(f"Gram entry ({m}, {n}): {exc}", exc.estimate, exc.error) from exc
    return out


def adjointness_residual(
    model: OscillatorModel, phi: AnalyticMap, chi: AnalyticMap, spec: QuadratureSpec | None = None
) -> float:
    """``|<phi, A+ chi> - <A phi, chi>| / max(1, |<phi, A+ chi>|)``."""
    ctx = model.context
    right = model.inner(phi, apply_raising(ctx, chi), spec)
    left = model.inner(apply_lowering(ctx, phi), chi, spec)
    return abs(right - left) / max(1.0, abs(right))


def eigen_residual(model: OscillatorModel, n: int, probes: Sequence[float] | None = None) -> float:
    """``max |H psi_n - E_n psi_n| / max |psi_n|`` over the probes."""
    n = _level(n, GRAM_GUARD)
    x = default_probes(model.params) if probes is None else np.asarray(probes, dtype=float)
    psi = eigenfunction(model, n)
    values = psi(x)
    lhs = apply_hamiltonian(model.context, psi)(x)
    return float(np.max(np.abs(lhs - energy(n, model.params) * values)) / np.max(np.abs(values)))


def pole_cancellation_residual(model: OscillatorModel, n: int, offset: float = 1e-4, k: int = 0) -> float:
    """Two-sided check that ``A+ psi_n`` stays regular at a zero of ``g``.

    The composite ``A+ psi_n`` is evaluated at ``x_k +- offset`` next to
    ``x_k = (2k+1) pi/(2s)`` and divided by the closed-form ``psi_{n+1}``;
    both one-sided ratios must equal ``N_n / N_{n+1}``.
    """
    if not model.params.is_dubna:
        raise DomainError("g has no zeros for the Macfarlane type")
    p = model.params
    x0 = (2 * k + 1) * math.pi / (2 * p.s)
    x = np.array([x0 - offset, x0 + offset])
    composite = apply_raising(model.context, eigenfunction(model, n))(x)
    ratio = composite / eigenfunction(model, n + 1)(x)
    expected = normalization(n, p) / normalization(n + 1, p)
    return float(max(np.max(np.abs(ratio - expected)), abs(ratio[0] - ratio[1])) / expected)


def t_eigenvalue(params: DeformationParams, n: int) -> float:
    """Positive branch ``s (q^{-2n} / (1 - q^2))^{1/2}``."""
    q = params.q
    return params.s * math.sqrt(params.q_power(-2 * n) / (1.0 - q * q))


def t_expectation(model: OscillatorModel, n: int, spec: QuadratureSpec | None = None) -> complex:
    psi = eigenfunction(model, n)
    return model.inner(psi, apply_T(model.context, psi), spec)
