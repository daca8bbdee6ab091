"""Residual suites for the defining q-difference conditions.

Each check produces a :class:`ResidualReport`.  Condition residuals are
normalized by the larger side, ``|L - R| / max(|L|, |R|)``, so that a 1%
perturbation of a part-function is visible regardless of the local scale of
``f``; operator-level checks use ``|L - R| / max(1, |L|, |R|)``.

Identity names
--------------
macfarlane.g_quartic        (q - 1/q) / (s^2 g^4) = 1
macfarlane.mixed_fgh        mixed f/g/h relation with f at x - is
macfarlane.f_second_shift   f(x)^2 f(x-2is)^2 = q^-2 f(x-is)^4 e^{i[h(x)-h(x-2is)]}
dubna.f_upper_shift         [f(x+2is)/f(x+is)]^2 = q^-2 [f(x+is)/f(x)]^2 e^{i[h(x)-h(x+2is)]}
dubna.f_lower_shift         [f(x)/f(x-is)]^2 = q^-2 [f(x-is)/f(x-2is)]^2 e^{i[h(x)-h(x-2is)]}
dubna.g_balance             the g-condition with explicit f ratios
dubna.g_nonlinear           F [q^3 g+^2 - q^-1 g-^2] - F^-1 [q^-3 g+^2 - q g-^2] = -4 s^2 g^2 g-^2 g+^2
appendix.*                  four simultaneous equations for xi, eta in g^2 = xi e^{-isx} + eta e^{isx}
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .analytic import AnalyticMap, GaussianSuperposition, RedundantFactorSpec, big_F, redundant_factor
from .core import Kind, energy, make_params
from .errors import DomainError, PoleError
from .hermite import classical_hermite, hermite_recursion_eval, hermite_series, second_recursion_residual
from .operators import (
    LadderContext,
    T_bilinear_residual,
    T_linear_residual,
    apply_T,
    apply_hamiltonian,
    apply_lowering,
    avoid_lattice,
    default_probes,
    mutator_residual,
)

__all__ = [
    "ResidualReport",
    "verification_probes",
    "macfarlane_condition_residuals",
    "dubna_condition_residuals",
    "f_ratio_report",
    "xi_eta_solution",
    "appendix_system_residuals",
    "ginv_residual",
    "classical_limit_report",
    "verification_suite",
    "reports_to_json",
    "reports_from_json",
]


def _num(x: float) -> str:
    return f"{float(x):.16e}"


@dataclass(frozen=True)
class ResidualReport:
    name: str
    max_residual: float
    probe_count: int
    worst_probe: complex
    tolerance: float
    passed: bool
    detail: str | None = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "max_residual": _num(self.max_residual),
            "probe_count": self.probe_count,
            "worst_probe": {"re": _num(self.worst_probe.real), "im": _num(self.worst_probe.imag)},
            "tolerance": _num(self.tolerance),
            "passed": self.passed,
        }
        if self.detail is not None:
            out["detail"] = self.detail
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ResidualReport":
        wp = data["worst_probe"]
        return cls(
            name=data["name"],
            max_residual=float(data["max_residual"]),
            probe_count=int(data["probe_count"]),
            worst_probe=complex(float(wp["re"]), float(wp["im"])),
            tolerance=float(data["tolerance"]),
            passed=bool(data["passed"]),
            detail=data.get("detail"),
        )


def reports_to_json(reports: Iterable[ResidualReport], **extra) -> str:
    body = dict(extra)
    body["reports"] = [r.to_dict() for r in reports]
    return json.dumps(body, indent=2, sort_keys=True)


def reports_from_json(text: str) -> list[ResidualReport]:
    return [ResidualReport.from_dict(d) for d in json.loads(text)["reports"]]


def make_report(name, residuals, probes, tolerance, detail=None) -> ResidualReport:
    res = np.atleast_1d(np.asarray(residuals, dtype=float))
    pts = np.atleast_1d(np.asarray(probes, dtype=complex))
    if np.any(~np.isfinite(res)):
        i = int(np.flatnonzero(~np.isfinite(res))[0])
        worst = float("inf")
    else:
        i = int(np.argmax(res))
        worst = float(res[i])
    return ResidualReport(name, worst, int(res.size), complex(pts[i]), float(tolerance), worst <= tolerance, detail)


def _side_residual(lhs, rhs) -> np.ndarray:
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), np.finfo(float).tiny)
    return np.abs(lhs - rhs) / scale


def verification_probes(kind, s: float, count: int = 15, lo: float = -2.0, hi: float = 2.0, seed: int = 20240611):
    """Chebyshev points plus a few seeded random points, kept off singular lattices.

    Keeps clear of ``x = 0`` (coth poles of the redundant factor) and of the
    zeros of ``cos sx`` (Dubna ``g``) by ``1e-2 * s``.
    """
    n_cheb = count - count // 3
    k = np.arange(n_cheb)
    cheb = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * n_cheb))[::-1]
    rand = np.random.default_rng(seed).uniform(lo, hi, count - n_cheb)
    x = np.sort(np.concatenate([cheb, rand]))
    radius = 1e-2 * s
    x[np.abs(x) < radius] = 2.0 * radius
    params = make_params(s, kind, unguarded=True)
    return avoid_lattice(params, x, radius)


def _parts(ctx: LadderContext, f, g, h):
    return (f or ctx.f), (g or ctx.g), (h or ctx.h)


def macfarlane_condition_residuals(
    ctx: LadderContext, probes: Sequence[float], tolerance: float = 1e-9, *, f=None, g=None, h=None
) -> list[ResidualReport]:
    """Three conditions on ``f, g, h`` for the Macfarlane type; part-functions can be overridden."""
    p = ctx.params
    if not p.is_macfarlane:
        raise DomainError("Macfarlane conditions need Macfarlane parameters")
    f, g, h = _parts(ctx, f, g, h)
    x = np.asarray(probes, dtype=complex)
    s, q, i_s = p.s, p.q, 1j * p.s
    f0, fm, fmm = f(x), f(x - i_s), f(x - 2 * i_s)
    g0, gm = g(x), g(x - i_s)
    g_quartic = _side_residual((q - 1.0 / q) / (s * s * g0**4), np.ones_like(x))
    lhs = fm / (f0 * g0**2) + f0 / (fm * gm**2)
    rhs = (f0 / (fm * g0**2) + fm / (f0 * gm**2)) * np.exp(1j * (h(x) - h(x - i_s))) / q**2
    mixed = _side_residual(lhs, rhs)
    lhs = f0**2 * fmm**2
    rhs = fm**4 * np.exp(1j * (h(x) - h(x - 2 * i_s))) / q**2
    second = _side_residual(lhs, rhs)
    return [
        make_report("macfarlane.g_quartic", g_quartic, x, tolerance),
        make_report("macfarlane.mixed_fgh", mixed, x, tolerance),
        make_report("macfarlane.f_second_shift", second, x, tolerance),
    ]


def dubna_condition_residuals(
    ctx: LadderContext, probes: Sequence[float], tolerance: float = 1e-9, *, f=None, g=None, h=None
) -> list[ResidualReport]:
    """Conditions on ``f, g, h`` for the Dubna type; part-functions can be overridden.

    The nonlinear ``g`` equation is the ``g``-balance condition multiplied by
    ``g(x+is)^2 g(x-is)^2``; its right-hand side therefore carries ``-4 s^2``.
    """
    p = ctx.params
    if not p.is_dubna:
        raise DomainError("Dubna conditions need Dubna parameters")
    f, g, h = _parts(ctx, f, g, h)
    x = np.asarray(probes, dtype=complex)
    s, q, i_s = p.s, p.q, 1j * p.s
    f0, fp, fpp, fm, fmm = f(x), f(x + i_s), f(x + 2 * i_s), f(x - i_s), f(x - 2 * i_s)
    h0 = h(x)
    upper = _side_residual((fpp / fp) ** 2, (fp / f0) ** 2 * np.exp(1j * (h0 - h(x + 2 * i_s))) / q**2)
    lower = _side_residual((f0 / fm) ** 2, (fm / fmm) ** 2 * np.exp(1j * (h0 - h(x - 2 * i_s))) / q**2)
    g0, gp, gm = g(x) ** 2, g(x + i_s) ** 2, g(x - i_s) ** 2
    lhs = q * (f0**2 / fp**2 / gp + f0**2 / fm**2 / gm) - (fp**2 / f0**2 / gp + fm**2 / f0**2 / gm) / q
    balance = _side_residual(lhs, -4.0 * s * s * g0)
    F = (fp / f0) ** 2
    lhs = F * (q**3 * gp - gm / q) - (gp / q**3 - q * gm) / F
    nonlinear = _side_residual(lhs, -4.0 * s * s * g0 * gm * gp)
    return [
        make_report("dubna.f_upper_shift", upper, x, tolerance),
        make_report("dubna.f_lower_shift", lower, x, tolerance),
        make_report("dubna.g_balance", balance, x, tolerance),
        make_report("dubna.g_nonlinear", nonlinear, x, tolerance),
    ]


def f_ratio_report(
    coeffs: GaussianSuperposition, params, probes, tolerance: float = 1e-10, *, f: AnalyticMap | None = None
) -> ResidualReport:
    """``F(x) = (f(x + is)/f(x))**2 = exp(s^2 - 2isx)`` for the superposition (or an override ``f``).

    This is the condition that fixes the centre of the Gaussian: ``f e^{az}``
    satisfies the Macfarlane shift conditions but not this one.
    """
    x = np.asarray(probes, dtype=complex)
    if f is None:
        F = big_F(coeffs, params, x)
    else:
        F = (f(x + 1j * params.s) / f(x)) ** 2
    return make_report("f_ratio", _side_residual(F, np.exp(params.s**2 - 2j * params.s * x)), x, tolerance)


def _check_off_poles(spec: RedundantFactorSpec, s: float, z: np.ndarray) -> None:
    """Poles and zeros of the tanh/coth factors sit on the imaginary axis at multiples of ``i s/(2k+1)``."""
    near_axis = np.abs(z.real) < 1e-12 * max(1.0, s)
    if not np.any(near_axis):
        return
    for m in ([spec.mu] if spec.kappa else []) + ([spec.nu] if spec.lam else []):
        u = z[near_axis].imag * (2 * m + 1) / s
        if np.any(np.abs(u - np.round(u)) < 1e-12):
            bad = z[near_axis][np.abs(u - np.round(u)) < 1e-12][0]
            raise DomainError(f"xi/eta evaluated at a pole or zero of the redundant factor: z={bad}")


def xi_eta_solution(s: float, spec: RedundantFactorSpec, z):
    """``xi = eta = (1/2) ((1/q - q)/s^2)^{1/2} G(z)`` with ``q = e^{-s^2}``."""
    zc = np.asarray(z, dtype=complex)
    _check_off_poles(spec, s, np.atleast_1d(zc))
    amp = 0.5 * math.sqrt(2.0 * math.sinh(s * s) / (s * s))
    try:
        xi = amp * np.asarray(redundant_factor(spec, s, zc))
    except PoleError as exc:
        raise DomainError(str(exc)) from exc
    if zc.ndim == 0:
        return complex(xi), complex(xi)
    return xi, xi.copy()


def appendix_system_residuals(
    s: float,
    spec: RedundantFactorSpec,
    probes: Sequence[float],
    tolerance: float = 1e-9,
    *,
    xi: AnalyticMap | None = None,
    eta: AnalyticMap | None = None,
) -> list[ResidualReport]:
    """The four simultaneous difference equations for ``xi`` and ``eta``."""
    x = np.asarray(probes, dtype=complex)
    q = math.exp(-s * s)
    i_s = 1j * s
    default = AnalyticMap(lambda z: xi_eta_solution(s, spec, z)[0], "xi")
    xi = xi or default
    eta = eta or default
    X0, Xp, Xm = xi(x), xi(x + i_s), xi(x - i_s)
    Y0, Yp, Ym = eta(x), eta(x + i_s), eta(x - i_s)
    c = -4.0 * s * s
    pairs = {
        "appendix.xi_only": ((q * q * Xp - Xm) / q, c * X0 * Xm * Xp),
        "appendix.xi_mixed": (
            q * (q * q * Xp - Xm / q**4),
            c * (X0 * Ym * Yp + q * q * Y0 * Xm * Yp + Y0 * Ym * Xp / q**2),
        ),
        "appendix.eta_mixed": (
            (q**4 * Yp - Ym / q**2) / q,
            c * (Y0 * Xm * Xp + q * q * X0 * Xm * Yp + X0 * Ym * Xp / q**2),
        ),
        "appendix.eta_only": (q * (Ym - Yp / q**2), c * Y0 * Ym * Yp),
    }
    return [make_report(name, _side_residual(lhs, rhs), x, tolerance) for name, (lhs, rhs) in pairs.items()]


def ginv_residual(spec: RedundantFactorSpec, s: float, probes: Sequence[float], tolerance: float = 1e-10) -> ResidualReport:
    """``max |G(x) G(x + is) - 1|`` over real probes."""
    x = np.asarray(probes, dtype=complex)
    res = np.abs(redundant_factor(spec, s, x) * redundant_factor(spec, s, x + 1j * s) - 1.0)
    detail = None
    if not spec.integer_exponents:
        detail = "non-integer exponents: principal-branch powers may differ from the identity by a phase"
    return make_report(f"ginv[k={spec.kappa:g},l={spec.lam:g},mu={spec.mu},nu={spec.nu}]", res, x, tolerance, detail)


def _slope(s_values, devs) -> float:
    return float(np.polyfit(np.log(s_values), np.log(devs), 1)[0])


def classical_limit_report(
    s_sequence: Sequence[float] = (1e-1, 1e-2, 1e-3),
    n_max: int = 6,
    x: Sequence[float] | None = None,
    tolerance: float = 0.2,
) -> ResidualReport:
    """Second-order approach to the undeformed oscillator as ``s -> 0``.

    Tracks ``q - 1``, ``E_n - (n + 1/2)`` and the q-Hermite deviation for both
    kinds.  The Macfarlane function equals the Dubna one at ``x + is/2``, so it
    is compared with the classical polynomial at that shifted point.  The
    residual is the worst ``|fitted exponent - 2|``.
    """
    s_vals = np.asarray(s_sequence, dtype=float)
    if s_vals.size < 2 or np.any(s_vals <= 0) or np.any(np.diff(s_vals) >= 0):
        raise DomainError("s_sequence must hold at least two strictly decreasing positive values")
    xs = np.linspace(-2.0, 2.0, 9) + 0.1 if x is None else np.asarray(x, dtype=float)
    series: dict[str, list[float]] = {}
    for kind in Kind:
        for s in s_vals:
            p = make_params(s, kind)
            series.setdefault(f"{kind.value}.q", []).append(abs(math.expm1(p.log_q)))
            for n in range(1, n_max + 1):
                series.setdefault(f"{kind.value}.E{n}", []).append(abs(energy(n, p) - (n + 0.5)))
                shift = 0.5j * s if p.is_macfarlane else 0.0
                dev = np.max(np.abs(hermite_recursion_eval(n, xs, p) - classical_hermite(n, xs + shift)))
                series.setdefault(f"{kind.value}.H{n}", []).append(float(dev))
    rows, slopes, monotone = [], [], True
    for name, devs in series.items():
        devs_arr = np.asarray(devs)
        ok = bool(np.all(np.diff(devs_arr) < 0) and np.all(devs_arr > 0))
        monotone &= ok
        slope = _slope(s_vals, devs_arr) if np.all(devs_arr > 0) else float("nan")
        slopes.append(abs(slope - 2.0) if ok else float("inf"))
        rows.append(f"{name}: " + " ".join(f"{d:.3e}" for d in devs_arr) + f" slope={slope:.4f}")
    worst = int(np.argmax(slopes))
    residual = slopes[worst]
    detail = None if monotone and residual <= tolerance else "\n".join(rows)
    return ResidualReport(
        "classical_limit", residual, len(slopes), complex(worst), tolerance, residual <= tolerance, detail
    )


# --- aggregate suite -----------------------------------------------------

DEFAULT_TOLERANCES = {
    "mutator": 1e-8,
    "eigen": 1e-8,
    "ground": 1e-10,
    "conditions": 1e-9,
    "f_ratio": 1e-10,
    "second_recursion": 1e-9,
    "ginv": 1e-10,
    "appendix": 1e-9,
    "adjoint": 1e-7,
    "classical": 0.2,
    "t_operator": 1e-9,
    "t_eigen": 1e-8,
}


def verification_suite(model, *, tolerances: dict | None = None, g_scale: float = 1.0, n_eigen: int = 4):
    """Run every identity check for one model and return the reports sorted by name.

    ``g_scale != 1`` is the fault-injection hook: ``g`` is rescaled inside the
    operators while the normalization constant keeps the unscaled value, so a
    correct suite must fail.
    """
    from .states import adjointness_residual, eigenfunction, eigenfunction_via_ladder, t_eigenvalue

    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    if g_scale != 1.0:
        model = dataclasses.replace(model, g_scale=g_scale)
    p, ctx = model.params, model.context
    probes = default_probes(p)
    reports: list[ResidualReport] = []

    test_functions = {
        "gaussian": AnalyticMap(lambda z: np.exp(-0.5 * z * z), "gauss"),
        "gaussian_cos": AnalyticMap(lambda z: np.exp(-0.5 * z * z) * np.cos(z), "gauss*cos"),
    }
    for label, phi in test_functions.items():
        res = [mutator_residual(ctx, phi, [x]) for x in probes]
        reports.append(make_report(f"mutator.{label}", res, probes, tol["mutator"]))

    psi0 = eigenfunction(model, 0)
    scale = max(1.0, float(np.max(np.abs(psi0(probes)))))
    lowered = np.abs(apply_lowering(ctx, psi0)(probes)) / scale
    reports.append(make_report("ground.annihilation", lowered, probes, tol["ground"]))
    reports.append(make_report("ground.norm", abs(model.inner(psi0, psi0) - 1.0), 0.0, tol["ground"]))

    for n in range(n_eigen + 1):
        psi = eigenfunction(model, n)
        vals = psi(probes)
        res = np.abs(apply_hamiltonian(ctx, psi)(probes) - energy(n, p) * vals) / np.max(np.abs(vals))
        reports.append(make_report(f"eigen.n{n}", res, probes, tol["eigen"]))

    cond_probes = verification_probes(p.kind, p.s)
    if p.is_macfarlane:
        reports += macfarlane_condition_residuals(ctx, cond_probes, tol["conditions"])
    else:
        reports += dubna_condition_residuals(ctx, cond_probes, tol["conditions"])
    if not model.is_periodic:
        reports.append(f_ratio_report(model.structure.coeffs, p, cond_probes, tol["f_ratio"]))

    rec = [max(second_recursion_residual(n, x, p) for n in range(11)) for x in cond_probes]
    reports.append(make_report("hermite.second_recursion", rec, cond_probes, tol["second_recursion"]))
    agree = []
    for n in range(13):
        a, b = hermite_series(n, cond_probes, p), hermite_recursion_eval(n, cond_probes, p)
        agree.append(np.abs(a - b) / max(1.0, float(np.max(np.abs(b)))))
    reports.append(
        make_report("hermite.series_vs_recursion", np.max(agree, axis=0), cond_probes, tol["second_recursion"])
    )

    for spec in (RedundantFactorSpec(1, 0, 0, 0), RedundantFactorSpec(2, 1, 1, 0), RedundantFactorSpec(0, -1, 0, 2)):
        reports.append(ginv_residual(spec, p.s, cond_probes, tol["ginv"]))
    for spec in (RedundantFactorSpec(0, 0), RedundantFactorSpec(1, 0, 0, 0)):
        for r in appendix_system_residuals(p.s, spec, cond_probes, tol["appendix"]):
            reports.append(dataclasses.replace(r, name=f"{r.name}[k={spec.kappa:g},l={spec.lam:g}]"))

    adj, pairs = [], []
    for m in range(n_eigen + 1):
        for n in range(max(0, m - 1), min(n_eigen, m + 1) + 1):
            adj.append(adjointness_residual(model, eigenfunction(model, m), eigenfunction(model, n)))
            pairs.append(complex(m, n))
    reports.append(make_report("adjointness", adj, pairs, tol["adjoint"]))

    via_ladder = []
    for n in range(1, n_eigen + 1):
        closed = eigenfunction(model, n)(probes)
        ladder = eigenfunction_via_ladder(model, n)(probes)
        via_ladder.append(np.max(np.abs(closed - ladder)) / np.max(np.abs(closed)))
    reports.append(make_report("ladder.closed_form", via_ladder, np.arange(1, n_eigen + 1), tol["eigen"]))

    if p.is_dubna:
        t_probes = avoid_lattice(p, np.linspace(0.2, 2.8, 11))
        candidates = (eigenfunction(model, 1), eigenfunction(model, 2), test_functions["gaussian"])
        for label, fn in (("bilinear", T_bilinear_residual), ("linear", T_linear_residual)):
            res = [fn(ctx, psi, t_probes) for psi in candidates]
            reports.append(make_report(f"t_operator.{label}", res, [1, 2, -1], tol["t_operator"]))
        t_res = []
        for n in range(4):
            psi = eigenfunction(model, n)
            vals = psi(probes)
            t_res.append(np.max(np.abs(apply_T(ctx, psi)(probes) - t_eigenvalue(p, n) * vals)) / np.max(np.abs(vals)))
        reports.append(make_report("t_operator.eigenvalue", t_res, np.arange(4), tol["t_eigen"]))

    reports.append(classical_limit_report(tolerance=tol["classical"]))
    return sorted(reports, key=lambda r: r.name)
