"""Deformation parameters, energy spectrum and q-combinatorics.

Everything here is independent of the coordinate representation: the
spectrum follows from the q-deformed commutation relation alone.  Energies
are in units of hbar*omega.

All powers of ``q`` are evaluated through ``log_q`` with ``expm1`` so that
the formulas stay accurate in the near-classical regime ``q -> 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, RangeError, SingularOperatorError

__all__ = [
    "Kind",
    "DeformationParams",
    "SpectrumEntry",
    "S_MAX",
    "make_params",
    "params_from_q",
    "energy",
    "energy_via_recursion",
    "spectrum",
    "spacing_ratio",
    "normalization",
    "log_normalization",
    "q_binomial",
    "macfarlane_bounds",
]

S_MAX = 1.5


class Kind(str, enum.Enum):
    MACFARLANE = "macfarlane"
    DUBNA = "dubna"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise DomainError(
                f"kind must be one of {[k.value for k in cls]}, got {value!r}"
            ) from None


@dataclass(frozen=True)
class DeformationParams:
    """The ``(s, t, q, kind)`` tuple.

    ``q = exp(s**2 + t**2 + 3*s*t)`` with ``t = 0`` (Macfarlane, ``q >= 1``)
    or ``t = -s`` (Dubna, ``q <= 1``).  ``log_q`` is the exact exponent and is
    kept alongside ``q`` so near-unity powers do not lose digits.
    """

    s: float
    t: float
    q: float
    log_q: float
    kind: Kind

    @property
    def is_macfarlane(self) -> bool:
        return self.kind is Kind.MACFARLANE

    @property
    def is_dubna(self) -> bool:
        return self.kind is Kind.DUBNA

    @property
    def s_plus_t(self) -> float:
        return self.s + self.t

    @property
    def period(self) -> float:
        """Period ``2*pi/s`` of the q-Hermite functions and of the Gaussian lattice."""
        return 2.0 * math.pi / self.s

    def q_power(self, k: float) -> float:
        """``q**k`` computed from ``log_q``."""
        try:
            return math.exp(k * self.log_q)
        except OverflowError:
            raise RangeError(f"q**{k} overflows for s={self.s}") from None


def make_params(s: float, kind: Kind | str, *, unguarded: bool = False) -> DeformationParams:
    """Build the parameters of one of the two oscillator families.

    ``0 < s <= 1.5`` is enforced unless ``unguarded=True``; ``s > 0`` always is.
    """
    kind = Kind.parse(kind)
    s = float(s)
    if not math.isfinite(s) or s <= 0.0:
        raise DomainError(f"s must be a positive finite number, got {s!r}")
    if not unguarded and s > S_MAX:
        raise DomainError(f"s={s} outside the guarded interval (0, {S_MAX}]; use unguarded=True")
    t = 0.0 if kind is Kind.MACFARLANE else -s
    log_q = s * s + t * t + 3.0 * s * t
    try:
        q = math.exp(log_q)
    except OverflowError:
        raise RangeError(f"q = exp({log_q}) overflows") from None
    return DeformationParams(s=s, t=t, q=q, log_q=log_q, kind=kind)


def params_from_q(q: float, *, unguarded: bool = True) -> DeformationParams:
    """Parameters realizing a given ``q != 1``: Macfarlane for ``q > 1``, Dubna for ``q < 1``."""
    q = float(q)
    if not q > 0.0 or q == 1.0 or not math.isfinite(q):
        raise DomainError(f"q must be positive, finite and != 1, got {q!r}")
    kind = Kind.MACFARLANE if q > 1.0 else Kind.DUBNA
    s = math.sqrt(abs(math.log(q)))
    return make_params(s, kind, unguarded=unguarded)


def _check_level(n: int, lowest: int = 0) -> int:
    if isinstance(n, bool) or int(n) != n or n < lowest:
        raise DomainError(f"level index must be an integer >= {lowest}, got {n!r}")
    return int(n)


def _neg_expm1(x: float) -> float:
    """``1 - exp(x)``, accurate for small ``x``."""
    return -math.expm1(x)


def energy(n: int, params: DeformationParams) -> float:
    """Closed-form eigenvalue ``E_n = (1 - q**(-2n)) / (q**2 - 1) + 1/2``."""
    n = _check_level(n)
    lq = params.log_q
    if lq == 0.0:
        return n + 0.5
    try:
        num = _neg_expm1(-2.0 * n * lq)
    except OverflowError:
        raise RangeError(f"q**(-2n) overflows for n={n}, s={params.s}") from None
    value = num / math.expm1(2.0 * lq) + 0.5
    if not math.isfinite(value):
        raise RangeError(f"E_{n} is not representable for s={params.s}")
    return value


def energy_via_recursion(n: int, params: DeformationParams) -> float:
    """Iterate ``q (E_n - C) = q**-1 (E_{n-1} - C)`` from ``E_0 = 1/2``.

    ``C = (q + 1/q) / (2 (q - 1/q))``.  Independent of :func:`energy`; it
    refuses ``q == 1`` where ``C`` is singular.
    """
    n = _check_level(n)
    q = params.q
    if q == 1.0:
        raise SingularOperatorError("q == 1 makes the recursion constant singular; use the limit form n + 1/2")
    c = 0.5 * (q + 1.0 / q) / (q - 1.0 / q)
    ratio = 1.0 / (q * q)
    e = 0.5
    for _ in range(n):
        e = c + ratio * (e - c)
    if not math.isfinite(e):
        raise RangeError(f"E_{n} overflows for s={params.s}")
    return e


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    energy: float


def spectrum(n_max: int, params: DeformationParams) -> list[SpectrumEntry]:
    return [SpectrumEntry(n, energy(n, params)) for n in range(_check_level(n_max) + 1)]


def _spacing(n: int, params: DeformationParams) -> float:
    # E_n - E_{n-1} = q**(-2(n-1)) (1 - q**-2) / (q**2 - 1), free of the 1/2 offset
    lq = params.log_q
    if lq == 0.0:
        return 1.0
    try:
        lead = math.exp(-2.0 * (n - 1) * lq)
    except OverflowError:
        raise RangeError(f"spacing at n={n} overflows for s={params.s}") from None
    return lead * _neg_expm1(-2.0 * lq) / math.expm1(2.0 * lq)


def spacing_ratio(n: int, params: DeformationParams) -> float:
    """``(E_{n+1} - E_n) / (E_n - E_{n-1})``; equals ``q**-2``."""
    n = _check_level(n, lowest=1)
    below = _spacing(n, params)
    if below < 2.2250738585072014e-308:
        raise RangeError(f"spacing below machine resolution at n={n}, s={params.s}")
    return _spacing(n + 1, params) / below


def log_normalization(n: int, params: DeformationParams) -> float:
    """``log N_n`` with ``N_n = prod_{m=1..n} sqrt((q - 1/q) / (1 - q**(-2m)))``; never under/overflows."""
    n = _check_level(n)
    lq = params.log_q
    if lq == 0.0:
        return -0.5 * math.lgamma(n + 1)
    top = 2.0 * math.sinh(lq)
    log_total = 0.0
    for m in range(1, n + 1):
        radicand = top / _neg_expm1(-2.0 * m * lq)
        if not radicand > 0.0:
            raise ArithmeticError(f"internal inconsistency: negative radicand {radicand} at m={m}")
        log_total += 0.5 * math.log(radicand)
    return log_total


def normalization(n: int, params: DeformationParams) -> float:
    """``N_n = prod_{m=1..n} sqrt((q - 1/q) / (1 - q**(-2m)))``."""
    log_total = log_normalization(n, params)
    if not -708.0 < log_total < 709.0:
        raise RangeError(f"N_{n} = exp({log_total:.6g}) is not representable; use log_normalization")
    return math.exp(log_total)


def q_binomial(n: int, m: int, z: float) -> float:
    """Gaussian binomial with factors ``1 - z**(2(k+1))``; ``z = 1`` gives the ordinary binomial."""
    n = _check_level(n)
    if isinstance(m, bool) or int(m) != m or not 0 <= m <= n:
        raise DomainError(f"m must be an integer in [0, {n}], got {m!r}")
    m = int(m)
    z = float(z)
    if not 0.0 < z <= 1.0:
        raise DomainError(f"z must lie in (0, 1], got {z!r}")
    if z == 1.0:
        return float(math.comb(n, m))
    m = min(m, n - m)
    two_log_z = 2.0 * math.log(z)
    value = 1.0
    # [n, m] = prod_{k=1..m} (1 - z^{2(n-m+k)}) / (1 - z^{2k})
    for k in range(1, m + 1):
        value *= math.expm1((n - m + k) * two_log_z) / math.expm1(k * two_log_z)
    return value


def macfarlane_bounds(params: DeformationParams) -> tuple[float, float]:
    """Half-open band ``[1/2, 1/2 + 1/(q**2 - 1))`` holding the whole Macfarlane spectrum."""
    if not params.is_macfarlane or params.q <= 1.0:
        raise DomainError("bounds exist only for the Macfarlane type with q > 1; no upper bound exists for Dubna")
    return 0.5, 0.5 + 1.0 / math.expm1(2.0 * params.log_q)
