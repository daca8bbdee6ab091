"""Command-line front end: ``qosc {spectrum,hermite,wavefunction,gram,verify}``.

Numbers are written in 17-significant-digit scientific notation; JSON
carries them as strings.  Exit codes: 0 success, 1 verification failure,
2 configuration error, 3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytic import GaussianSuperposition
from .core import Kind, energy, make_params, spacing_ratio
from .errors import ConfigurationError, ConvergenceError, QOscError
from .hermite import hermite
from .operators import POLE_RADIUS, singular_points
from .states import GRAM_GUARD, OscillatorModel, eigenfunction, gram_matrix
from .verify import DEFAULT_TOLERANCES, reports_to_json, verification_suite

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3
FAULT_G_SCALE = 1.01
WAVEFUNCTION_MAX_N = 6


def fmt(x) -> str:
    return f"{float(x):.16e}"


def parse_coeffs(text: str) -> dict[int, float]:
    """``"0:1,1:0.5,-1:0.5"`` -> ``{0: 1.0, 1: 0.5, -1: 0.5}``."""
    out: dict[int, float] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        try:
            m, value = item.split(":")
            out[int(m)] = float(value)
        except ValueError:
            raise ConfigurationError(f"coeffs: cannot parse entry {item!r}; expected 'm:value'") from None
    if not out:
        raise ConfigurationError("coeffs: empty coefficient list")
    return out


@dataclass(frozen=True)
class RunConfig:
    kind: Kind = Kind.MACFARLANE
    s: float = 0.5
    a0: float = 0.0
    structure: str = "aperiodic"
    coeffs: dict = field(default_factory=lambda: {0: 1.0})
    n_max: int = 4
    format: str = "csv"
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        checks = (
            ("kind", lambda: Kind.parse(self.kind)),
            ("s", lambda: make_params(float(self.s), Kind.parse(self.kind))),
            ("a0", lambda: _finite(self.a0)),
            ("structure", lambda: _choice(self.structure, ("aperiodic", "periodic"))),
            ("coeffs", lambda: GaussianSuperposition(self.coeffs, float(self.s))),
            ("n_max", lambda: _nonneg_int(self.n_max)),
            ("format", lambda: _choice(self.format, ("csv", "json"))),
            ("tolerances", self._check_tolerances),
        )
        for name, check in checks:
            try:
                check()
            except (QOscError, ValueError, TypeError) as exc:
                raise ConfigurationError(f"{name}: {exc}") from None
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        object.__setattr__(self, "coeffs", dict(sorted((int(m), float(c)) for m, c in self.coeffs.items())))

    def _check_tolerances(self):
        for key, value in self.tolerances.items():
            if key not in DEFAULT_TOLERANCES:
                raise ValueError(f"unknown tolerance {key!r}; known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"tolerance {key!r} must be positive, got {value!r}")

    def params(self):
        return make_params(self.s, self.kind)

    def model(self) -> OscillatorModel:
        p = self.params()
        if self.structure == "periodic":
            return OscillatorModel.periodic(p, 0, self.a0)
        return OscillatorModel.aperiodic(p, self.coeffs, self.a0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["s"], d["a0"] = fmt(self.s), fmt(self.a0)
        d["coeffs"] = {str(m): fmt(c) for m, c in self.coeffs.items()}
        d["tolerances"] = {k: fmt(v) for k, v in sorted(self.tolerances.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(
            kind=d["kind"],
            s=float(d["s"]),
            a0=float(d["a0"]),
            structure=d["structure"],
            coeffs={int(m): float(c) for m, c in d["coeffs"].items()},
            n_max=int(d["n_max"]),
            format=d["format"],
            tolerances={k: float(v) for k, v in d["tolerances"].items()},
        )


def _finite(x):
    if not math.isfinite(float(x)):
        raise ValueError(f"must be finite, got {x!r}")


def _choice(value, options):
    if value not in options:
        raise ValueError(f"{value!r} is not one of {', '.join(options)}")


def _nonneg_int(n):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValueError(f"must be an integer >= 0, got {n!r}")


# --- output --------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, str)):
        return str(v).lower() if isinstance(v, bool) else v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def _json_cell(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    return fmt(v)


def render_table(header: list[str], rows: list[list], config: RunConfig, **meta) -> str:
    if config.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[_cell(v) for v in row] for row in rows])
        return buf.getvalue()
    body = {"config": config.to_dict(), "columns": header, "rows": [[_json_cell(v) for v in r] for r in rows]}
    body.update({k: _json_cell(v) for k, v in meta.items()})
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


# --- commands ------------------------------------------------------------


def cmd_spectrum(config: RunConfig) -> tuple[int, str]:
    p = config.params()
    rows = []
    for n in range(config.n_max + 1):
        e = energy(n, p)
        if n == 0:
            rows.append([n, e, None, None])
        else:
            rows.append([n, e, p.q_power(-2 * n), spacing_ratio(n, p)])
    return EXIT_OK, render_table(["n", "energy", "spacing", "ratio"], rows, config)


def _grid(args, default) -> np.ndarray:
    lo = default[0] if args.x_min is None else args.x_min
    hi = default[1] if args.x_max is None else args.x_max
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConfigurationError(f"x-min/x-max: need finite x-min < x-max, got [{lo}, {hi}]")
    if args.samples < 2:
        raise ConfigurationError(f"samples: need at least 2, got {args.samples}")
    return np.linspace(lo, hi, args.samples)


def cmd_hermite(config: RunConfig, n: int, x: np.ndarray) -> tuple[int, str]:
    values = hermite(n, x, config.params())
    rows = [[xi, v.real, v.imag] for xi, v in zip(x, values)]
    return EXIT_OK, render_table(["x", "re", "im"], rows, config, n=n)


def cmd_wavefunction(config: RunConfig, n: int, x: np.ndarray) -> tuple[int, str]:
    if n > WAVEFUNCTION_MAX_N:
        raise ConfigurationError(f"n: wavefunction sampling supports n <= {WAVEFUNCTION_MAX_N}, got {n}")
    model = config.model()
    p = model.params
    values = eigenfunction(model, n)(x)
    poles = np.asarray(singular_points(p, float(x[0]) - 1.0, float(x[-1]) + 1.0))
    radius = max(POLE_RADIUS, 1e-2 * p.s)
    rows = []
    for xi, v in zip(x, values):
        flag = bool(poles.size and np.min(np.abs(poles - xi)) < radius)
        rows.append([xi, v.real, v.imag, abs(v) ** 2, flag])
    return EXIT_OK, render_table(["x", "re", "im", "abs2", "pole_adjacent"], rows, config, n=n)


def cmd_gram(config: RunConfig) -> tuple[int, str]:
    if config.n_max > GRAM_GUARD - 1:
        raise ConfigurationError(f"n_max: Gram matrices support n_max <= {GRAM_GUARD - 1}, got {config.n_max}")
    gram = gram_matrix(config.model(), config.n_max)
    off = gram - np.diag(np.diag(gram))
    rows = [[m, n, gram[m, n].real, gram[m, n].imag] for m in range(gram.shape[0]) for n in range(gram.shape[1])]
    max_off = float(np.max(np.abs(off))) if gram.shape[0] > 1 else 0.0
    diag_err = float(np.max(np.abs(np.diag(gram) - 1.0)))
    # the signed Dubna pairing is not manifestly positive; report rather than hide a negative norm
    negative = ";".join(str(n) for n in np.flatnonzero(np.diag(gram).real <= 0.0)) or "none"
    summary = dict(max_offdiagonal=max_off, max_diagonal_error=diag_err, negative_diagonal=negative)
    text = render_table(["m", "n", "re", "im"], rows, config, **summary)
    if config.format == "csv":
        text += " ".join(["#"] + [f"{k}={_cell(v)}" for k, v in summary.items()]) + "\n"
    return EXIT_OK, text


def cmd_verify(config: RunConfig, inject_fault: bool = False) -> tuple[int, str]:
    reports = verification_suite(
        config.model(), tolerances=config.tolerances, g_scale=FAULT_G_SCALE if inject_fault else 1.0
    )
    failed = [r.name for r in reports if not r.passed]
    text = reports_to_json(reports, config=config.to_dict(), inject_fault=inject_fault, failed=failed) + "\n"
    return (EXIT_VERIFY if failed else EXIT_OK), text


# --- argument handling ---------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with key = value pairs under [run]; flags override it")
    common.add_argument("--kind", choices=[k.value for k in Kind])
    common.add_argument("--s", type=float, help="deformation scale, 0 < s <= 1.5")
    common.add_argument("--a0", type=float, help="constant phase in h")
    common.add_argument("--structure", choices=["aperiodic", "periodic"])
    common.add_argument("--coeffs", help='Gaussian coefficients, e.g. "0:1,1:0.5,-1:0.5"')
    common.add_argument("--n-max", type=int, dest="n_max")
    common.add_argument("--format", choices=["csv", "json"])
    for name in sorted(DEFAULT_TOLERANCES):
        common.add_argument(f"--tol-{name.replace('_', '-')}", type=float, dest=f"tol_{name}", metavar="TOL")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--n", type=int, default=0, help="level / degree")
    grid.add_argument("--x-min", type=float, dest="x_min")
    grid.add_argument("--x-max", type=float, dest="x_max")
    grid.add_argument("--samples", type=int, default=201)

    parser = argparse.ArgumentParser(prog="qosc", description="q-deformed harmonic oscillators")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="energies, spacings and spacing ratios")
    sub.add_parser("hermite", parents=[common, grid], help="q-Hermite function on a grid")
    sub.add_parser("wavefunction", parents=[common, grid], help="eigenfunction samples on a grid")
    sub.add_parser("gram", parents=[common], help="Gram matrix of the first eigenfunctions")
    verify = sub.add_parser("verify", parents=[common], help="run every identity check")
    verify.add_argument(
        "--inject-fault", action="store_true", help="test hook: scale g by 1%% inside the operators; must fail"
    )
    return parser


def _load_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path!r}: {exc.strerror}") from None
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config: {exc}") from None
    section = cp["run"] if cp.has_section("run") else {}
    return {k.replace("-", "_"): v for k, v in section.items()}


def config_from_args(args) -> RunConfig:
    raw = _load_file(args.config) if args.config else {}
    values: dict = {}
    tolerances: dict = {}
    converters = {"s": float, "a0": float, "n_max": int}
    for key, text in raw.items():
        if key.startswith("tol_"):
            tolerances[key[4:]] = text
            continue
        if key not in ("kind", "s", "a0", "structure", "coeffs", "n_max", "format"):
            raise ConfigurationError(f"{key}: unknown configuration key")
        values[key] = text
    for key in ("kind", "s", "a0", "structure", "coeffs", "n_max", "format"):
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    for name in DEFAULT_TOLERANCES:
        if getattr(args, f"tol_{name}", None) is not None:
            tolerances[name] = getattr(args, f"tol_{name}")
    for key, conv in converters.items():
        if key in values:
            try:
                values[key] = conv(values[key])
            except ValueError:
                raise ConfigurationError(f"{key}: cannot parse {values[key]!r}") from None
    for key, text in list(tolerances.items()):
        try:
            tolerances[key] = float(text)
        except ValueError:
            raise ConfigurationError(f"tol_{key}: cannot parse {text!r}") from None
    if "coeffs" in values:
        values["coeffs"] = parse_coeffs(values["coeffs"])
    return RunConfig(tolerances=tolerances, **values)


def run(argv=None) -> tuple[int, str]:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    if args.command == "spectrum":
        return cmd_spectrum(config)
    if args.command == "gram":
        return cmd_gram(config)
    if args.command == "verify":
        return cmd_verify(config, inject_fault=args.inject_fault)
    if args.n < 0:
        raise ConfigurationError(f"n: must be >= 0, got {args.n}")
    if args.command == "hermite":
        return cmd_hermite(config, args.n, _grid(args, (-2.0, 2.0)))
    default = config.model().domain()
    return cmd_wavefunction(config, args.n, _grid(args, default))


def main(argv=None) -> int:
    try:
        code, text = run(argv)
    except ConfigurationError as exc:
        print(f"qosc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"qosc: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except QOscError as exc:
        print(f"qosc: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(text)
    if code == EXIT_VERIFY:
        failed = json.loads(text)["failed"]
        print(f"qosc: verification failed: {', '.join(failed)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
