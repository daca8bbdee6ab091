import csv
import io
import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qoscillator import ConvergenceError, Kind, make_params
from qoscillator import cli
from qoscillator.cli import RunConfig, main, parse_coeffs, run
from qoscillator.verify import reports_from_json


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def oracle_energies(s, kind, n_max):
    """E_{n+1} = E_n + q^{-2(n+1)}, E_0 = 1/2, at 40 digits."""
    mpmath.mp.dps = 40
    s = mpmath.mpf(s)
    log_q = s * s if kind == "macfarlane" else -s * s
    out, e = [], mpmath.mpf("0.5")
    for n in range(n_max + 1):
        out.append(e)
        e += mpmath.exp(-2 * (n + 1) * log_q)
    return [float(v) for v in out]


@pytest.mark.parametrize("kind,n_max", [("macfarlane", 3), ("dubna", 2), ("dubna", 6)])
def test_spectrum_matches_oracle(kind, n_max):
    """Printed energies agree with a high-precision recursion to 1e-12 relative."""
    code, text = run(["spectrum", "--kind", kind, "--s", "1", "--n-max", str(n_max)])
    assert code == 0
    rows = table(text)
    assert [int(r["n"]) for r in rows] == list(range(n_max + 1))
    for row, expected in zip(rows, oracle_energies(1.0, kind, n_max)):
        assert float(row["energy"]) == pytest.approx(expected, rel=1e-12)


def test_spectrum_macfarlane_values():
    """Macfarlane s = 1 energies to the printed digits."""
    _, text = run(["spectrum", "--kind", "macfarlane", "--s", "1", "--n-max", "3"])
    energies = [float(r["energy"]) for r in table(text)]
    assert energies == pytest.approx([0.5, 0.63533528, 0.65365092, 0.65612967], abs=1e-8)


def test_spectrum_spacing_and_ratio():
    """Spacing column is E_n - E_{n-1} and the ratio column is q^-2."""
    _, text = run(["spectrum", "--kind", "dubna", "--s", "0.7", "--n-max", "5"])
    rows = table(text)
    q = math.exp(-0.49)
    for prev, row in zip(rows, rows[1:]):
        spacing = float(row["energy"]) - float(prev["energy"])
        assert float(row["spacing"]) == pytest.approx(spacing, rel=1e-12)
        assert float(row["ratio"]) == pytest.approx(q**-2, rel=1e-12)


def test_spectrum_single_row():
    """n_max = 0 gives one row with blank spacing and ratio."""
    _, text = run(["spectrum", "--n-max", "0"])
    assert text.splitlines()[1:] == ["0,5.0000000000000000e-01,,"]


def test_numbers_use_17_significant_digits():
    """Every numeric CSV cell is scientific notation with 16 fractional digits."""
    _, text = run(["spectrum", "--n-max", "2"])
    for row in table(text)[1:]:
        mantissa = row["energy"].split("e")[0]
        assert len(mantissa.split(".")[1]) == 16


def test_json_numbers_are_strings():
    """JSON output carries numbers as strings."""
    _, text = run(["spectrum", "--n-max", "2", "--format", "json"])
    body = json.loads(text)
    assert body["columns"] == ["n", "energy", "spacing", "ratio"]
    assert body["rows"][0] == [0, "5.0000000000000000e-01", None, None]
    assert RunConfig.from_dict(body["config"]) == RunConfig(n_max=2, format="json")


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--n-max", "4"],
        ["hermite", "--kind", "dubna", "--n", "3"],
        ["wavefunction", "--n", "2", "--samples", "51"],
        ["gram", "--n-max", "2", "--format", "json"],
    ],
)
def test_outputs_are_byte_deterministic(argv):
    """Repeated runs with the same arguments produce identical text."""
    assert run(argv) == run(argv)


def test_hermite_columns():
    """Dubna H_1 equals (2/s) sin(sx); H_0 is the constant 1."""
    s = 0.8
    _, text = run(["hermite", "--kind", "dubna", "--s", str(s), "--n", "1", "--samples", "41"])
    rows = table(text)
    x = np.array([float(r["x"]) for r in rows])
    assert np.allclose([float(r["re"]) for r in rows], 2 / s * np.sin(s * x), rtol=0, atol=1e-13)
    assert np.allclose([float(r["im"]) for r in rows], 0.0, atol=1e-13)
    _, text = run(["hermite", "--kind", "macfarlane", "--n", "0", "--samples", "11"])
    assert {(r["re"], r["im"]) for r in table(text)} == {("1.0000000000000000e+00", "0.0000000000000000e+00")}


@pytest.mark.parametrize("kind", ["macfarlane", "dubna"])
def test_hermite_period(kind):
    """Rows at x and x + 2 pi / s agree to 1e-11."""
    s, n = 0.6, 5
    period = 2 * math.pi / s
    base = ["hermite", "--kind", kind, "--s", str(s), "--n", str(n), "--samples", "21"]
    _, a = run(base + ["--x-min", "-1", "--x-max", "1"])
    _, b = run(base + ["--x-min", repr(-1 + period), "--x-max", repr(1 + period)])
    for ra, rb in zip(table(a), table(b)):
        assert complex(float(ra["re"]), float(ra["im"])) == pytest.approx(
            complex(float(rb["re"]), float(rb["im"])), abs=1e-11
        )


@pytest.mark.parametrize("kind", ["macfarlane", "dubna"])
def test_wavefunction_riemann_sum(kind):
    """The sum of |psi_0|^2 dx over 2001 default-window points is 1 to 1e-3."""
    _, text = run(["wavefunction", "--kind", kind, "--s", "0.5", "--n", "0", "--samples", "2001"])
    rows = table(text)
    x = np.array([float(r["x"]) for r in rows])
    total = np.sum([float(r["abs2"]) for r in rows]) * (x[1] - x[0])
    assert total == pytest.approx(1.0, abs=1e-3)


def test_wavefunction_ground_positive_near_origin():
    """psi_0 is real and positive around x = 0."""
    _, text = run(["wavefunction", "--n", "0", "--x-min", "-0.5", "--x-max", "0.5", "--samples", "11"])
    for row in table(text):
        assert float(row["re"]) > 0
        assert abs(float(row["im"])) < 1e-14 * float(row["re"])


def test_dubna_wavefunction_pole_flag_and_zero():
    """The Dubna ground state vanishes at pi/(2s) like sqrt(cos sx), and that point is flagged."""
    s = 0.5
    zero = math.pi / (2 * s)
    _, text = run(
        ["wavefunction", "--kind", "dubna", "--s", str(s), "--n", "0",
         "--x-min", repr(zero - 0.2), "--x-max", repr(zero + 0.2), "--samples", "5"]
    )
    rows = table(text)
    flags = [r["pole_adjacent"] for r in rows]
    assert flags == ["false", "false", "true", "false", "false"]
    assert float(rows[2]["abs2"]) < 1e-20
    # |psi|^2 ~ |cos sx| near the zero, so halving the distance halves |psi|^2
    _, near = run(
        ["wavefunction", "--kind", "dubna", "--s", str(s), "--n", "0",
         "--x-min", repr(zero - 2e-3), "--x-max", repr(zero - 1e-3), "--samples", "2"]
    )
    far_val, near_val = (float(r["abs2"]) for r in table(near))
    assert near_val / far_val == pytest.approx(0.5, rel=1e-2)


def test_gram_output():
    """The Gram matrix is the identity and the summary line reports it."""
    _, text = run(["gram", "--kind", "dubna", "--s", "0.5", "--n-max", "3", "--format", "json"])
    body = json.loads(text)
    assert len(body["rows"]) == 16
    assert float(body["max_offdiagonal"]) < 1e-8
    assert float(body["max_diagonal_error"]) < 1e-8
    assert body["negative_diagonal"] == "none"
    gram = np.zeros((4, 4), dtype=complex)
    for m, n, re, im in body["rows"]:
        gram[m, n] = complex(float(re), float(im))
    assert np.allclose(gram, gram.conj().T, atol=1e-12)
    _, text = run(["gram", "--n-max", "2"])
    assert text.splitlines()[-1].startswith("# max_offdiagonal=")
    assert text.splitlines()[-1].endswith("negative_diagonal=none")


def test_gram_reports_negative_diagonal(monkeypatch):
    """A non-positive diagonal entry is named in the summary instead of passing silently."""
    monkeypatch.setattr(cli, "gram_matrix", lambda model, n_max: np.diag([1.0, -0.5, 1.0]).astype(complex))
    _, text = run(["gram", "--n-max", "2", "--format", "json"])
    assert json.loads(text)["negative_diagonal"] == "1"


@pytest.mark.parametrize("kind", ["macfarlane", "dubna"])
def test_verify_exit_codes(kind, capsys):
    """Default configurations pass; the injected fault fails with names on stderr."""
    assert main(["verify", "--kind", kind]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["failed"] == [] and body["inject_fault"] is False
    assert main(["verify", "--kind", kind, "--inject-fault"]) == 1
    captured = capsys.readouterr()
    body = json.loads(captured.out)
    assert body["failed"] and "verification failed" in captured.err
    assert all(name in captured.err for name in body["failed"])


def test_verify_report_round_trip():
    """The verify JSON re-parses into reports and config without loss."""
    _, text = run(["verify", "--kind", "dubna", "--format", "json"])
    reports = reports_from_json(text)
    assert len(reports) > 20
    again = json.loads(text)
    assert [r.to_dict() for r in reports] == again["reports"]
    assert RunConfig.from_dict(again["config"]).kind is Kind.DUBNA


def test_tolerance_override_can_fail_verification():
    """A tolerance tighter than roundoff turns a passing check into a failure."""
    code, text = run(["verify", "--tol-ground", "1e-30"])
    assert code == 1
    assert "ground.annihilation" in json.loads(text)["failed"] or "ground.norm" in json.loads(text)["failed"]


@pytest.mark.parametrize(
    "argv,field",
    [
        (["spectrum", "--s", "0"], "s"),
        (["spectrum", "--s", "nan"], "s"),
        (["spectrum", "--coeffs", "0:1,x"], "coeffs"),
        (["spectrum", "--n-max", "-1"], "n_max"),
        (["gram", "--n-max", "9"], "n_max"),
        (["wavefunction", "--n", "7"], "n"),
        (["hermite", "--x-min", "1", "--x-max", "0"], "x-min/x-max"),
        (["verify", "--tol-eigen", "-1"], "tolerances"),
    ],
)
def test_config_errors_exit_2(argv, field, capsys):
    """Invalid configurations exit with code 2 and name the offending field."""
    assert main(argv) == 2
    assert f"{field}:" in capsys.readouterr().err


def test_convergence_failure_exits_3(monkeypatch, capsys):
    """A quadrature convergence failure maps to exit code 3."""

    def fail(*args, **kwargs):
        raise ConvergenceError("subdivision budget exhausted")

    monkeypatch.setattr(cli, "gram_matrix", fail)
    assert main(["gram", "--n-max", "2"]) == 3
    assert "convergence" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    """Values come from the INI file unless a flag overrides them."""
    path = tmp_path / "run.ini"
    path.write_text("kind = dubna\ns = 0.7\nn_max = 3\ncoeffs = 0:1,1:0.5,-1:0.5\ntol_eigen = 1e-7\n")
    _, from_file = run(["spectrum", "--config", str(path), "--format", "json"])
    config = RunConfig.from_dict(json.loads(from_file)["config"])
    assert (config.kind, config.s, config.n_max) == (Kind.DUBNA, 0.7, 3)
    assert config.coeffs == {-1: 0.5, 0: 1.0, 1: 0.5}
    assert config.tolerances == {"eigen": 1e-7}
    _, overridden = run(["spectrum", "--config", str(path), "--s", "0.4", "--format", "json"])
    assert RunConfig.from_dict(json.loads(overridden)["config"]).s == 0.4


def test_config_file_errors(tmp_path, capsys):
    """Unknown keys and unreadable files are configuration errors."""
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nwidth = 3\n")
    assert main(["spectrum", "--config", str(path)]) == 2
    assert "width:" in capsys.readouterr().err
    assert main(["spectrum", "--config", str(tmp_path / "missing.ini")]) == 2


def test_parse_coeffs():
    """Coefficient lists parse as index:value pairs."""
    assert parse_coeffs("0:1, 1:0.5,-1:0.5") == {0: 1.0, 1: 0.5, -1: 0.5}


@settings(max_examples=50, deadline=None)
@given(
    kind=st.sampled_from(["macfarlane", "dubna"]),
    s=st.floats(0.05, 1.5),
    a0=st.floats(-3, 3),
    coeffs=st.dictionaries(st.integers(-2, 2), st.floats(0.1, 2.0), min_size=1, max_size=3),
    n_max=st.integers(0, 10),
    tol=st.floats(1e-14, 1e-2),
)
def test_run_config_round_trip(kind, s, a0, coeffs, n_max, tol):
    """RunConfig survives to_dict / JSON / from_dict exactly."""
    coeffs.setdefault(0, 1.0)
    config = RunConfig(kind, s, a0, "aperiodic", coeffs, n_max, "json", {"eigen": tol})
    assert RunConfig.from_dict(json.loads(json.dumps(config.to_dict()))) == config


def test_periodic_structure_runs():
    """The periodic structure samples over one cell by default."""
    _, text = run(["wavefunction", "--structure", "periodic", "--s", "0.5", "--samples", "5"])
    x = [float(r["x"]) for r in table(text)]
    assert x[0] == pytest.approx(-2 * math.pi) and x[-1] == pytest.approx(2 * math.pi)
    assert make_params(0.5, "macfarlane").period == pytest.approx(4 * math.pi)
