import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from photocount.cli import format_number, main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


def reemit_csv(text):
    rows = parse_csv(text)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        out = []
        for cell in row:
            try:
                value = float(cell)
            except ValueError:
                out.append(cell)
                continue
            out.append(format_number(value) if cell not in ("", None) else cell)
        writer.writerow(out)
    return buf.getvalue()


class TestPosterior:
    def test_absorbing_counter_densities(self, capsys):
        code, out, _ = run_cli(["posterior", "--counter", "pc", "--outcome", "1"], capsys)
        assert code == 0
        rows = parse_csv(out)
        assert rows[0] == ["theta_degrees", "prior_density", "posterior_density"]
        assert len(rows) == 182
        prior = {float(r[1]) for r in rows[1:]}
        assert len(prior) == 1 and abs(prior.pop() - 1 / (4 * math.pi)) < 1e-12
        last = rows[-1]
        assert float(last[0]) == 180.0
        assert abs(float(last[2]) - 1 / (2 * math.pi)) < 1e-9
        first = rows[1]
        assert float(first[2]) < 1e-12  # one-count excludes the vacuum pole

    def test_qnd_quantum_density_at_zero(self, capsys):
        code, out, _ = run_cli(["posterior", "--counter", "qqc"], capsys)
        assert code == 0
        rows = parse_csv(out)
        assert abs(float(rows[1][2]) - 1 / (10 * math.pi)) < 1e-9

    def test_unknown_outcome_is_usage_error(self, capsys):
        code, _, err = run_cli(["posterior", "--outcome", "7"], capsys)
        assert code == 2
        assert "outcome" in err


class TestMetricsCommand:
    def test_one_count_row_values(self, capsys):
        values = {}
        for counter in ("pc", "qc", "qpc", "qqc"):
            code, out, _ = run_cli(["metrics", "--counter", counter], capsys)
            assert code == 0
            rows = parse_csv(out)
            header = rows[0]
            one = next(r for r in rows[1:] if r[0] == "1")
            values[counter] = dict(zip(header, one))
        gains = [float(values[c]["information_gain"]) for c in ("pc", "qc", "qpc", "qqc")]
        assert np.allclose(gains, [0.2787, 0.0270, 0.2787, 0.0901], atol=5e-4)
        revs = [float(values[c]["reversibility"]) for c in ("pc", "qc", "qpc", "qqc")]
        assert np.allclose(revs, [0.0, 2 / 3, 0.0, 2 / 5], atol=1e-12)
        fids = [float(values[c]["fidelity"]) for c in ("pc", "qc", "qpc", "qqc")]
        assert np.allclose(fids, [0.5333, 0.3195, 0.8, 0.9659], atol=5e-4)

    def test_json_envelope(self, capsys):
        code, out, _ = run_cli(["metrics", "--counter", "qc", "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert list(doc.keys()) == ["command", "config", "results", "version"]
        assert doc["command"] == "metrics"
        assert doc["config"]["counter"] == "qc"
        assert "threads" not in doc["config"]
        assert abs(doc["results"]["outcomes"]["1"]["reversibility"] - 2 / 3) < 1e-9

    def test_joint_counter_has_four_outcomes(self, capsys):
        code, out, _ = run_cli(["metrics", "--counter", "joint"], capsys)
        assert code == 0
        rows = parse_csv(out)
        labels = [r[0] for r in rows[1:]]
        assert labels == ["00", "01", "10", "11", "mean"]


class TestSweep:
    def test_fitted_coefficients(self, capsys):
        code, out, _ = run_cli(["sweep", "--counter", "pc"], capsys)
        assert code == 0
        rows = parse_csv(out)
        coeff = next(r for r in rows if r[0] == "gamma2_coefficient")
        assert abs(float(coeff[1]) - 0.139) < 1e-3
        assert abs(float(coeff[2]) - 7 / 30) < 1e-3
        assert abs(float(coeff[3]) - 1.0) < 1e-2

    def test_emitting_counter_fidelity_coefficient(self, capsys):
        code, out, _ = run_cli(["sweep", "--counter", "qc"], capsys)
        rows = parse_csv(out)
        coeff = next(r for r in rows if r[0] == "gamma2_coefficient")
        assert abs(float(coeff[2]) - 1.02) < 1e-2

    def test_range_validation(self, capsys):
        code, _, err = run_cli(["sweep", "--gamma-min", "0.4", "--gamma-max", "0.2"], capsys)
        assert code == 2
        code, _, _ = run_cli(["sweep", "--steps", "2"], capsys)
        assert code == 2


class TestHaar:
    def test_two_level_gains_agree(self, capsys):
        code, out, _ = run_cli(
            ["haar", "--d", "2", "--samples", "100000", "--seed", "7"], capsys
        )
        assert code == 0
        rows = {r[0]: r for r in parse_csv(out)[1:]}
        diff = float(rows["difference_qpc_minus_pc"][1])
        se = float(rows["difference_qpc_minus_pc"][2])
        # on two levels the conditionals coincide sample by sample: diff == 0
        assert abs(diff) <= 3 * se

    def test_three_level_gap_is_positive(self, capsys):
        code, out, _ = run_cli(
            ["haar", "--d", "3", "--samples", "100000", "--format", "json"], capsys
        )
        doc = json.loads(out)
        gap = doc["results"]["difference_qpc_minus_pc"]
        assert gap["sign"] == 1
        assert gap["value"] > 3 * gap["standard_error"]

    def test_sample_floor(self, capsys):
        code, _, _ = run_cli(["haar", "--samples", "1000"], capsys)
        assert code == 2


class TestReverse:
    def test_emitting_counter_statistics(self, capsys):
        code, out, _ = run_cli(
            ["reverse", "--counter", "qc", "--samples", "50000"], capsys
        )
        assert code == 0
        row = parse_csv(out)[1]
        analytic, empirical, fidelity = float(row[0]), float(row[1]), float(row[2])
        assert abs(analytic - 2 / 3) < 1e-9
        one_counts = int(row[3])
        sigma = math.sqrt(analytic * (1 - analytic) / one_counts)
        assert abs(empirical - analytic) < 4 * sigma
        assert fidelity > 1 - 1e-10

    def test_absorbing_counter_exits_nonreversible(self, capsys):
        code, _, err = run_cli(["reverse", "--counter", "pc"], capsys)
        assert code == 3
        assert "background = 0" in err


class TestOutputDiscipline:
    def test_csv_round_trip_is_bit_identical(self, capsys):
        for args in (
            ["metrics", "--counter", "qqc"],
            ["sweep", "--counter", "qc", "--steps", "5"],
            ["posterior", "--counter", "qc"],
        ):
            _, out, _ = run_cli(args, capsys)
            assert reemit_csv(out) == out

    def test_json_round_trip_is_bit_identical(self, capsys):
        from photocount.cli import render_json

        for args in (
            ["metrics", "--counter", "pc", "--format", "json"],
            ["reverse", "--counter", "qqc", "--samples", "10000", "--format", "json"],
        ):
            _, out, _ = run_cli(args, capsys)
            doc = json.loads(out)
            assert render_json(doc) == out

    def test_reruns_and_thread_counts_are_byte_identical(self, capsys):
        base = ["metrics", "--counter", "qqc", "--format", "json"]
        _, first, _ = run_cli(base, capsys)
        _, second, _ = run_cli(base, capsys)
        _, threaded, _ = run_cli(base + ["--threads", "4"], capsys)
        assert first == second == threaded

    def test_output_flag_writes_the_same_bytes(self, tmp_path, capsys):
        target = tmp_path / "report.csv"
        code, out, _ = run_cli(["metrics", "--counter", "qc"], capsys)
        code2, _, _ = run_cli(["metrics", "--counter", "qc", "--output", str(target)], capsys)
        assert code == code2 == 0
        assert target.read_bytes().decode() == out

    def test_environment_overrides_and_flag_precedence(self, capsys, monkeypatch):
        monkeypatch.setenv("PHOTOCOUNT_GAMMA", "0.2")
        _, out, _ = run_cli(["metrics", "--counter", "pc", "--format", "json"], capsys)
        assert json.loads(out)["config"]["gamma"] == 0.2
        _, out, _ = run_cli(
            ["metrics", "--counter", "pc", "--gamma", "0.1", "--format", "json"], capsys
        )
        assert json.loads(out)["config"]["gamma"] == 0.1

    def test_invalid_environment_value_is_usage_error(self, capsys, monkeypatch):
        monkeypatch.setenv("PHOTOCOUNT_SEED", "not-a-number")
        code, _, err = run_cli(["metrics"], capsys)
        assert code == 2
        assert "PHOTOCOUNT_SEED" in err

    def test_gamma_validation_is_usage_error(self, capsys):
        code, _, _ = run_cli(["metrics", "--gamma", "0.7"], capsys)
        assert code == 2


class TestFreshProcess:
    def test_subprocess_rerun_is_byte_identical(self):
        cmd = [sys.executable, "-m", "photocount", "reverse", "--counter", "qqc",
               "--samples", "10000"]
        runs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
        assert runs[0] == runs[1]
        assert runs[0].endswith(b"\n")
