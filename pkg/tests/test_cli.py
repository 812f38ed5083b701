import numpy as np
import pytest
from click.testing import CliRunner

from arraycal import file_digest, read_bundle, read_calibration
from arraycal.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def gen(runner, tmp_path, name="b.gptc", **kw):
    args = ["generate", "--scenario", kw.pop("scenario", "grid-4x8"),
            "--num-positions", str(kw.pop("num_positions", 16)),
            "--num-subcarriers", str(kw.pop("num_subcarriers", 8)),
            "--seed", str(kw.pop("seed", 1)),
            "-o", str(tmp_path / name)]
    for k, v in kw.items():
        args += [f"--{k.replace('_', '-')}", str(v)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    return tmp_path / name


class TestGenerate:
    def test_grid_scenario(self, runner, tmp_path):
        path = gen(runner, tmp_path)
        bundle = read_bundle(path)
        assert bundle.shape == (8, 32, 16)

    def test_distributed_scenario_labels(self, runner, tmp_path):
        path = gen(runner, tmp_path, scenario="distributed-4x-2x4")
        bundle = read_bundle(path)
        assert sorted(bundle.geometry.subarray_labels) == ["A", "B", "C", "D"]
        assert all(len(v) == 8 for v in bundle.geometry.subarray_labels.values())

    def test_deterministic_digest(self, runner, tmp_path):
        p1 = gen(runner, tmp_path, name="x1.gptc", seed=4)
        p2 = gen(runner, tmp_path, name="x2.gptc", seed=4)
        assert file_digest(p1) == file_digest(p2)

    def test_geometry_import(self, runner, tmp_path):
        geo = tmp_path / "geo.txt"
        geo.write_text("".join(f"{i}, 0, {i * 0.2}, 1.5\n" for i in range(4)))
        result = runner.invoke(main, [
            "generate", "--geometry", str(geo), "--num-positions", "6",
            "--num-subcarriers", "4", "-o", str(tmp_path / "g.gptc")])
        assert result.exit_code == 0, result.output
        assert read_bundle(tmp_path / "g.gptc").shape == (4, 4, 6)

    def test_missing_source_validation(self, runner, tmp_path):
        result = runner.invoke(main, ["generate", "-o", str(tmp_path / "g.gptc")])
        assert result.exit_code == 2


class TestCalibrate:
    def test_check_truth_pass(self, runner, tmp_path):
        bundle = gen(runner, tmp_path)
        result = runner.invoke(main, [
            "calibrate", str(bundle), "--algorithm", "eigenvector",
            "--check-truth", "-o", str(tmp_path / "c.gpcl")])
        assert result.exit_code == 0, result.output
        assert "PASS" in result.output

    def test_both_algorithms_residual_order(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, snr=10)
        for algo in ("iterative", "eigenvector"):
            result = runner.invoke(main, [
                "calibrate", str(bundle), "--algorithm", algo,
                "-o", str(tmp_path / f"{algo}.gpcl")])
            assert result.exit_code == 0, result.output
        rec_it = read_calibration(tmp_path / "iterative.gpcl")
        rec_ev = read_calibration(tmp_path / "eigenvector.gpcl")
        assert rec_it.algorithm == "iterative"
        assert rec_ev.gains.shape == rec_it.gains.shape

    def test_missing_input_exit_3(self, runner, tmp_path):
        result = runner.invoke(main, [
            "calibrate", str(tmp_path / "nope.gptc"), "-o", str(tmp_path / "c.gpcl")])
        assert result.exit_code == 3


class TestApply:
    def test_round_trip_and_flatten(self, runner, tmp_path):
        bundle = gen(runner, tmp_path)
        cal = tmp_path / "c.gpcl"
        assert runner.invoke(main, ["calibrate", str(bundle), "--algorithm",
                                    "eigenvector", "-o", str(cal)]).exit_code == 0
        out = tmp_path / "out.gptc"
        result = runner.invoke(main, ["apply", str(bundle), str(cal), "-o", str(out)])
        assert result.exit_code == 0, result.output
        corrected = read_bundle(out)
        # calibrated data matches ideal * transmit phases up to per-subcarrier gauge
        expected = corrected.ideal * corrected.transmit_phases.values[None, None, :]
        ratio = corrected.measurements / expected
        assert np.max(np.abs(ratio - ratio[:, :1, :1])) < 1e-6

    def test_digest_mismatch_exit_5(self, runner, tmp_path):
        b1 = gen(runner, tmp_path, name="b1.gptc", seed=1)
        b2 = gen(runner, tmp_path, name="b2.gptc", seed=2)
        cal = tmp_path / "c.gpcl"
        assert runner.invoke(main, ["calibrate", str(b1), "-o", str(cal),
                                    "--algorithm", "eigenvector"]).exit_code == 0
        result = runner.invoke(main, ["apply", str(b2), str(cal),
                                      "-o", str(tmp_path / "o.gptc")])
        assert result.exit_code == 5

    def test_force_overrides_digest(self, runner, tmp_path):
        b1 = gen(runner, tmp_path, name="b1.gptc", seed=1)
        b2 = gen(runner, tmp_path, name="b2.gptc", seed=1)
        # same content, but force also works across differing bundles
        cal = tmp_path / "c.gpcl"
        assert runner.invoke(main, ["calibrate", str(b1), "-o", str(cal),
                                    "--algorithm", "eigenvector"]).exit_code == 0
        result = runner.invoke(main, ["apply", str(b2), str(cal), "--force",
                                      "-o", str(tmp_path / "o.gptc")])
        assert result.exit_code == 0

    def test_mismatched_antenna_count_exit_2(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, name="b1.gptc")
        other = gen(runner, tmp_path, name="b2.gptc", scenario="distributed-4x-2x4",
                    num_subcarriers=4)
        cal = tmp_path / "c.gpcl"
        assert runner.invoke(main, ["calibrate", str(other), "-o", str(cal),
                                    "--algorithm", "eigenvector"]).exit_code == 0
        result = runner.invoke(main, ["apply", str(bundle), str(cal), "--force",
                                      "-o", str(tmp_path / "o.gptc")])
        assert result.exit_code == 2

    def test_parametric_mode(self, runner, tmp_path):
        bundle = gen(runner, tmp_path)
        cal = tmp_path / "c.gpcl"
        assert runner.invoke(main, ["calibrate", str(bundle), "-o", str(cal),
                                    "--algorithm", "eigenvector"]).exit_code == 0
        result = runner.invoke(main, ["apply", str(bundle), str(cal),
                                      "--mode", "parametric",
                                      "-o", str(tmp_path / "o.gptc")])
        assert result.exit_code == 0, result.output


class TestEvaluate:
    def test_self_comparison_zero_db(self, runner, tmp_path):
        bundle = gen(runner, tmp_path)
        result = runner.invoke(main, ["evaluate", str(bundle)])
        assert result.exit_code == 0, result.output
        rows = [l for l in result.output.splitlines()
                if l and l[0].isdigit()]
        assert all(float(r.split(",")[1]) == 0.0 for r in rows)

    def test_agreement_series(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, scenario="distributed-4x-2x4")
        result = runner.invoke(main, ["evaluate", str(bundle), "--subarrays", "B,C"])
        assert result.exit_code == 0, result.output
        assert "agreement_B_C" in result.output
        rows = [l for l in result.output.splitlines() if "agreement" not in l
                and l.count(",") == 1 and "." in l.split(",")[1]]
        # noiseless single-profile data: agreement is zero everywhere
        assert all(abs(float(r.split(",")[1])) < 1e-9 for r in rows)

    def test_unknown_subarray_exit_2(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, scenario="distributed-4x-2x4")
        result = runner.invoke(main, ["evaluate", str(bundle), "--subarrays", "B,Z"])
        assert result.exit_code == 2

    def test_calibration_record_input(self, runner, tmp_path):
        bundle = gen(runner, tmp_path)
        cal = tmp_path / "c.gpcl"
        assert runner.invoke(main, ["calibrate", str(bundle), "-o", str(cal),
                                    "--algorithm", "eigenvector"]).exit_code == 0
        result = runner.invoke(main, ["evaluate", str(bundle),
                                      "--calibration", str(cal)])
        assert result.exit_code == 0, result.output
        rows = [l for l in result.output.splitlines() if l and l[0].isdigit()]
        assert all(float(r.split(",")[1]) >= -0.01 for r in rows)


class TestSweep:
    def test_grid_rows_and_determinism(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, num_positions=24, num_subcarriers=2)
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        for out in (out1, out2):
            result = runner.invoke(main, [
                "sweep", str(bundle), "--snr", "0:5:10", "--realizations", "3",
                "--seed", "2", "-o", str(out)])
            assert result.exit_code == 0, result.output
        assert out1.read_text() == out2.read_text()
        lines = [l for l in out1.read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 1 + 3 * 2  # header + 3 SNRs x 2 algorithms

    def test_parallel_matches_serial(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, num_positions=24, num_subcarriers=2)
        out1, out2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
        for out, workers in ((out1, "1"), (out2, "2")):
            result = runner.invoke(main, [
                "sweep", str(bundle), "--snr", "0:5:10", "--realizations", "3",
                "--seed", "2", "--parallel", workers, "-o", str(out)])
            assert result.exit_code == 0, result.output
        assert out1.read_text() == out2.read_text()

    def test_bad_parallel_exit_2(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, num_subcarriers=2)
        result = runner.invoke(main, ["sweep", str(bundle), "--parallel", "0",
                                      "--realizations", "2",
                                      "-o", str(tmp_path / "s.csv")])
        assert result.exit_code == 2

    def test_full_grid_arithmetic(self, runner, tmp_path):
        from arraycal.cli import _parse_snr_grid
        grid = _parse_snr_grid("-12:1:5")
        assert len(grid) == 18
        assert grid[0] == -12 and grid[-1] == 5

    def test_bad_grid_exit_2(self, runner, tmp_path):
        bundle = gen(runner, tmp_path, num_subcarriers=2)
        result = runner.invoke(main, ["sweep", str(bundle), "--snr", "5:-1:0",
                                      "--realizations", "2",
                                      "-o", str(tmp_path / "s.csv")])
        assert result.exit_code == 2
