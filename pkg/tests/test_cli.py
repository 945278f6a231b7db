import json

import pytest
from click.testing import CliRunner

from fcqem.cli import main
from fcqem.io import save_hamiltonian, save_measurements
from fcqem.models import TfimSpec, build_tfim
from fcqem.states import MeasurementSet, ProbDist


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def tfim_file(tmp_path):
    path = tmp_path / "tfim3.txt"
    save_hamiltonian(build_tfim(TfimSpec.chain(3, 1.0, 0.5)), path)
    return str(path)


@pytest.fixture
def z_measurements(tmp_path):
    ms = MeasurementSet(1)
    ms.add(ProbDist.from_counts(1, "Z", {"0": 80, "1": 20}, 100))
    path = tmp_path / "m.json"
    save_measurements(ms, path)
    return str(path)


def data_lines(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


class TestSweepCommand:
    def test_h_sweep_csv(self, runner, tmp_path):
        out = tmp_path / "r.csv"
        result = runner.invoke(
            main,
            [
                "sweep", "--model", "tfim", "--n", "4", "--j", "1",
                "--h-range", "0:1:0.125", "--trial", "neel",
                "--noise", "readout=0.03", "--shots", "2000", "--seed", "7",
                "--workers", "1", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        lines = data_lines(out.read_text())
        assert lines[0].startswith("param,raw,fcqem,qcm,fcqem_qcm,exact")
        assert len(lines) == 1 + 9  # header + 9 sweep points

    def test_reproducible_output_bytes(self, runner, tmp_path):
        args = [
            "sweep", "--model", "tfim", "--n", "2", "--h-range", "0:0.25:0.25",
            "--shots", "500", "--seed", "3", "--workers", "1",
        ]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.exit_code == b.exit_code == 0
        assert a.output == b.output

    def test_zero_length_range(self, runner):
        result = runner.invoke(
            main,
            ["sweep", "--model", "tfim", "--n", "2", "--h-range", "1:0:0.5", "--workers", "1"],
        )
        assert result.exit_code == 0
        assert data_lines(result.output) == ["param,raw,fcqem,qcm,fcqem_qcm,exact,"
                                             "qcm_status,fcqem_qcm_status,fcqem_out_of_range"]

    def test_theta_sweep_with_pi_literals(self, runner, tmp_path, tfim_file):
        trial = tmp_path / "trial.txt"
        trial.write_text("X 1\nH 0\nCNOT 0 1\n")
        result = runner.invoke(
            main,
            [
                "sweep", "--hamiltonian", tfim_file, "--trial", str(trial),
                "--rotate-y", "q=2", "--theta-range", "0:pi:0.5pi",
                "--exact", "--workers", "1",
            ],
        )
        assert result.exit_code == 0, result.output
        rows = data_lines(result.output)[1:]
        assert len(rows) == 3  # 0, pi/2, pi

    def test_depol_sweep(self, runner):
        result = runner.invoke(
            main,
            ["sweep", "--model", "tfim", "--n", "2", "--depol-range", "0:0.5:0.25",
             "--exact", "--workers", "1", "--seed", "1"],
        )
        assert result.exit_code == 0, result.output
        rows = [r.split(",") for r in data_lines(result.output)[1:]]
        assert len(rows) == 3
        raw = [float(r[1]) for r in rows]
        corr = [float(r[2]) for r in rows]
        # raw <H> decays linearly toward 0 with global depolarizing strength
        assert raw[0] == pytest.approx(-1.0) and abs(raw[2]) < abs(raw[0])
        # squared-distribution correction recovers most of the decay
        assert abs(corr[1] - (-1.0)) < abs(raw[1] - (-1.0))

    def test_conflicting_ranges_rejected(self, runner):
        result = runner.invoke(
            main,
            ["sweep", "--model", "tfim", "--n", "2", "--h-range", "0:1:1",
             "--depol-range", "0:1:1"],
        )
        assert result.exit_code == 2

    def test_no_hamiltonian_is_config_error(self, runner):
        result = runner.invoke(main, ["sweep", "--h-range", "0:1:1"])
        assert result.exit_code == 2

    def test_worker_pool_matches_serial(self, runner):
        base = ["sweep", "--model", "tfim", "--n", "4", "--h-range", "0:0.5:0.25",
                "--shots", "400", "--seed", "11"]
        serial = runner.invoke(main, base + ["--workers", "1"])
        pooled = runner.invoke(main, base + ["--workers", "2"])
        assert serial.exit_code == pooled.exit_code == 0
        # identical data rows; only the embedded workers field differs
        assert serial.output.splitlines()[1:] == pooled.output.splitlines()[1:]

    def test_config_file_with_flag_override(self, runner, tmp_path):
        cfg = {
            "tfim": {"n": 2, "j": 1.0, "h": 0.0},
            "sweep": {"kind": "h", "values": [0.0]},
            "shots": 100,
            "seed": 1,
            "workers": 1,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        base = runner.invoke(main, ["sweep", "--config", str(path)])
        assert base.exit_code == 0, base.output
        over = runner.invoke(main, ["sweep", "--config", str(path), "--seed", "2"])
        assert over.exit_code == 0
        assert base.output != over.output


class TestMitigateCommand:
    def test_delta_distribution(self, runner, tmp_path):
        ms = MeasurementSet(1)
        ms.add(ProbDist.from_counts(1, "Z", {"1": 50}, 50))
        mpath = tmp_path / "delta.json"
        save_measurements(ms, mpath)
        hpath = tmp_path / "h.txt"
        hpath.write_text("Z 1.0\n")
        result = runner.invoke(
            main, ["mitigate", "--hamiltonian", str(hpath), "--measurements", str(mpath)]
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["raw"] == pytest.approx(-1.0)
        assert body["fcqem_per_basis"]["value"] == pytest.approx(-1.0)

    def test_two_copy_equals_self_square(self, runner, tmp_path, z_measurements):
        hpath = tmp_path / "h.txt"
        hpath.write_text("Z 1.0\n")
        result = runner.invoke(
            main,
            ["mitigate", "--hamiltonian", str(hpath), "--measurements", z_measurements,
             "--measurements2", z_measurements],
        )
        body = json.loads(result.output)
        assert body["fcqem_two_copy"]["value"] == pytest.approx(
            body["fcqem_per_basis"]["value"], abs=1e-12
        )

    def test_missing_x_basis_reported(self, runner, tmp_path, z_measurements):
        hpath = tmp_path / "h.txt"
        hpath.write_text("X 1.0\n")
        result = runner.invoke(
            main, ["mitigate", "--hamiltonian", str(hpath), "--measurements", z_measurements]
        )
        assert result.exit_code == 3
        assert "X" in result.output

    def test_hand_value(self, runner, tmp_path, z_measurements):
        hpath = tmp_path / "h.txt"
        hpath.write_text("Z 1.0\n")
        result = runner.invoke(
            main, ["mitigate", "--hamiltonian", str(hpath), "--measurements", z_measurements]
        )
        body = json.loads(result.output)
        assert body["raw"] == pytest.approx(0.6)
        assert body["fcqem_per_basis"]["value"] == pytest.approx(0.6 / 0.68)


class TestScaleCommand:
    def test_small_grid(self, runner):
        result = runner.invoke(
            main,
            ["scale", "--n-list", "4,8", "--rates", "0,0.02", "--shots", "2000",
             "--seed", "5", "--workers", "1"],
        )
        assert result.exit_code == 0, result.output
        rows = data_lines(result.output)
        assert rows[0].startswith("num_qubits,rate,noise_free,raw,fcqem")
        assert len(rows) == 5

    def test_rate_zero_exact(self, runner):
        result = runner.invoke(
            main,
            ["scale", "--n-list", "6", "--rates", "0", "--shots", "1000", "--workers", "1"],
        )
        row = dict(zip(*[l.split(",") for l in data_lines(result.output)[:2]]))
        assert float(row["raw"]) == float(row["fcqem"]) == -1.0

    def test_non_clifford_rejected(self, runner, tmp_path):
        trial = tmp_path / "t.txt"
        trial.write_text("RY 0 0.4\n")
        result = runner.invoke(
            main,
            ["scale", "--n-list", "2", "--rates", "0", "--shots", "10",
             "--trial", str(trial), "--workers", "1"],
        )
        assert result.exit_code == 3


class TestDumpDistCommand:
    def test_neel_noiseless(self, runner):
        result = runner.invoke(main, ["dump-dist", "--n", "4", "--trial", "neel"])
        assert result.exit_code == 0
        rows = data_lines(result.output)[1:]
        assert sorted(r.split(",")[0] for r in rows) == ["0101", "1010"]

    def test_threshold_zero_all_rows(self, runner):
        result = runner.invoke(
            main,
            ["dump-dist", "--n", "4", "--noise", "readout=0.03", "--threshold", "0"],
        )
        assert len(data_lines(result.output)[1:]) == 16

    def test_noise_suppression_visible(self, runner):
        result = runner.invoke(
            main,
            ["dump-dist", "--n", "4", "--noise", "readout=0.03", "--threshold", "0",
             "--shots", "100000", "--seed", "1"],
        )
        rows = [r.split(",") for r in data_lines(result.output)[1:]]
        small = [r for r in rows if r[0] not in ("0101", "1010")]
        assert small
        for r in small:
            assert float(r[2]) < float(r[1])  # corrected below raw off the peaks


class TestCorrectionModes:
    def test_global_z_equals_per_basis_for_diagonal_model(self, runner):
        base = ["sweep", "--model", "tfim", "--n", "4", "--h-range", "0:0:1",
                "--noise", "readout=0.05", "--shots", "4000", "--seed", "2", "--workers", "1"]
        a = runner.invoke(main, base + ["--correction", "per-basis"])
        b = runner.invoke(main, base + ["--correction", "global-z"])
        assert a.exit_code == b.exit_code == 0
        row_a = data_lines(a.output)[1].split(",")
        row_b = data_lines(b.output)[1].split(",")
        # h=0 model is single-basis: both normalizations give the same value
        assert float(row_a[2]) == pytest.approx(float(row_b[2]), abs=1e-12)

    def test_two_copy_with_distinct_files(self, runner, tmp_path):
        from fcqem.experiments import simulate_measurements
        from fcqem.models import TfimSpec, build_tfim
        from fcqem.circuits import neel_circuit
        from fcqem.simulator import NoiseModel

        h = build_tfim(TfimSpec.chain(2, 1.0, 0.0))
        hpath = tmp_path / "h.txt"
        save_hamiltonian(h, hpath)
        paths = []
        for seed in (5, 6):
            ms = simulate_measurements(h, neel_circuit(2), NoiseModel(readout_flip=0.05), 4000, seed)
            p = tmp_path / f"m{seed}.json"
            save_measurements(ms, p)
            paths.append(str(p))
        result = runner.invoke(
            main,
            ["mitigate", "--hamiltonian", str(hpath), "--measurements", paths[0],
             "--measurements2", paths[1]],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        two = body["fcqem_two_copy"]["value"]
        one = body["fcqem_per_basis"]["value"]
        assert two != one  # independent copies give a genuinely different ratio
        assert -1.5 <= two <= 0  # near the corrected bond value, sign preserved

    def test_serve_help(self, runner):
        result = runner.invoke(main, ["serve", "--help"])
        assert result.exit_code == 0
        assert "--port" in result.output


class TestGroundStateCommand:
    def test_tfim_energy(self, runner):
        result = runner.invoke(
            main, ["ground-state", "--model", "tfim", "--n", "10", "--j", "1", "--h", "0"]
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["energy"] == pytest.approx(-9.0, abs=1e-7)

    def test_capacity_exit_code(self, runner):
        result = runner.invoke(
            main, ["ground-state", "--model", "tfim", "--n", "20", "--j", "1", "--h", "0"]
        )
        assert result.exit_code == 4

    def test_input_error_exit_code(self, runner, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("utterly broken\n")
        result = runner.invoke(main, ["ground-state", "--hamiltonian", str(bad)])
        assert result.exit_code == 3
