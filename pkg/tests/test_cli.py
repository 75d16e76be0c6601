"""
Tests for the decoy-sweep command line.
"""
import json

from decoybounds.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, create_parser, main


def test_parser_maps_options():
    """Test dashed options land on config field names"""
    args = create_parser().parse_args(
        ["--protocol", "mdi", "--loss-step", "2", "--mu-b", "0.4", "--out", "x.csv"]
    )

    assert args.protocol == "mdi"
    assert args.loss_step == 2.0
    assert args.mu_b == 0.4
    assert str(args.output) == "x.csv"
    assert args.config is None


def test_sweep_writes_report(tmp_path):
    """Test a short BB84 sweep end to end"""
    out = tmp_path / "run.csv"

    code = main(["--loss-end", "5", "--loss-step", "1", "--out", str(out)])

    assert code == EXIT_OK
    assert len(out.read_text(encoding="utf-8").splitlines()) == 7
    summary = json.loads((tmp_path / "run.summary.json").read_text(encoding="utf-8"))
    assert summary["rows"] == 6
    assert summary["protocol"] == "bb84"


def test_config_file_with_flag_override(tmp_path):
    """Test command-line flags take precedence over the config file"""
    config = tmp_path / "sweep.json"
    out = tmp_path / "run.csv"
    config.write_text(
        json.dumps({"loss_end": 30.0, "loss_step": 10.0, "output": str(out)}), encoding="utf-8"
    )

    code = main(["--config", str(config), "--loss-end", "10"])

    assert code == EXIT_OK
    summary = json.loads((tmp_path / "run.summary.json").read_text(encoding="utf-8"))
    assert summary["rows"] == 2


def test_malformed_config_exits_2(tmp_path):
    """Test a broken config file writes nothing"""
    config = tmp_path / "sweep.json"
    config.write_text("{not json", encoding="utf-8")
    out = tmp_path / "run.csv"

    code = main(["--config", str(config), "--out", str(out)])

    assert code == EXIT_CONFIG
    assert not out.exists()


def test_zero_loss_step_exits_2(tmp_path):
    """Test an invalid grid writes nothing"""
    out = tmp_path / "run.csv"

    code = main(["--loss-step", "0", "--out", str(out)])

    assert code == EXIT_CONFIG
    assert list(tmp_path.iterdir()) == []


def test_missing_config_file_exits_2(tmp_path):
    assert main(["--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG


def test_unwritable_output_exits_3(tmp_path):
    """Test an output path below a regular file"""
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")

    code = main(["--loss-end", "1", "--out", str(blocker / "run.csv")])

    assert code == EXIT_IO


def test_repeated_runs_are_identical(tmp_path):
    """Test two invocations produce byte-identical files"""
    for name in ("a", "b"):
        assert main(["--loss-end", "8", "--out", str(tmp_path / f"{name}.csv")]) == EXIT_OK

    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_mdi_sweep_with_yield_table(tmp_path, two_photon_table):
    """Test an MDI sweep over a loaded photon-number table"""
    table = tmp_path / "table.json"
    table.write_text(two_photon_table.to_json(), encoding="utf-8")
    out = tmp_path / "mdi.csv"

    code = main(
        [
            "--protocol",
            "mdi",
            "--yield-table",
            str(table),
            "--loss-end",
            "0",
            "--out",
            str(out),
        ]
    )

    assert code == EXIT_OK
    header, row = out.read_text(encoding="utf-8").splitlines()
    assert header.startswith("loss_db,Y11_L,Y11_G,Y11_true")
    assert float(row.split(",")[3]) == 0.01
