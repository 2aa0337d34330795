import hashlib
import json

import pytest

from hypwave.cli import CSV_HEADER, main


def test_verify_kernel_suite(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--suite", "kernel"]) == 0
    report = (tmp_path / "report.csv").read_text()
    lines = report.strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert all(line.endswith("True") for line in lines[1:])


def test_verify_fk_suite(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--suite", "fk",
                 "--m", "2"]) == 0


def test_verify_spherical_suite(tmp_path):
    assert main(["--out", str(tmp_path), "verify", "--suite", "spherical",
                 "--n", "3"]) == 0


def test_missing_suite_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify"])
    assert exc.value.code == 2


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["--config", str(tmp_path / "absent.toml"), "--out",
               str(tmp_path), "verify", "--suite", "kernel"])
    assert rc == 2


def test_malformed_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("decay = [unterminated")
    rc = main(["--config", str(cfg), "--out", str(tmp_path), "verify",
               "--suite", "kernel"])
    assert rc == 2


def test_malformed_decay_window_exits_2(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[decay]\nwindow_small = [3.0, 0.5]\n")
    rc = main(["--config", str(cfg), "--out", str(tmp_path), "decay"])
    assert rc == 2


def test_unknown_nls_profile_exits_2(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('[nls]\nprofile = "vortex"\n')
    rc = main(["--config", str(cfg), "--out", str(tmp_path), "nls"])
    assert rc == 2


def test_report_is_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["--out", str(out), "--seed", "3", "verify", "--suite",
                     "kernel"]) == 0
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()


def test_manifest_checksum_matches(tmp_path):
    main(["--out", str(tmp_path), "verify", "--suite", "kernel"])
    manifest = json.loads((tmp_path / "run-manifest.json").read_text())
    digest = hashlib.sha256((tmp_path / "report.csv").read_bytes()).hexdigest()
    assert manifest["report_sha256"] == digest
    assert manifest["command"] == "verify"


def test_kernel_table_output(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[kernel_table]\ntimes = [0.5]\nradii = [1.0, 2.0]\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path),
                 "kernel-table", "--n", "3"]) == 0
    table = (tmp_path / "kernel-table.csv").read_text().strip().splitlines()
    assert table[0] == "n,t,rho,re,im"
    assert len(table) == 3
