"""CLI contract: exit codes, config precedence, deterministic reports."""

import math
import os

import pytest

from artifact.cli import (EXIT_FAIL, EXIT_NOCONV, EXIT_OK, EXIT_USAGE,
                          main, parse_config_file)


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_series_trivial_value(capsys):
    code, out, _ = _run(
        ["eval", "sl2", "--lambda", "0.3", "--mu-left", "1.0",
         "--mu-right", "0.0", "--phi", "1.0", "--method", "series"],
        capsys)
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0].startswith("# EVAL.v1 ")
    val = float(lines[1].split()[6])
    assert abs(val - math.exp(0.3)) < 1e-14


def test_eval_macdonald_matches_integral(capsys):
    args = ["sl2", "--lambda", "0.3", "--mu-left", "0.7",
            "--mu-right", "1.3", "--phi", "0.4"]
    c1, out1, _ = _run(["eval"] + args + ["--method", "integral"], capsys)
    c2, out2, _ = _run(["eval"] + args + ["--method", "macdonald"], capsys)
    assert c1 == c2 == EXIT_OK
    v1 = float(out1.strip().splitlines()[1].split()[6])
    v2 = float(out2.strip().splitlines()[1].split()[6])
    assert abs(v1 - v2) <= 1e-9 * abs(v1)


def test_eval_bad_family_usage_error(capsys):
    code, _, _ = _run(["eval", "sl7", "--lambda", "1", "--mu-left", "1",
                       "--mu-right", "1", "--phi", "0"], capsys)
    assert code == EXIT_USAGE


def test_eval_component_count_usage_error(capsys):
    code, _, err = _run(
        ["eval", "sl3", "--lambda", "0.3", "--mu-left", "1,1",
         "--mu-right", "1,1", "--phi", "0,0", "--method", "integral"],
        capsys)
    assert code == EXIT_USAGE
    assert "component" in err


def test_verify_unknown_relation_usage_error(capsys):
    code, _, err = _run(["verify", "NO_SUCH_RELATION"], capsys)
    assert code == EXIT_USAGE
    assert "unknown relation" in err


def test_verify_relation_report_format(capsys):
    code, out, _ = _run(
        ["verify", "RAISE_SL2_UP", "--grid", "0.0;0.5"], capsys)
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0].startswith("# RESIDUAL.v1 ")
    assert lines[-1].startswith("SUMMARY ") and "status=PASS" in lines[-1]
    assert all(ln.startswith("RESIDUAL.v1 ") for ln in lines[1:-1])


def test_verify_forced_failure_exit_code(capsys):
    code, out, _ = _run(
        ["verify", "RAISE_SL2_UP", "--tol", "1e-300"], capsys)
    assert code == EXIT_FAIL
    assert "status=FAIL" in out


def test_verify_printed_flag_adds_records(capsys):
    code, out, _ = _run(
        ["verify", "BAXTER_SL2_B", "--grid", "0.0", "--printed"], capsys)
    assert code == EXIT_OK
    assert any(ln.startswith("PRINTED ") for ln in out.splitlines())


def test_config_file_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("no_such_option=1\n")
    code, _, err = _run(
        ["verify", "RAISE_SL2_UP", "--config", str(cfg)], capsys)
    assert code == EXIT_USAGE
    assert "unknown config key" in err


def test_config_file_sets_default_flag_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\ntol=1e-300\n")
    code, out, _ = _run(
        ["verify", "RAISE_SL2_UP", "--config", str(cfg)], capsys)
    assert code == EXIT_FAIL  # config tightened the tolerance
    code, out, _ = _run(
        ["verify", "RAISE_SL2_UP", "--config", str(cfg), "--tol", "1e-8"],
        capsys)
    assert code == EXIT_OK  # explicit flag wins over the config file


def test_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ARTIFACT_TOL", "1e-300")
    code, _, _ = _run(["verify", "RAISE_SL2_UP"], capsys)
    assert code == EXIT_FAIL
    # config file beats the environment
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tol=1e-8\n")
    code, _, _ = _run(["verify", "RAISE_SL2_UP", "--config", str(cfg)],
                      capsys)
    assert code == EXIT_OK


def test_parse_config_file_syntax_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just a line without equals\n")
    with pytest.raises(ValueError):
        parse_config_file(str(cfg))


def test_eval_grid_deterministic_across_threads(tmp_path, capsys):
    base = ["eval", "sl2", "--lambda", "0.3", "--mu-left", "0.7",
            "--mu-right", "1.3", "--phi", "0.0", "--method", "integral",
            "--grid=-1.0:1.0:7"]
    f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(base + ["--threads", "1", "--out", str(f1)]) == EXIT_OK
    assert main(base + ["--threads", "3", "--out", str(f2)]) == EXIT_OK
    assert f1.read_bytes() == f2.read_bytes()


def test_verify_deterministic_across_threads(tmp_path):
    base = ["verify", "TODA_SL2"]
    f1, f2 = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(base + ["--threads", "1", "--out", str(f1)]) == EXIT_OK
    assert main(base + ["--threads", "2", "--out", str(f2)]) == EXIT_OK
    assert f1.read_bytes() == f2.read_bytes()


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE


def test_search_p_bad_level_usage(capsys, tmp_path):
    os.chdir(tmp_path)
    assert main(["search-p", "--n", "3", "--j", "7"]) == EXIT_USAGE
    assert main(["search-p", "--n", "1", "--j", "0"]) == EXIT_USAGE


def test_search_p_n2_writes_record(tmp_path, capsys):
    out = tmp_path / "rec.json"
    code, msg, _ = _run(
        ["search-p", "--n", "2", "--j", "0", "--out", str(out)], capsys)
    assert code == EXIT_OK
    assert "status=OK" in msg
    import json

    rec = json.loads(out.read_text())
    assert rec["n"] == 2 and rec["certificate"]["ok"] is True
