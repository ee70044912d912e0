"""Command-line driver: configs, artifacts, determinism, exit codes."""

import csv
import json
import math
import os
import re

import pytest

from edgeworth import cli


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


TWO_STATE = {"model": {"bundled": "two_state"}, "run": {}}


# -------------------------------------------------------------------- expand


def test_expand_two_state_report(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": {"bundled": "two_state"}, "run": {"order": 2}})
    code, out, err = run_cli(
        capsys, "expand", cfg, "--out", str(tmp_path), "--stamp", "s1"
    )
    assert code == 0 and err == ""
    path = out.strip()
    assert os.path.basename(path) == "expand-a45aa1652a71-s1.json"
    report = json.loads(open(path).read())
    assert abs(report["A"] - 0.4) <= 1e-13
    assert abs(report["sigma2"] - 102.0 / 175.0) <= 1e-13
    assert report["order"] == 2
    assert len(report["cdf_polys"]) == 2
    assert len(report["density_polys"]) == 3
    assert report["density_polys"][0] == [1.0]


def test_expand_skewed_iid_first_cdf_polynomial(tmp_path, capsys):
    # centered unit-variance summands with third moment one give
    # P1(x) = (1 - x^2) / 6
    cfg = write_config(
        tmp_path,
        {"model": {"type": "iid", "moments": [0.0, 1.0, 1.0]}, "run": {"order": 1}},
    )
    code, out, _ = run_cli(capsys, "expand", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    report = json.loads(open(out.strip()).read())
    p1 = report["cdf_polys"][0]
    assert len(p1) == 3
    assert abs(p1[0] - 1.0 / 6.0) <= 1e-15
    assert p1[1] == 0.0
    assert abs(p1[2] + 1.0 / 6.0) <= 1e-15


def test_expand_symmetric_iid_vanishing_correction(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"model": {"type": "iid", "moments": [0.0, 1.0, 0.0]}, "run": {"order": 1}},
    )
    code, out, _ = run_cli(capsys, "expand", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    report = json.loads(open(out.strip()).read())
    assert all(c == 0.0 for c in report["cdf_polys"][0])


def test_expand_byte_identical_reruns(tmp_path, capsys):
    cfg = write_config(tmp_path, TWO_STATE)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    code, out1, _ = run_cli(capsys, "expand", cfg, "--out", str(out_a), "--stamp", "x")
    assert code == 0
    code, out2, _ = run_cli(capsys, "expand", cfg, "--out", str(out_b), "--stamp", "x")
    assert code == 0
    a = open(out1.strip(), "rb").read()
    b = open(out2.strip(), "rb").read()
    assert a == b


def test_expand_order_flag_overrides_config(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": {"bundled": "two_state"}, "run": {"order": 2}})
    code, out, _ = run_cli(
        capsys, "expand", cfg, "--out", str(tmp_path), "--stamp", "s", "--order", "1"
    )
    assert code == 0
    report = json.loads(open(out.strip()).read())
    assert report["order"] == 1
    assert len(report["cdf_polys"]) == 1


def test_expand_default_stamp_is_utc_token(tmp_path, capsys):
    cfg = write_config(tmp_path, TWO_STATE)
    code, out, _ = run_cli(capsys, "expand", cfg, "--out", str(tmp_path))
    assert code == 0
    name = os.path.basename(out.strip())
    assert re.fullmatch(r"expand-[0-9a-f]{12}-\d{8}T\d{6}Z\.json", name)


# -------------------------------------------------------------------- verify


def verify_config(tmp_path, **run):
    doc = {"model": {"bundled": "two_state"}, "run": dict(run)}
    return write_config(tmp_path, doc)


def test_verify_lattice_ladder_passes(tmp_path, capsys):
    cfg = verify_config(tmp_path, order=1, N_list=[64, 256, 1024], form="lattice")
    code, out, err = run_cli(
        capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s"
    )
    assert code == 0 and err == ""
    rows = read_rows(out.strip())
    assert rows[0] == ["N", "raw_error", "scaled_error"]
    assert [r[0] for r in rows[1:]] == ["64", "256", "1024"]
    scaled = [float(r[2]) for r in rows[1:]]
    assert scaled[0] > scaled[1] > scaled[2]
    for raw, n, s in zip((float(r[1]) for r in rows[1:]), (64, 256, 1024), scaled):
        assert abs(s - raw * math.sqrt(n)) <= 1e-12 * max(1.0, abs(s))


def test_verify_csv_uses_lf_line_endings(tmp_path, capsys):
    cfg = verify_config(tmp_path, order=0, N_list=[64, 256])
    code, out, _ = run_cli(capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    blob = open(out.strip(), "rb").read()
    assert b"\r" not in blob
    assert blob.endswith(b"\n")


def test_verify_deterministic_across_thread_counts(tmp_path, capsys, monkeypatch):
    cfg = verify_config(tmp_path, order=1, N_list=[64, 256], form="classical")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    code, out1, _ = run_cli(capsys, "verify", cfg, "--out", str(out_a), "--stamp", "x")
    assert code == 0
    monkeypatch.setenv("EDGEWORTH_THREADS", "2")
    code, out2, _ = run_cli(capsys, "verify", cfg, "--out", str(out_b), "--stamp", "x")
    assert code == 0
    assert open(out1.strip(), "rb").read() == open(out2.strip(), "rb").read()


def test_verify_verdict_failure_still_writes_csv(tmp_path, capsys):
    # symmetric Bernoulli summands: the first correction vanishes, so the
    # scaled classical error stalls at the lattice floor and the verdict
    # must come back negative
    doc = {
        "model": {"type": "iid", "pmf": [[0.0, 0.5], [1.0, 0.5]]},
        "run": {"order": 1, "N_list": [16, 32], "form": "classical"},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 4
    assert os.path.exists(out.strip())
    payload = json.loads(err)
    assert payload["error"] == "VerdictFailure"
    assert "not strictly decreasing" in payload["message"]


def test_verify_oracle_budget_exhaustion_exits_three(tmp_path, capsys):
    doc = {
        "model": {"bundled": "diophantine_two_state"},
        "run": {"order": 1, "N_list": [8, 120], "oracle": "enum"},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 3
    assert json.loads(err)["error"] == "TooManyValues"


def test_verify_degenerate_variance_exits_two(tmp_path, capsys):
    doc = {
        "model": {
            "type": "markov",
            "transition": [[0.6, 0.4], [0.3, 0.7]],
            "observable": [[5.0, 5.0], [5.0, 5.0]],
        },
        "run": {"order": 1, "N_list": [16, 32]},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 2
    assert json.loads(err)["error"] == "DegenerateVariance"


# -------------------------------------------------------------- bad configs


@pytest.mark.parametrize(
    "doc",
    [
        {"run": {}},
        {"model": {"bundled": "five_state"}, "run": {}},
        {"model": {"type": "trellis"}, "run": {}},
        {"model": {"type": "iid"}, "run": {}},
    ],
)
def test_invalid_model_documents_exit_two(tmp_path, capsys, doc):
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "expand", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 2
    assert json.loads(err)["error"] == "ValidationError"


@pytest.mark.parametrize(
    "run",
    [
        {"order": 9, "N_list": [16, 32]},
        {"order": 1},
        {"order": 1, "N_list": [32, 16]},
        {"order": 1, "N_list": [16, 32], "oracle": "mc"},
        {"order": 1, "N_list": [16, 32], "oracle": "abacus"},
    ],
)
def test_invalid_run_documents_exit_two(tmp_path, capsys, run):
    cfg = write_config(tmp_path, {"model": {"bundled": "two_state"}, "run": run})
    code, out, err = run_cli(capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 2
    assert json.loads(err)["error"] == "ValidationError"


def test_unreadable_config_exits_two(tmp_path, capsys):
    code, out, err = run_cli(
        capsys, "expand", str(tmp_path / "missing.json"), "--out", str(tmp_path)
    )
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    code, out, err = run_cli(capsys, "expand", str(bad), "--out", str(tmp_path))
    assert code == 2


def test_invalid_thread_env_exits_two(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EDGEWORTH_THREADS", "many")
    cfg = verify_config(tmp_path, order=1, N_list=[16, 32])
    code, out, err = run_cli(capsys, "verify", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 2
    assert json.loads(err)["error"] == "ValidationError"


# ------------------------------------------------------------------ diagnose


def test_diagnose_two_state_report(tmp_path, capsys):
    doc = {
        "model": {"bundled": "two_state"},
        "run": {"t_grid": [1.0, 6.283185307179586]},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "diagnose", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0 and err == ""
    csv_path, json_path = out.strip().splitlines()
    rows = read_rows(csv_path)
    assert rows[0] == ["t", "char_distance", "norm_power", "radius"]
    assert len(rows) == 3
    report = json.loads(open(json_path).read())
    assert abs(report["gap"] - 0.7) <= 1e-9
    assert report["lattice_span"] == 1.0
    assert report["diophantine"] is None
    # unit radius at t = 2 pi is the lattice signature, not a defect
    assert float(rows[2][3]) >= 1.0 - 1e-9
    assert "radius-one-lattice-consistent" in report["flags"]


def test_diagnose_identity_like_chain_completes_with_flag(tmp_path, capsys):
    near = 1.0 - 1e-10
    doc = {
        "model": {
            "type": "markov",
            "transition": [[near, 1e-10], [1e-10, near]],
            "observable": [[0.0, 1.0], [1.0, 0.0]],
        },
        "run": {"t_grid": [1.0]},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "diagnose", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    report = json.loads(open(out.strip().splitlines()[1]).read())
    assert report["gap"] is None
    assert "gap-below-tolerance" in report["flags"]


def test_diagnose_reducible_chain_completes_with_flag(tmp_path, capsys):
    doc = {
        "model": {
            "type": "markov",
            "transition": [[1.0, 0.0], [0.0, 1.0]],
            "observable": [[0.0, 1.0], [1.0, 0.0]],
        },
        "run": {"t_grid": [1.0]},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "diagnose", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    report = json.loads(open(out.strip().splitlines()[1]).read())
    assert report["gap"] is None
    assert "stationary-not-unique" in report["flags"]


def test_diagnose_nonlattice_fits_frequency_lower_bound(tmp_path, capsys):
    doc = {
        "model": {"bundled": "diophantine_two_state"},
        "run": {"t_grid": {"start": 0.5, "stop": 5.0, "count": 10}},
    }
    cfg = write_config(tmp_path, doc)
    code, out, err = run_cli(capsys, "diagnose", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    csv_path, json_path = out.strip().splitlines()
    report = json.loads(open(json_path).read())
    assert report["lattice_span"] is None
    assert report["diophantine"]["K"] > 0.0
    assert report["diophantine"]["beta"] >= 0.0
    assert report["theta_fit"] > 0.0
    rows = read_rows(csv_path)
    assert any(float(r[1]) > 0.0 for r in rows[1:])


# ----------------------------------------------------- moments, lclt, moddev


def test_moments_reports_variance_coefficient(tmp_path, capsys):
    doc = {
        "model": {"type": "iid", "pmf": [[0.0, 0.5], [1.0, 0.5]]},
        "run": {"order": 2},
    }
    cfg = write_config(tmp_path, doc)
    code, out, _ = run_cli(capsys, "moments", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    rows = read_rows(out.strip())
    assert rows[0] == ["k", "j", "coefficient"]
    table = {(int(r[0]), int(r[1])): float(r[2]) for r in rows[1:]}
    assert abs(table[(2, 1)] - 0.25) <= 1e-12


def test_lclt_errors_shrink(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"model": {"bundled": "two_state"}, "run": {"order": 2, "N_list": [64, 256]}},
    )
    code, out, _ = run_cli(capsys, "lclt", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    rows = read_rows(out.strip())
    assert rows[0] == ["N", "sup_error"]
    errs = [float(r[1]) for r in rows[1:]]
    assert errs[1] < errs[0]


def test_lclt_requires_lattice_model(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "model": {"bundled": "diophantine_two_state"},
            "run": {"order": 2, "N_list": [16, 32]},
        },
    )
    code, out, err = run_cli(capsys, "lclt", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 3
    assert json.loads(err)["error"] == "OracleUnavailable"


def test_moddev_table(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "model": {"bundled": "two_state"},
            "run": {"order": 2, "N_list": [256], "c": 0.5},
        },
    )
    code, out, _ = run_cli(capsys, "moddev", cfg, "--out", str(tmp_path), "--stamp", "s")
    assert code == 0
    rows = read_rows(out.strip())
    assert rows[0] == ["N", "x", "exact_tail", "normal_tail", "ratio", "corollary_tail"]
    n, x, exact, normal, ratio, corollary = rows[1]
    assert n == "256"
    want = 1.0 / math.sqrt(2.0 * math.pi * 0.5) / math.sqrt(256 ** 0.5 * math.log(256))
    assert abs(float(corollary) - want) <= 1e-15
    assert abs(float(ratio) - float(exact) / float(normal)) <= 1e-12
