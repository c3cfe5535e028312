"""Command-line surface: exit codes, report schemas, determinism."""

from __future__ import annotations

import json

import pytest

from sectorext.cli import main


def run(args):
    return main([str(a) for a in args])


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run(["sequence", "--out", tmp_path]) == 1
    assert run(["extend", "--out", tmp_path]) == 1
    assert run(["no-such-command"]) == 1


def test_sequence_report(tmp_path, capsys):
    assert run(["sequence", "--gevrey", "2", "--horizon", "256",
                "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "sequence.json").read_text())
    assert doc["schema"] == "v1"
    assert len(doc["config_hash"]) == 16
    assert doc["properties"]["lc"]["verdict"] == "holds"
    assert (tmp_path / "sequence_trace.csv").read_text().startswith(
        "property,p,value")


def test_indices_pair_report(tmp_path):
    assert run(["indices", "--gevrey-pair", "1", "2", "--horizon", "256",
                "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "indices.json").read_text())
    est = doc["gamma"]
    assert est["r_lo"] <= 2.0 <= est["r_hi"]


def test_extend_pipeline_and_verify(tmp_path):
    args = ["extend", "--gevrey-pair", "1", "2", "--lam-gen", "factorial",
            "--lam-len", "9", "--horizon", "256", "--out", tmp_path]
    assert run(args) == 0
    for name in ("constants.json", "remainder.json", "samples.csv"):
        assert (tmp_path / name).exists()
    doc = json.loads((tmp_path / "remainder.json").read_text())
    assert all(doc["passes"]["envelope"].values())
    header = (tmp_path / "samples.csv").read_text().splitlines()[0]
    assert header == "abs_z,arg_z,re_f,im_f"
    assert run(["extend", "--verify-only", "--out", tmp_path]) == 0


def test_extend_precondition_exit_2(tmp_path, capsys):
    rc = run(["extend", "--gevrey-pair", "1", "2", "--lam-gen", "delta",
              "--gamma", "5", "--horizon", "256", "--out", tmp_path])
    assert rc == 2
    assert "bracket" in capsys.readouterr().err


def test_determinism_byte_identical(tmp_path):
    args = ["extend", "--gevrey-pair", "1", "2", "--lam-gen", "delta",
            "--horizon", "256", "--out", tmp_path]
    assert run(args) == 0
    first = {name: (tmp_path / name).read_bytes()
             for name in ("constants.json", "remainder.json", "samples.csv")}
    assert run(args) == 0
    for name, blob in first.items():
        assert (tmp_path / name).read_bytes() == blob, name
