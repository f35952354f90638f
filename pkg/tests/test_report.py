import json

import numpy as np
import pytest

from kacsim.config import parse_config
from kacsim.report import (
    HIST_HEADER, RECORD_HEADER, SUMMARY_HEADER, RunReport, fmt, gaussian_kde, histogram, mean_stderr, write_report,
)

CFG = parse_config("nu = 0.5")


def test_headers_are_byte_exact():
    assert RECORD_HEADER == "scenario,nu,eps,n,t,replicate,seed,metric,value"
    assert SUMMARY_HEADER == "scenario,nu,eps,n,t,metric,mean,stderr,slope,slope_halfwidth"
    assert HIST_HEADER == "bin_left,bin_right,density"


def test_empty_report_writes_header_only_files(tmp_path):
    files = write_report(RunReport(CFG), tmp_path)
    assert [p.name for p in files] == ["records.csv", "summary.csv", "manifest.json"]
    assert (tmp_path / "records.csv").read_bytes() == (RECORD_HEADER + "\n").encode()
    assert (tmp_path / "summary.csv").read_bytes() == (SUMMARY_HEADER + "\n").encode()


def test_rows_and_manifest(tmp_path):
    rep = RunReport(CFG)
    rep.record(metric="m2", value=1.0 / 3.0, eps=0.1, n=10, t=0.05, replicate=0, seed=7)
    rep.record(metric="m2", value=0.5, eps=0.1, n=10, t=0.05, replicate=1, seed=6)
    rep.aggregate()
    rep.summarize(metric="fit", slope=1.25, slope_halfwidth=float("nan"))
    rep.add_histogram("demo", [-1, -1, 1, 1], 2, (-1, 1))
    write_report(rep, tmp_path, {"workers": 3})
    rows = (tmp_path / "records.csv").read_text().splitlines()
    assert rows[1] == "simulate,0.5,0.1,10,0.05,0,7,m2,0.3333333333333333"
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[1].startswith("simulate,0.5,0.1,10,0.05,m2,0.41666666666666663,0.08333333333333")
    assert summary[2] == "simulate,0.5,,,,fit,,,1.25,nan"
    assert (tmp_path / "hist_demo.csv").read_text() == "bin_left,bin_right,density\n-1.0,0.0,0.5\n0.0,1.0,0.5\n"
    assert (tmp_path / "kde_demo.csv").read_text().startswith("x,density\n")
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"] == CFG.to_dict() and man["base_seed"] == 0
    assert man["runtime"]["workers"] == 3
    assert b"\r" not in (tmp_path / "records.csv").read_bytes()


def test_manifest_lists_every_field(tmp_path):
    write_report(RunReport(CFG), tmp_path)
    man = json.loads((tmp_path / "manifest.json").read_text())
    import dataclasses

    assert set(man["config"]) == {f.name for f in dataclasses.fields(CFG)}


def test_histogram_example():
    edges, density = histogram([-1, -1, 1, 1], 2, (-1, 1))
    assert edges.tolist() == [-1.0, 0.0, 1.0]
    assert density.tolist() == [0.5, 0.5]
    assert np.sum(density * np.diff(edges)) == 1.0


def test_kde_integrates_to_one():
    x, dens = gaussian_kde(np.random.default_rng(0).normal(size=5000))
    assert np.trapezoid(dens, x) == pytest.approx(1.0, abs=1e-3)


def test_fmt():
    assert fmt(None) == "" and fmt(0.1) == "0.1" and fmt(np.float64(1e-20)) == "1e-20"
    assert fmt(np.int64(3)) == "3" and fmt(True) == "true" and fmt("a") == "a"
    assert float(fmt(2 / 3)) == 2 / 3


def test_mean_stderr():
    assert mean_stderr([1.0]) == (1.0, None)
    m, se = mean_stderr([1.0, 3.0])
    assert (m, se) == (2.0, 1.0)


def test_unwritable_directory_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        write_report(RunReport(CFG), blocker / "sub")
