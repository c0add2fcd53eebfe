import csv
import io
import json
import math

import numpy as np
import pytest

from erestab.atlas import engine
from erestab.atlas.cli import cli_main
from erestab.atlas.io import emit, format_cell, write_json
from erestab.atlas.selftest import run_selftest
from erestab.kepler_cc import MassTriple, solve_central_configuration
from erestab.maslov import morse_index
from erestab.monodromy import period_map
from erestab.reduction import reduced_params, symmetric_alpha
from erestab.spectral import Verdict, classify, is_hyperbolic, stability_verdict

FAST = engine.ScanConfig(n0=64, n_max=256, threads=1)


def read_csv(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


# ---------------------------------------------------------------- engine


@pytest.mark.parametrize("alpha,e", [(1.0, 0.0), (2.9, 0.3), (3.0, 0.5)])
def test_point_matches_direct_pipeline(alpha, e):
    record = engine.evaluate_point(alpha, e, FAST)
    nf = classify(period_map(alpha, e).period_map)
    assert record.form == engine.form_label(nf)
    assert record.verdict == stability_verdict(nf).verdict.value
    assert record.i1 == morse_index(alpha, e, 1.0).i_omega
    assert record.im1 == morse_index(alpha, e, -1.0).i_omega
    assert record.residual <= 1e-9


def test_marginal_point_is_labelled():
    record = engine.evaluate_point(3.0, 0.0, FAST)
    assert record.form.startswith("MARGINAL:") and record.marginal
    assert (record.im1, record.nu1) == (2, 3)


def test_errors_are_recorded_in_the_row():
    record = engine.evaluate_point(1.0, 0.995, FAST)
    assert record.form == "ERROR"
    assert record.verdict == "DomainError"
    assert record.i1 == -1 and math.isnan(record.theta1)


def test_scan_order_and_determinism():
    alphas, es = [0.5, 2.9, 1.5], [0.4, 0.0]
    config = engine.ScanConfig(indices=False, threads=2)
    rows = engine.scan_alpha_e(alphas, es, config)
    assert [(r.e, r.alpha) for r in rows] == [(e, a) for e in es for a in alphas]
    again = engine.scan_alpha_e(alphas, es, engine.ScanConfig(indices=False, threads=1))
    first, second = io.StringIO(), io.StringIO()
    emit(rows, engine.ScanRecord.COLUMNS, first)
    emit(again, engine.ScanRecord.COLUMNS, second)
    assert first.getvalue() == second.getvalue()


def test_worker_count(monkeypatch):
    monkeypatch.setenv("ERE_THREADS", "3")
    assert engine.worker_count() == 3
    assert engine.worker_count(5) == 5
    monkeypatch.delenv("ERE_THREADS")
    assert engine.worker_count() >= 1


def test_parallel_map_preserves_order():
    assert engine.parallel_map(lambda x: x * x, list(range(20)), threads=4) == [x * x for x in range(20)]


def stability_verdict_is_linear(value):
    return Verdict(value).linearly_stable


def test_mass_plane_examples():
    rows = engine.scan_mass_plane([0.05, 0.1, 0.25, 0.6], [0.05, 0.1, 0.3, 0.5], 0.0, engine.ScanConfig(indices=False))
    assert all(r.m1 + r.m3 < 1.0 for r in rows)
    by_masses = {(r.m1, r.m3): r for r in rows}
    assert by_masses[(0.05, 0.05)].verdict == Verdict.STRONGLY_LINEARLY_STABLE.value
    assert not stability_verdict_is_linear(by_masses[(0.1, 0.1)].verdict)
    cross = by_masses[(0.1, 0.3)]
    params = reduced_params(solve_central_configuration(MassTriple(0.1, 0.6, 0.3)), 0.0)
    assert cross.alpha == pytest.approx(params.alpha, abs=1e-12)
    assert cross.a4y > 0.0


def test_symmetric_rows():
    rows = engine.symmetric_sweep([0.0, 0.5, 0.9], 0.0)
    assert rows[0].y == pytest.approx(math.sqrt(3.0), abs=1e-10)
    assert rows[0].alpha == pytest.approx(1.5, abs=1e-10)
    assert rows[1].alpha == pytest.approx(symmetric_alpha(0.5))
    assert rows[1].verdict == Verdict.COMPLEX_SADDLE.value
    assert rows[2].verdict == Verdict.STRONGLY_LINEARLY_STABLE.value


@pytest.mark.parametrize("e", [0.2, 0.5])
def test_traced_curves_are_ordered_and_consistent(e):
    s = engine.trace_curve_e(e, width=1e-6, config=FAST)
    assert s.alpha_k <= s.alpha_s + 1e-6 and s.alpha_s <= s.alpha_m
    assert s.width_s <= 1e-6 and s.width_m <= 1e-6
    assert morse_index(s.alpha_s + 1e-5, e, -1.0).i_omega >= 1
    assert morse_index(s.alpha_s - 1e-5, e, -1.0).i_omega == 0
    assert morse_index(s.alpha_m + 1e-5, e, -1.0).i_omega == 2
    assert is_hyperbolic(period_map(s.alpha_k - 1e-4, e).period_map)


# ---------------------------------------------------------------- io


def test_format_cell():
    assert format_cell(True) == "1"
    assert format_cell(np.float64(0.1)) == "0.1"
    assert format_cell(float("nan")) == "nan"
    assert format_cell(np.int64(3)) == "3"


def test_csv_and_json_writers():
    rows = [engine.CurveSample(0.0, 1.0, 2.0, 2.0, 1e-9, 1e-9, 1e-9, True)]
    buf = io.StringIO()
    emit(rows, engine.CurveSample.COLUMNS, buf, "csv", ["hello"])
    text = buf.getvalue()
    assert text.startswith("# hello\n")
    parsed = read_csv(text)
    assert parsed[0]["coincident"] == "1" and float(parsed[0]["alpha_s"]) == 2.0

    buf = io.StringIO()
    write_json([{"a": float("nan"), "z": 1 + 2j}], ["a", "z"], buf, ["c"])
    data = json.loads(buf.getvalue())
    assert data == {"comments": ["c"], "rows": [{"a": None, "z": [1.0, 2.0]}]}


def test_emit_rejects_unknown_format():
    with pytest.raises(ValueError):
        emit([], [], io.StringIO(), "xml")


# ---------------------------------------------------------------- cli


def run(argv, capsys):
    code = cli_main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cli_cc(capsys):
    code, out, _ = run(["cc", "--m1", "0.3", "--m3", "0.3"], capsys)
    assert code == 0
    row = read_csv(out)[0]
    assert float(row["m2"]) == pytest.approx(0.4)
    assert float(row["d11"]) + float(row["d22"]) == pytest.approx(3.0, abs=1e-10)


def test_cli_classify_json(capsys):
    code, out, _ = run(["classify", "--alpha", "1.0", "--e", "0", "--format", "json"], capsys)
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["verdict"] == Verdict.COMPLEX_SADDLE.value


def test_cli_index_with_splitting(capsys):
    code, out, _ = run(["index", "--alpha", "2.9", "--e", "0", "--omega-angle", "3.141592653589793,1.0", "--splitting", "1"], capsys)
    assert code == 0
    rows = read_csv(out)
    assert [r["i_omega"] for r in rows] == [r["splitting"] for r in rows]


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["classify", "--e", "0"],
        ["classify", "--alpha", "5", "--e", "0"],
        ["classify", "--alpha", "1", "--e", "0.995"],
        ["cc", "--m1", "0.7", "--m3", "0.7"],
        [],
    ],
)
def test_cli_invalid_input_exits_with_one(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert err


def test_cli_config_file_and_out(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scan settings\nalpha-min = 2.85\nalpha_max = 2.95\nalpha-n = 3\ne-n = 1\ne-max = 0\n")
    target = tmp_path / "scan.csv"
    code, out, _ = run(["scan-ae", "--config", str(cfg), "--out", str(target), "--alpha-n", "2"], capsys)
    assert code == 0 and out == ""
    rows = read_csv(target.read_text())
    assert [float(r["alpha"]) for r in rows] == [2.85, 2.95]
    assert all(r["verdict"] == Verdict.STRONGLY_LINEARLY_STABLE.value for r in rows)


def test_cli_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    code, _, _ = run(["classify", "--alpha", "1", "--e", "0", "--config", str(cfg)], capsys)
    assert code == 1


def test_cli_monodromy_dump(tmp_path, capsys):
    dump = tmp_path / "path.csv"
    code, out, _ = run(["monodromy", "--alpha", "2.9", "--e", "0.3", "--steps", "1024", "--stride", "256", "--dump", str(dump)], capsys)
    assert code == 0
    assert len(read_csv(out)) == 4
    assert len(dump.read_text().splitlines()) == 1 + 5


def test_cli_symmetric_and_trace(capsys):
    code, out, _ = run(["symmetric", "--m2-n", "5", "--m2-max", "0.9"], capsys)
    assert code == 0 and len(read_csv(out)) == 5
    code, out, _ = run(["trace-curves", "--e", "0", "--width", "1e-6"], capsys)
    assert code == 0
    row = read_csv(out)[0]
    assert float(row["alpha_k"]) == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert row["coincident"] == "1"


def test_selftest_fast_checks_pass():
    results = run_selftest(full=False)
    assert results and all(r.passed for r in results)
