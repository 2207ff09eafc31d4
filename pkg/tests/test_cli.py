import csv
import json

import pytest

from quadfourier.cli import ConfigError, ExperimentConfig, main


def _run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


# --- configuration -------------------------------------------------------------------


def test_config_validation():
    ExperimentConfig("norms", n=[10, 20])
    with pytest.raises(ConfigError):
        ExperimentConfig("norms", n=[20, 10])
    with pytest.raises(ConfigError):
        ExperimentConfig("norms", n=[0, 10])
    with pytest.raises(ConfigError):
        ExperimentConfig("norms", options={"bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig("weyl", format="csv")
    with pytest.raises(ConfigError):
        ExperimentConfig("nope")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"command": "norms", "extra": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"command": "bohr"}, command="norms")


@pytest.mark.parametrize(
    "text",
    ['{"command": "norms", "n": [64, 32]}', '{"command": "norms", "colour": 1}', "{not json", '{"options": {"s": [2], "x": 0}}'],
)
def test_malformed_config_writes_nothing(tmp_path, text):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(text)
    code, out = _run(tmp_path, "norms.csv", "norms", "--config", str(cfg))
    assert code == 2
    assert not out.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["cfg.json"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "norms", "n": [32, 64], "format": "csv", "options": {"s": [2]}}))
    code, out = _run(tmp_path, "a.csv", "norms", "--config", str(cfg), "--n", "16")
    assert code == 0
    assert {r["N"] for r in _rows(out)} == {"16"}
    assert {r["s"] for r in _rows(out)} == {"2"}


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["norms", "--nn", "3"])
    assert exc.value.code == 2


# --- norms and decay ----------------------------------------------------------------------


def test_norm_scan_constant_calibration(tmp_path):
    code, out = _run(tmp_path, "n.csv", "norms", "--n", "64", "256", "1024", "--format", "csv")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == ["N", "s", "function", "norm", "seconds"]
    const = [r for r in rows if r["function"] == "constant"]
    assert len(const) == 6 and all(float(r["norm"]) == 1.0 for r in const)


def test_norm_scan_u3_cap_reported_per_row(tmp_path):
    code, out = _run(tmp_path, "n.csv", "norms", "--n", "64", "128", "--u3-cap", "100", "--functions", "mobius")
    assert code == 0
    rows = {(r["N"], r["s"]): r["norm"] for r in _rows(out)}
    assert rows[("128", "3")] == "nan" and float(rows[("64", "3")]) > 0
    assert float(rows[("128", "2")]) > 0


def test_norm_scan_timings_opt_in(tmp_path):
    _, out = _run(tmp_path, "n.csv", "norms", "--n", "64", "--s", "2", "--timings")
    assert all(float(r["seconds"]) >= 0 for r in _rows(out))


def test_mobius_u2_decays_across_scan(tmp_path):
    code, out = _run(tmp_path, "n.csv", "norms", "--n", "1024", "65536", "--s", "2", "--functions", "mobius")
    assert code == 0
    norms = [float(r["norm"]) for r in _rows(out)]
    assert norms[1] < norms[0]


def test_svg_is_a_view_of_the_csv(tmp_path):
    args = ["norms", "--n", "64", "256", "--functions", "mobius", "constant"]
    _, csv_out = _run(tmp_path, "plain.csv", *args, "--format", "csv")
    code, svg_out = _run(tmp_path, "plot.svg", *args, "--format", "svg")
    assert code == 0
    assert svg_out.read_text().startswith("<svg") and "<polyline" in svg_out.read_text()
    assert svg_out.with_suffix(".csv").read_bytes() == csv_out.read_bytes()


# --- lemma suites -------------------------------------------------------------------------------


def test_lemma_bundle_default(tmp_path):
    code, out = _run(tmp_path, "l.json", "lemmas", "--samples", "200")
    assert code == 0
    bundle = json.loads(out.read_text())
    assert bundle["ok"]
    assert set(bundle["suites"]) == {"philemma", "quartic", "polarization", "bohr_size", "bohr0", "localization", "vinogradov"}
    for report in bundle["suites"].values():
        assert report["samples"] >= 200 and report["max_defect"] <= 1e-9


def test_lemma_corrupted_form_fails(tmp_path):
    code, out = _run(tmp_path, "l.json", "lemmas", "--suites", "quartic", "--samples", "100", "--corrupt")
    assert code == 3
    report = json.loads(out.read_text())["suites"]["quartic"]
    assert report["failures"] and report["max_defect"] > 1e-3


def test_lemma_empty_selection(tmp_path):
    code, out = _run(tmp_path, "l.json", "lemmas", "--suites")
    assert code == 2 and not out.exists()
    code, out = _run(tmp_path, "l.json", "lemmas", "--suites", "made_up")
    assert code == 2 and not out.exists()


# --- other commands ----------------------------------------------------------------------------


def test_fourap_json_schema(tmp_path):
    code, out = _run(tmp_path, "f.json", "fourap", "--n", "2000", "--pmax", "100")
    assert code == 0
    data = json.loads(out.read_text())
    assert {"lhs", "series", "beta_p", "beta_inf", "gap"} <= set(data)
    assert data["beta_p"][:2] == [4.0, 1.125] and data["lhs"] > 0


def test_series_command(tmp_path):
    system = json.dumps({"matrix": [[1]], "constants": [0]})
    code, out = _run(tmp_path, "s.json", "series", "--system", system, "--pmax", "30", "--samples", "100")
    assert code == 0
    data = json.loads(out.read_text())
    assert all(b == 1.0 for b in data["beta_p"])
    code, _ = _run(tmp_path, "bad.json", "series", "--system", '{"matrix": [[1, 0], [1, 0]], "constants": [0, 0]}')
    assert code == 2


def test_vaughan_and_bohr_commands(tmp_path):
    code, out = _run(tmp_path, "v.csv", "vaughan-check", "--n", "5000", "--U", "10", "--V", "12")
    assert code == 0
    assert all(float(r["max_defect"]) <= 1e-9 for r in _rows(out))
    code, out = _run(tmp_path, "b.json", "bohr", "--n", "2000", "--frequencies", "1", "3", "--rho", "0.15")
    assert code == 0
    rec = json.loads(out.read_text())["bohr_sets"][0]
    assert rec["regular"] and 0.075 <= rec["radius"] <= 0.15


def test_weyl_tolerance_failure(tmp_path):
    poly = json.dumps({"dimension": 1, "caps": [1], "coefficients": [{"exponent": [1], "value": 0.6180339887}]})
    code, out = _run(tmp_path, "w.json", "weyl", "--poly", poly, "--box", "[[1, 3]]")
    assert code == 3
    assert json.loads(out.read_text())["large"]
    code, _ = _run(tmp_path, "w2.json", "weyl", "--n", "5000")
    assert code == 0


def test_witness_command(tmp_path):
    code, out = _run(tmp_path, "w.csv", "witness", "--n", "257", "--trials", "3", "--seed", "5")
    assert code == 0
    for r in _rows(out):
        assert (r["a"], r["b"]) == (r["found_a"], r["found_b"])


# --- determinism -------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [
        ["norms", "--n", "128", "512", "--format", "csv"],
        ["witness", "--n", "251", "--trials", "4"],
        ["lemmas", "--samples", "100"],
        ["series", "--system", '{"matrix": [[1, 0], [1, 1]], "constants": [0, 0]}', "--pmax", "20", "--samples", "5000"],
        ["decay-scan", "--n", "256", "512", "1024", "--format", "svg"],
    ],
)
def test_byte_identical_across_threads(tmp_path, args):
    outputs = []
    for threads in ("1", "8", "1"):
        d = tmp_path / threads / str(len(outputs))
        code, out = _run(d, "result", *args, "--threads", threads)
        assert code == 0
        outputs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
    assert outputs[0] == outputs[1] == outputs[2]
