import csv
import io
import json
import math
import subprocess
import sys

import pytest

import dgldpc.cli as cli
from dgldpc.cli import main, parse_config


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _json(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    return code, (json.loads(out) if out else None), (json.loads(err) if err else None)


def _strip_timing(doc):
    doc = dict(doc)
    doc.pop("timing")
    return doc


def test_analyze_ldpc(capsys, config_dir):
    code, doc, _ = _json(capsys, "analyze", config_dir / "ldpc_rate_third.json")
    assert code == 0
    res = doc["results"]
    assert res["slope_nats"] == pytest.approx(math.log(2), abs=1e-12)
    assert res["slope_bits"] == pytest.approx(1.0, abs=1e-12)
    assert res["design_rate"] == {"num": 1, "den": 3, "decimal": res["design_rate"]["decimal"]}
    assert doc["tool"] == "dgldpc" and doc["command"] == "analyze"
    assert len(doc["config_hash"]) == 64


def test_analyze_log_base_two(capsys, config_dir):
    _, doc, _ = _json(capsys, "analyze", config_dir / "ldpc_rate_third.json", "--log-base", "2")
    assert doc["results"]["slope"] == pytest.approx(1.0, abs=1e-12)
    assert doc["parameters"]["log_base"] == "2"


def test_analyze_hypothesis_failure(capsys, config_dir):
    code, doc, _ = _json(capsys, "analyze", config_dir / "hamming_checks.json")
    assert code == 2
    assert doc["results"]["slope"] is None
    assert doc["results"]["error"]["failing"] == ["r"]
    # the parameters are still reported
    assert doc["results"]["r"] == 3


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"cn_types": [\n  {"generator": ["111"],}\n]}')
    code, _, err = _json(capsys, "analyze", bad)
    assert code == 1
    assert err["error"]["type"] == "ConfigParseError"
    assert err["error"]["line"] == 2


def test_fraction_sum_error(capsys, tmp_path):
    bad = tmp_path / "sum.json"
    bad.write_text(
        json.dumps(
            {
                "cn_types": [{"generator": ["101", "011"], "rho": {"num": 9, "den": 10}}],
                "vn_types": [{"generator": ["11"], "lambda": {"num": 1, "den": 1}}],
            }
        )
    )
    code, _, err = _json(capsys, "analyze", bad)
    assert code == 1
    assert err["error"]["type"] == "FractionSumError"


def test_unknown_key_names_field():
    text = json.dumps(
        {
            "cn_types": [{"generator": ["11"], "rho": {"num": 1, "den": 1}, "weight": 3}],
            "vn_types": [{"generator": ["11"], "lambda": {"num": 1, "den": 1}}],
        }
    )
    with pytest.raises(cli.ConfigParseError) as info:
        parse_config(text)
    assert info.value.field.startswith("cn_types[0]")


def test_float_fraction_rejected():
    text = json.dumps(
        {
            "cn_types": [{"generator": ["11"], "rho": 1.0}],
            "vn_types": [{"generator": ["11"], "lambda": {"num": 1, "den": 1}}],
        }
    )
    with pytest.raises(cli.ConfigParseError):
        parse_config(text)


def test_missing_file(capsys, tmp_path):
    code, _, err = _json(capsys, "analyze", tmp_path / "nope.json")
    assert code == 1 and err["error"]["exit_code"] == 1


def test_usage_error_is_input_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["growth"])
    assert info.value.code == 1
    capsys.readouterr()


def test_nonintegral_n_suggests(capsys, config_dir):
    code, _, err = _json(capsys, "spectrum", config_dir / "ldpc_rate_third.json", "--n", "5")
    assert code == 1
    assert err["error"]["suggested_n"] == 6


def test_capacity_error(capsys, config_dir):
    code, _, err = _json(capsys, "spectrum", config_dir / "cycle_code.json", "--n", "300000")
    assert code == 3
    assert err["error"]["type"] == "CapacityError"


def test_growth_table(capsys, config_dir):
    code, doc, _ = _json(capsys, "growth", config_dir / "ldpc_rate_third.json", "--alpha-list", "1/100,1/6,0.9")
    assert code == 0
    rows = doc["results"]["table"]
    assert [r["alpha"] for r in rows] == ["1/100", "1/6", "9/10"]
    assert rows[1]["g_general"] == pytest.approx(0.10743093565758577, abs=1e-9)
    assert rows[0]["g_slope"] == pytest.approx(math.log(2) / 100, abs=1e-14)
    assert rows[2]["status"] == "infeasible" and rows[2]["g_general"] is None


def test_growth_empty_alpha_list(capsys, config_dir):
    code, doc, _ = _json(capsys, "growth", config_dir / "ldpc_rate_third.json")
    assert code == 0
    assert doc["results"]["table"] == []


def test_growth_slope_needs_hypothesis(capsys, config_dir):
    code, _, err = _json(capsys, "growth", config_dir / "hamming_checks.json", "--alpha-list", "0.01", "--method", "slope")
    assert code == 2
    assert err["error"]["failing"] == ["r"]


def test_growth_both_notes_hypothesis(capsys, config_dir):
    code, doc, _ = _json(capsys, "growth", config_dir / "hamming_checks.json", "--alpha-list", "0.01")
    assert code == 0
    assert doc["results"]["slope_note"]
    assert doc["results"]["table"][0]["g_slope"] is None


def test_exact_spectrum(capsys, config_dir):
    code, doc, _ = _json(capsys, "spectrum", config_dir / "cycle_code.json", "--n", "2")
    assert code == 0
    rows = doc["results"]["table"]
    assert [r["value"] for r in rows] == ["1", "2/3", "1"]


def test_sample_is_deterministic(capsys, config_dir):
    argv = ["sample", config_dir / "cycle_code.json", "--n", "2", "--trials", "500", "--seed", "9"]
    _, a, _ = _json(capsys, *argv)
    _, b, _ = _json(capsys, *argv)
    assert _strip_timing(a) == _strip_timing(b)


def test_sample_needs_seed(capsys, config_dir):
    code, _, err = _json(capsys, "sample", config_dir / "cycle_code.json", "--n", "2")
    assert code == 1 and err["error"]["type"] == "SeedRequiredError"


def test_exact_and_sample_exclusive(capsys, config_dir):
    with pytest.raises(SystemExit) as info:
        main(["spectrum", str(config_dir / "cycle_code.json"), "--n", "2", "--exact", "--sample"])
    assert info.value.code == 1
    capsys.readouterr()


def test_json_round_trip(capsys, config_dir):
    code, out, _ = _run(capsys, "growth", config_dir / "mixed_repetition.json", "--alpha-list", "1/100,1/20")
    assert code == 0
    assert json.dumps(json.loads(out), sort_keys=True, indent=2) + "\n" == out


def test_csv_round_trip(capsys, config_dir):
    code, out, _ = _run(
        capsys, "spectrum", config_dir / "ldpc_rate_third.json", "--n", "6", "--format", "csv"
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0].startswith("# dgldpc spectrum")
    header = next(r for r in rows if r and not r[0].startswith("#"))
    assert header == ["w", "value", "decimal", "log_value"]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    assert buf.getvalue() == out


def test_csv_key_value_report(capsys, config_dir):
    _, out, _ = _run(capsys, "analyze", config_dir / "ldpc_rate_third.json", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[1] == ["field", "value"]
    fields = dict(r for r in rows[2:])
    assert fields["design_rate"] == "1/3"
    assert float(fields["slope_nats"]) == pytest.approx(math.log(2))


def test_out_path(capsys, config_dir, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = _run(capsys, "analyze", config_dir / "cycle_code.json", "--out", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "analyze"


def test_config_hash_ignores_formatting(capsys, config_dir, tmp_path):
    raw = json.loads((config_dir / "cycle_code.json").read_text())
    compact = tmp_path / "compact.json"
    compact.write_text(json.dumps(raw, separators=(",", ":")))
    _, a, _ = _json(capsys, "analyze", config_dir / "cycle_code.json")
    _, b, _ = _json(capsys, "analyze", compact)
    assert a["config_hash"] == b["config_hash"]


def test_lemma_poly(capsys):
    code, doc, _ = _json(capsys, "lemma", "--poly", "1,0,3", "--xi", "0.3", "--ell-list", "60,3")
    assert code == 0
    res = doc["results"]
    assert res["value"] > 0 and res["expansion"] > 0
    statuses = [r["status"] for r in res["table"]]
    # 3 * 0.3 is not an integer exponent of a length-3 power
    assert statuses == ["ok", "no-coefficient"]
    assert res["table"][0]["gap"] > 0


def test_lemma_bipoly(capsys):
    code, doc, _ = _json(
        capsys, "lemma2", "--bipoly", "0:0:1,1:2:2,2:2:1", "--xi", "1/4", "--theta", "2/5", "--ell-list", "40"
    )
    assert code == 0
    assert doc["command"] == "lemma"
    assert sum(doc["results"]["argmax"].values()) == pytest.approx(1.0, abs=1e-9)


def test_lemma_needs_one_polynomial(capsys):
    code, _, err = _json(capsys, "lemma", "--xi", "0.1")
    assert code == 1 and err["error"]["type"] == "InputError"


def test_validate_passes(capsys, config_dir):
    for name in ("cycle_code.json", "ldpc_rate_third.json", "mixed_repetition.json"):
        code, doc, _ = _json(capsys, "validate", config_dir / name)
        assert code == 0, doc
        assert doc["results"]["failed"] == 0


def test_validate_reports_failure(capsys, config_dir, monkeypatch):
    real = cli.expected_spectrum

    def broken(ens, n, **kw):
        rep = real(ens, n, **kw)
        rep.values[-1] += 1
        return rep

    monkeypatch.setattr(cli, "expected_spectrum", broken)
    code, doc, _ = _json(capsys, "validate", config_dir / "cycle_code.json")
    assert code == 1
    failed = [r["check"] for r in doc["results"]["table"] if r["status"] == "fail"]
    assert failed == ["generating-function spectrum equals all-permutation average"]


def test_stdin_config(config_dir):
    text = (config_dir / "cycle_code.json").read_text()
    proc = subprocess.run(
        [sys.executable, "-m", "dgldpc", "analyze", "-"], input=text, capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["period"] >= 1
