import json

import pytest

from miatt.cli import rows_to_csv, run
from miatt.dataset import format_dataset, read_dataset


def _write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return str(path)


def _report(path):
    return json.loads(path.read_text())


def _err(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.fixture
def small(tmp_path):
    out = tmp_path / "data.jsonl"
    assert run(["generate", "--n", "3", "--m", "12", "--samples", "5", "--seed", "4", "--group-size", "3", "-o", str(out)]) == 0
    return out


def test_generate_best_assesses_best(tmp_path):
    data = tmp_path / "best.jsonl"
    rep = tmp_path / "assess.json"
    assert run(["generate", "--pattern", "best", "--n", "8", "--m", "64", "--seed", "1", "-o", str(data)]) == 0
    assert run(["assess", "-i", str(data), "-o", str(rep)]) == 0
    summary = _report(rep)["summary"]
    assert summary["quality_class"] == "Best"
    # omitted elements sit at 0.5, within delta of the mean, so they count as agreement
    assert summary["mean_pr"] == pytest.approx(7 / 8, abs=1e-12)


def test_identical_pairs_redundancy_half(tmp_path):
    recs = [{"id": f"r{i}", "prediction": [0.5] * 4, "miatts": [t, t]} for i, t in enumerate([[0, 1, 1, 0], [1, 1, 1, 1], [0.2, 0.9, 0.4, 0.6]])]
    rep = tmp_path / "a.json"
    assert run(["assess", "-i", _write_jsonl(tmp_path / "d.jsonl", recs), "-o", str(rep)]) == 0
    assert [r["redundancy"] for r in _report(rep)["rows"]] == [0.5, 0.5, 0.5]


def test_loss_compare_ce_equivalence(small, tmp_path):
    rep = tmp_path / "loss.json"
    assert run(["loss-compare", "-i", str(small), "--loss", "ce", "--method", "both", "-o", str(rep)]) == 0
    rows = _report(rep)["rows"]
    assert len(rows) == 5 and all(r["residue"] <= 1e-12 for r in rows)


def test_loss_compare_dice_mix(small, tmp_path):
    rep = tmp_path / "loss.json"
    assert run(["loss-compare", "-i", str(small), "--mix", "0.5", "-o", str(rep)]) == 0
    for r in _report(rep)["rows"]:
        assert r["composite_loss"] == pytest.approx(0.5 * (1 - r["s_a"]) + 0.5 * (1 - r["s_b"]), abs=1e-15)
        assert sum(r["region_counts"].values()) == 12


def test_method_selection(small, tmp_path):
    rep = tmp_path / "loss.json"
    assert run(["loss-compare", "-i", str(small), "--method", "A", "-o", str(rep)]) == 0
    row = _report(rep)["rows"][0]
    assert "s_a" in row and "s_b" not in row and "residue" not in row


def test_categorical_ce_command(tmp_path):
    recs = [{"id": "c", "prediction": [0.7, 0.3], "miatts": [[1, 0], [0, 1]]}]
    rep = tmp_path / "loss.json"
    assert run(["loss-compare", "--loss", "categorical-ce", "-i", _write_jsonl(tmp_path / "d.jsonl", recs), "-o", str(rep)]) == 0
    assert _report(rep)["rows"][0]["residue"] <= 1e-15


@pytest.mark.parametrize("cmd", ["eval-laf", "eval-ternary", "eval-att", "compare-eval"])
def test_eval_commands(cmd, small, tmp_path):
    rep = tmp_path / "r.json"
    assert run([cmd, "-i", str(small), "-o", str(rep)]) == 0
    out = _report(rep)
    assert out["command"] == cmd and len(out["rows"]) == 5
    assert out["summary"]["n_samples"] == 5


def test_report_echoes_resolved_config(small, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 0.2, "gamma_k": 0.9, "seed": 11}))
    rep = tmp_path / "r.json"
    assert run(["eval-laf", "-i", str(small), "-c", str(cfg), "--lambda", "0.7", "-o", str(rep)]) == 0
    out = _report(rep)
    assert out["config"]["lambda"] == 0.7
    assert out["config"]["gamma_k"] == 0.9
    assert out["seed"] == 11
    assert set(out["config"]) == {"delta", "delta_lo", "delta_hi", "tau_lo", "tau_hi", "alpha", "gamma_q", "lambda", "gamma_k", "eps_clamp", "seed"}


def test_csv_outputs(small, tmp_path):
    csv_path, sum_path = tmp_path / "rows.csv", tmp_path / "sum.csv"
    assert run(["assess", "-i", str(small), "-o", str(tmp_path / "r.json"), "--csv", str(csv_path), "--summary-csv", str(sum_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("id,") and len(lines) == 6
    assert sum_path.read_text().splitlines()[0] == "key,value"


def test_rows_to_csv_flattens():
    text = rows_to_csv([{"a": 0.1, "b": [1, 2], "c": {"x": 3}}])
    assert text == "a,b,c\n0.10000000000000001,1;2,x=3\n"


def test_gradcheck_command(tmp_path):
    rep = tmp_path / "g.json"
    assert run(["gradcheck", "--points", "50", "--seed", "2", "-o", str(rep)]) == 0
    s = _report(rep)["summary"]
    assert s["n_checks"] == 200 and s["passed"] and s["max_rel_error"] <= 1e-6


def test_round_trip_byte_identical(small):
    text = small.read_text()
    assert format_dataset(read_dataset(small)) == text


def test_deterministic_reports(small, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["eval-laf", "-i", str(small), "-o", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


class TestErrors:
    def test_missing_input_is_io(self, tmp_path, capsys):
        assert run(["assess", "-i", str(tmp_path / "nope.jsonl")]) == 1
        assert _err(capsys)["exit_code"] == 1

    def test_bad_config_value(self, small, capsys):
        assert run(["assess", "-i", str(small), "--delta-lo", "0.9"]) == 2
        assert _err(capsys)["error"] == "ConfigError"

    def test_unreadable_config(self, small, tmp_path, capsys):
        bad = tmp_path / "cfg.json"
        bad.write_text("{not json")
        assert run(["assess", "-i", str(small), "-c", str(bad)]) == 2

    def test_unknown_config_key(self, small, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"beta": 1}))
        assert run(["assess", "-i", str(small), "-c", str(cfg)]) == 2

    def test_bad_generate_spec(self, capsys):
        assert run(["generate", "--coverage", "1.5"]) == 2

    def test_malformed_line_number(self, tmp_path, capsys):
        path = tmp_path / "d.jsonl"
        path.write_text(json.dumps({"id": "a", "prediction": [0.1, 0.2], "miatts": [[0, 1], [1, 0]]}) + "\n{oops\n")
        assert run(["assess", "-i", str(path)]) == 3
        err = _err(capsys)
        assert err["error"] == "SchemaError" and err["line"] == 2

    @pytest.mark.parametrize(
        "record",
        [
            {"id": "a", "prediction": [0.1], "miatts": [[0, 1], [1, 0]]},
            {"id": "a", "prediction": [0.1, 0.2], "miatts": [[0, 1]]},
            {"id": "a", "prediction": [0.1, 0.2], "miatts": [[0, 1], [1, 0]], "exclusive_groups": [[0, 5]]},
            {"id": "a", "prediction": [0.1, 1.2], "miatts": [[0, 1], [1, 0]]},
            {"id": "a", "prediction": [0.1, 0.2], "miatts": [[0, 1], [1, 0]], "extra": 1},
            {"prediction": [0.1, 0.2], "miatts": [[0, 1], [1, 0]]},
        ],
    )
    def test_schema_violations(self, record, tmp_path):
        assert run(["assess", "-i", _write_jsonl(tmp_path / "d.jsonl", [record])]) == 3

    def test_empty_dataset(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text("\n")
        assert run(["assess", "-i", str(path)]) == 3

    def test_missing_att_is_domain(self, tmp_path, capsys):
        recs = [{"id": "a", "prediction": [0.1, 0.9], "miatts": [[0, 1], [0, 0.5]]}]
        assert run(["eval-att", "-i", _write_jsonl(tmp_path / "d.jsonl", recs)]) == 4
        assert _err(capsys)["error"] == "MissingAtt"

    def test_unconfident_att_is_domain(self, tmp_path, capsys):
        recs = [{"id": "a", "prediction": [0.1, 0.9], "miatts": [[0, 1], [0, 0.5]], "att": [0.5, 1.0]}]
        assert run(["compare-eval", "-i", _write_jsonl(tmp_path / "d.jsonl", recs)]) == 4
        assert _err(capsys)["error"] == "AttNotConfident"

    def test_categorical_on_non_distribution(self, tmp_path):
        recs = [{"id": "a", "prediction": [0.9, 0.9], "miatts": [[0, 1], [1, 0]]}]
        assert run(["loss-compare", "--loss", "categorical-ce", "-i", _write_jsonl(tmp_path / "d.jsonl", recs)]) == 4
