import io
import json

import pytest

from sprm.cli import build_parser, main
from sprm.synthetic import bundled_path


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_enumerate_prints_size():
    code, text = run("enumerate", "--n", "3", "--d", "4")
    assert code == 0 and text.splitlines()[0] == "35"
    code, text = run("enumerate", "--n", "2", "--d", "1", "--format", "json")
    assert json.loads(text)["size"] == 3


def test_verify_is_byte_deterministic():
    a = run("verify", "--seed", "7", "--only", "mapping-bijection", "--only", "basis-counts")
    b = run("verify", "--seed", "7", "--only", "mapping-bijection", "--only", "basis-counts")
    assert a == b and a[0] == 0
    assert all(line.startswith("PASS") for line in a[1].splitlines())


def test_fit_on_bundled_outliers(tmp_path):
    model = tmp_path / "m.txt"
    code, text = run("fit", "--bundled", "outliers", "--lm", "3", "--lb", "18",
                     "--format", "json", "--out", str(model))
    rec = json.loads(text)
    assert code == 0 and len(rec["selected"]) == 3 and len(rec["anomalies"]) == 2
    assert model.read_text().startswith("sprm-model 1")


def test_oracle_on_bundled_outliers():
    code, text = run("oracle", "--bundled", "outliers", "--lm", "3", "--lb", "18",
                     "--format", "json")
    rec = json.loads(text)
    assert code == 0 and rec["selected"] == ["1", "x1", "x2^2"] and rec["anomalies"] == [6, 13]


def test_relax_csv_and_trace(tmp_path):
    trace = tmp_path / "t.csv"
    code, text = run("relax", "--bundled", "outliers", "--lm", "3", "--lb", "18",
                     "--format", "csv", "--trace", str(trace))
    assert code == 0 and text.startswith("lower_bound,") and trace.exists()


def test_exit_codes(tmp_path, monkeypatch):
    assert run("fit", "--lm", "1")[0] == 1
    assert run("nonsense")[0] == 1
    assert run("fit", "--data", str(tmp_path / "no.csv"), "--target", "y", "--features", "a",
               "--lm", "1", "--lb", "1")[0] == 3
    assert run("oracle", "--bundled", "outliers", "--lm", "3", "--lb", "15",
               "--node-budget", "5")[0] == 2
    assert run("fit", "--bundled", "outliers", "--lm", "99", "--lb", "18")[0] == 1
    monkeypatch.setenv("TSCRR_TOL", "abc")
    assert run("relax", "--bundled", "outliers", "--lm", "3", "--lb", "18")[0] == 1


def test_tolerance_override(monkeypatch):
    monkeypatch.setenv("TSCRR_TOL", "0.5")
    code, text = run("relax", "--bundled", "outliers", "--lm", "3", "--lb", "18",
                     "--format", "json")
    assert code == 0 and json.loads(text)["certified"] is True


def test_bench_subcommand(tmp_path):
    code, text = run("bench", bundled_path("synthetic.ini"), "--out", str(tmp_path),
                     "--jobs", "1", "--format", "json")
    assert code == 0
    assert (tmp_path / "metrics.csv").exists()


@pytest.mark.parametrize("sub", ["enumerate", "fit", "oracle", "relax", "verify", "bench"])
def test_help_documents_every_flag(sub, capsys):
    assert main([sub, "--help"]) == 0
    text = capsys.readouterr().out
    parser = build_parser()
    subparser = parser._subparsers._group_actions[0].choices[sub]
    for action in subparser._actions:
        for flag in action.option_strings:
            assert flag in text
        if action.option_strings and action.help is None:
            pytest.fail(f"{sub} {action.option_strings} has no help text")
