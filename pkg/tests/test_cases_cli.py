import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opjensen.campaign import ConfigError, load_config, run_campaign
from opjensen.cases import CaseError, evaluate_case, load_case
from opjensen.cli import EXIT_INVALID, EXIT_OK, EXIT_VIOLATION, main
from opjensen.serialize import decode_matrix, decode_vector, dumps, encode_matrix, encode_vector

seeds = st.integers(0, 2**32 - 1)


# -- serialization -----------------------------------------------------------

@given(seeds, st.integers(1, 4))
def test_matrix_encoding_round_trips_bit_exact(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    back = decode_matrix(json.loads(json.dumps(encode_matrix(a))))
    assert np.array_equal(a, back)
    x = a[0]
    assert np.array_equal(decode_vector(json.loads(json.dumps(encode_vector(x)))), x)


def test_real_nested_lists_are_accepted():
    assert np.array_equal(decode_matrix([[1.0, 2.0], [2.0, 3.0]]), np.array([[1, 2], [2, 3]], dtype=complex))


def test_dumps_is_stable():
    assert dumps({"b": 1, "a": np.float64(0.5)}) == dumps({"a": 0.5, "b": 1})


# -- cases -------------------------------------------------------------------

def test_committed_cases(root):
    report = evaluate_case(load_case(root / "cases" / "jensen_square_124.json"))
    assert [float(v) for v in report.values] == pytest.approx([49 / 9, 19 / 3, 7.0], abs=1e-12)
    report = evaluate_case(load_case(root / "cases" / "operator_norm_counterexample.json"))
    assert [float(v) for v in report.values] == pytest.approx([1.0, 2.5, 2.0], abs=1e-12)
    assert report.passed and report.violations(asserted=False)
    assert evaluate_case(load_case(root / "cases" / "cdj_pinching.json")).passed


def test_case_errors_name_the_field(root):
    with pytest.raises(CaseError) as err:
        evaluate_case({"chain": "jensen"})
    assert err.value.location == "A"
    with pytest.raises(CaseError, match="unknown chain"):
        evaluate_case({"chain": "bogus"})
    with pytest.raises(CaseError, match="weights"):
        evaluate_case({"chain": "agh_1", "a": [1, 2], "weights": [1], "partition": [0]})
    with pytest.raises(CaseError, match=r"A\[0\]"):
        evaluate_case(load_case(root / "cases" / "non_hermitian.json"), strict=True)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"chain": "jensen",\n  oops}')
    with pytest.raises(CaseError, match=":2:"):
        load_case(path)


# -- CLI ---------------------------------------------------------------------

def test_cli_check_exit_codes(root, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["check", str(root / "cases" / "jensen_square_124.json"), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["pass"] is True
    assert main(["check", str(root / "cases" / "operator_norm_counterexample.json"), "--out", str(out)]) == EXIT_OK
    assert "not asserted" in capsys.readouterr().out
    assert main(["check", str(root / "cases" / "empty_partition.json")]) == EXIT_INVALID
    assert "nonempty proper" in capsys.readouterr().err
    assert main(["check", str(root / "cases" / "non_hermitian.json"), "--strict"]) == EXIT_INVALID
    assert main(["check", str(root / "cases" / "non_hermitian.json"), "--out", str(out)]) == EXIT_OK
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_INVALID
    assert main(["frobnicate"]) == EXIT_INVALID


def test_cli_check_violation_exit_code(tmp_path, monkeypatch):
    # asserted links are theorems, so no honest case violates one; inject a report that does
    from opjensen import cli
    from opjensen.refinements import ASCENDING, Term, build_report

    case = {"chain": "jensen", "function": "square", "A": [[[1.0]], [[2.0]]], "x": [[1.0, 0.0]], "partition": [0]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(case))
    assert main(["check", str(path), "--out", str(tmp_path / "o.json")]) == EXIT_OK
    assert main(["check", str(path), "--tol-rel", "0"]) == EXIT_INVALID
    bad = build_report("jensen", [Term("a", 2.0), Term("b", 1.0)], "scalar", ASCENDING)
    monkeypatch.setattr(cli, "evaluate_case", lambda *args, **kw: bad)
    assert main(["check", str(path), "--out", str(tmp_path / "o.json")]) == EXIT_VIOLATION


def test_cli_partition_search(root, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["partition-search", str(root / "cases" / "jensen_square_124.json"), "--out", str(out)]) == EXIT_OK
    result = json.loads(out.read_text())
    assert result["J"] == [0, 2] and result["value"] == pytest.approx(5.5)
    assert "best J=[0, 2]" in capsys.readouterr().out


def _small_config(tmp_path, **extra):
    cfg = {"chain": "cdj", "trials": 12, "seed": 5, "dim": [1, 3], "n": [2, 4],
           "functions": ["square", "inverse"], **extra}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_cli_campaign(tmp_path):
    path = _small_config(tmp_path)
    out = tmp_path / "report.json"
    assert main(["campaign", str(path), "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["trials"] == 12 and report["asserted_violations"] == 0
    assert "wall_time" not in report
    assert main(["campaign", str(path), "--trials", "0"]) == EXIT_INVALID
    assert main(["campaign", str(tmp_path / "nope.json")]) == EXIT_INVALID
    assert main(["campaign", str(path), "--out", str(out), "--timing", "--seed", "9"]) == EXIT_OK
    assert "wall_time" in json.loads(out.read_text())


def test_cli_campaign_violation_exit_code(tmp_path, root):
    # operator-norm campaign whose case forces the counterexample; the violated
    # link is not asserted, so the campaign still passes
    cfg = {"chain": "operator_norm", "trials": 3, "seed": 1, "functions": ["square"],
           "cases": [str(root / "cases" / "operator_norm_counterexample.json")]}
    path = tmp_path / "on.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "on_report.json"
    assert main(["campaign", str(path), "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["unasserted_violations"] >= 1
    assert any(e["trial"] == "case0" for e in report["exemplars"]["not_asserted"])
    # shrinking the tolerance below the roundoff floor is rejected, not ignored
    assert main(["campaign", str(path), "--tol-abs", "-1"]) == EXIT_INVALID


@pytest.mark.parametrize("bad", [
    {"trials": 0}, {"chain": "nope"}, {"dim": [3, 1]}, {"functions": ["cosh"]},
    {"maps": ["transpose"]}, {"seed": -1},
])
def test_config_validation(tmp_path, bad):
    path = _small_config(tmp_path, **bad)
    with pytest.raises(ConfigError):
        load_config(path)


def test_campaign_byte_identical_across_workers(tmp_path):
    config = load_config(_small_config(tmp_path, trials=16))
    one = run_campaign(config, workers=1).dumps()
    three = run_campaign(config, workers=3).dumps()
    assert one == three


def test_exemplar_replay(root):
    config = load_config(root / "configs" / "operator_norm.json", {"trials": 40})
    report = run_campaign(config, workers=1)
    exemplars = report.to_dict()["exemplars"]["not_asserted"]
    assert exemplars
    for ex in exemplars:
        replay = evaluate_case(json.loads(json.dumps(ex["case"]))).to_dict()
        for got, want in zip(replay["links"], ex["report"]["links"]):
            assert abs(got["margin"] - want["margin"]) <= 1e-12
            assert got["verdict"] == want["verdict"]
