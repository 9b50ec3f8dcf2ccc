import json

import pytest

from rmc import cli, msymb

SMALL_EVAL = ["eval", "--model", "sig21", "--divisor", "5:1,2:-2", "--digits", "3",
              "--point", "form=2/-2/-5", "--point", "disc=17"]


def run_cli(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured


def test_obstruct_certifies_bianchi_divisor(capsys):
    code, out = run_cli(["obstruct", "--divisor", "3:1,6:-1,7:1"], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["schema"] == cli.SCHEMA and doc["certified"]
    assert doc["kernel"] == [[1, -1, 1]]


def test_obstruct_rejects_with_functional_value(capsys):
    code, out = run_cli(["obstruct", "--divisor", "3:2,7:-1"], capsys)
    assert code == cli.EXIT_REJECTED
    doc = json.loads(out.out)
    assert not doc["certified"]
    assert "-6" in doc["message"] and "rejected" in out.err


def test_eval_refuses_uncertified_divisor(capsys):
    code, out = run_cli(["eval", "--model", "sig21", "--divisor", "5:1", "--point", "disc=44"], capsys)
    assert code == cli.EXIT_REJECTED


def test_eval_is_deterministic_and_cache_reproduces_records(tmp_path, capsys):
    cache = tmp_path / "cells.bin"
    first_path, second_path, third_path = (tmp_path / f"{k}.json" for k in "abc")
    assert cli.main(SMALL_EVAL + ["--json", str(first_path)]) == 0
    assert cli.main(SMALL_EVAL + ["--json", str(second_path), "--cache", str(cache)]) == 0
    assert cache.exists()
    assert cli.main(SMALL_EVAL + ["--json", str(third_path), "--cache", str(cache)]) == 0
    texts = [p.read_text() for p in (first_path, second_path, third_path)]
    assert texts[0] == texts[1] == texts[2]
    doc = json.loads(texts[0])
    assert [r["point"] for r in doc["records"]] == ["form=2/-2/-5,flip=rm,orient=1",
                                                     "form=2/-1/-2,flip=rm,orient=1"]


def test_eval_recognition_record(capsys):
    code, out = run_cli(SMALL_EVAL[:-2] + ["--recognize", "field=Qi,H=1e3"], capsys)
    assert code == 0
    rec = json.loads(out.out)["records"][0]["recognition"]
    assert rec["status"] in ("ok", "no_relation")


def test_verify_suites_pass(capsys):
    code, out = run_cli(["verify", "--suite", "weil", "--suite", "degrees"], capsys)
    doc = json.loads(out.out)
    assert code == 0 and doc["ok"]
    assert set(doc["suites"]) == {"weil", "degrees"}


def test_even_prime_is_refused(capsys):
    code, out = run_cli(["verify", "--p", "2"], capsys)
    assert code == 1 and "odd" in out.err


def test_parse_point_forms():
    pd = cli.parse_point("disc=8,flip=cm,orient=2", "sig31-bianchi")
    assert pd.form == (2, 0, -1) and pd.flip and pd.orientation == 2
    pd = cli.parse_point("form=4/-2/-9", "sig21")
    assert pd.form == (4, -2, -9) and not pd.flip
    for bad in ("disc=8,flip=sideways", "form=1/2", "orient=1", "disc"):
        with pytest.raises(cli.ConfigError):
            cli.parse_point(bad, "sig21")


def test_parse_recognize_fields():
    pd = msymb.SpecialPointData.from_disc("sig31-bianchi", 8)
    assert cli.parse_recognize("field=Qi_sqrtD", pd)[0] == 2
    assert cli.parse_recognize("field=Qi_sqrt11,H=1e9,mode=linear", pd) == (11, 1e9, "linear")
    assert cli.parse_recognize(None, pd) is None
    with pytest.raises(cli.ConfigError):
        cli.parse_recognize("field=Qj", pd)
