import json

import pytest

from kpmatch.cli import EXIT_CHECK, EXIT_OK, EXIT_STAGE, EXIT_USAGE, main
from kpmatch.io import parse_instance


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def gen(capsys, tmp_path, name, *argv):
    path = tmp_path / name
    code, _ = run(capsys, "gen", *argv, "-o", str(path))
    assert code == EXIT_OK
    return str(path)


def test_gen_writes_parsable_instance(capsys, tmp_path):
    path = gen(capsys, tmp_path, "k.kpg", "complete", "--n", "3")
    H, bip = parse_instance(open(path).read())
    assert len(H) == 27 and bip is None


def test_gen_parity_includes_bip(capsys, tmp_path):
    path = gen(capsys, tmp_path, "e.kpg", "even", "--n", "4", "--a", "2,2,2")
    H, bip = parse_instance(open(path).read())
    assert bip.a_sizes() == (2, 2, 2) and len(H) == 32


def test_gen_stdout_and_perturb(capsys, tmp_path):
    base = gen(capsys, tmp_path, "s.kpg", "space", "--n", "4", "--a", "1,1,1")
    code, out = run(capsys, "gen", "perturb", "--input", base, "--add", "3", "--remove", "2", "--seed", "7")
    H, _ = parse_instance(out)
    H0, _ = parse_instance(open(base).read())
    assert code == EXIT_OK and len(H) == len(H0) + 1


def test_solve_json(capsys, tmp_path):
    path = gen(capsys, tmp_path, "s.kpg", "space", "--n", "5", "--a", "1,1,1")
    code, out = run(capsys, "solve", path, "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK and data["data"]["nu"] == 3 and data["passed"]


def test_solve_budget_exhausted_exits_stage(capsys, tmp_path):
    path = gen(capsys, tmp_path, "s.kpg", "space", "--n", "6", "--a", "1,1,1")
    code, out = run(capsys, "solve", path, "--budget", "0")
    assert code == EXIT_STAGE and "result=fail" in out


def test_check_reports_codegrees(capsys, tmp_path):
    path = gen(capsys, tmp_path, "k.kpg", "complete", "--n", "3")
    code, out = run(capsys, "check", path, "--format", "json")
    data = json.loads(out)["data"]
    assert code == EXIT_OK and data["codegrees"] == [3, 3, 3] and data["greedy_size"] >= 2


def test_check_invalid_matching_exits_one(capsys, tmp_path):
    path = gen(capsys, tmp_path, "k.kpg", "complete", "--n", "3")
    bad = tmp_path / "m.txt"
    bad.write_text("0 0 0\n0 1 1\n")
    code, _ = run(capsys, "check", path, "--matching", str(bad))
    assert code == EXIT_CHECK
    bad.write_text("0 0 0\n1 1 1\n")
    assert run(capsys, "check", path, "--matching", str(bad))[0] == EXIT_OK


def test_match_and_transcript(capsys, tmp_path):
    path = gen(capsys, tmp_path, "s.kpg", "space", "--n", "6", "--a", "2,2,1")
    code, out = run(capsys, "match", path, "--transcript", "--format", "json")
    data = json.loads(out)["data"]
    assert code == EXIT_OK and data["size"] == 5 and data["transcript"]["route"] == data["route"]


def test_classify(capsys, tmp_path):
    path = gen(capsys, tmp_path, "e.kpg", "even", "--n", "4", "--a", "2,2,0")
    code, out = run(capsys, "classify", path, "--format", "json")
    data = json.loads(out)["data"]
    assert code == EXIT_OK and data["d_extremal"]["defect"] == 0


def test_absorb(capsys, tmp_path):
    path = gen(capsys, tmp_path, "k.kpg", "complete", "--n", "4")
    S = "0:0,0:1,1:0,1:1,2:0,2:1"
    code, out = run(capsys, "absorb", path, "--S", S, "--e", "2,3,2", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["data"]["absorbing_edge"]["holds"]
    code, out = run(capsys, "absorb", path, "--closed", "0", "--format", "json")
    assert json.loads(out)["data"]["closed_partition"]["classes"] == [[0, 1, 2, 3]]
    assert run(capsys, "absorb", path)[0] == EXIT_USAGE


def test_verify_even(capsys):
    code, out = run(capsys, "verify", "even")
    assert code == EXIT_OK and out.rstrip().endswith("result=pass")


def test_verify_unknown_suite(capsys):
    assert main(["verify", "nosuch"]) == EXIT_USAGE
    assert "invalid choice" in capsys.readouterr().err


def test_parse_error_exits_usage(capsys, tmp_path):
    bad = tmp_path / "bad.kpg"
    bad.write_text("kpg 1\n3\n2 2 2\n0 0 5\n")
    code = main(["solve", str(bad)])
    assert code == EXIT_USAGE and "line 4" in capsys.readouterr().err


def test_missing_file_exits_usage(tmp_path):
    assert main(["solve", str(tmp_path / "absent.kpg")]) == EXIT_USAGE


def test_global_flag_position(capsys):
    before = run(capsys, "--seed", "3", "gen", "random", "--n", "3")[1]
    after = run(capsys, "gen", "random", "--n", "3", "--seed", "3")[1]
    other = run(capsys, "gen", "random", "--n", "3", "--seed", "4")[1]
    assert before == after != other


def test_bad_params_exit_usage():
    assert main(["--params", "nonsense=1", "verify", "even"]) == EXIT_USAGE
