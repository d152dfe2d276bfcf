import json

import pytest

from juliette.cli import main
from juliette.core import IntVal, MethodTable
from juliette.evaluator import MachineState
from juliette.fuzz import (
    CHECKS, FuzzConfig, check_determinism, check_progress, opt_case, program_for,
    run_campaign, shrink, size,
)
from juliette.harness import freeze, optdiff_state, split_at_table
from juliette.litmus import CASES, run_case, run_suite
from juliette.parser import parse_program, print_expr
from programs import DIRECT_CASE, INLINE_CASE, LITMUS_D, WORKED


@pytest.fixture
def jlt(tmp_path):
    def write(text, name="prog.jlt"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


def test_run_worked(jlt, capsys):
    assert main(["run", jlt(WORKED)]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "=> 84"


def test_run_smallest(jlt, capsys):
    assert main(["run", jlt("(evalg 5)")]) == 0
    assert capsys.readouterr().out == "=> 5\n"


def test_run_trace(jlt, capsys):
    assert main(["run", "--trace", jlt("(evalg (pcall + 1 2))")]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "0: 0 ⊢ (evalg (pcall + 1 2))", "1: 0 ⊢ (evalg 3)", "2: 0 ⊢ 3", "=> 3"]


def test_run_exit_codes(jlt, capsys):
    assert main(["run", jlt(LITMUS_D)]) == 1
    assert capsys.readouterr().out.strip() == "error: NoMethod"
    assert main(["run", jlt("(evalg (mcall f 1)")]) == 2
    assert "parse error" in capsys.readouterr().err
    loop = '(evalg (seq (mdef "f" () (mcall f)) (mcall f)))'
    assert main(["run", "--fuel", "30", jlt(loop)]) == 3
    assert "fuel exhausted after 30 steps" in capsys.readouterr().out


def test_run_json(jlt, capsys):
    assert main(["--json", "run", jlt(WORKED)]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["value"] == "84" and d["status"] == "value"
    assert d["table"].startswith('((mdef "g" () 2)')
    assert main(["run", "--json", jlt("(evalg (pcall print 7))")]) == 0
    assert json.loads(capsys.readouterr().out)["output"] == "7\n"


def test_litmus_suite():
    suite = run_suite()
    assert len(suite) == 9 and all(r.ok for rs in suite.values() for r in rs)
    h = next(c for c in CASES if c.id == "h")
    assert [r.actual for r in run_case(h)] == ["=> 84", "=> 42", "=> 1764"]
    b = next(c for c in CASES if c.id == "b")
    assert run_case(b)[0].actual == "=> 2"
    g = next(c for c in CASES if c.id == "g")
    assert [r.actual for r in run_case(g)] == ["=> 84", "=> 0"]


def test_litmus_cli(capsys):
    assert main(["litmus"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-1] == "9/9 cases pass"
    assert sum(line.startswith("PASS") for line in out) == 12


def test_fuzz_cli_clean(capsys):
    assert main(["fuzz", "--cases", "100", "--seed", "4"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "0 failures"


def test_fuzz_degenerate_alphabet():
    cfg = FuzzConfig(max_depth=0, values=(IntVal(5),))
    assert {print_expr(program_for(1, i, cfg)) for i in range(50)} == {"(evalg 5)"}


def test_fuzz_reports_and_replays(tmp_path, monkeypatch, capsys):
    # a stand-in property that fails whenever the program prints
    def fake(p, cfg):
        return "prints" if "(pcall print" in print_expr(p) else None
    monkeypatch.setitem(CHECKS, "fake", fake)
    out = tmp_path / "cex"
    assert main(["fuzz", "--cases", "60", "--out", str(out)]) == 1
    files = sorted(out.glob("counterexample-fake-*.jlt"))
    assert files
    text = files[0].read_text()
    minimized = parse_program(text.split("\n", 1)[1])
    assert size(minimized) <= 6
    capsys.readouterr()
    assert main(["fuzz", "--replay", str(files[0])]) == 1
    assert "FAIL fake" in capsys.readouterr().out


def test_fuzz_reports_identical(capsys):
    main(["--json", "fuzz", "--cases", "40", "--seed", "9"])
    a = capsys.readouterr().out
    main(["--json", "fuzz", "--cases", "40", "--seed", "9"])
    assert capsys.readouterr().out == a


def test_shrink_greedy():
    p = parse_program("(evalg (seq (pcall + 1 2) (seq (pcall print 3) (mcall (mval q) 4))))")
    small = shrink(p, lambda q: "(pcall print" in print_expr(q))
    # dropping the argument keeps the property, so it goes too
    assert print_expr(small) == "(evalg (pcall print))"


def test_campaign_properties_hold():
    report = run_campaign(FuzzConfig(seed=21, cases=300))
    assert report.ok and report.counts["decomposition"] == 300
    assert sum(report.outcomes.values()) == 300


def test_progress_and_determinism_on_examples():
    for text in (WORKED, LITMUS_D, DIRECT_CASE):
        p = parse_program(text)
        assert check_progress(p, 1000) is None
        assert check_determinism(p, 1000) is None


def test_freeze_and_split():
    s = MachineState(MethodTable(), parse_program(WORKED))
    assert split_at_table(s) is None
    fz = freeze(s)
    assert [md.name for md in fz.table] == ["g", "f"]
    assert print_expr(fz.body) == "(mcall (mval f) 42)"
    assert freeze(s, skip=10**6, fuel=200) is None


def test_optdiff_named_cases():
    for text, value, out in ((INLINE_CASE, 50, ""), (DIRECT_CASE, 50, "5\n")):
        rep = optdiff_state(MachineState(MethodTable(), parse_program(text)), 1, 1)
        assert rep.ok and not rep.notes
        for o in (rep.original, rep.optimized, rep.rewritten):
            assert o.value == IntVal(value) and o.output == out
        assert rep.result.changed


def test_optdiff_cli(jlt, capsys):
    assert main(["optdiff", jlt(DIRECT_CASE)]) == 0
    out = capsys.readouterr().out
    assert "rewritten: => 50" in out and "equal, certified" in out
    assert "prints: 1 / 1 / 1" in out
    assert "phi: (Int) g -> %opt0" in out
    assert main(["optdiff", "--inline-limit", "0", "--spec-limit", "0", jlt(INLINE_CASE)]) == 0
    assert main(["optdiff", jlt("(evalg 5)")]) == 1


def test_optdiff_batch_cli(capsys):
    assert main(["optdiff", "--cases", "40", "--seed", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "0 failures"


def test_check_cli(jlt, capsys):
    orig = jlt('(evalt ((mdef "g" ((x)) (pcall + x x)) (mdef "f" ((x Int)) (mcall (mval g) x)))'
               ' (mcall (mval f) 1))', "orig.jlt")
    good = jlt('(evalt ((mdef "g" ((x)) (pcall + x x))'
               ' (mdef "f" ((y Int)) (seq unit (pcall + y y)))) (mcall (mval f) 1))', "good.jlt")
    bad = jlt('((mdef "g" ((x)) (pcall + x x)) (mdef "f" ((x Int)) x) (mdef "g" () 0))', "bad.jlt")
    assert main(["check", orig, good]) == 0
    assert capsys.readouterr().out == "table: ok\nexpression: ok\n"
    assert main(["check", orig, bad]) == 1
    assert "table: REJECTED" in capsys.readouterr().out
    phi = jlt("(Int) g -> %opt0\n", "phi.txt")
    optd = jlt('((mdef "g" ((x)) (pcall + x x)) (mdef "f" ((x Int)) (mcall (mval %opt0) x))'
               ' (mdef "%opt0" ((x Int)) (pcall + x x)))', "opt.jlt")
    assert main(["check", "--phi", phi, orig, optd]) == 1  # bare table: body must be unit
    capsys.readouterr()
    assert main(["--json", "check", orig, orig]) == 0
    assert json.loads(capsys.readouterr().out) == {"table": True, "expression": True}


def test_opt_cases_are_seeded():
    assert print_expr(opt_case(2, 5)[0]) == print_expr(opt_case(2, 5)[0])
    assert opt_case(2, 5)[1] in range(4)
