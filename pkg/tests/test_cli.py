from __future__ import annotations

import io
import json
import random

import pytest
from hypothesis import given, settings

from exprgen import seeds
from numeros.census import census_at
from numeros.cli import (
    BinOp,
    Cmp,
    Define,
    Pow,
    Ref,
    RunConfig,
    Runner,
    main,
    parse_script,
    print_script,
    run_script,
)
from numeros.errors import DSLSyntaxError, UndefinedName
from numeros.pointset import progression


class TestParse:
    def test_three_commands(self):
        cmds = parse_script("set E = prog(2,0); set N = prog(1,0); cmp E N;")
        assert len(cmds) == 3
        assert isinstance(cmds[0], Define) and cmds[2] == Cmp("E", "N")

    def test_undefined_name(self):
        with pytest.raises(UndefinedName) as info:
            parse_script("set P = E x E;")
        assert info.value.name == "E"

    def test_powerset_node(self):
        cmds = parse_script("set E = prog(2,0);\nset S = pow<ω(E);")
        assert cmds[1].expr == Pow(Ref("E"))
        assert parse_script("set E = prog(2,0); set S = pow<w(E);")[1].expr == Pow(Ref("E"))

    def test_precedence(self):
        (_, _, _, d) = parse_script("set A={1}; set B={2}; set C={3}; set D = A | B x C & A;")
        assert d.expr == BinOp("|", Ref("A"), BinOp("&", BinOp("x", Ref("B"), Ref("C")), Ref("A")))

    def test_syntax_error_position(self):
        with pytest.raises(DSLSyntaxError) as info:
            parse_script("set A = {1};\ncmp A ;")
        assert (info.value.line, info.value.column) == (2, 7)
        assert "NAME" in info.value.expected or "name" in info.value.expected

    def test_config_after_query(self):
        with pytest.raises(DSLSyntaxError):
            parse_script("set A={1}; num A; config budget = 3;")

    def test_comments_and_atoms(self):
        text = """
        # sets
        set A = prog(3, 1, start=2, plus={0}, minus={4});
        set B = {(1,[0,2]), (3,[])};
        set C = rename(relabel(1->2, 2->1), A) \\ {0};
        set D = rename(perm(1,0), B);
        set G = rename(regroup(2), B);
        code {{},{{}}}; code 5;
        axioms E5 A C;
        scan descent 4;
        dump-chain;
        """
        assert len(parse_script(text)) == 10


def random_script(seed: int) -> str:
    r = random.Random(seed)
    names = []
    lines = ["config budget = 40;"] if r.random() < 0.5 else []

    def expr(depth: int) -> str:
        roll = r.random()
        if depth == 0 or roll < 0.3:
            pick = r.randrange(4 if names else 2)
            if pick == 0:
                return f"prog({r.randint(1, 4)},0,start={r.randint(0, 3)})"
            if pick == 1:
                return "{" + ",".join(str(r.randint(0, 9)) for _ in range(r.randint(0, 3))) + "}"
            return r.choice(names)
        if roll < 0.4:
            return f"rename(relabel(1->3, 3->1), {expr(depth - 1)})"
        return f"({expr(depth - 1)} {r.choice(['|', '&', chr(92)])} {expr(depth - 1)})"

    for j in range(r.randint(1, 5)):
        lines.append(f"set S{j} = {expr(2)};")
        names.append(f"S{j}")
    for _ in range(r.randint(1, 4)):
        lines.append(f"cmp {r.choice(names)} {r.choice(names)};")
        lines.append(f"num {r.choice(names)};")
    lines.append("dump-chain;")
    return "\n".join(lines)


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_parse_print_roundtrip(seed):
    cmds = parse_script(random_script(seed))
    again = parse_script(print_script(cmds))
    assert again == cmds
    assert print_script(again) == print_script(cmds)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_replay_determinism(seed):
    text = random_script(seed)
    assert run_script(text).json_lines() == run_script(text).json_lines()


class TestRun:
    def test_evens_odds_equal(self):
        rep = run_script("set E=prog(2,0); set O=prog(2,1); cmp E O;")
        rec = rep.records[-1]
        assert rec["result"] == "Equal" and rec["schema"] == "numeros/1"
        assert rep.exit_code == 0

    def test_highest_residue(self):
        rep = run_script("config residue-preference = highest; set E=prog(2,0); set O=prog(2,1); cmp E O;")
        assert rep.records[-1]["result"] == "Greater"

    def test_witness_counts(self):
        runner = Runner(RunConfig(chain_stages=20))
        rep = runner.run(parse_script("set E=prog(2,0); set N=prog(1,0); cmp E N; witness E N as C;"))
        rec = rep.records[-1]
        assert rec["verified"] and len(rec["stages"]) == 20
        o = runner.engine.oracle
        for k, _, cumulative in rec["stages"]:
            i = o.chain_at(k)
            assert int(cumulative) == census_at(progression(1, 0), i) - census_at(progression(2, 0), i)
        assert "C" in runner.env

    def test_axioms_pp(self):
        rep = run_script("set E=prog(2,0); set O=prog(2,1); set N=prog(1,0); axioms PP E O N;")
        assert rep.records[-1]["passed"] is True

    def test_num_and_code(self):
        rep = run_script("set A={1,2,3}; num A; set E=prog(2,0); num E; code {{},{{}}}; code 2;")
        recs = rep.records
        assert recs[1]["natural"] == "3" and recs[3]["natural"] == "NotFinite"
        assert recs[4]["code"] == "3" and recs[5]["hf"] == "{{{}}}"

    def test_scan(self):
        rep = run_script("scan descent 8; set A = prog(2,0); scan census A 5;")
        assert rep.records[0]["longest_zero_chain"] == 8
        assert rep.records[2]["longest_zero_chain"] == 0

    def test_dump_chain_log_lines(self):
        rep = run_script("set E=prog(2,0); set O=prog(2,1); cmp E O; dump-chain;")
        assert rep.records[-1]["log"] == rep.log
        assert all(line.startswith("stage=") for line in rep.log)

    def test_error_has_index_and_code(self):
        rep = run_script("set E=prog(2,0); set N=prog(1,0); witness N E;")
        assert rep.exit_code == 1
        assert rep.error.index == 2 and rep.error.code == "NotLess"
        assert rep.records[-1]["error"]["code"] == "NotLess"

    def test_big_codes_are_strings(self):
        rep = run_script("code {{{{{}}}},{{{},{{}}}}};")
        assert isinstance(rep.records[0]["code"], str)


class TestMain:
    def run(self, tmp_path, text, *flags):
        p = tmp_path / "s.num"
        p.write_text(text, encoding="utf-8")
        out, err = io.StringIO(), io.StringIO()
        code = main([*flags, "--script", str(p)], out, err)
        return code, out.getvalue(), err.getvalue()

    def test_ok(self, tmp_path):
        code, out, _ = self.run(tmp_path, "set E=prog(2,0); set O=prog(2,1); cmp E O;", "--json")
        assert code == 0
        records = [json.loads(line) for line in out.splitlines()]
        assert records[-1]["result"] == "Equal"

    def test_transcript(self, tmp_path):
        code, out, _ = self.run(tmp_path, "set E=prog(2,0); num E;")
        assert code == 0 and "NotFinite" in out

    def test_parse_error_exit(self, tmp_path):
        code, _, err = self.run(tmp_path, "set = ;")
        assert code == 2 and "SyntaxError" in err and "line 1" in err

    def test_command_error_exit(self, tmp_path):
        code, _, err = self.run(tmp_path, "set A={1}; set B={1}; witness A B;")
        assert code == 1 and "command 2" in err

    def test_flags(self, tmp_path):
        text = "set E=prog(2,0); set O=prog(2,1); cmp E O;"
        code, out, _ = self.run(tmp_path, text, "--json", "--residue-preference", "highest",
                                "--budget", "10", "--chain-stages", "5")
        assert code == 0 and json.loads(out.splitlines()[-1])["result"] == "Greater"
