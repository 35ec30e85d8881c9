"""Batch scripts: define sets, compare them, extract witnesses, run checks.

Grammar (``#`` starts a comment that runs to the end of the line)::

    stmt   := "set" NAME "=" expr ";"
            | "cmp" NAME NAME ";"
            | "num" NAME ";"
            | "witness" NAME NAME ["as" NAME] ";"
            | "axioms" AXIOM NAME* ";"
            | "scan" ("census" NAME INT | "descent" INT | "constant" INT) ";"
            | "code" (HF | INT) ";"
            | "dump-chain" ";"
            | "config" KEY "=" VALUE ";"
    expr   := diff  (("|" | "\\") diff)*          left-associative
    diff   := meet  ("&" meet)*
    meet   := prim  ("x" prim)*
    prim   := NAME | "(" expr ")" | finite | prog
            | ("pow<ω" | "pow<w") "(" expr ")"
            | "rename" "(" tau "," expr ")"
    finite := "{" [point ("," point)*] "}"
    point  := INT | subset | "(" comp ("," comp)* ")"
    comp   := INT | subset
    subset := "[" [INT ("," INT)*] "]"
    prog   := "prog" "(" INT "," INT ("," opt)* ")"
    opt    := "start" "=" INT | ("plus" | "minus") "=" "{" INT,* "}"
    tau    := "perm" "(" INT,+ ")" | "regroup" "(" INT,+ ")"
            | "relabel" "(" INT "->" INT ("," INT "->" INT)* ")"
    HF     := "{" [HF ("," HF)*] "}"

``x`` binds tightest, then ``&``, then ``|`` and ``\\``.  The name ``x``
is reserved.  Config statements must come before the first query.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from . import coding
from .census import census_at
from .errors import DSLSyntaxError, NumerosError, UndefinedName
from .numerosity import AXIOMS, NotFinite, Numerosities
from .oracle import OracleConfig, OracleState, partition_scan
from .pointset import (
    ComponentPermutation,
    FiniteRelabel,
    Regroup,
    SetExpr,
    Subset,
    combine,
    fin_powerset,
    finite,
    progression,
    rename,
    tau_source,
    to_source,
)

SCHEMA = "numeros/1"

AXIOM_ARITY = {"E0": 1, "E1": 3, "E2": 4, "E3": 4, "E5": 2, "AP": 2, "PP": 3,
               "UP": 1, "CP": 1, "WHP": 2, "SubP-report": 2}
CONFIG_KEYS = ("residue-preference", "budget", "chain-stages", "scan-bound")
QUERY_WORDS = ("cmp", "num", "witness", "axioms", "scan", "code", "dump-chain")


# --------------------------------------------------------------------------
# Syntax tree.


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Atom:
    value: SetExpr


@dataclass(frozen=True)
class BinOp:
    op: str  # one of | & \ x
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    inner: object


@dataclass(frozen=True)
class Ren:
    tau: object
    inner: object


@dataclass(frozen=True)
class Define:
    name: str
    expr: object


@dataclass(frozen=True)
class Cmp:
    a: str
    b: str


@dataclass(frozen=True)
class Num:
    a: str


@dataclass(frozen=True)
class WitnessCmd:
    a: str
    b: str
    alias: str | None = None


@dataclass(frozen=True)
class Axioms:
    axiom: str
    names: tuple


@dataclass(frozen=True)
class Scan:
    kind: str  # census | descent | constant
    k: int
    name: str | None = None


@dataclass(frozen=True)
class Code:
    value: object  # HFSet or int


@dataclass(frozen=True)
class DumpChain:
    pass


@dataclass(frozen=True)
class SetConfig:
    key: str
    value: str


Command = object
_OPS = {"|": "union", "\\": "difference", "&": "intersect", "x": "product"}


# --------------------------------------------------------------------------
# Tokenizer and parser.


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<pow>pow<(?:ω|w))
  | (?P<arrow>->)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<sym>[{}()\[\],;=|&\\])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.defined: set[str] = set()
        self.queried = False
        self.commands: list = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def _fail(self, expected: str):
        t = self.tok
        raise DSLSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.tok
        if not self.accept(text):
            self._fail(repr(text))
        return t

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name":
            self._fail("a name")
        self.pos += 1
        return t

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self._fail("an integer")
        self.pos += 1
        return int(t.text)

    def defined_name(self) -> str:
        t = self.name()
        if t.text not in self.defined:
            raise UndefinedName(t.text, t.line, t.col)
        return t.text

    # statements

    def script(self) -> tuple:
        while self.tok.kind != "eof":
            self.commands.append(self.statement())
        return tuple(self.commands)

    def statement(self):
        t = self.name()
        word = t.text
        if word in QUERY_WORDS:
            self.queried = True
        if word == "set":
            n = self.name()
            if n.text == "x":
                raise DSLSyntaxError(n.line, n.col, "a name other than the operator 'x'", "x")
            self.expect("=")
            expr = self.expr()
            self.expect(";")
            self.defined.add(n.text)
            return Define(n.text, expr)
        if word == "cmp":
            a, b = self.defined_name(), self.defined_name()
            self.expect(";")
            return Cmp(a, b)
        if word == "num":
            a = self.defined_name()
            self.expect(";")
            return Num(a)
        if word == "witness":
            a, b = self.defined_name(), self.defined_name()
            alias = None
            if self.accept("as"):
                alias = self.name().text
                self.defined.add(alias)
            self.expect(";")
            return WitnessCmd(a, b, alias)
        if word == "axioms":
            ax = self.name()
            if ax.text not in AXIOM_ARITY:
                raise DSLSyntaxError(ax.line, ax.col, "an axiom (" + ", ".join(AXIOMS) + ")", ax.text)
            names = []
            while self.tok.kind == "name":
                names.append(self.defined_name())
            arity = AXIOM_ARITY[ax.text]
            if not names or len(names) % arity:
                self._fail(f"a multiple of {arity} names for {ax.text}")
            self.expect(";")
            return Axioms(ax.text, tuple(names))
        if word == "scan":
            kind = self.name()
            if kind.text == "census":
                n = self.defined_name()
                k = self.integer()
                self.expect(";")
                return Scan("census", k, n)
            if kind.text in ("descent", "constant"):
                k = self.integer()
                self.expect(";")
                return Scan(kind.text, k)
            raise DSLSyntaxError(kind.line, kind.col, "census, descent or constant", kind.text)
        if word == "code":
            value = self.integer() if self.tok.kind == "int" else self.hf()
            self.expect(";")
            return Code(value)
        if word == "dump-chain":
            self.expect(";")
            return DumpChain()
        if word == "config":
            if self.queried:
                raise DSLSyntaxError(t.line, t.col, "config before the first query", "config")
            key = self.name()
            if key.text not in CONFIG_KEYS:
                raise DSLSyntaxError(key.line, key.col, "one of " + ", ".join(CONFIG_KEYS), key.text)
            self.expect("=")
            v = self.tok
            if v.kind not in ("int", "name"):
                self._fail("a value")
            self.pos += 1
            self.expect(";")
            return SetConfig(key.text, v.text)
        raise DSLSyntaxError(t.line, t.col, "a statement keyword", word)

    def hf(self):
        self.expect("{")
        members = []
        if not self.accept("}"):
            members.append(self.hf())
            while self.accept(","):
                members.append(self.hf())
            self.expect("}")
        return frozenset(members)

    # expressions

    def expr(self):
        node = self.meet_level()
        while self.tok.text in ("|", "\\"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.meet_level())
        return node

    def meet_level(self):
        node = self.product_level()
        while self.accept("&"):
            node = BinOp("&", node, self.product_level())
        return node

    def product_level(self):
        node = self.primary()
        while self.tok.kind == "name" and self.tok.text == "x":
            self.pos += 1
            node = BinOp("x", node, self.primary())
        return node

    def primary(self):
        t = self.tok
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if t.text == "{":
            return Atom(self.finite_atom())
        if t.kind == "pow":
            self.pos += 1
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Pow(inner)
        if t.kind == "name" and t.text == "prog" and self.toks[self.pos + 1].text == "(":
            return Atom(self.prog())
        if t.kind == "name" and t.text == "rename" and self.toks[self.pos + 1].text == "(":
            self.pos += 2
            tau = self.tau()
            self.expect(",")
            inner = self.expr()
            self.expect(")")
            return Ren(tau, inner)
        if t.kind == "name" and t.text != "x":
            return Ref(self.defined_name())
        self._fail("a set expression")

    def _int_list(self, close: str) -> list[int]:
        out = []
        if self.tok.text != close:
            out.append(self.integer())
            while self.accept(","):
                out.append(self.integer())
        self.expect(close)
        return out

    def component(self):
        if self.accept("["):
            return Subset.of(self._int_list("]"))
        return self.integer()

    def point(self):
        if self.accept("("):
            comps = [self.component()]
            while self.accept(","):
                comps.append(self.component())
            self.expect(")")
            return tuple(comps)
        return (self.component(),)

    def finite_atom(self) -> SetExpr:
        self.expect("{")
        pts = []
        if self.tok.text != "}":
            pts.append(self.point())
            while self.accept(","):
                pts.append(self.point())
        self.expect("}")
        return finite(pts)

    def prog(self) -> SetExpr:
        self.pos += 1
        self.expect("(")
        m = self.integer()
        self.expect(",")
        r = self.integer()
        opts: dict = {}
        while self.accept(","):
            key = self.name()
            if key.text not in ("start", "plus", "minus") or key.text in opts:
                raise DSLSyntaxError(key.line, key.col, "start, plus or minus", key.text)
            self.expect("=")
            if key.text == "start":
                opts["start"] = self.integer()
            else:
                self.expect("{")
                opts[key.text] = self._int_list("}")
        self.expect(")")
        return progression(m, r, **opts)

    def tau(self):
        t = self.name()
        self.expect("(")
        if t.text == "perm":
            return ComponentPermutation(tuple(self._int_list(")")))
        if t.text == "regroup":
            return Regroup(tuple(self._int_list(")")))
        if t.text == "relabel":
            pairs = []
            while True:
                a = self.integer()
                self.expect("->")
                pairs.append((a, self.integer()))
                if not self.accept(","):
                    break
            self.expect(")")
            return FiniteRelabel.of(dict(pairs))
        raise DSLSyntaxError(t.line, t.col, "perm, regroup or relabel", t.text)


def parse_script(text: str) -> tuple:
    """Parse a script into a tuple of commands."""
    return Parser(text).script()


# --------------------------------------------------------------------------
# Printing.


def print_expr(node) -> str:
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Atom):
        return to_source(node.value)
    if isinstance(node, BinOp):
        return f"({print_expr(node.left)} {node.op} {print_expr(node.right)})"
    if isinstance(node, Pow):
        return f"pow<ω({print_expr(node.inner)})"
    if isinstance(node, Ren):
        return f"rename({tau_source(node.tau)}, {print_expr(node.inner)})"
    raise TypeError(node)


def print_command(c) -> str:
    if isinstance(c, Define):
        return f"set {c.name} = {print_expr(c.expr)};"
    if isinstance(c, Cmp):
        return f"cmp {c.a} {c.b};"
    if isinstance(c, Num):
        return f"num {c.a};"
    if isinstance(c, WitnessCmd):
        return f"witness {c.a} {c.b}" + (f" as {c.alias}" if c.alias else "") + ";"
    if isinstance(c, Axioms):
        return " ".join(("axioms", c.axiom) + c.names) + ";"
    if isinstance(c, Scan):
        return f"scan {c.kind}" + (f" {c.name}" if c.name else "") + f" {c.k};"
    if isinstance(c, Code):
        v = c.value
        return f"code {v if isinstance(v, int) else coding.to_text(v)};"
    if isinstance(c, DumpChain):
        return "dump-chain;"
    if isinstance(c, SetConfig):
        return f"config {c.key} = {c.value};"
    raise TypeError(c)


def print_script(commands: Iterable) -> str:
    return "".join(print_command(c) + "\n" for c in commands)


# --------------------------------------------------------------------------
# Running.


@dataclass
class RunConfig:
    residue_preference: str = "lowest"
    budget: int = 64
    chain_stages: int = 50
    scan_bound: int = 12

    def set(self, key: str, value: str) -> None:
        attr = key.replace("-", "_")
        if attr == "residue_preference":
            if value not in ("lowest", "highest"):
                raise ValueError("residue-preference must be lowest or highest")
            self.residue_preference = value
        else:
            if not value.isdigit() or int(value) < 1:
                raise ValueError(f"{key} must be a positive integer")
            setattr(self, attr, int(value))


class CommandError(NumerosError):
    """A module error annotated with the index of the failing command."""

    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        self.code = getattr(cause, "code", type(cause).__name__)
        super().__init__(f"command {index}: {self.code}: {cause}")


@dataclass
class RunReport:
    records: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    log: list = field(default_factory=list)
    error: CommandError | None = None

    @property
    def exit_code(self) -> int:
        return 0 if self.error is None else 1

    def json_lines(self) -> str:
        return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in self.records)


def _num(v: int) -> str:
    return str(v)


class Runner:
    def __init__(self, config: RunConfig | None = None):
        self.config = config or RunConfig()
        self.env: dict[str, SetExpr] = {}
        self.engine: Numerosities | None = None

    def _ensure_engine(self) -> Numerosities:
        if self.engine is None:
            oc = OracleConfig(self.config.residue_preference, self.config.budget,
                              self.config.scan_bound)
            self.engine = Numerosities(OracleState(oc), self.config.chain_stages)
        return self.engine

    def evaluate(self, node) -> SetExpr:
        if isinstance(node, Ref):
            return self.env[node.name]
        if isinstance(node, Atom):
            return node.value
        if isinstance(node, BinOp):
            return combine(_OPS[node.op], self.evaluate(node.left), self.evaluate(node.right))
        if isinstance(node, Pow):
            return fin_powerset(self.evaluate(node.inner))
        if isinstance(node, Ren):
            return rename(node.tau, self.evaluate(node.inner))
        raise TypeError(node)

    def run(self, commands: Iterable) -> RunReport:
        report = RunReport()
        for index, c in enumerate(commands):
            try:
                body, text = self.execute(c)
            except (NumerosError, ValueError) as exc:
                report.error = CommandError(index, exc)
                report.records.append({"schema": SCHEMA, "index": index,
                                       "command": print_command(c),
                                       "error": {"code": report.error.code,
                                                 "message": str(exc)}})
                report.transcript.append(f"[{index}] error {report.error.code}: {exc}")
                break
            eng = self.engine
            record = {"schema": SCHEMA, "index": index, "command": print_command(c), **body,
                      "commitments": len(eng.oracle.log) if eng else 0}
            report.records.append(record)
            report.transcript.append(f"[{index}] {text}")
        if self.engine is not None:
            report.log = self.engine.oracle.log_lines()
        return report

    def execute(self, c) -> tuple[dict, str]:
        if isinstance(c, SetConfig):
            if self.engine is not None:
                raise ValueError("config must precede the first query")
            self.config.set(c.key, c.value)
            return {"key": c.key, "value": c.value}, f"config {c.key} = {c.value}"
        if isinstance(c, Define):
            value = self.evaluate(c.expr)
            self.env[c.name] = value
            return ({"name": c.name, "expr": to_source(value)},
                    f"{c.name} := {to_source(value)}")
        eng = self._ensure_engine()
        if isinstance(c, Cmp):
            r = eng.oracle.compare(self.env[c.a], self.env[c.b])
            body = {"a": c.a, "b": c.b, "result": str(r.ordering),
                    "evidence_stage": r.evidence_stage,
                    "residue": r.residue, "period": r.period, "budgeted": r.budgeted}
            return body, (f"{c.a} {r.ordering} {c.b} (from stage {r.evidence_stage}, "
                          f"chain lengths ≡ {r.residue} mod {r.period})")
        if isinstance(c, Num):
            n = eng.to_natural(eng.num(self.env[c.a]))
            value = "NotFinite" if n is NotFinite else _num(n)
            return {"name": c.a, "natural": value}, f"n({c.a}) = {value}"
        if isinstance(c, WitnessCmd):
            return self._witness(eng, c)
        if isinstance(c, Axioms):
            return self._axioms(eng, c)
        if isinstance(c, Scan):
            return self._scan(eng, c)
        if isinstance(c, Code):
            if isinstance(c.value, int):
                hf = coding.decode(c.value)
                code = c.value
            else:
                hf = c.value
                code = coding.encode(hf)
            text = coding.to_text(hf)
            return {"hf": text, "code": _num(code)}, f"γ({text}) = {code}"
        if isinstance(c, DumpChain):
            o = eng.oracle
            lengths = list(o.lengths)
            return ({"chain": lengths, "log": o.log_lines()},
                    f"chain lengths {lengths}; {len(o.log)} commitments\n"
                    + "".join("    " + line + "\n" for line in o.log_lines()).rstrip("\n"))
        raise TypeError(c)

    def _witness(self, eng: Numerosities, c: WitnessCmd) -> tuple[dict, str]:
        a, b = self.env[c.a], self.env[c.b]
        w = eng.sub_witness(a, b)
        s = w.schedule
        if c.alias:
            self.env[c.alias] = w
        rows = []
        mismatch = None
        for k in range(s.start_stage, s.start_stage + self.config.chain_stages):
            i = eng.oracle.chain_at(k)
            ca, cw, cb = census_at(a, i), census_at(w, i), census_at(b, i)
            if ca + cw != cb and mismatch is None:
                mismatch = k
            rows.append([k, _num(s.batch_size(k)), _num(cw)])
        body = {"a": c.a, "b": c.b, "name": c.alias, "arity": s.arity,
                "start_stage": s.start_stage, "verified": mismatch is None,
                "stages": rows}
        text = (f"witness {c.a} < {c.b}: arity {s.arity}, from stage {s.start_stage}, "
                f"census identity {'holds' if mismatch is None else 'fails at ' + str(mismatch)}"
                f" on {self.config.chain_stages} stages")
        return body, text

    def _axioms(self, eng: Numerosities, c: Axioms) -> tuple[dict, str]:
        n = AXIOM_ARITY[c.axiom]
        groups = [c.names[j:j + n] for j in range(0, len(c.names), n)]
        report = eng.check_axiom(c.axiom, [tuple(self.env[x] for x in g) for g in groups])
        inst = [{"names": list(g), "passed": o.passed, "vacuous": o.vacuous,
                 "detail": o.detail, "stage": o.stage}
                for g, o in zip(groups, report.outcomes)]
        verdict = "pass" if report.passed else "fail"
        return ({"axiom": c.axiom, "passed": report.passed, "instances": inst},
                f"axiom {c.axiom}: {verdict} on {len(groups)} instance(s)")

    def _scan(self, eng: Numerosities, c: Scan) -> tuple[dict, str]:
        k = c.k
        if c.kind == "census":
            a = self.env[c.name]
            psi = lambda s: census_at(a, s)  # noqa: E731
        elif c.kind == "descent":
            psi = lambda s: k - len(s)  # noqa: E731
        else:
            psi = lambda s: 1  # noqa: E731
        r = partition_scan(psi, k, bound=self.config.scan_bound)
        body = {"k": k, "longest_zero_chain": r.longest_zero_chain,
                "zero_pairs": r.zero_pairs,
                "max_descents_on_maximal_chain": r.max_descents_on_maximal_chain,
                "homogeneous_cofinal": r.homogeneous_cofinal is not None,
                "well_founded": r.well_founded, "infinite_descent_certificate": None}
        return body, (f"scan {c.kind} on [0,{k}): longest 0-chain {r.longest_zero_chain}, "
                      f"cofinal 1-homogeneous chain "
                      f"{'found' if r.homogeneous_cofinal else 'absent'}")


def run_script(text: str, config: RunConfig | None = None) -> RunReport:
    return Runner(config).run(parse_script(text))


def main(argv: list[str] | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = argparse.ArgumentParser(prog="numeros", description="Run a numerosity script.")
    ap.add_argument("script_path", nargs="?", help="script file (default: standard input)")
    ap.add_argument("--script", dest="script_flag", metavar="FILE", help="script file")
    ap.add_argument("--json", action="store_true", help="emit one JSON record per command")
    ap.add_argument("--budget", type=int, default=64, help="oracle search budget")
    ap.add_argument("--residue-preference", choices=("lowest", "highest"), default="lowest")
    ap.add_argument("--chain-stages", type=int, default=50,
                    help="chain stages used to verify witnesses")
    args = ap.parse_args(argv)
    path = args.script_flag or args.script_path
    if path and path != "-":
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    config = RunConfig(args.residue_preference, args.budget, args.chain_stages)
    try:
        commands = parse_script(text)
    except NumerosError as exc:
        stderr.write(f"{exc.code}: {exc}\n")
        if args.json:
            stdout.write(json.dumps({"schema": SCHEMA, "index": None, "command": None,
                                     "error": {"code": exc.code, "message": str(exc)}}) + "\n")
        return 2
    report = Runner(config).run(commands)
    if args.json:
        stdout.write(report.json_lines())
    else:
        stdout.write("".join(line + "\n" for line in report.transcript))
    if report.error is not None:
        stderr.write(f"error in {report.error}\n")
    return report.exit_code


__all__ = [
    "Atom",
    "Axioms",
    "BinOp",
    "Cmp",
    "Code",
    "Define",
    "DumpChain",
    "Num",
    "Pow",
    "Ref",
    "Ren",
    "RunConfig",
    "RunReport",
    "Runner",
    "Scan",
    "SetConfig",
    "WitnessCmd",
    "main",
    "parse_script",
    "print_script",
    "run_script",
]
