"""OpenQASM 2.0 subset: parser and emitter.

Supported: ``OPENQASM 2.0;``, ``include "qelib1.inc";``, qreg/creg (several
registers are flattened in declaration order), the gate vocabulary of
:class:`GateKind` (``rxx`` for the XX interaction), ``U``/``CX`` builtins,
``measure``, ``barrier``, register broadcasting, ``gate`` macros, and angle
expressions over numbers, ``pi``, parameters, + - * / ^ and the usual unary
functions.  ``opaque``, ``if`` and ``reset`` are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .circuit import Circuit, Gate, GateKind

MAX_MACRO_DEPTH = 16

_BUILTIN_ALIASES = {"U": GateKind.U3, "CX": GateKind.CX}
_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "ln": math.log, "sqrt": math.sqrt, "asin": math.asin, "acos": math.acos, "atan": math.atan,
}
_KNOWN_INCLUDES = {"qelib1.inc"}


class QasmError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + msg)


@dataclass
class _Tok:
    kind: str  # id, num, str, op, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<op>->|==|[\[\](){};,+\-*/^])
    """,
    re.VERBOSE | re.DOTALL,
)


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class _Macro:
    params: list[str]
    args: list[str]
    body: list  # (name, param exprs, arg names, tok)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.qregs: dict[str, tuple[int, int]] = {}
        self.cregs: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0
        self.gates: list[Gate] = []
        self.macros: dict[str, _Macro] = {}

    # -- token helpers
    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        return QasmError(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.kind in ("str", "eof") or t.text != text:
            if t.kind == "eof":
                raise self.error(f"expected {text!r}, got end of input", t)
            raise self.error(f"expected {text!r}, got {t.text!r}", t)
        return t

    def expect_kind(self, kind: str, what: str) -> _Tok:
        t = self.next()
        if t.kind != kind:
            raise self.error(f"expected {what}, got {t.text or 'end of input'!r}", t)
        return t

    # -- grammar
    def parse(self) -> Circuit:
        t = self.next()
        if t.text != "OPENQASM":
            raise self.error("missing 'OPENQASM 2.0;' header", t)
        v = self.expect_kind("num", "version number")
        if v.text not in ("2.0", "2"):
            raise self.error(f"unsupported OpenQASM version {v.text}", v)
        self.expect(";")
        while self.peek().kind != "eof":
            self.statement()
        if self.nq == 0:
            raise self.error("no quantum register declared")
        return Circuit(self.nq, self.gates, self.nc)

    def statement(self):
        t = self.peek()
        if t.kind != "id":
            raise self.error(f"unexpected {t.text!r}")
        word = t.text
        if word == "include":
            self.next()
            s = self.expect_kind("str", "file name")
            name = s.text.strip('"')
            if name not in _KNOWN_INCLUDES:
                raise self.error(f"unsupported include {name!r}", s)
            self.expect(";")
        elif word in ("qreg", "creg"):
            self.next()
            name = self.expect_kind("id", "register name")
            self.expect("[")
            size = self.expect_kind("num", "register size")
            self.expect("]")
            self.expect(";")
            n = int(size.text) if size.text.isdigit() else -1
            if n <= 0:
                raise self.error(f"bad register size {size.text}", size)
            if name.text in self.qregs or name.text in self.cregs:
                raise self.error(f"register {name.text!r} redeclared", name)
            if word == "qreg":
                self.qregs[name.text] = (self.nq, n)
                self.nq += n
            else:
                self.cregs[name.text] = (self.nc, n)
                self.nc += n
        elif word == "gate":
            self.macro_def()
        elif word in ("opaque", "if", "reset"):
            raise self.error(f"unsupported construct {word!r}")
        elif word == "measure":
            self.next()
            src = self.operand(self.qregs, "quantum")
            self.expect("->")
            dst = self.operand(self.cregs, "classical")
            self.expect(";")
            if len(src) != len(dst):
                raise self.error("measure register sizes differ", t)
            for q, c in zip(src, dst):
                self.gates.append(Gate(GateKind.Measure, (q,), (), (c,)))
        elif word == "barrier":
            self.next()
            qs: list[int] = []
            while True:
                qs.extend(self.operand(self.qregs, "quantum"))
                if self.peek().text == ",":
                    self.next()
                    continue
                break
            self.expect(";")
            if len(set(qs)) != len(qs):
                raise self.error("repeated qubit in barrier", t)
            self.gates.append(Gate(GateKind.Barrier, tuple(qs)))
        else:
            self.application()

    def operand(self, regs, what) -> list[int]:
        name = self.expect_kind("id", f"{what} register")
        if name.text not in regs:
            raise self.error(f"unknown {what} register {name.text!r}", name)
        off, size = regs[name.text]
        if self.peek().text == "[":
            self.next()
            idx = self.expect_kind("num", "index")
            self.expect("]")
            if not idx.text.isdigit() or int(idx.text) >= size:
                raise self.error(f"index {idx.text} out of range for {name.text}[{size}]", idx)
            return [off + int(idx.text)]
        return list(range(off, off + size))

    def param_list(self) -> list:
        exprs = []
        if self.peek().text != "(":
            return exprs
        self.next()
        if self.peek().text == ")":
            self.next()
            return exprs
        while True:
            exprs.append(self.expr())
            t = self.next()
            if t.text == ")":
                return exprs
            if t.text != ",":
                raise self.error(f"expected ',' or ')', got {t.text!r}", t)

    def application(self):
        name = self.next()
        params = self.param_list()
        args: list[list[int]] = []
        while True:
            args.append(self.operand(self.qregs, "quantum"))
            t = self.next()
            if t.text == ";":
                break
            if t.text != ",":
                raise self.error(f"expected ',' or ';', got {t.text or 'end of input'!r}", t)
        values = [_eval(e, {}, self, name) for e in params]
        width = max(len(a) for a in args)
        for a in args:
            if len(a) not in (1, width):
                raise self.error("register size mismatch in broadcast", name)
        for k in range(width):
            qubits = [a[0] if len(a) == 1 else a[k] for a in args]
            self.emit(name.text, values, qubits, name, 0)

    def emit(self, name, values, qubits, tok, depth):
        if depth > MAX_MACRO_DEPTH:
            raise self.error(f"gate macro nesting deeper than {MAX_MACRO_DEPTH}", tok)
        if name in self.macros:
            mac = self.macros[name]
            if len(values) != len(mac.params) or len(qubits) != len(mac.args):
                raise self.error(f"wrong arity for gate {name!r}", tok)
            env = dict(zip(mac.params, values))
            qmap = dict(zip(mac.args, qubits))
            for sub, exprs, sub_args, sub_tok in mac.body:
                vals = [_eval(e, env, self, sub_tok) for e in exprs]
                self.emit(sub, vals, [qmap[a] for a in sub_args], sub_tok, depth + 1)
            return
        kind = _BUILTIN_ALIASES.get(name)
        if kind is None:
            try:
                kind = GateKind.from_name(name)
            except ValueError:
                raise self.error(f"unsupported gate {name!r}", tok) from None
            if name != kind.value or not kind.is_unitary:
                raise self.error(f"unsupported gate {name!r}", tok)
        if len(values) != kind.n_params:
            raise self.error(f"{name} takes {kind.n_params} parameter(s), got {len(values)}", tok)
        try:
            self.gates.append(Gate(kind, tuple(qubits), tuple(values)))
        except ValueError as exc:
            raise self.error(str(exc), tok) from None

    def macro_def(self):
        self.next()
        name = self.expect_kind("id", "gate name")
        params: list[str] = []
        if self.peek().text == "(":
            self.next()
            while self.peek().text != ")":
                params.append(self.expect_kind("id", "parameter name").text)
                if self.peek().text == ",":
                    self.next()
            self.next()
        args = [self.expect_kind("id", "qubit argument").text]
        while self.peek().text == ",":
            self.next()
            args.append(self.expect_kind("id", "qubit argument").text)
        self.expect("{")
        body = []
        while self.peek().text != "}":
            if self.peek().kind == "eof":
                raise self.error("unterminated gate body")
            sub = self.expect_kind("id", "gate name")
            if sub.text == "barrier":
                # barriers inside macros carry no semantics here
                while self.next().text != ";":
                    pass
                continue
            exprs = self.param_list()
            sub_args = [self.expect_kind("id", "qubit argument").text]
            while self.peek().text == ",":
                self.next()
                sub_args.append(self.expect_kind("id", "qubit argument").text)
            self.expect(";")
            for a in sub_args:
                if a not in args:
                    raise self.error(f"unknown qubit argument {a!r} in gate {name.text}", sub)
            body.append((sub.text, exprs, sub_args, sub))
        self.next()
        if name.text in self.macros:
            raise self.error(f"gate {name.text!r} redefined", name)
        self.macros[name.text] = _Macro(params, args, body)

    # -- expressions (parsed to nested tuples, evaluated late for macros)
    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            node = (op, node, self.factor())
        return node

    def factor(self):
        if self.peek().text in ("-", "+"):
            op = self.next().text
            inner = self.factor()
            return ("neg", inner) if op == "-" else inner
        base = self.atom()
        if self.peek().text == "^":
            self.next()
            return ("^", base, self.factor())
        return base

    def atom(self):
        t = self.next()
        if t.kind == "num":
            return ("num", float(t.text))
        if t.kind == "id":
            if t.text == "pi":
                return ("num", math.pi)
            if t.text in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("fn", t.text, arg)
            return ("var", t.text, t)
        if t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected {t.text or 'end of input'!r} in expression", t)


def _eval(node, env, parser: _Parser, tok) -> float:
    op = node[0]
    if op == "num":
        return node[1]
    if op == "var":
        if node[1] not in env:
            raise parser.error(f"unknown parameter {node[1]!r}", node[2])
        return env[node[1]]
    if op == "neg":
        return -_eval(node[1], env, parser, tok)
    if op == "fn":
        return _FUNCS[node[1]](_eval(node[2], env, parser, tok))
    a = _eval(node[1], env, parser, tok)
    b = _eval(node[2], env, parser, tok)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise parser.error("division by zero", tok if isinstance(tok, _Tok) else None)
        return a / b
    return a**b


def parse_qasm(text: str) -> Circuit:
    return _Parser(text).parse()


def load_qasm(path: str | Path) -> Circuit:
    return parse_qasm(Path(path).read_text(encoding="utf-8"))


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_qasm(c: Circuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.n_qubits}];"]
    if c.n_cbits:
        lines.append(f"creg c[{c.n_cbits}];")
    for g in c.gates:
        qs = ",".join(f"q[{q}]" for q in g.qubits)
        if g.kind is GateKind.Measure:
            lines.append(f"measure {qs} -> c[{g.cbits[0]}];")
        elif g.params:
            args = ",".join(_fmt(p) for p in g.params)
            lines.append(f"{g.kind.value}({args}) {qs};")
        else:
            lines.append(f"{g.kind.value} {qs};")
    return "\n".join(lines) + "\n"


def save_qasm(c: Circuit, path: str | Path) -> None:
    Path(path).write_text(emit_qasm(c), encoding="utf-8")
