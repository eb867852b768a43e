import math
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcbench.circuit import Circuit, Gate, GateKind, gate
from qcbench.qasm import QasmError, emit_qasm, load_qasm, parse_qasm, save_qasm
from qcbench.targets import samples_dir

from conftest import KINDS_1Q, KINDS_2Q, circuits

HEAD = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'
SAMPLES = sorted(samples_dir().glob("*.qasm"))


def test_parse_cx():
    c = parse_qasm("OPENQASM 2.0; qreg q[2]; cx q[0],q[1];")
    assert c.n_qubits == 2
    assert c.gates == (gate("cx", 0, 1),)


def test_parse_pi_expression():
    c = parse_qasm(HEAD + "qreg q[1]; rz(pi/2) q[0]; rx(-3*pi/4 + 0.5) q[0];")
    assert c.gates[0].params[0] == pytest.approx(1.5707963, abs=1e-7)
    assert c.gates[1].params[0] == pytest.approx(-3 * math.pi / 4 + 0.5)


def test_u3_round_trip():
    c = parse_qasm(HEAD + "qreg q[2]; u3(0.1,0.2,0.3) q[1];")
    assert parse_qasm(emit_qasm(c)) == c


def test_registers_flatten_in_declaration_order():
    c = parse_qasm(HEAD + "qreg a[2]; qreg b[3]; creg m[2]; cx a[1],b[0]; measure b[2] -> m[1];")
    assert c.n_qubits == 5 and c.n_cbits == 2
    assert c.gates[0].qubits == (1, 2)
    assert c.gates[1] == gate("measure", 4, cbit=1)


def test_register_broadcast():
    c = parse_qasm(HEAD + "qreg q[3]; creg c[3]; h q; measure q -> c;")
    assert [g.kind for g in c.gates] == [GateKind.H] * 3 + [GateKind.Measure] * 3


def test_macro_expansion():
    c = parse_qasm(HEAD + "gate foo(t) a,b { rz(t/2) a; cx a,b; }\nqreg q[2]; foo(pi) q[1],q[0];")
    assert c.gates == (gate("rz", 1, params=[math.pi / 2]), gate("cx", 1, 0))


def test_emit_empty():
    assert emit_qasm(Circuit(1)) == HEAD + "qreg q[1];\n"


def test_emit_rxx():
    text = emit_qasm(Circuit(2, [Gate(GateKind.XX, (0, 1), (-math.pi / 2,))]))
    assert re.search(r"^rxx\(-1\.5707963267948966\) q\[0\],q\[1\];$", text, re.M)
    assert parse_qasm(text).gates[0].kind is GateKind.XX


def test_emit_kak_template(kak_template):
    body = emit_qasm(kak_template).splitlines()[3:]
    assert len(body) == 11
    assert sum(line.startswith("cx ") for line in body) == 3
    assert sum(line.startswith("u3(") for line in body) == 8


@pytest.mark.parametrize(
    "text, line, col",
    [
        (HEAD + "qreg q[2];\ncx q[0] q[1];\n", 4, 9),
        (HEAD + "qreg q[2];\nfoo q[0];\n", 4, 1),
        (HEAD + "qreg q[2];\nh q[2];\n", 4, 5),
    ],
)
def test_errors_carry_location(text, line, col):
    with pytest.raises(QasmError) as exc:
        parse_qasm(text)
    assert (exc.value.line, exc.value.col) == (line, col)


def test_bad_version():
    with pytest.raises(QasmError, match="version"):
        parse_qasm("OPENQASM 3.0; qreg q[1];")


def test_file_round_trip(tmp_path):
    c = Circuit(3, [gate("ccx", 0, 1, 2), gate("u2", 1, params=[0.5, -0.25]), gate("measure", 2, cbit=0)], 1)
    save_qasm(c, tmp_path / "c.qasm")
    assert load_qasm(tmp_path / "c.qasm") == c


@pytest.mark.parametrize("path", SAMPLES, ids=lambda p: p.stem)
def test_samples_parse(path):
    c = load_qasm(path)
    assert parse_qasm(emit_qasm(c)) == c


@given(circuits(max_qubits=5, kinds=KINDS_1Q + KINDS_2Q + (GateKind.XX, GateKind.CCX, GateKind.U1, GateKind.U2)))
def test_round_trip_property(c):
    back = parse_qasm(emit_qasm(c))
    assert [(g.kind, g.qubits, g.cbits) for g in back.gates] == [(g.kind, g.qubits, g.cbits) for g in c.gates]
    for a, b in zip(back.gates, c.gates):
        assert all(abs(x - y) < 1e-15 for x, y in zip(a.params, b.params))


def _statement_semicolons(text):
    """Positions of semicolons outside comments."""
    return [m.start() for m in re.finditer(";", text) if "//" not in text[text.rfind("\n", 0, m.start()) + 1:m.start()]]


@pytest.mark.parametrize("path", SAMPLES, ids=lambda p: p.stem)
def test_fuzz_dropped_semicolon_rejected(path):
    text = path.read_text()
    for pos in _statement_semicolons(text):
        with pytest.raises(QasmError):
            parse_qasm(text[:pos] + text[pos + 1:])


@given(st.data())
def test_fuzz_misspelled_gate_rejected(data):
    text = SAMPLES[data.draw(st.integers(0, len(SAMPLES) - 1))].read_text()
    sites = [m for m in re.finditer(r"^(h|x|cx|rz|ry|swap|ccx|cu1|zz) ", text, re.M)]
    m = data.draw(st.sampled_from(sites))
    bad = text[: m.start()] + m.group(1) + "q" + text[m.end() - 1:]
    with pytest.raises(QasmError):
        parse_qasm(bad)
