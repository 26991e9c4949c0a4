"""OpenQASM 2.0 ingestion, rebasing to the native {U3, CZ} gate set, and the
gate dependency DAG."""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, UnsupportedGate

NATIVE = ("u3", "cz")

# name -> (n_qubits, n_params)
SUPPORTED = {
    "u3": (1, 3), "u2": (1, 2), "u1": (1, 1), "u": (1, 3),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1),
    "h": (1, 0), "x": (1, 0), "y": (1, 0), "z": (1, 0),
    "s": (1, 0), "sdg": (1, 0), "t": (1, 0), "tdg": (1, 0), "id": (1, 0),
    "cx": (2, 0), "cz": (2, 0), "swap": (2, 0),
}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name == "u3" and (len(self.qubits) != 1 or len(self.params) != 3):
            raise ValueError("U3 takes one qubit and three angles")
        if self.name == "cz" and (
            len(self.qubits) != 2 or self.qubits[0] == self.qubits[1] or self.params
        ):
            raise ValueError("CZ takes two distinct qubits and no parameters")

    @property
    def size(self):
        return len(self.qubits)


def U3(theta, phi, lam, q):
    return Gate("u3", (q,), (theta, phi, lam))


def CZ(a, b):
    return Gate("cz", (a, b))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple
    name: str = "circuit"
    measurements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "measurements", tuple(self.measurements))
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"qubit {q} outside [0, {self.n_qubits})")

    @property
    def is_native(self):
        return all(g.name in NATIVE or g.name == "barrier" for g in self.gates)

    def count(self, name):
        return sum(1 for g in self.gates if g.name == name)


# --------------------------------------------------------------------------
# single-qubit algebra

def u3_matrix(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def u3_params(m, tol=1e-12):
    """Return (theta, phi, lam) with U3(theta, phi, lam) equal to ``m`` up to phase.

    theta = 2*atan2(|m10|, |m00|). When sin(theta/2) vanishes lam is fixed to
    zero and the relative phase goes into phi.
    """
    m = np.asarray(m, dtype=complex)
    theta = 2.0 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
    if abs(m[1, 0]) <= tol:
        return 0.0, _wrap(np.angle(m[1, 1]) - np.angle(m[0, 0])), 0.0
    if abs(m[0, 0]) <= tol:
        g = np.angle(m[1, 0])
        return math.pi, 0.0, _wrap(np.angle(-m[0, 1]) - g)
    g = np.angle(m[0, 0])
    phi = np.angle(m[1, 0]) - g
    lam = np.angle(-m[0, 1]) - g
    return theta, _wrap(phi), _wrap(lam)


def _wrap(a):
    """Map an angle into (-pi, pi]."""
    a = math.remainder(float(a), 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    return a


HALF_PI = math.pi / 2

_FIXED = {
    "h": (HALF_PI, 0.0, math.pi),
    "x": (math.pi, 0.0, math.pi),
    "y": (math.pi, HALF_PI, HALF_PI),
    "z": (0.0, 0.0, math.pi),
    "s": (0.0, 0.0, HALF_PI),
    "sdg": (0.0, 0.0, -HALF_PI),
    "t": (0.0, 0.0, math.pi / 4),
    "tdg": (0.0, 0.0, -math.pi / 4),
    "id": (0.0, 0.0, 0.0),
}


def single_qubit_params(gate):
    """U3 angles of any supported one-qubit gate."""
    name, p = gate.name, gate.params
    if name in ("u3", "u"):
        return p
    if name in _FIXED:
        return _FIXED[name]
    if name == "u2":
        return (HALF_PI, p[0], p[1])
    if name in ("u1", "rz"):
        return (0.0, 0.0, p[0])
    if name == "rx":
        return (p[0], -HALF_PI, HALF_PI)
    if name == "ry":
        return (p[0], 0.0, 0.0)
    raise UnsupportedGate(name)


# --------------------------------------------------------------------------
# parsing

_BIN = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "ln": math.log, "sqrt": math.sqrt,
}


def _eval_expr(text, lineno):
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError:
        raise ParseError(lineno, f"bad parameter expression '{text}'") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
            return _BIN[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ParseError(lineno, f"bad parameter expression '{text}'")

    return ev(tree)


def _split_top(text):
    """Split on commas that are not nested in parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    if cur or out:
        out.append("".join(cur))
    return [s.strip() for s in out]


_REG_DECL = re.compile(r"^(qreg|creg)\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]$")
_ARG = re.compile(r"^([A-Za-z_]\w*)(?:\s*\[\s*(\d+)\s*\])?$")
_CALL = re.compile(r"^([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*(.*)$", re.S)


def _statements(text):
    """Yield (line, statement) with comments removed."""
    buf, start = [], None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("//", 1)[0]
        for ch in line:
            if start is None and not ch.isspace():
                start = lineno
            if ch == ";":
                stmt = "".join(buf).strip()
                if stmt:
                    yield start, stmt
                buf, start = [], None
            else:
                buf.append(ch)
        buf.append(" ")
    rest = "".join(buf).strip()
    if rest:
        raise ParseError(start, "missing ';'")


def parse_openqasm(text: str, name: str = "circuit") -> Circuit:
    qregs, cregs = {}, {}
    n_qubits = 0
    gates, measures = [], []

    def operands(arg, lineno, regs, kind):
        m = _ARG.match(arg)
        if not m or m.group(1) not in regs:
            raise ParseError(lineno, f"unknown {kind} operand '{arg}'")
        offset, size = regs[m.group(1)]
        if m.group(2) is None:
            return [offset + i for i in range(size)]
        idx = int(m.group(2))
        if idx >= size:
            raise ParseError(lineno, f"index out of range in '{arg}'")
        return [offset + idx]

    for lineno, stmt in _statements(text):
        head = stmt.split(None, 1)[0]
        if head == "OPENQASM":
            if stmt.split()[1:] not in (["2.0"], ["2"]):
                raise ParseError(lineno, "only OpenQASM 2.0 is supported")
            continue
        if head == "include":
            continue
        m = _REG_DECL.match(stmt)
        if m:
            kind, reg, size = m.group(1), m.group(2), int(m.group(3))
            if reg in qregs or reg in cregs:
                raise ParseError(lineno, f"register '{reg}' redeclared")
            if kind == "qreg":
                qregs[reg] = (n_qubits, size)
                n_qubits += size
            else:
                cregs[reg] = (sum(s for _, s in cregs.values()), size)
            continue
        if head in ("if", "gate", "opaque", "reset") or head.startswith("if("):
            raise UnsupportedGate(head.split("(")[0], lineno)
        if head == "measure":
            body = stmt[len("measure"):]
            if "->" not in body:
                raise ParseError(lineno, "measure needs '->'")
            qa, ca = (s.strip() for s in body.split("->", 1))
            qs = operands(qa, lineno, qregs, "quantum")
            cs = operands(ca, lineno, cregs, "classical")
            if len(qs) != len(cs):
                raise ParseError(lineno, "measure register sizes differ")
            measures.extend(zip(qs, cs))
            continue
        if head == "barrier":
            qs = []
            for arg in _split_top(stmt[len("barrier"):]):
                qs.extend(operands(arg, lineno, qregs, "quantum"))
            gates.append(Gate("barrier", tuple(dict.fromkeys(qs))))
            continue
        m = _CALL.match(stmt)
        gname = m.group(1).lower() if m else head
        if not m or gname not in SUPPORTED:
            raise UnsupportedGate(gname, lineno)
        nq, npar = SUPPORTED[gname]
        params = [_eval_expr(p, lineno) for p in _split_top(m.group(2) or "")] if m.group(2) else []
        if len(params) != npar:
            raise ParseError(lineno, f"'{gname}' expects {npar} parameters")
        args = _split_top(m.group(3))
        if len(args) != nq or not all(args):
            raise ParseError(lineno, f"'{gname}' expects {nq} operands")
        lists = [operands(a, lineno, qregs, "quantum") for a in args]
        width = max(len(x) for x in lists)
        for x in lists:
            if len(x) not in (1, width):
                raise ParseError(lineno, "register broadcast sizes differ")
        for i in range(width):
            qs = tuple(x[i] if len(x) > 1 else x[0] for x in lists)
            if len(set(qs)) != len(qs):
                raise ParseError(lineno, f"repeated operand in '{gname}'")
            gates.append(Gate(gname, qs, params))
    if n_qubits == 0:
        raise ParseError(1, "no qreg declared")
    return Circuit(n_qubits, gates, name, measures)


def load_qasm(path, name=None) -> Circuit:
    from pathlib import Path

    p = Path(path)
    return parse_openqasm(p.read_text(encoding="utf-8"), name or p.stem)


# --------------------------------------------------------------------------
# rebasing

_H = (HALF_PI, 0.0, math.pi)


def _expand(gate):
    """Rewrite one parsed gate into U3/CZ (no fusion)."""
    if gate.name == "barrier" or gate.name == "cz":
        return [gate]
    if gate.size == 1:
        return [U3(*single_qubit_params(gate), gate.qubits[0])]
    a, b = gate.qubits
    if gate.name == "cx":
        return [U3(*_H, b), CZ(a, b), U3(*_H, b)]
    if gate.name == "swap":
        return _expand(Gate("cx", (a, b))) + _expand(Gate("cx", (b, a))) + _expand(Gate("cx", (a, b)))
    raise UnsupportedGate(gate.name)


def rebase_to_native(circuit: Circuit) -> Circuit:
    """Rewrite into {U3, CZ}, fusing runs of one-qubit gates into a single U3."""
    out = []
    pending = {}

    def flush(q):
        m = pending.pop(q, None)
        if m is not None:
            out.append(U3(*u3_params(m), q))

    for gate in circuit.gates:
        for g in _expand(gate):
            if g.name == "u3":
                q = g.qubits[0]
                m = u3_matrix(*g.params)
                pending[q] = m if q not in pending else m @ pending[q]
                continue
            for q in g.qubits:
                flush(q)
            out.append(g)
    for q in sorted(pending):
        flush(q)
    return Circuit(circuit.n_qubits, out, circuit.name, circuit.measurements)


# --------------------------------------------------------------------------
# DAG

@dataclass
class GateDag:
    gates: list
    preds: list
    succs: list
    layers: list = field(default_factory=list)

    @property
    def edges(self):
        return sorted((i, j) for j, ps in enumerate(self.preds) for i in ps)

    def __len__(self):
        return len(self.gates)


def front_layers(preds, nodes=None):
    """Iterated zero-in-degree fronts of the sub-DAG induced by ``nodes``."""
    nodes = set(range(len(preds))) if nodes is None else set(nodes)
    indeg = {n: sum(1 for p in preds[n] if p in nodes) for n in nodes}
    succs = {n: [] for n in nodes}
    for n in nodes:
        for p in preds[n]:
            if p in nodes:
                succs[p].append(n)
    front = sorted(n for n, d in indeg.items() if d == 0)
    layers = []
    while front:
        layers.append(front)
        nxt = []
        for n in front:
            for s in succs[n]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    nxt.append(s)
        front = sorted(nxt)
    return layers


def build_dag(circuit: Circuit) -> GateDag:
    """Edge i->j when gate j is the next gate after i on a shared qubit.

    Barriers are not nodes; every gate after a barrier depends on the last
    gate before it on each of the barrier's qubits.
    """
    gates, preds = [], []
    last = {}
    fence = {}  # qubit -> set of node ids a barrier forces as predecessors
    for g in circuit.gates:
        if g.name == "barrier":
            cut = set()
            for q in g.qubits:
                if q in last:
                    cut.add(last[q])
                cut |= fence.get(q, set())
            for q in g.qubits:
                last.pop(q, None)
                fence[q] = set(cut)
            continue
        idx = len(gates)
        ps = set()
        for q in g.qubits:
            if q in last:
                ps.add(last[q])
            else:
                ps |= fence.get(q, set())
            last[q] = idx
            fence.pop(q, None)
        gates.append(g)
        preds.append(sorted(ps))
    succs = [[] for _ in gates]
    for j, ps in enumerate(preds):
        for i in ps:
            succs[i].append(j)
    return GateDag(gates, preds, succs, front_layers(preds))
