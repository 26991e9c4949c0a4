"""Desk-scale benchmark corpus: generators, shipped files, and a loader.

Files are named ``<family>_<n>.qasm``; the family tag is the prefix.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import MultiQError
from .frontend import Circuit, load_qasm

FAMILIES = {
    "bv": "BV",
    "ghz": "GHZ",
    "dj": "DJ",
    "qaoa": "QAOA",
    "hamsim": "HamSim",
    "graphstate": "GraphState",
    "cat": "CAT",
    "knn": "KNN",
    "swp": "SWP",
    "wst": "WST",
    "multiply": "Multiply",
}


@dataclass
class BenchmarkEntry:
    name: str
    n_qubits: int
    path: Path
    family: str
    circuit: Circuit = None


def default_corpus_dir() -> Path:
    return Path(__file__).parent / "data" / "corpus"


def family_of(name: str) -> str:
    prefix = name.split("_", 1)[0].lower()
    return FAMILIES.get(prefix, "Other")


def load_corpus(directory=None) -> list:
    """All parseable ``.qasm`` files in ``directory`` (sorted by name).

    Files that fail to parse are skipped with a warning.
    """
    directory = Path(directory) if directory is not None else default_corpus_dir()
    out = []
    for path in sorted(directory.glob("*.qasm")):
        try:
            c = load_qasm(path)
        except (MultiQError, OSError, UnicodeDecodeError) as exc:
            warnings.warn(f"skipping {path.name}: {exc}", stacklevel=2)
            continue
        out.append(BenchmarkEntry(path.stem, c.n_qubits, path, family_of(path.stem), c))
    return out


# --------------------------------------------------------------------------
# generators; each returns the body lines after the register declarations

def _ccx(c, a, t):
    return [
        f"h q[{t}];", f"cx q[{a}],q[{t}];", f"tdg q[{t}];", f"cx q[{c}],q[{t}];",
        f"t q[{t}];", f"cx q[{a}],q[{t}];", f"tdg q[{t}];", f"cx q[{c}],q[{t}];",
        f"t q[{a}];", f"t q[{t}];", f"h q[{t}];", f"cx q[{c}],q[{a}];",
        f"t q[{c}];", f"tdg q[{a}];", f"cx q[{c}],q[{a}];",
    ]


def _cswap(c, a, b):
    return [f"cx q[{b}],q[{a}];"] + _ccx(c, a, b) + [f"cx q[{b}],q[{a}];"]


def gen_bv(n):
    secret = [(i * 5 + 1) % 3 != 0 for i in range(n - 1)]
    anc = n - 1
    body = [f"x q[{anc}];"] + [f"h q[{i}];" for i in range(n)]
    body += [f"cx q[{i}],q[{anc}];" for i, s in enumerate(secret) if s]
    body += [f"h q[{i}];" for i in range(n - 1)]
    return body


def gen_ghz(n):
    return ["h q[0];"] + [f"cx q[{i}],q[{i + 1}];" for i in range(n - 1)]


def gen_cat(n):
    return ["h q[0];"] + [f"cx q[0],q[{i}];" for i in range(1, n)]


def gen_dj(n):
    anc = n - 1
    flip = [i for i in range(n - 1) if i % 2 == 0]
    body = [f"x q[{anc}];"] + [f"h q[{i}];" for i in range(n)]
    body += [f"x q[{i}];" for i in flip]
    body += [f"cx q[{i}],q[{anc}];" for i in range(n - 1)]
    body += [f"x q[{i}];" for i in flip]
    body += [f"h q[{i}];" for i in range(n - 1)]
    return body


def gen_qaoa(n, gamma=0.7, beta=0.35):
    body = [f"h q[{i}];" for i in range(n)]
    for i in range(n):
        a, b = i, (i + 1) % n
        body += [f"cx q[{a}],q[{b}];", f"rz({2 * gamma!r}) q[{b}];", f"cx q[{a}],q[{b}];"]
    body += [f"rx({2 * beta!r}) q[{i}];" for i in range(n)]
    return body


def gen_hamsim(n, steps=2, dt=0.2):
    body = []
    for _ in range(steps):
        for i in range(n - 1):
            a, b = i, i + 1
            body += [f"cx q[{a}],q[{b}];", f"rz({2 * dt!r}) q[{b}];", f"cx q[{a}],q[{b}];"]
        body += [f"rx({2 * dt!r}) q[{i}];" for i in range(n)]
    return body


def gen_graphstate(n):
    body = [f"h q[{i}];" for i in range(n)]
    body += [f"cz q[{i}],q[{(i + 1) % n}];" for i in range(n)]
    return body


def gen_swap_test(n):
    """Swap test between two (n-1)/2-qubit registers prepared differently."""
    k = (n - 1) // 2
    body = [f"ry({0.3 * (i + 1)!r}) q[{1 + i}];" for i in range(k)]
    body += [f"rx({0.5 * (i + 1)!r}) q[{1 + k + i}];" for i in range(k)]
    body.append("h q[0];")
    for i in range(k):
        body += _cswap(0, 1 + i, 1 + k + i)
    body.append("h q[0];")
    return body


def gen_knn(n):
    """Distance estimate by swap test against an amplitude-encoded sample."""
    k = (n - 1) // 2
    body = [f"h q[{1 + i}];" for i in range(k)]
    body += [f"ry({math.pi / (i + 3)!r}) q[{1 + k + i}];" for i in range(k)]
    body.append("h q[0];")
    for i in range(k):
        body += _cswap(0, 1 + i, 1 + k + i)
    body.append("h q[0];")
    return body


def gen_wst(n):
    """W state via a chain of controlled-RY splits."""
    body = [f"x q[0];"]
    for i in range(n - 1):
        theta = 2 * math.acos(math.sqrt(1.0 / (n - i)))
        a, b = i, i + 1
        body += [
            f"ry({theta / 2!r}) q[{b}];", f"cx q[{a}],q[{b}];",
            f"ry({-theta / 2!r}) q[{b}];", f"cx q[{a}],q[{b}];",
            f"cx q[{b}],q[{a}];",
        ]
    return body


def gen_multiply(n):
    """2-bit by 1-bit product into a small accumulator (n >= 5)."""
    a0, a1, b0, p0, p1 = range(5)
    body = ["x q[0];", "x q[1];", "x q[2];"]
    body += _ccx(a0, b0, p0) + _ccx(a1, b0, p1)
    for extra in range(5, n):
        body.append(f"cx q[{p1}],q[{extra}];")
    return body


GENERATORS = {
    "bv": gen_bv, "ghz": gen_ghz, "cat": gen_cat, "dj": gen_dj, "qaoa": gen_qaoa,
    "hamsim": gen_hamsim, "graphstate": gen_graphstate, "swp": gen_swap_test,
    "knn": gen_knn, "wst": gen_wst, "multiply": gen_multiply,
}

# (family, qubits) shipped in the package
SHIPPED = [
    ("bv", 4), ("bv", 6), ("cat", 5), ("dj", 5), ("ghz", 4), ("ghz", 8),
    ("graphstate", 6), ("hamsim", 4), ("knn", 5), ("multiply", 6), ("qaoa", 6),
    ("swp", 5), ("wst", 4), ("ghz", 12),
]


def qasm_text(family, n) -> str:
    body = GENERATORS[family](n)
    head = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{n}];",
        f"creg c[{n}];",
    ]
    return "\n".join(head + body + ["measure q -> c;"]) + "\n"


def write_corpus(directory, entries=SHIPPED) -> list:
    """Regenerate the corpus files plus ``index.json`` in ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    index = []
    for family, n in entries:
        name = f"{family}_{n}"
        (directory / f"{name}.qasm").write_text(qasm_text(family, n), encoding="utf-8")
        index.append({"name": name, "family": FAMILIES[family], "n_qubits": n,
                      "file": f"{name}.qasm"})
    (directory / "index.json").write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")
    return index


def load_index(directory=None) -> list:
    directory = Path(directory) if directory is not None else default_corpus_dir()
    return json.loads((directory / "index.json").read_text(encoding="utf-8"))
