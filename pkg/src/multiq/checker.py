"""Functional-independence checking of multi-programmed NA programs.

A tile's circuit is reconstructed by replaying the program, composed with the
adjoint of the source circuit as a ZX-diagram, and simplified; bare wires
certify equivalence up to a global phase. A dense-unitary oracle backs up
small cases and serves as an independent reference.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityMismatch, IsolationViolation, ReplayError, TooLarge
from .frontend import CZ, U3, Circuit, single_qubit_params, u3_matrix
from .ir import Rydberg, U3Batch, replay
from .planner import zone_geometry
from .zx import adjoint_compose, simplify, to_zx

ORACLE_LIMIT = 12
TOL = 1e-9


@dataclass
class Verdict:
    equivalent: bool
    global_phase: float = None
    witness: object = None
    method: str = "zx"

    def __post_init__(self):
        if self.equivalent and self.global_phase is None:
            raise ValueError("an equivalent verdict carries a global phase")
        if not self.equivalent:
            self.global_phase = None

    def to_dict(self):
        return {
            "equivalent": self.equivalent,
            "global_phase": self.global_phase,
            "method": self.method,
            "witness": self.witness,
        }


# --------------------------------------------------------------------------
# dense oracle

_CZ = np.diag([1, 1, 1, -1]).astype(complex).reshape(2, 2, 2, 2)


def _gate_matrix(g):
    if g.name == "rz":
        a = g.params[0]
        return np.diag([cmath.exp(-0.5j * a), cmath.exp(0.5j * a)])
    if g.name == "rx":
        a = g.params[0]
        c, s = math.cos(a / 2), math.sin(a / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if g.name == "ry":
        a = g.params[0]
        c, s = math.cos(a / 2), math.sin(a / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    return u3_matrix(*single_qubit_params(g))


def apply_gate(state, g, n):
    """Apply one gate to a (2,)*n (+ batch) tensor; qubit 0 is the leading axis."""
    if g.name == "barrier":
        return state
    if g.name == "cz":
        a, b = g.qubits
        out = np.tensordot(_CZ, state, axes=([2, 3], [a, b]))
        return np.moveaxis(out, [0, 1], [a, b])
    if g.name in ("cx", "swap"):
        from .frontend import _expand

        for h in _expand(g):
            state = apply_gate(state, h, n)
        return state
    (q,) = g.qubits
    out = np.tensordot(_gate_matrix(g), state, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def circuit_unitary(circuit: Circuit, limit=ORACLE_LIMIT) -> np.ndarray:
    n = circuit.n_qubits
    if n > limit:
        raise TooLarge(n, limit)
    dim = 2 ** n
    state = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in circuit.gates:
        state = apply_gate(state, g, n)
    return state.reshape(dim, dim)


def unitary_verdict(u1, u2, method="oracle"):
    m = u2.conj().T @ u1
    d = np.diag(m)
    ref = d[0]
    off = m - np.diag(d)
    if np.max(np.abs(off), initial=0.0) > TOL or np.max(np.abs(d - ref)) > TOL:
        k = np.unravel_index(np.argmax(np.abs(m - ref * np.eye(len(m)))), m.shape)
        return Verdict(False, witness={"entry": [int(k[0]), int(k[1])], "value": str(m[k])},
                       method=method)
    return Verdict(True, float(cmath.phase(ref)), method=method)


def oracle_equiv(c1: Circuit, c2: Circuit, limit=ORACLE_LIMIT) -> Verdict:
    if c1.n_qubits != c2.n_qubits:
        raise ArityMismatch(f"{c1.n_qubits} vs {c2.n_qubits} qubits")
    return unitary_verdict(circuit_unitary(c1, limit), circuit_unitary(c2, limit))


# --------------------------------------------------------------------------
# reconstruction

def reconstruct(program, tile_qubits, hw, name="reconstructed", strict=True) -> Circuit:
    """Gate sequence the program applies to ``tile_qubits`` (re-indexed in order).

    U3 batches become U3 gates on the addressed atoms; each Rydberg pulse
    becomes CZ on every pair inside the entanglement zone within blockade
    radius. A pair with exactly one endpoint in the tile raises
    IsolationViolation (or is skipped with ``strict=False``).
    """
    from .estimator import _rydberg_pairs

    local = {g: i for i, g in enumerate(tile_qubits)}
    band = zone_geometry(hw)["entanglement_band"]
    gates = []
    positions = dict(zip(program.init.qubit_ids, program.init.sites))
    missing = set(local) - set(positions)
    if missing:
        raise ReplayError(0, None, f"qubits {sorted(missing)} are not initialized")
    for step in replay(program):
        instr = step.instr
        if isinstance(instr, U3Batch):
            for atom, ang in zip(step.atoms, instr.angles):
                if atom in local:
                    gates.append(U3(*ang, local[atom]))
        elif isinstance(instr, Rydberg):
            for a, b in _rydberg_pairs(positions, hw, band):
                ina, inb = a in local, b in local
                if ina and inb:
                    gates.append(CZ(local[a], local[b]))
                elif ina or inb:
                    if strict:
                        raise IsolationViolation((a, b))
        positions = step.positions
    return Circuit(len(local), gates, name)


# --------------------------------------------------------------------------
# check

def zx_verdict(original: Circuit, actual: Circuit, oracle_limit=ORACLE_LIMIT) -> Verdict:
    d = simplify(adjoint_compose(to_zx(original), to_zx(actual)))
    if d.is_bare_wires():
        return Verdict(True, float(cmath.phase(d.scalar)), method="zx")
    if original.n_qubits <= oracle_limit:
        v = oracle_equiv(original, actual, limit=max(oracle_limit, original.n_qubits))
        v.method = "oracle-fallback"
        if not v.equivalent:
            v.witness = {"oracle": v.witness, "residual": d.summary()}
        return v
    return Verdict(False, witness={"inconclusive-residual": d.summary()}, method="zx")


def check(original: Circuit, merged, tile_qubits, hw, oracle_limit=ORACLE_LIMIT) -> Verdict:
    program = getattr(merged, "program", merged)
    try:
        actual = reconstruct(program, tile_qubits, hw)
    except IsolationViolation as exc:
        return Verdict(False, witness={"isolation": list(exc.pair)}, method="replay")
    if actual.n_qubits != original.n_qubits:
        raise ArityMismatch(f"{original.n_qubits} vs {actual.n_qubits} qubits")
    return zx_verdict(original, actual, oracle_limit)
