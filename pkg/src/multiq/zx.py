"""A small ZX-diagram engine: construction from {U3, CZ} circuits, adjoint
composition, a terminating rewrite loop, and dense tensor evaluation.

Spiders are undirected tensors; a Z spider of phase a is
|0..0><0..0| + e^{ia}|1..1><1..1| over all legs, an X spider the same in the
|+>/|-> basis. Edges are plain (identity) or Hadamard. The diagram scalar is
tracked exactly, so evaluation before and after simplification agrees.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityMismatch, UnsupportedGate

Z, X, B = "Z", "X", "B"
PLAIN, HAD = 0, 1
TOL = 1e-9
SQRT2 = math.sqrt(2.0)
HMAT = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2


def norm_phase(a):
    a = math.remainder(float(a), 2 * math.pi)
    if a <= -math.pi + TOL:
        a += 2 * math.pi
    return 0.0 if abs(a) < TOL else a


def _zero(a):
    return abs(math.remainder(a, 2 * math.pi)) < TOL


@dataclass
class ZXDiagram:
    kind: dict = field(default_factory=dict)  # vertex -> Z | X | B
    phase: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)  # edge id -> (u, v, PLAIN | HAD)
    inc: dict = field(default_factory=dict)  # vertex -> set of edge ids
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    scalar: complex = 1.0 + 0.0j
    _next_v: int = 0
    _next_e: int = 0

    # ---- construction
    def add_vertex(self, kind, phase=0.0):
        v = self._next_v
        self._next_v += 1
        self.kind[v] = kind
        self.phase[v] = norm_phase(phase) if kind != B else 0.0
        self.inc[v] = set()
        return v

    def add_edge(self, u, v, etype=PLAIN):
        e = self._next_e
        self._next_e += 1
        self.edges[e] = (u, v, etype)
        self.inc[u].add(e)
        self.inc[v].add(e)
        return e

    def remove_edge(self, e):
        u, v, _ = self.edges.pop(e)
        self.inc[u].discard(e)
        self.inc[v].discard(e)

    def remove_vertex(self, v):
        for e in list(self.inc[v]):
            self.remove_edge(e)
        del self.inc[v], self.kind[v], self.phase[v]

    def copy(self):
        d = ZXDiagram(
            dict(self.kind), dict(self.phase), dict(self.edges),
            {v: set(s) for v, s in self.inc.items()},
            list(self.inputs), list(self.outputs), self.scalar,
        )
        d._next_v, d._next_e = self._next_v, self._next_e
        return d

    # ---- queries
    @property
    def n_qubits(self):
        return len(self.inputs)

    def spiders(self):
        return [v for v, k in self.kind.items() if k != B]

    def degree(self, v):
        # a self-loop contributes two legs
        return sum(2 if self.edges[e][0] == self.edges[e][1] else 1 for e in self.inc[v])

    def other(self, e, v):
        u, w, _ = self.edges[e]
        return w if u == v else u

    def n_hadamard(self):
        return sum(1 for _, _, t in self.edges.values() if t == HAD)

    def is_bare_wires(self):
        if self.spiders():
            return False
        for i, o in zip(self.inputs, self.outputs):
            if len(self.inc[i]) != 1:
                return False
            e = next(iter(self.inc[i]))
            u, v, t = self.edges[e]
            if t != PLAIN or {u, v} != {i, o}:
                return False
        return True

    def summary(self):
        return {
            "spiders": len(self.spiders()),
            "hadamard_edges": self.n_hadamard(),
            "edges": len(self.edges),
        }


# --------------------------------------------------------------------------
# circuit -> diagram

def _zmat(a):
    return np.diag([1.0, cmath.exp(1j * a)])


def _xmat(a):
    return HMAT @ _zmat(a) @ HMAT


def u3_zx_phases(theta, phi, lam):
    """(first Z, X, last Z, global phase) with U3 = e^{ig} Z(last) X(mid) Z(first)."""
    from .frontend import u3_matrix

    a, b, c = lam - math.pi / 2, theta, phi + math.pi / 2
    m = _zmat(c) @ _xmat(b) @ _zmat(a)
    u = u3_matrix(theta, phi, lam)
    k = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    g = cmath.phase(u[k] / m[k])
    return a, b, c, g


def to_zx(circuit) -> ZXDiagram:
    from .frontend import single_qubit_params

    d = ZXDiagram()
    n = circuit.n_qubits
    d.inputs = [d.add_vertex(B) for _ in range(n)]
    last = list(d.inputs)

    def attach(q, v):
        d.add_edge(last[q], v, PLAIN)
        last[q] = v

    for g in circuit.gates:
        if g.name == "barrier":
            continue
        if g.name == "cz":
            a, b = g.qubits
            va, vb = d.add_vertex(Z), d.add_vertex(Z)
            attach(a, va)
            attach(b, vb)
            d.add_edge(va, vb, HAD)
            d.scalar *= SQRT2
            continue
        if g.name == "rz":
            attach(g.qubits[0], d.add_vertex(Z, g.params[0]))
            d.scalar *= cmath.exp(-0.5j * g.params[0])
            continue
        if g.name == "rx":
            attach(g.qubits[0], d.add_vertex(X, g.params[0]))
            d.scalar *= cmath.exp(-0.5j * g.params[0])
            continue
        if g.size != 1:
            raise UnsupportedGate(g.name)
        theta, phi, lam = single_qubit_params(g)
        a, b, c, gph = u3_zx_phases(theta, phi, lam)
        q = g.qubits[0]
        attach(q, d.add_vertex(Z, a))
        attach(q, d.add_vertex(X, b))
        attach(q, d.add_vertex(Z, c))
        d.scalar *= cmath.exp(1j * gph)
    d.outputs = [d.add_vertex(B) for _ in range(n)]
    for q in range(n):
        d.add_edge(last[q], d.outputs[q], PLAIN)
    return d


def adjoint(d: ZXDiagram) -> ZXDiagram:
    m = d.copy()
    for v in m.phase:
        m.phase[v] = norm_phase(-m.phase[v])
    m.inputs, m.outputs = list(d.outputs), list(d.inputs)
    m.scalar = complex(np.conj(d.scalar))
    return m


def compose(first: ZXDiagram, second: ZXDiagram) -> ZXDiagram:
    """Diagram of ``second`` applied after ``first``."""
    if first.n_qubits != second.n_qubits:
        raise ArityMismatch(f"{first.n_qubits} vs {second.n_qubits} qubits")
    out = first.copy()
    remap = {}
    for v, k in second.kind.items():
        remap[v] = out.add_vertex(k, second.phase[v])
    for u, v, t in second.edges.values():
        out.add_edge(remap[u], remap[v], t)
    for o, i in zip(first.outputs, [remap[v] for v in second.inputs]):
        # splice the two boundary vertices into one wire
        (e1,), (e2,) = out.inc[o], out.inc[i]
        a, b = out.other(e1, o), out.other(e2, i)
        t1, t2 = out.edges[e1][2], out.edges[e2][2]
        out.remove_vertex(o)
        out.remove_vertex(i)
        out.add_edge(a, b, t1 ^ t2)
    out.outputs = [remap[v] for v in second.outputs]
    out.scalar = first.scalar * second.scalar
    return out


def adjoint_compose(d_original: ZXDiagram, d_actual: ZXDiagram) -> ZXDiagram:
    """actual^dagger after original; bare wires iff the two agree up to phase."""
    if d_original.n_qubits != d_actual.n_qubits:
        raise ArityMismatch(f"{d_original.n_qubits} vs {d_actual.n_qubits} qubits")
    return compose(d_original, adjoint(d_actual))


# --------------------------------------------------------------------------
# rewriting

def _color_change(d):
    for v in d.spiders():
        if d.kind[v] == X:
            d.kind[v] = Z
            for e in list(d.inc[v]):
                u, w, t = d.edges[e]
                if u == w:
                    continue  # a loop flips twice
                d.edges[e] = (u, w, t ^ 1)


def _loops(d):
    changed = False
    for v in d.spiders():
        for e in list(d.inc[v]):
            u, w, t = d.edges[e]
            if u != w:
                continue
            d.remove_edge(e)
            if t == HAD:
                d.phase[v] = norm_phase(d.phase[v] + math.pi)
                d.scalar /= SQRT2
            changed = True
    return changed


def _parallel(d):
    changed = False
    for v in d.spiders():
        seen = {}
        for e in sorted(d.inc[v]):
            if e not in d.edges:
                continue
            u, w, t = d.edges[e]
            o = w if u == v else u
            if o == v or d.kind[o] == B:
                continue
            key = (o, t)
            if key in seen and seen[key] in d.edges:
                if t == HAD:
                    d.remove_edge(e)
                    d.remove_edge(seen.pop(key))
                    d.scalar /= 2.0
                    changed = True
            else:
                seen[key] = e
    return changed


def _isolated(d):
    changed = False
    for v in d.spiders():
        if not d.inc[v]:
            d.scalar *= 1.0 + cmath.exp(1j * d.phase[v])
            d.remove_vertex(v)
            changed = True
    return changed


def _fuse(d, v, w):
    """Merge spider w into v across every plain edge joining them."""
    for e in list(d.inc[w]):
        a, b, t = d.edges[e]
        if {a, b} == {v, w} and t == PLAIN:
            d.remove_edge(e)
    d.phase[v] = norm_phase(d.phase[v] + d.phase[w])
    for e in list(d.inc[w]):
        a, b, t = d.edges[e]
        d.remove_edge(e)
        na = v if a == w else a
        nb = v if b == w else b
        d.add_edge(na, nb, t)
    d.remove_vertex(w)


def _fusion(d, allow_chain):
    for e in sorted(d.edges):
        if e not in d.edges:
            continue
        u, v, t = d.edges[e]
        if t != PLAIN or u == v or d.kind[u] == B or d.kind[v] == B:
            continue
        if not allow_chain and (d.degree(u) == 2 or d.degree(v) == 2):
            continue
        _fuse(d, u, v)
        return True
    return False


_TEMPLATES = ("I", "H", "D", "HD", "DH", "DHD", "DXD")
_COST = {"I": (0, 0), "H": (0, 1), "D": (1, 0), "HD": (1, 1), "DH": (1, 1),
         "DHD": (2, 1), "DXD": (3, 2)}


def _fit(m, name):
    """(scalar, phases) with m = scalar * template(phases), or None."""
    from .frontend import u3_params

    def tmpl(ph):
        mats = {
            "I": lambda: np.eye(2),
            "H": lambda: HMAT,
            "D": lambda: _zmat(ph[0]),
            "HD": lambda: HMAT @ _zmat(ph[0]),
            "DH": lambda: _zmat(ph[0]) @ HMAT,
            "DHD": lambda: _zmat(ph[1]) @ HMAT @ _zmat(ph[0]),
            "DXD": lambda: _zmat(ph[2]) @ HMAT @ _zmat(ph[1]) @ HMAT @ _zmat(ph[0]),
        }
        return mats[name]()

    if name in ("I", "H"):
        ph = ()
    elif name == "D":
        if abs(m[0, 1]) > TOL or abs(m[1, 0]) > TOL or abs(m[0, 0]) < TOL:
            return None
        ph = (cmath.phase(m[1, 1] / m[0, 0]),)
    elif name == "HD":
        mm = HMAT @ m
        if abs(mm[0, 1]) > TOL or abs(mm[1, 0]) > TOL or abs(mm[0, 0]) < TOL:
            return None
        ph = (cmath.phase(mm[1, 1] / mm[0, 0]),)
    elif name == "DH":
        mm = m @ HMAT
        if abs(mm[0, 1]) > TOL or abs(mm[1, 0]) > TOL or abs(mm[0, 0]) < TOL:
            return None
        ph = (cmath.phase(mm[1, 1] / mm[0, 0]),)
    elif name == "DHD":
        if min(abs(m.ravel())) < TOL:
            return None
        ph = (cmath.phase(m[0, 1] / m[0, 0]), cmath.phase(m[1, 0] / m[0, 0]))
    else:
        theta, phi, lam = u3_params(m)
        ph = (lam - math.pi / 2, theta, phi + math.pi / 2)
    t = tmpl(ph)
    k = np.unravel_index(np.argmax(np.abs(t)), t.shape)
    s = m[k] / t[k]
    if np.max(np.abs(m - s * t)) > 1e-9 * max(1.0, abs(s)):
        return None
    return s, ph


def _in_chain(d, v):
    return d.kind[v] != B and len(d.inc[v]) == 2 and d.degree(v) == 2


def _walk(d, v, e):
    """Follow degree-2 spiders from v along edge e; (spiders, end, end_edge)."""
    side, cur = [], v
    while True:
        nxt = d.other(e, cur)
        if nxt == v or not _in_chain(d, nxt) or nxt in side:
            return side, nxt, e
        side.append(nxt)
        e = next(x for x in d.inc[nxt] if x != e)
        cur = nxt


def _chains(d):
    """Maximal runs of degree-2 spiders as (end_u, edge_u, spiders, edge_v, end_v).

    A closed ring of degree-2 spiders is reported with both ends None.
    """
    seen, out = set(), []
    for v in sorted(d.spiders()):
        if v in seen or not _in_chain(d, v):
            continue
        e_a, e_b = sorted(d.inc[v])
        left, u_end, u_edge = _walk(d, v, e_a)
        if u_end == v and (not left or u_edge != e_a):
            ring = [v] + left
            seen.update(ring)
            out.append((None, e_a, ring, u_edge, None))
            continue
        right, v_end, v_edge = _walk(d, v, e_b)
        path = list(reversed(left)) + [v] + right
        seen.update(path)
        out.append((u_end, u_edge, path, v_edge, v_end))
    return out


def _chain_rule(d):
    for u_end, u_edge, path, v_edge, v_end in _chains(d):
        if u_edge not in d.edges or v_edge not in d.edges:
            continue
        cycle = u_end is None
        # matrix from u_end towards v_end
        m = np.eye(2, dtype=complex)
        e = u_edge
        for v in path:
            if d.edges[e][2] == HAD:
                m = HMAT @ m
            m = _zmat(d.phase[v]) @ m
            e = next(x for x in d.inc[v] if x != e)
        if d.edges[e][2] == HAD:
            m = HMAT @ m
        if cycle:
            d.scalar *= np.trace(m)
            for v in path:
                d.remove_vertex(v)
            return True
        n_had = sum(1 for x in {u_edge, v_edge, *[y for v in path for y in d.inc[v]]}
                    if d.edges[x][2] == HAD)
        old = (len(path), n_had)
        same_end = u_end == v_end
        for name in _TEMPLATES:
            if _COST[name] >= old:
                break
            if same_end and name not in ("I", "H"):
                continue
            fit = _fit(m, name)
            if fit is None:
                continue
            s, ph = fit
            for v in path:
                d.remove_vertex(v)
            d.scalar *= s
            _build(d, u_end, v_end, name, ph)
            return True
    return False


def _build(d, u, v, name, ph):
    if name == "I":
        d.add_edge(u, v, PLAIN)
    elif name == "H":
        d.add_edge(u, v, HAD)
    elif name == "D":
        a = d.add_vertex(Z, ph[0])
        d.add_edge(u, a, PLAIN)
        d.add_edge(a, v, PLAIN)
    elif name == "HD":
        a = d.add_vertex(Z, ph[0])
        d.add_edge(u, a, PLAIN)
        d.add_edge(a, v, HAD)
    elif name == "DH":
        a = d.add_vertex(Z, ph[0])
        d.add_edge(u, a, HAD)
        d.add_edge(a, v, PLAIN)
    elif name == "DHD":
        a, b = d.add_vertex(Z, ph[0]), d.add_vertex(Z, ph[1])
        d.add_edge(u, a, PLAIN)
        d.add_edge(a, b, HAD)
        d.add_edge(b, v, PLAIN)
    else:
        a, b, c = (d.add_vertex(Z, p) for p in ph)
        d.add_edge(u, a, PLAIN)
        d.add_edge(a, b, HAD)
        d.add_edge(b, c, HAD)
        d.add_edge(c, v, PLAIN)


def _identity(d):
    for v in sorted(d.spiders()):
        if len(d.inc[v]) == 2 and d.degree(v) == 2 and _zero(d.phase[v]):
            e1, e2 = sorted(d.inc[v])
            a, b = d.other(e1, v), d.other(e2, v)
            t = d.edges[e1][2] ^ d.edges[e2][2]
            d.remove_vertex(v)
            d.add_edge(a, b, t)
            return True
    return False


def simplify(diagram: ZXDiagram, max_steps: int = 100000) -> ZXDiagram:
    d = diagram.copy()
    _color_change(d)
    for _ in range(max_steps):
        if _loops(d) | _parallel(d) | _isolated(d):
            continue
        if _identity(d) or _chain_rule(d) or _fusion(d, allow_chain=False):
            continue
        if _fusion(d, allow_chain=True):
            continue
        break
    return d


# --------------------------------------------------------------------------
# dense evaluation (small diagrams only)

def _spider_tensor(kind, phase, arity):
    if arity == 0:
        return np.array(1.0 + cmath.exp(1j * phase))
    t = np.zeros((2,) * arity, dtype=complex)
    t[(0,) * arity] = 1.0
    t[(1,) * arity] += cmath.exp(1j * phase)
    if kind == X:
        for ax in range(arity):
            t = np.moveaxis(np.tensordot(HMAT, t, axes=([1], [ax])), 0, ax)
    return t


def to_matrix(d: ZXDiagram) -> np.ndarray:
    """Dense linear map (outputs x inputs) of a diagram, by greedy pairwise contraction."""
    legs = {v: [] for v in d.kind}
    tensors = {}
    n_lab = 0
    for e, (u, v, t) in sorted(d.edges.items()):
        if t == PLAIN:
            legs[u].append(n_lab)
            legs[v].append(n_lab)
            n_lab += 1
        else:
            legs[u].append(n_lab)
            legs[v].append(n_lab + 1)
            tensors[("h", e)] = (HMAT.copy(), [n_lab, n_lab + 1])
            n_lab += 2
    open_lab = {}
    for v, k in d.kind.items():
        if k == B:
            open_lab[v] = legs[v][0]
            continue
        arr = _spider_tensor(k, d.phase[v], len(legs[v]))
        labs = list(legs[v])
        # plain self-loops show up as a repeated label
        while len(labs) != len(set(labs)):
            x = next(l for l in labs if labs.count(l) == 2)
            i = labs.index(x)
            j = labs.index(x, i + 1)
            arr = np.trace(arr, axis1=i, axis2=j)
            labs = [l for k2, l in enumerate(labs) if k2 not in (i, j)]
        tensors[("s", v)] = (arr, labs)
    # a boundary-to-boundary plain wire has no tensor; add identities for them
    for v, lab in open_lab.items():
        if sum(lab in t[1] for t in tensors.values()) == 0:
            partner = [w for w, l2 in open_lab.items() if l2 == lab and w != v]
            if partner and v < partner[0]:
                a, b = n_lab, n_lab + 1
                n_lab += 2
                open_lab[v], open_lab[partner[0]] = a, b
                tensors[("w", v)] = (np.eye(2, dtype=complex), [a, b])
    keys = list(tensors)
    while True:
        owner = {}
        for k in keys:
            for l in tensors[k][1]:
                owner.setdefault(l, []).append(k)
        best = None
        for l, ks in owner.items():
            if len(ks) != 2 or ks[0] == ks[1]:
                continue
            i, j = ks
            li, lj = tensors[i][1], tensors[j][1]
            shared = set(li) & set(lj)
            size = len(li) + len(lj) - 2 * len(shared)
            if best is None or size < best[0]:
                best = (size, i, j, shared)
        if best is None:
            break
        _, i, j, shared = best
        (a, la), (b, lb) = tensors.pop(i), tensors.pop(j)
        shared = sorted(shared)
        c = np.tensordot(a, b, axes=([la.index(s) for s in shared], [lb.index(s) for s in shared]))
        lc = [x for x in la if x not in shared] + [x for x in lb if x not in shared]
        keys = [k for k in keys if k not in (i, j)] + [("c", i, j)]
        tensors[("c", i, j)] = (c, lc)
    arr, labs = np.array(1.0 + 0j), []
    for k in keys:
        t, lt = tensors[k]
        arr = np.multiply.outer(arr, t)
        labs = labs + lt
    order = [labs.index(open_lab[v]) for v in d.outputs] + [labs.index(open_lab[v]) for v in d.inputs]
    arr = np.transpose(arr, order) if order else arr
    return d.scalar * np.asarray(arr).reshape(2 ** len(d.outputs), 2 ** len(d.inputs))
