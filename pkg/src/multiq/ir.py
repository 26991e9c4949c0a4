"""Neutral-atom instruction dialect: types, replay, text parse/emit, and the
mapping from ZAIR instructions.

Canonical text looks like::

    MULTIQ-NA 1.0;
    pragma tile "bell" [0,1];
    @init [(0.000,0.000),(3.000,0.000)] [0,1];
    @move [(0.000,0.000),(3.000,0.000)] [(4.000,26.000),(6.000,26.000)];
    @rydberg;
    @u3 [(0.000,0.000)] [(1.5707963267948966,0.0,3.141592653589793)];
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ArityError, ParseError, ReplayError

HEADER = "MULTIQ-NA 1.0"
SITE_TOL = 1e-6


def q(v):
    """Quantise a coordinate to the 1e-3 um grid used by the text format."""
    r = round(float(v), 3)
    return 0.0 if r == 0 else r


def _site(p):
    return (q(p[0]), q(p[1]))


def _sites(ps):
    return tuple(_site(p) for p in ps)


@dataclass(frozen=True)
class Init:
    sites: tuple
    qubit_ids: tuple

    def __post_init__(self):
        object.__setattr__(self, "sites", _sites(self.sites))
        object.__setattr__(self, "qubit_ids", tuple(int(i) for i in self.qubit_ids))
        if len(self.sites) != len(self.qubit_ids):
            raise ArityError("init: site and id lists differ in length")
        if len(set(self.sites)) != len(self.sites):
            raise ArityError("init: duplicate site")
        if len(set(self.qubit_ids)) != len(self.qubit_ids):
            raise ArityError("init: duplicate qubit id")


@dataclass(frozen=True)
class Move:
    src: tuple
    dst: tuple

    def __post_init__(self):
        object.__setattr__(self, "src", _sites(self.src))
        object.__setattr__(self, "dst", _sites(self.dst))
        if len(self.src) != len(self.dst) or not self.src:
            raise ArityError("move: from/to lists must be equal and non-empty")
        if len(set(self.src)) != len(self.src) or len(set(self.dst)) != len(self.dst):
            raise ArityError("move: duplicate site")


@dataclass(frozen=True)
class U3Batch:
    sites: tuple
    angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "sites", _sites(self.sites))
        object.__setattr__(
            self, "angles", tuple(tuple(float(a) for a in t) for t in self.angles)
        )
        if len(self.sites) != len(self.angles) or not self.sites:
            raise ArityError("u3: site and angle lists must be equal and non-empty")
        if any(len(t) != 3 for t in self.angles):
            raise ArityError("u3: angle entries are (theta, phi, lambda)")
        if len(set(self.sites)) != len(self.sites):
            raise ArityError("u3: duplicate site")


@dataclass(frozen=True)
class Rydberg:
    pass


@dataclass
class NAProgram:
    instructions: list
    qubit_map: dict = field(default_factory=dict)
    header: str = HEADER

    def __post_init__(self):
        self.instructions = list(self.instructions)
        if not self.instructions or not isinstance(self.instructions[0], Init):
            raise ArityError("program must start with @init")
        if any(isinstance(i, Init) for i in self.instructions[1:]):
            raise ArityError("program has more than one @init")

    @property
    def init(self) -> Init:
        return self.instructions[0]

    @property
    def qubit_ids(self):
        return self.init.qubit_ids


# --------------------------------------------------------------------------
# replay

@dataclass
class Step:
    index: int
    instr: object
    atoms: tuple  # ids addressed (src order for moves, site order for u3)
    positions: dict  # positions after the instruction


class Replayer:
    """Incremental position tracker; shared by the parser and by replay()."""

    def __init__(self, init: Init):
        self.pos = dict(zip(init.qubit_ids, init.sites))
        self.at = {s: i for i, s in self.pos.items()}

    def lookup(self, site, index):
        hit = self.at.get(site)
        if hit is not None:
            return hit
        # tolerance fallback for hand-built sites off the 1e-3 grid
        for s, i in self.at.items():
            if abs(s[0] - site[0]) <= SITE_TOL and abs(s[1] - site[1]) <= SITE_TOL:
                return i
        raise ReplayError(index, site)

    def apply(self, instr, index):
        if isinstance(instr, Move):
            ids = tuple(self.lookup(s, index) for s in instr.src)
            moving = set(ids)
            for i in ids:
                del self.at[self.pos[i]]
            for i, d in zip(ids, instr.dst):
                if d in self.at and self.at[d] not in moving:
                    raise ReplayError(index, d, "destination already occupied")
                self.pos[i] = d
                self.at[d] = i
            return ids
        if isinstance(instr, U3Batch):
            return tuple(self.lookup(s, index) for s in instr.sites)
        if isinstance(instr, Init):
            raise ReplayError(index, None, "second @init")
        return ()


def replay(program: NAProgram):
    """List of Steps, one per instruction after Init (index 0 is Init)."""
    r = Replayer(program.init)
    steps = [Step(0, program.init, program.init.qubit_ids, dict(r.pos))]
    for k, instr in enumerate(program.instructions[1:], start=1):
        ids = r.apply(instr, k)
        steps.append(Step(k, instr, ids, dict(r.pos)))
    return steps


# --------------------------------------------------------------------------
# text

def _fmt_site(s):
    return f"({s[0]:.3f},{s[1]:.3f})"


def _fmt_sites(ss):
    return "[" + ",".join(_fmt_site(s) for s in ss) + "]"


def emit_instruction(instr) -> str:
    if isinstance(instr, Init):
        ids = ",".join(str(i) for i in instr.qubit_ids)
        return f"@init {_fmt_sites(instr.sites)} [{ids}];"
    if isinstance(instr, Move):
        return f"@move {_fmt_sites(instr.src)} {_fmt_sites(instr.dst)};"
    if isinstance(instr, U3Batch):
        angles = ",".join("(" + ",".join(repr(a) for a in t) + ")" for t in instr.angles)
        return f"@u3 {_fmt_sites(instr.sites)} [{angles}];"
    if isinstance(instr, Rydberg):
        return "@rydberg;"
    raise TypeError(f"not an NA instruction: {instr!r}")


def emit_na(program: NAProgram) -> str:
    lines = [f"{HEADER};"]
    groups = {}
    for qid in sorted(program.qubit_map):
        groups.setdefault(program.qubit_map[qid], []).append(qid)
    for label, ids in groups.items():
        safe = label.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'pragma tile "{safe}" [{",".join(map(str, ids))}];')
    lines.extend(emit_instruction(i) for i in program.instructions)
    return "\n".join(lines) + "\n"


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TUPLE = re.compile(r"\(([^()]*)\)")
_PRAGMA = re.compile(r'^pragma\s+tile\s+"((?:[^"\\]|\\.)*)"\s*(\[.*\])$', re.S)
_ROWCOL = re.compile(rf"^(row|column|col)\s+({_NUM})\s+({_NUM})$")


def _numbers(text, lineno, arity):
    from .frontend import _eval_expr

    parts = [p.strip() for p in text.split(",")]
    if len(parts) != arity or not all(parts):
        raise ParseError(lineno, f"expected {arity} numbers in '({text})'")
    out = []
    for p in parts:
        try:
            out.append(float(p))
        except ValueError:
            out.append(_eval_expr(p, lineno))
    return tuple(out)


def _bracket_lists(text, lineno):
    """Split the argument text into its top-level [...] groups."""
    groups, depth, start = [], 0, None
    rest = []
    for i, ch in enumerate(text):
        if ch == "[":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ParseError(lineno, "unbalanced ']'")
            if depth == 0:
                groups.append(text[start + 1:i])
        elif depth == 0:
            rest.append(ch)
    if depth:
        raise ParseError(lineno, "unbalanced '['")
    return groups, "".join(rest).strip()


def _tuple_list(text, lineno, arity):
    body = text.strip()
    if not body:
        return []
    found = _TUPLE.findall(body)
    leftover = _TUPLE.sub("", body).replace(",", "").strip()
    if leftover:
        raise ParseError(lineno, f"unexpected text '{leftover}' in list")
    return [_numbers(t, lineno, arity) for t in found]


def _int_list(text, lineno):
    body = text.strip()
    if not body:
        return []
    try:
        return [int(p) for p in body.split(",")]
    except ValueError:
        raise ParseError(lineno, f"bad id list '[{text}]'") from None


def _statements(text):
    buf, start = [], None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("//", 1)[0]
        for ch in line:
            if start is None and not ch.isspace():
                start = lineno
            if ch == ";":
                yield start, "".join(buf).strip()
                buf, start = [], None
            else:
                buf.append(ch)
        buf.append(" ")
    if "".join(buf).strip():
        raise ParseError(start, "missing ';'")


def parse_na(text: str) -> NAProgram:
    instructions, qubit_map = [], {}
    replayer = None
    for lineno, stmt in _statements(text):
        if not stmt:
            continue
        if stmt.startswith("MULTIQ-NA"):
            if stmt.split() != ["MULTIQ-NA", "1.0"]:
                raise ParseError(lineno, f"unsupported dialect header '{stmt}'")
            continue
        if stmt.startswith("pragma"):
            m = _PRAGMA.match(stmt)
            if not m:
                raise ParseError(lineno, "malformed pragma")
            label = re.sub(r"\\(.)", r"\1", m.group(1))
            for qid in _int_list(m.group(2)[1:-1], lineno):
                qubit_map[qid] = label
            continue
        if not stmt.startswith("@"):
            raise ParseError(lineno, f"expected an annotation, got '{stmt[:20]}'")
        word, _, args = stmt[1:].partition(" ")
        try:
            instr = _parse_annotation(word, args.strip(), lineno, replayer)
        except ArityError as exc:
            raise ParseError(lineno, str(exc)) from None
        if isinstance(instr, Init):
            if replayer is not None:
                raise ParseError(lineno, "second @init")
            replayer = Replayer(instr)
        else:
            if replayer is None:
                raise ParseError(lineno, "@init must come first")
            replayer.apply(instr, len(instructions))
        instructions.append(instr)
    if replayer is None:
        raise ParseError(1, "program has no @init")
    return NAProgram(instructions, qubit_map)


def _parse_annotation(word, args, lineno, replayer):
    if word == "rydberg":
        return Rydberg()
    if word == "move":
        m = _ROWCOL.match(args)
        if m:
            return _rowcol_move(m, lineno, replayer)
    groups, rest = _bracket_lists(args, lineno)
    # anything after the annotation's lists is a QASM statement body; ignored
    if word == "init":
        if len(groups) != 2:
            raise ParseError(lineno, "@init takes a site list and an id list")
        return Init(_tuple_list(groups[0], lineno, 2), _int_list(groups[1], lineno))
    if word == "move":
        if len(groups) != 2:
            raise ParseError(lineno, "@move takes two site lists")
        return Move(_tuple_list(groups[0], lineno, 2), _tuple_list(groups[1], lineno, 2))
    if word == "u3":
        if len(groups) != 2:
            raise ParseError(lineno, "@u3 takes a site list and an angle list")
        return U3Batch(_tuple_list(groups[0], lineno, 2), _tuple_list(groups[1], lineno, 3))
    raise ParseError(lineno, f"unknown annotation '@{word}'")


def _rowcol_move(m, lineno, replayer):
    """``@move row <y> <dy>`` / ``@move column <x> <dx>``: shift a whole line."""
    if replayer is None:
        raise ParseError(lineno, "@init must come first")
    axis = 1 if m.group(1) == "row" else 0
    coord, offset = float(m.group(2)), float(m.group(3))
    src = sorted(s for s in replayer.at if abs(s[axis] - coord) <= SITE_TOL)
    if not src:
        raise ReplayError(lineno, (m.group(1), coord), "no atoms on line")
    dst = [(s[0] + offset, s[1]) if axis == 0 else (s[0], s[1] + offset) for s in src]
    return Move(src, dst)


# --------------------------------------------------------------------------
# ZAIR

@dataclass(frozen=True)
class ZairInit:
    init_locs: tuple


@dataclass(frozen=True)
class ZairOneQGate:
    unitary: tuple  # one (x, y, z) triple, or one per location
    locs: tuple


@dataclass(frozen=True)
class ZairRydberg:
    zone_id: int = 0


@dataclass(frozen=True)
class ZairMove:
    row_id: tuple
    row_y_begin: tuple
    row_y_end: tuple
    col_id: tuple
    col_x_begin: tuple
    col_x_end: tuple
    zone_id: int = 0


def map_zair(instr):
    if isinstance(instr, ZairInit):
        locs = list(instr.init_locs)
        return Init(locs, range(len(locs)))
    if isinstance(instr, ZairOneQGate):
        u = list(instr.unitary)
        if u and not isinstance(u[0], (tuple, list)):
            u = [tuple(u)]
        if len(u) == 1:
            u = u * len(instr.locs)
        if len(u) != len(instr.locs):
            raise ArityError("1qGate: unitary and location lists differ in length")
        return U3Batch(instr.locs, [(t[0], t[1], t[2]) for t in u])
    if isinstance(instr, ZairRydberg):
        return Rydberg()
    if isinstance(instr, ZairMove):
        ry0, cx0, ry1, cx1 = instr.row_y_begin, instr.col_x_begin, instr.row_y_end, instr.col_x_end
        if not len(ry0) == len(ry1) == len(cx0) == len(cx1):
            raise ArityError("move: row/column coordinate lists differ in length")
        return Move(list(zip(cx0, ry0)), list(zip(cx1, ry1)))
    raise TypeError(f"not a ZAIR instruction: {instr!r}")
