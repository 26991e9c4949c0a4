"""AOD batch compatibility, pairwise tile conflict cost, and annealed tile
placement on the device anchor grid."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bundler import SAParams, footprint
from .ir import q as quantize

TOL = 1e-6


@dataclass(frozen=True)
class MoveOp:
    owner: str
    src: tuple
    dst: tuple
    qubit: int = -1

    def __post_init__(self):
        for p in (self.src, self.dst):
            if len(p) != 2 or not all(math.isfinite(v) for v in p):
                raise ValueError(f"bad coordinate {p}")
        object.__setattr__(self, "src", (quantize(self.src[0]), quantize(self.src[1])))
        object.__setattr__(self, "dst", (quantize(self.dst[0]), quantize(self.dst[1])))

    def shifted(self, dx, dy=0.0):
        return MoveOp(
            self.owner,
            (self.src[0] + dx, self.src[1] + dy),
            (self.dst[0] + dx, self.dst[1] + dy),
            self.qubit,
        )


def _axis_ok(a0, a1, b0, b1, sep):
    """Two AOD lines: equal stays equal, order kept, distinct stay apart."""
    if abs(a0 - b0) <= TOL:
        return abs(a1 - b1) <= TOL
    if a0 > b0:
        a0, a1, b0, b1 = b0, b1, a0, a1
    return b1 - a1 >= sep - TOL


def batch_compatible(moves, hw, occupied=None):
    """(True, None) if the moves can run as one AOD batch, else (False, reason).

    Checks, for every pair of moves and on both axes, that lines starting
    together end together and that distinct lines neither merge, come closer
    than the minimum AOD separation, nor cross. If ``occupied`` (iterable of
    current atom sites) is given, the start grid spanned by the batch's rows
    and columns may only contain batch atoms.
    """
    moves = list(moves)
    sep = hw.aod_min_separation_um
    for i in range(len(moves)):
        a = moves[i]
        for b in moves[i + 1:]:
            if not _axis_ok(a.src[1], a.dst[1], b.src[1], b.dst[1], sep):
                kind = "row-merge" if abs(a.src[1] - b.src[1]) > TOL and abs(
                    a.dst[1] - b.dst[1]) < sep else "row-order"
                return False, f"{kind}: {a.src}->{a.dst} vs {b.src}->{b.dst}"
            if not _axis_ok(a.src[0], a.dst[0], b.src[0], b.dst[0], sep):
                kind = "column-merge" if abs(a.src[0] - b.src[0]) > TOL and abs(
                    a.dst[0] - b.dst[0]) < sep else "column-order"
                return False, f"{kind}: {a.src}->{a.dst} vs {b.src}->{b.dst}"
    if occupied is not None and len(moves) > 1:
        members = {m.src for m in moves}
        xs = {m.src[0] for m in moves}
        ys = {m.src[1] for m in moves}
        for s in occupied:
            s = (quantize(s[0]), quantize(s[1]))
            if s in members:
                continue
            if any(abs(s[0] - x) <= TOL for x in xs) and any(abs(s[1] - y) <= TOL for y in ys):
                return False, f"pickup: atom at {s} lies on the active AOD grid"
    return True, None


# --------------------------------------------------------------------------
# conflict cost

def _phase_moves(tile, stage, phase, dx):
    return [m.shifted(dx) for m in tile.stage_moves(stage, phase)]


def conflict_cost(tile_a, tile_b, anchor_a, anchor_b, hw=None) -> int:
    """Number of co-timed move pairs (one per tile) that cannot share a batch."""
    from .hwmodel import default_hardware

    hw = hw or default_hardware()
    ax, bx = anchor_a[0], anchor_b[0]
    total = 0
    for k in range(min(tile_a.n_stages, tile_b.n_stages)):
        for phase in ("in", "out"):
            ma = _phase_moves(tile_a, k, phase, ax)
            mb = _phase_moves(tile_b, k, phase, bx)
            if not ma or not mb:
                continue
            occ = [(x + ax, y) for x, y in tile_a.phase_positions(k, phase)]
            occ += [(x + bx, y) for x, y in tile_b.phase_positions(k, phase)]
            for u in ma:
                for v in mb:
                    if not batch_compatible([u, v], hw, occ)[0]:
                        total += 1
    return total


# --------------------------------------------------------------------------
# placement

@dataclass
class Placement:
    labels: list
    anchors: list  # (x, y) per tile, None when unplaced
    placed: list  # z_i
    energy: float
    conflicts: float = 0.0
    widths: list = field(default_factory=list)

    @property
    def unplaced(self):
        return [i for i, z in enumerate(self.placed) if not z]

    def manifest(self) -> str:
        lines = []
        for lab, a, z in zip(self.labels, self.anchors, self.placed):
            where = f"{a[0]:.3f} {a[1]:.3f}" if z else "- -"
            lines.append(f"{lab} {where} {int(z)}")
        return "\n".join(lines) + "\n"


def _layout_ok(xs, widths, hw, gap, grid):
    """Placed tiles inside the device and pairwise separated by ``gap``."""
    placed = sorted((x, i) for i, x in enumerate(xs) if x is not None)
    prev_end = None
    for x, i in placed:
        if x < -TOL or x + widths[i] > hw.width_um + TOL:
            return False
        if prev_end is not None and x < prev_end + gap - TOL:
            return False
        prev_end = x + footprint(widths[i], grid)
    return True


def _swap_tiles(xi, xj, wi, wj, grid):
    """New (x_i, x_j) after tiles i and j trade places in the row.

    Tiles of unequal width keep the pair's span: the tile moving left takes
    the left anchor, the one moving right is right-aligned (on the grid) to
    the old right edge. Otherwise anchors are exchanged as-is.
    """
    if xi is None or xj is None or wi == wj:
        return xj, xi
    if xi < xj:
        return math.floor((xj + wj - wi) / grid + 1e-9) * grid, xi
    return xj, math.floor((xi + wi - wj) / grid + 1e-9) * grid


def place(
    bin_tiles,
    hw=None,
    alpha=1.0,
    beta=None,
    priorities=None,
    params: SAParams = SAParams(),
    cost_fn=None,
    grid_um=None,
    gap_um=None,
):
    """Annealed anchor assignment minimizing alpha*sum(C) - beta*sum(p*z).

    ``cost_fn(i, j, x_i, x_j)`` overrides the pairwise conflict count (the
    default evaluates :func:`conflict_cost` on the compiled tiles). Anchors
    are multiples of ``grid_um`` (default: storage pitch); neighbouring tiles
    keep ``gap_um`` (default: storage pitch) of clearance.
    """
    from .hwmodel import default_hardware

    hw = hw or default_hardware()
    tiles = list(getattr(bin_tiles, "tiles", bin_tiles))
    n = len(tiles)
    grid = grid_um or hw.storage_spacing_um
    gap = hw.storage_spacing_um if gap_um is None else gap_um
    widths = [t.width_um for t in tiles]
    prio = list(priorities) if priorities is not None else [1.0] * n
    labels = [t.label for t in tiles]
    if n == 0:
        return Placement([], [], [], 0.0)

    n_slots = int(math.floor(hw.width_um / grid + 1e-9)) + 1
    slots = [k * grid for k in range(n_slots)]
    feasible_slots = [
        [x for x in slots if x + widths[i] <= hw.width_um + TOL] for i in range(n)
    ]

    cache = {}
    if cost_fn is None:
        def cost_fn(i, j, xi, xj):
            key = (i, j, round(xj - xi, 6))
            if key not in cache:
                cache[key] = conflict_cost(tiles[i], tiles[j], (xi, 0.0), (xj, 0.0), hw)
            return cache[key]

    def conflicts(xs):
        total = 0.0
        for i, j in itertools.combinations(range(n), 2):
            if xs[i] is not None and xs[j] is not None:
                total += cost_fn(i, j, xs[i], xs[j])
        return total

    # greedy start: by priority density, left to right
    order = sorted(range(n), key=lambda i: (-(prio[i] / widths[i]) if widths[i] > 0 else -math.inf, i))
    xs = [None] * n
    cursor = 0.0
    for i in order:
        x = math.ceil(cursor / grid - 1e-9) * grid
        if x + widths[i] <= hw.width_um + TOL:
            xs[i] = x
            cursor = x + footprint(widths[i], grid) + gap

    if beta is None:
        per_tile = [0.0] * n
        for i, j in itertools.combinations(range(n), 2):
            if xs[i] is not None and xs[j] is not None:
                c = cost_fn(i, j, xs[i], xs[j])
                per_tile[i] += c
                per_tile[j] += c
        beta = 2.0 * max(1.0, max(per_tile))

    def energy(xs):
        c = conflicts(xs)
        return alpha * c - beta * sum(p for p, x in zip(prio, xs) if x is not None), c

    cur, cur_c = energy(xs)
    best, best_e, best_c = list(xs), cur, cur_c
    rng = np.random.default_rng(params.seed)
    temp = params.t0
    stage = params.stage_length
    for it in range(params.iterations):
        new = list(xs)
        if n > 1 and rng.random() < 0.5:
            i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
            new[i], new[j] = _swap_tiles(xs[i], xs[j], widths[i], widths[j], grid)
        else:
            i = int(rng.integers(n))
            opts = feasible_slots[i]
            k = int(rng.integers(len(opts) + 1))
            new[i] = opts[k] if k < len(opts) else None
        if new != xs and _layout_ok(new, widths, hw, gap, grid):
            e, c = energy(new)
            delta = e - cur
            if delta <= 0 or rng.random() < math.exp(-delta / temp):
                xs, cur, cur_c = new, e, c
                if cur < best_e - 1e-12:
                    best, best_e, best_c = list(xs), cur, cur_c
        if (it + 1) % stage == 0:
            temp *= params.gamma

    anchors = [(x, 0.0) if x is not None else None for x in best]
    return Placement(labels, anchors, [x is not None for x in best], best_e, best_c, widths)


def placement_energy(xs, prio, alpha, beta, cost_fn):
    """Energy of an explicit anchor vector (None = unplaced); used by oracles."""
    c = 0.0
    for i, j in itertools.combinations(range(len(xs)), 2):
        if xs[i] is not None and xs[j] is not None:
            c += cost_fn(i, j, xs[i], xs[j])
    return alpha * c - beta * sum(p for p, x in zip(prio, xs) if x is not None)
