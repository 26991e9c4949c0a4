"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test records one line in ``CRITERIA``; the terminal summary prints
them as ``CRITERION k: PASS|FAIL``.
"""

import json
import math
import random
import time

import numpy as np
import pytest

from multiq.backend import compile_circuit
from multiq.bundler import SAParams, TileSpec, bundle, first_fit_bins, objective
from multiq.checker import oracle_equiv, reconstruct, zx_verdict
from multiq.cli import main
from multiq.corpus import default_corpus_dir
from multiq.estimator import fidelity
from multiq.frontend import CZ, U3, Circuit, rebase_to_native
from multiq.ir import Move, Rydberg, replay
from multiq.orchestrator import lower_u3_rows
from multiq.placer import MoveOp, batch_compatible, place, placement_energy
from multiq.planner import capacity, plan_layout, zone_geometry
from multiq.estimator import _rydberg_pairs

from conftest import CRITERIA, random_native
from oracles import best_partition, best_placement, equal_up_to_phase, u3


def record(k, ok, detail):
    CRITERIA[k] = (bool(ok), detail)
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _corpus_files(names=None):
    d = default_corpus_dir()
    if names is None:
        return sorted(str(p) for p in d.glob("*.qasm"))
    return [str(d / f"{n}.qasm") for n in names]


FOUR = ("bv_4", "ghz_4", "cat_5", "dj_5")


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """cmd_run on the four-circuit set and on the whole corpus, default settings."""
    out = {}
    for key, files in (("four", _corpus_files(FOUR)), ("all", _corpus_files())):
        d = tmp_path_factory.mktemp(key)
        t0 = time.perf_counter()
        rc = main(["run", *files, "--out", str(d)])
        out[key] = (rc, d, time.perf_counter() - t0)
    return out


def _report(d):
    return json.loads((d / "report.json").read_text())


# --------------------------------------------------------------------------

def test_c1_throughput_band(runs):
    rc4, d4, t4 = runs["four"]
    rc14, d14, t14 = runs["all"]
    r4, r14 = _report(d4), _report(d14)
    ratio4 = r4["throughput"]["ratio"]
    ratio14 = r14["throughput"]["ratio"]
    ok = (
        rc4 == 0 and rc14 == 0
        and len(r4["bins"]) == 1 and 3.0 <= ratio4 <= 4.0
        and len(r14["tiles"]) == 14 and 6.0 <= ratio14 <= 14.0
        and max(t4, t14) < 120
    )
    record(1, ok, f"4 circuits: {ratio4:.3f}x in {len(r4['bins'])} bin ({t4:.1f}s); "
                  f"14 circuits: {ratio14:.3f}x in {len(r14['bins'])} bins ({t14:.1f}s)")


def test_c2_fidelity_preservation(runs):
    worst, n = 0.0, 0
    for key in ("four", "all"):
        for row in _report(runs[key][1])["tiles"]:
            d = abs(row["multi"]["fidelity"] - row["solo"]["fidelity"])
            assert d == pytest.approx(abs(row["fidelity_delta"]), abs=1e-15)
            worst = max(worst, d)
            n += 1
    record(2, worst <= 0.05, f"max |f_multi - f_solo| = {worst:.4f} over {n} tiles")


def _bundle_instance(seed):
    rng = random.Random(seed)
    n = 6 + seed % 9
    widths = [rng.uniform(15, 120) for _ in range(n)]
    times = [rng.uniform(500, 8000) for _ in range(n)]
    return widths, times


def test_c3_bundler_dominance(hw):
    t0 = time.perf_counter()
    wins, small, small_ok = 0, 0, 0
    worst_gap = 1.0
    for seed in range(50):
        widths, times = _bundle_instance(seed)
        tiles = [TileSpec(f"t{i}", w, t) for i, (w, t) in enumerate(zip(widths, times))]
        params = SAParams(seed=seed)
        sa = objective(bundle(tiles, params, hw), hw, params.alpha)
        ff = objective(first_fit_bins(tiles, hw), hw, params.alpha)
        wins += sa >= ff - 1e-12
        if len(tiles) <= 6:
            small += 1
            opt = best_partition(widths, times, hw.width_um, params.alpha)
            small_ok += sa >= 0.95 * opt
            worst_gap = min(worst_gap, sa / opt)
    dt = time.perf_counter() - t0
    ok = wins == 50 and small_ok == small and small > 0 and dt < 300
    record(3, ok, f"SA >= first-fit {wins}/50; >= 0.95 opt {small_ok}/{small} "
                  f"(worst {worst_gap:.3f}); {dt:.1f}s")


def test_c4_placement_optimality(hw):
    t0 = time.perf_counter()
    good, worst = 0, 0.0
    for seed in range(20):
        rng = random.Random(seed)
        n = 1 + seed % 3
        slots = 3 + seed % 6
        small = hw.replace(width_um=3.0 * (slots - 1))
        widths = [float(rng.choice([1, 2, 3, 4, 6])) for _ in range(n)]
        table = {(i, j, d): rng.choice([0, 0, 1, 3]) for i in range(n) for j in range(n)
                 for d in range(-30, 31)}

        def cost(i, j, xi, xj, table=table):
            return table[(i, j, int(round((xj - xi) / 3.0)))]

        ts = [TileSpec(f"t{i}", w, 1.0) for i, w in enumerate(widths)]
        pl = place(ts, small, alpha=1.0, beta=2.0, cost_fn=cost, params=SAParams(seed=seed))
        xs = [a[0] if z else None for a, z in zip(pl.anchors, pl.placed)]
        e = placement_energy(xs, [1.0] * n, 1.0, 2.0, cost)
        opt = best_placement(widths, [3.0 * k for k in range(slots)], small.width_um, 3.0, 3.0,
                             cost, 1.0, 2.0)
        good += e <= opt + 0.1 * abs(opt) + 1e-9
        worst = max(worst, (e - opt) / abs(opt) if opt else e - opt)
    dt = time.perf_counter() - t0
    record(4, good == 20 and dt < 120,
           f"within 10% of exhaustive optimum on {good}/20 (worst excess {worst:.3f}); {dt:.1f}s")


def _mutant(rng, c):
    """One single-gate edit: perturb an angle, drop, insert, or retarget a CZ."""
    g = list(c.gates)
    kind = rng.choice(["angle", "drop", "insert", "retarget"])
    u3s = [i for i, x in enumerate(g) if x.name == "u3"]
    czs = [i for i, x in enumerate(g) if x.name == "cz"]
    if (kind == "angle" and not u3s) or (kind == "drop" and not g) or (
            kind == "retarget" and (not czs or c.n_qubits < 3)):
        kind = "insert"
    if kind == "angle":
        i = rng.choice(u3s)
        p = list(g[i].params)
        p[rng.randrange(3)] += rng.choice([-1, 1]) * rng.uniform(0.05, 1.0)
        g[i] = U3(*p, g[i].qubits[0])
    elif kind == "drop":
        g.pop(rng.randrange(len(g)))
    elif kind == "retarget":
        i = rng.choice(czs)
        a, b = g[i].qubits
        g[i] = CZ(a, rng.choice([x for x in range(c.n_qubits) if x not in (a, b)]))
    else:
        ang = (rng.uniform(0.1, 3.0), rng.uniform(0, 6.2), rng.uniform(0, 6.2))
        g.insert(rng.randrange(len(g) + 1), U3(*ang, rng.randrange(c.n_qubits)))
    return Circuit(c.n_qubits, g, c.name + "-mut")


def test_c5_checker_soundness(hw):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    agree, killed, mutants, bad = 0, 0, 0, []
    for k in range(200):
        n, m = rng.randint(1, 8), rng.randint(0, 40)
        c = random_native(rng, n, m)
        tile = compile_circuit(c, 0.4, hw, label="c")
        rec = reconstruct(tile.program, list(range(n)), hw)
        mut = _mutant(rng, c)
        ok = True
        for name, other in (("self", c), ("compiled", rec), ("mutant", mut)):
            # oracle_limit=0 keeps the dense oracle out of the ZX verdict
            z = zx_verdict(c, other, oracle_limit=0)
            o = oracle_equiv(c, other)
            if z.equivalent != o.equivalent:
                ok = False
                bad.append((k, name))
            if name == "mutant" and not o.equivalent:
                mutants += 1
                killed += not z.equivalent
        agree += ok
    dt = time.perf_counter() - t0
    ok = agree == 200 and killed == mutants and dt < 300
    record(5, ok, f"agreement {agree}/200; mutants killed {killed}/{mutants}; {dt:.1f}s"
                  + (f"; disagreements {bad[:5]}" if bad else ""))


def test_c6_row_decomposition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    pos = {0: (0.0, 1.0), 1: (3.0, 1.0), 2: (6.0, 4.0)}
    err_t = err_s = 0.0
    for theta, phi, lam in rng.uniform(-2 * np.pi, 2 * np.pi, size=(1000, 3)):
        out = lower_u3_rows({0: (theta, phi, lam)}, pos)
        mats = {a: np.eye(2, dtype=complex) for a in pos}
        for batch, _ in out:
            for s, ang in zip(batch.sites, batch.angles):
                for a, p in pos.items():
                    if p == s:
                        mats[a] = u3(*ang) @ mats[a]
        want = u3(theta, phi, lam)
        k = np.argmax(np.abs(want))
        ph = mats[0].flat[k] / want.flat[k]
        err_t = max(err_t, np.max(np.abs(mats[0] - ph * want)))
        for a in (1, 2):
            err_s = max(err_s, np.max(np.abs(mats[a] - np.eye(2))))
    dt = time.perf_counter() - t0
    ok = err_t <= 1e-9 and err_s <= 1e-9 and dt < 30
    record(6, ok, f"target error {err_t:.2e}, spectator error {err_s:.2e}; {dt:.2f}s")


def test_c7_fidelity_points(hw):
    t0 = time.perf_counter()
    cz = fidelity(0, 1, 0, [], hw)
    tr = fidelity(0, 0, 2, [], hw)
    idle = fidelity(0, 0, 0, [15_000.0], hw.replace(t2_us=1.5e6))
    dt = time.perf_counter() - t0
    ok = cz == 0.995 and tr == 0.999 ** 2 and abs(idle - math.exp(-0.01)) <= 1e-12 and dt < 1
    record(7, ok, f"CZ {cz}, transfer pair {tr}, idle {idle:.15f}; {dt * 1e3:.2f}ms")


def test_c8_planner_monotone(corpus, hw):
    t0 = time.perf_counter()
    grid = [k / 5 for k in range(6)]
    bad = []
    for e in corpus:
        c = rebase_to_native(e.circuit)
        lays = [plan_layout(c, p, hw) for p in grid]
        ws = [lay.w_selected for lay in lays]
        n, R, S = c.n_qubits, hw.storage_rows, hw.storage_spacing_um
        w0 = (n // R) * S
        if capacity(w0, R, S) < n:
            w0 = (math.ceil(n / R) - 1) * S
        mono = all(b >= a - 1e-9 for a, b in zip(ws, ws[1:]))
        if not (mono and ws[0] == pytest.approx(w0) and ws[-1] == pytest.approx(lays[-1].w_best)):
            bad.append(e.name)
    dt = time.perf_counter() - t0
    record(8, not bad and dt < 10,
           f"{len(corpus) - len(bad)}/{len(corpus)} circuits monotone with exact endpoints; "
           f"{dt:.2f}s" + (f"; failing {bad}" if bad else ""))


def test_c9_physical_isolation(runs, hw):
    from multiq.ir import parse_na

    t0 = time.perf_counter()
    band = zone_geometry(hw)["entanglement_band"]
    ryd = mov = pulses = batches = 0
    for key in ("four", "all"):
        for path in sorted((runs[key][1] / "bins").glob("*.naqasm")):
            prog = parse_na(path.read_text())
            qmap = prog.qubit_map
            prev = dict(zip(prog.init.qubit_ids, prog.init.sites))
            for step in replay(prog):
                if isinstance(step.instr, Rydberg):
                    pulses += 1
                    ryd += sum(qmap[a] != qmap[b] for a, b in _rydberg_pairs(prev, hw, band))
                elif isinstance(step.instr, Move):
                    batches += 1
                    moves = [MoveOp("", s, d, q) for q, s, d in
                             zip(step.atoms, step.instr.src, step.instr.dst)]
                    mov += not batch_compatible(moves, hw, list(prev.values()))[0]
                prev = step.positions
    dt = time.perf_counter() - t0
    record(9, ryd == 0 and mov == 0 and pulses > 0 and dt < 60,
           f"{ryd} cross-tile blockade pairs over {pulses} pulses, "
           f"{mov} illegal batches of {batches}; {dt:.1f}s")


def test_c10_reproducible(tmp_path):
    t0 = time.perf_counter()
    files = _corpus_files(FOUR)
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["run", *files, "--out", str(o)]) for o in outs]
    names = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*")
                   if p.suffix in (".naqasm", ".json"))
    same = [(outs[0] / r).read_bytes() == (outs[1] / r).read_bytes() for r in names]
    have = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*")
                  if p.suffix in (".naqasm", ".json"))
    dt = time.perf_counter() - t0
    ok = codes == [0, 0] and names == have and all(same) and any(
        r.suffix == ".naqasm" for r in names) and dt < 60
    record(10, ok, f"{sum(same)}/{len(names)} output files byte-identical; {dt:.1f}s")
