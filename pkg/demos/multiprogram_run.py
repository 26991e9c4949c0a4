"""
Running several programs in one shot
====================================

The full pipeline on four small circuits: they share one initialization
cycle, so the 82 ms load time is paid once instead of four times. Each
circuit keeps nearly the fidelity it would have on its own, and the
checker confirms each one still computes the same unitary.
"""

from multiq import default_hardware
from multiq.corpus import load_corpus
from multiq.pipeline import RunManifest, run

hw = default_hardware()
wanted = ("bv_4", "ghz_4", "cat_5", "dj_5")
circuits = [(e.name, e.circuit) for e in load_corpus() if e.name in wanted]

result = run(circuits, RunManifest(), hw)
tp = result.throughput
print(f"{tp.n_circuits} circuits in {len(result.bins)} bin(s)")
print(f"  multi-programmed: {tp.total_time_ms:8.2f} ms")
print(f"  one at a time:    {tp.sequential_time_ms:8.2f} ms")
print(f"  throughput gain:  {tp.ratio:.2f}x")

print("\nper circuit fidelity (solo -> shared):")
for row in result.report["tiles"]:
    print(f"  {row['label']:6s} {row['solo']['fidelity']:.4f} -> "
          f"{row['multi']['fidelity']:.4f}  ({row['fidelity_delta']:+.4f})")

print("\nequivalence:")
for label, v in result.verdicts.items():
    print(f"  {label:6s} {'ok' if v.equivalent else 'FAILED'} via {v.method}")
print("physical audit:", "clean" if all(b.audit.ok for b in result.bins) else "violations")
