"""Command line driver.

    multiq compile  a.qasm b.qasm --out DIR
    multiq run      a.qasm b.qasm ... --out DIR
    multiq check    --original a.qasm --merged bin_0.naqasm [--attribution FILE]

Exit codes: 0 ok, 1 verification failure, 2 usage or parse failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backend import dump_tile
from .bundler import manifest as bin_manifest
from .checker import ORACLE_LIMIT, check
from .errors import MultiQError
from .frontend import load_qasm, rebase_to_native
from .hwmodel import hardware_from_env, load_hardware
from .ir import emit_na, parse_na
from .pipeline import RunManifest, compile_all, dumps, run, unique_labels

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _unit(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return v


def build_parser():
    p = _Parser(prog="multiq", description="Neutral-atom multi-programming toolchain")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--hw", help="hardware config file (default: $MULTIQ_HW or built-in)")
        sp.add_argument("--pw", type=_unit, default=0.4, help="layout performance weight")
        sp.add_argument("--window", type=int, default=4, help="layer-splitting window")
        sp.add_argument("--out", default="multiq-out", help="output directory")

    c = sub.add_parser("compile", help="compile circuits into tiles")
    c.add_argument("inputs", nargs="+")
    common(c)

    r = sub.add_parser("run", help="compile, bundle, place, merge, estimate and check")
    r.add_argument("inputs", nargs="+")
    common(r)
    r.add_argument("--alpha", type=_unit, default=0.6, help="bundler spatial weight")
    r.add_argument("--place-alpha", type=float, default=1.0, help="placer conflict weight")
    r.add_argument("--beta", type=float, default=None, help="placer utilization weight")
    r.add_argument("--sa-iters", type=int, default=20000)
    r.add_argument("--sa-seed", type=int, default=42)
    r.add_argument("--oracle-limit", type=int, default=ORACLE_LIMIT)

    k = sub.add_parser("check", help="verify tiles of a merged program")
    k.add_argument("--original", nargs="+", required=True, help="source .qasm files")
    k.add_argument("--merged", required=True, help="merged .naqasm file")
    k.add_argument("--attribution", help="JSON qubit-to-tile map (default: pragmas)")
    k.add_argument("--label", nargs="+", help="tile labels (default: file stems)")
    k.add_argument("--hw")
    k.add_argument("--oracle-limit", type=int, default=ORACLE_LIMIT)
    k.add_argument("--out", help="write verdicts JSON here instead of stdout")
    return p


def _hardware(path):
    return load_hardware(path) if path else hardware_from_env()


def _load_inputs(paths):
    ok, failed = [], []
    labels = unique_labels([Path(p).stem for p in paths])
    for label, path in zip(labels, paths):
        try:
            ok.append((label, load_qasm(path, label)))
        except (MultiQError, OSError) as exc:
            failed.append(path)
            print(f"{path}: {exc}", file=sys.stderr)
    return ok, failed


def cmd_compile(args):
    hw = _hardware(args.hw)
    circuits, failed = _load_inputs(args.inputs)
    manifest = RunManifest([str(p) for p in args.inputs], args.hw, args.pw, window=args.window,
                           out=args.out)
    out = Path(args.out) / "tiles"
    out.mkdir(parents=True, exist_ok=True)
    for label, circ in circuits:
        try:
            (tile,) = compile_all([(label, circ)], manifest, hw)
        except MultiQError as exc:
            failed.append(label)
            print(f"{label}: {exc}", file=sys.stderr)
            continue
        (out / f"{label}.tile.json").write_text(dump_tile(tile), encoding="utf-8")
    return EXIT_USAGE if failed else EXIT_OK


def cmd_run(args):
    hw = _hardware(args.hw)
    circuits, failed = _load_inputs(args.inputs)
    if failed:
        return EXIT_USAGE
    manifest = RunManifest(
        [str(p) for p in args.inputs], args.hw, args.pw, args.alpha, args.place_alpha,
        args.beta, args.sa_iters, args.sa_seed, args.window, args.out, args.oracle_limit,
    )
    try:
        result = run(circuits, manifest, hw)
    except MultiQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_run(result, Path(args.out))
    tp = result.throughput
    print(f"{tp.n_circuits} circuits in {len(result.bins)} bin(s); "
          f"throughput ratio {tp.ratio:.3f}")
    for label, v in result.verdicts.items():
        print(f"  {label}: {'equivalent' if v.equivalent else 'NOT equivalent'} ({v.method})")
    return EXIT_OK if result.ok else EXIT_VERIFY


def write_run(result, out: Path):
    (out / "tiles").mkdir(parents=True, exist_ok=True)
    (out / "bins").mkdir(parents=True, exist_ok=True)
    for t in result.tiles:
        (out / "tiles" / f"{t.label}.tile.json").write_text(dump_tile(t), encoding="utf-8")
    from .bundler import Bin

    listing = bin_manifest([Bin(b.tiles) for b in result.bins])
    (out / "bins" / "manifest.txt").write_text(listing, encoding="utf-8")
    for b in result.bins:
        stem = out / "bins" / f"bin_{b.index}"
        stem.with_suffix(".naqasm").write_text(emit_na(b.schedule.program), encoding="utf-8")
        qmap = {str(q): lab for q, lab in sorted(b.schedule.qubit_map.items())}
        stem.with_suffix(".attribution.json").write_text(dumps(qmap), encoding="utf-8")
        stem.with_suffix(".placement.txt").write_text(b.placement.manifest(), encoding="utf-8")
    (out / "report.json").write_text(dumps(result.report), encoding="utf-8")
    verdicts = {label: v.to_dict() for label, v in result.verdicts.items()}
    for b in result.bins:
        for idx, pair in b.audit.rydberg_violations:
            verdicts.setdefault("_audit", []).append({"bin": b.index, "rydberg": idx, "pair": pair})
        for idx, why in b.audit.move_violations:
            verdicts.setdefault("_audit", []).append({"bin": b.index, "move": idx, "reason": why})
    (out / "verdicts.json").write_text(dumps(verdicts), encoding="utf-8")


def cmd_check(args):
    hw = _hardware(args.hw)
    try:
        program = parse_na(Path(args.merged).read_text(encoding="utf-8"))
        if args.attribution:
            raw = json.loads(Path(args.attribution).read_text(encoding="utf-8"))
            qmap = {int(q): lab for q, lab in raw.items()}
        else:
            qmap = dict(program.qubit_map)
    except (MultiQError, OSError, ValueError) as exc:
        print(f"{args.merged}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    labels = args.label or unique_labels([Path(p).stem for p in args.original])
    if len(labels) != len(args.original):
        print("error: --label count must match --original", file=sys.stderr)
        return EXIT_USAGE
    verdicts = {}
    for label, path in zip(labels, args.original):
        qubits = sorted(q for q, lab in qmap.items() if lab == label)
        if not qubits:
            print(f"error: no qubits attributed to '{label}'", file=sys.stderr)
            return EXIT_USAGE
        try:
            original = rebase_to_native(load_qasm(path, label))
            v = check(original, program, qubits, hw, args.oracle_limit)
        except MultiQError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        verdicts[label] = v.to_dict()
    text = dumps(verdicts)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(v["equivalent"] for v in verdicts.values()) else EXIT_VERIFY


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"compile": cmd_compile, "run": cmd_run, "check": cmd_check}[args.command]
    try:
        return handler(args)
    except (ValueError, MultiQError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
