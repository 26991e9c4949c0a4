import json
import shutil

import pytest

from multiq.cli import main
from multiq.corpus import default_corpus_dir
from multiq.ir import U3Batch, emit_na, parse_na

FAST = ["--sa-iters", "2000"]


def _corpus(*names):
    return [str(default_corpus_dir() / f"{n}.qasm") for n in names]


def test_compile_one(tmp_path):
    assert main(["compile", *_corpus("ghz_4"), "--out", str(tmp_path)]) == 0
    assert [p.name for p in (tmp_path / "tiles").iterdir()] == ["ghz_4.tile.json"]


def test_compile_partial_failure(tmp_path, capsys):
    bad = tmp_path / "bad.qasm"
    bad.write_text("qreg q[2]; if (c==1) x q[0];")
    files = [_corpus("ghz_4")[0], str(bad), _corpus("bv_4")[0]]
    rc = main(["compile", *files, "--out", str(tmp_path / "o")])
    assert rc != 0
    assert len(list((tmp_path / "o" / "tiles").iterdir())) == 2
    assert "bad.qasm" in capsys.readouterr().err


def test_compile_width_endpoints(tmp_path):
    widths = {}
    for pw in ("0", "1"):
        out = tmp_path / pw
        assert main(["compile", *_corpus("qaoa_6"), "--pw", pw, "--out", str(out)]) == 0
        lay = json.loads((out / "tiles" / "qaoa_6.tile.json").read_text())["layout"]
        widths[pw] = (lay["w_selected"], lay["w_min"], lay["w_best"])
    assert widths["0"][0] == widths["0"][1]
    assert widths["1"][0] == widths["1"][2]


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", *_corpus("ghz_4"), "--pw", "1.5"])
    assert exc.value.code == 2
    assert main(["run", str(tmp_path / "missing.qasm"), "--out", str(tmp_path)]) == 2


@pytest.fixture(scope="module")
def four_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run4")
    rc = main(["run", *_corpus("bv_4", "ghz_4", "cat_5", "dj_5"), "--out", str(out), *FAST])
    return rc, out


def test_run_four(four_run):
    rc, out = four_run
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["bins"]) == 1
    assert report["throughput"]["ratio"] >= 3
    assert {t["label"] for t in report["tiles"]} == {"bv_4", "ghz_4", "cat_5", "dj_5"}
    for t in report["tiles"]:
        assert 0 < t["multi"]["fidelity"] <= 1
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert all(v["equivalent"] for v in verdicts.values())
    assert (out / "bins" / "bin_0.naqasm").exists()
    assert (out / "bins" / "manifest.txt").read_text().startswith("bin 0:")


def test_check_self(four_run, capsys):
    _, out = four_run
    rc = main(["check", "--original", *_corpus("bv_4", "ghz_4", "cat_5", "dj_5"),
               "--merged", str(out / "bins" / "bin_0.naqasm"),
               "--attribution", str(out / "bins" / "bin_0.attribution.json")])
    assert rc == 0
    verdicts = json.loads(capsys.readouterr().out)
    assert all(v["equivalent"] for v in verdicts.values())


def test_check_mutation(four_run, tmp_path):
    _, out = four_run
    prog = parse_na((out / "bins" / "bin_0.naqasm").read_text())
    k = next(i for i, ins in enumerate(prog.instructions) if isinstance(ins, U3Batch))
    u = prog.instructions[k]
    angles = list(u.angles)
    angles[0] = (angles[0][0] + 1e-3, angles[0][1], angles[0][2])
    prog.instructions[k] = U3Batch(u.sites, angles)
    bad = tmp_path / "bad.naqasm"
    bad.write_text(emit_na(prog))
    rc = main(["check", "--original", *_corpus("bv_4", "ghz_4", "cat_5", "dj_5"),
               "--merged", str(bad), "--out", str(tmp_path / "v.json")])
    assert rc == 1
    verdicts = json.loads((tmp_path / "v.json").read_text())
    assert not all(v["equivalent"] for v in verdicts.values())


def test_check_missing_attribution(four_run, tmp_path):
    _, out = four_run
    other = tmp_path / "ghz_8.qasm"
    shutil.copy(_corpus("ghz_8")[0], other)
    rc = main(["check", "--original", str(other),
               "--merged", str(out / "bins" / "bin_0.naqasm")])
    assert rc == 2


def test_reproducible(tmp_path):
    files = _corpus("ghz_4", "wst_4", "qaoa_6")
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert main(["run", *files, "--out", str(out), *FAST]) == 0
        outs.append(out)
    a = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    b = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    assert a == b
    for rel in a:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel


def test_hw_env(tmp_path, monkeypatch):
    cfg = tmp_path / "hw.cfg"
    cfg.write_text("width_um = 20\n")
    monkeypatch.setenv("MULTIQ_HW", str(cfg))
    rc = main(["run", *_corpus("ghz_4", "bv_4"), "--out", str(tmp_path / "o"), *FAST])
    assert rc == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert len(report["bins"]) == 2
