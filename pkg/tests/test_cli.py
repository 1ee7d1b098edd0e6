import json

import pytest

from pepscan.cli import main

DEMO = "he\nshe\nhis\nhers\n".upper()


@pytest.fixture
def demo(tmp_path):
    (tmp_path / "demo.txt").write_text(DEMO)
    (tmp_path / "demo.fa").write_text(">R1 demo\nUSHERS\n>R2 other\nAHISHE\n")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("engine", ["sparse", "dense", "simulate"])
def test_match_engines_agree(demo, capsys, engine):
    code, out, err = run(capsys, "match", "--patterns", demo / "demo.txt",
                         "--fasta", demo / "demo.fa", "--engine", engine)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "pattern_id,pattern,record_id,offset_in_record"
    assert lines[1:4] == ["0,HE,R1,2", "1,SHE,R1,1", "3,HERS,R1,2"]
    assert f"{engine}: 6 events" in err


def test_match_json_output_file(demo, capsys):
    out_file = demo / "hits.json"
    code, out, _ = run(capsys, "match", "--patterns", demo / "demo.txt", "--fasta",
                       demo / "demo.fa", "--format", "json", "--out", out_file)
    assert code == 0 and "6 events" in out
    rows = json.loads(out_file.read_text())
    assert rows[0] == {"pattern_id": 0, "pattern": "HE", "record_id": "R1", "offset_in_record": 2}


def test_missing_patterns_is_usage_error(demo, capsys):
    code, _, err = run(capsys, "match", "--fasta", demo / "demo.fa")
    assert code == 1
    assert "usage:" in err


def test_unknown_option_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["match", "--bogus"])
    assert exc.value.code == 1
    assert main([]) == 1


def test_bad_data_exit_code(demo, capsys):
    (demo / "bad.fa").write_text(">X\nMK1\n")
    code, _, err = run(capsys, "stats", "--fasta", demo / "bad.fa")
    assert code == 2 and "X" in err
    code, _, _ = run(capsys, "match", "--patterns", demo / "missing.txt", "--fasta", demo / "demo.fa")
    assert code == 2


def test_codegen_table_round_trip(demo, capsys):
    code, out, _ = run(capsys, "codegen", "--patterns", demo / "demo.txt", "--out", demo / "fsm.vhd",
                       "--table", demo / "fsm.json", "--report", demo / "report.txt")
    assert code == 0 and "overall: PASS" in out
    assert "entity ac_matcher is" in (demo / "fsm.vhd").read_text()
    assert json.loads((demo / "report.json").read_text())["ok"] is True
    code, out, _ = run(capsys, "match", "--table", demo / "fsm.json", "--fasta", demo / "demo.fa")
    assert code == 0
    assert out.splitlines()[1:4] == ["0,HE,R1,2", "1,SHE,R1,1", "3,HERS,R1,2"]


def test_build_writes_table(demo, capsys):
    code, out, _ = run(capsys, "build", "--patterns", demo / "demo.txt")
    assert code == 0
    assert json.loads(out)["state_count"] == 10


def test_simulate_text_and_trace(demo, capsys):
    code, out, _ = run(capsys, "simulate", "--patterns", demo / "demo.txt", "--text", "USHERS",
                       "--trace", demo / "t.csv", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["events"] == [[0, 3], [1, 3], [3, 5]]
    assert doc["cycles"] == 6
    assert len((demo / "t.csv").read_text().splitlines()) == 7


def test_digest_options(demo, capsys):
    (demo / "p.fa").write_text(">p\nMKRK\n")
    code, out, _ = run(capsys, "digest", "--fasta", demo / "p.fa", "--missed", "1")
    assert out.split() == ["MK", "R", "K", "MKR", "RK"]
    code, out, _ = run(capsys, "digest", "--fasta", demo / "p.fa", "--missed", "1",
                       "--min-len", "2", "--limit", "1", "--format", "json")
    assert json.loads(out) == ["MK"]


def test_synth_corpus_then_stats(tmp_path, capsys):
    fa = tmp_path / "c.fa"
    assert run(capsys, "synth-corpus", "--records", 100, "--total-length", 53093,
               "--out", fa)[0] == 0
    code, out, _ = run(capsys, "stats", "--fasta", fa, "--format", "json")
    stats = json.loads(out)
    assert stats["residue_count"] == 53093 and stats["record_count"] == 100
    code, out, _ = run(capsys, "stats", "--fasta", fa)
    assert "53093" in out


def test_bench_small_matrix(tmp_path, capsys):
    out = tmp_path / "b"
    (tmp_path / "cfg.txt").write_text("protein_set_sizes=2,4\npeptide_set_sizes=5,10\nrepetitions=0\n")
    code, stdout, _ = run(capsys, "bench", "--config", tmp_path / "cfg.txt", "--out", out,
                          "--paper-tables")
    assert code == 0
    for name in ("report.csv", "tables.md", "fig4.dat", "fig4.png"):
        assert (out / name).exists()
    assert len((out / "report.csv").read_text().splitlines()) == 5


def test_bench_bad_config(tmp_path, capsys):
    (tmp_path / "cfg.txt").write_text("protein_set_sizes=5,2\n")
    code, _, _ = run(capsys, "bench", "--config", tmp_path / "cfg.txt", "--out", tmp_path / "b")
    assert code == 2
