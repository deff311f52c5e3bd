import json

from rsd.cli import main
from rsd.graphs import parse_graph


def run_cli(*args):
    return main(list(args))


def read(path):
    return path.read_text(encoding="utf-8")


def test_gen_star(tmp_path):
    out = tmp_path / "star.g"
    assert run_cli("gen", "--kind", "star", "--delta", "4", "--out", str(out)) == 0
    g = parse_graph(read(out))
    assert g.n == 5 and g.max_degree() == 4


def test_gen_tree_deterministic(tmp_path):
    a, b = tmp_path / "a.g", tmp_path / "b.g"
    for out in (a, b):
        assert (
            run_cli(
                "gen", "--kind", "tree", "--n", "50", "--delta", "8", "--seed", "7",
                "--out", str(out),
            )
            == 0
        )
    assert read(a) == read(b)
    assert parse_graph(read(a)).n == 50


def test_gen_family(tmp_path):
    out = tmp_path / "fam.g"
    assert (
        run_cli("gen", "--kind", "family", "--delta", "4", "--index", "3", "--out", str(out))
        == 0
    )
    assert parse_graph(read(out)).n == 8


def test_gen_family_bad_index(tmp_path, capsys):
    code = run_cli("gen", "--kind", "family", "--delta", "4", "--index", "9")
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_gen_infeasible_tree(capsys):
    assert run_cli("gen", "--kind", "tree", "--n", "10", "--delta", "1") == 2


def test_oracle_diamond(tmp_path, capsys):
    g = tmp_path / "d.g"
    g.write_text("4 4\n0 1\n0 2\n1 3\n2 3\n")
    assert run_cli("oracle", str(g)) == 0
    out = capsys.readouterr().out
    assert "n 4" in out
    assert "US(1): 1" in out
    assert "0:4" in out  # the root's weight is the size


def test_oracle_path3(tmp_path, capsys):
    g = tmp_path / "p.g"
    g.write_text("3 2\n0 1\n1 2\n")
    assert run_cli("oracle", str(g)) == 0
    out = capsys.readouterr().out
    assert "h 1" in out and "n 3" in out


def test_label_star(tmp_path, capsys):
    g = tmp_path / "s.g"
    g.write_text("5 4\n0 1\n0 2\n0 3\n0 4\n")
    labels = tmp_path / "labels.txt"
    assert run_cli("label", str(g), "--out", str(labels)) == 0
    lines = read(labels).strip().split("\n")
    assert len(lines) == 5
    assert "bound" in capsys.readouterr().out


def test_label_rejects_single_node(tmp_path):
    g = tmp_path / "one.g"
    g.write_text("1 0\n")
    assert run_cli("label", str(g)) == 2


def test_run_diamond(tmp_path, capsys):
    g = tmp_path / "d.g"
    g.write_text("4 4\n0 1\n0 2\n1 3\n2 3\n")
    report_path = tmp_path / "report.json"
    assert run_cli("run", str(g), "--report", str(report_path)) == 0
    report = json.loads(read(report_path))
    assert report["n"] == 4
    assert report["outputs_ok"] is True
    assert report["rounds_used"] <= report["bound_Dn2logDelta"]
    assert set(report) == {
        "n", "delta", "h", "rounds_used", "max_label_bits", "outputs_ok",
        "bound_Dn2logDelta",
    }


def test_run_emits_trace(tmp_path):
    g = tmp_path / "k2.g"
    g.write_text("2 1\n0 1\n")
    trace = tmp_path / "trace.txt"
    assert run_cli("run", str(g), "--trace", str(trace)) == 0
    lines = read(trace).strip().split("\n")
    first = lines[0].split()
    assert first[0] == "1" and first[1] == "0"
    # every line is round node action observation
    assert all(len(line.split()) == 4 for line in lines)


def test_run_single_node_usage_error(tmp_path):
    g = tmp_path / "one.g"
    g.write_text("1 0\n")
    assert run_cli("run", str(g)) == 2


def test_run_malformed_graph(tmp_path, capsys):
    g = tmp_path / "bad.g"
    g.write_text("3 2\n0 1\n1 1\n")
    assert run_cli("run", str(g)) == 2
    assert "self-loop" in capsys.readouterr().err


def test_run_report_byte_stable(tmp_path, capsys):
    g = tmp_path / "s.g"
    g.write_text("4 3\n0 1\n0 2\n0 3\n")
    assert run_cli("run", str(g)) == 0
    first = capsys.readouterr().out
    assert run_cli("run", str(g)) == 0
    assert capsys.readouterr().out == first


def test_lowerbound_patterns(capsys):
    assert run_cli("lowerbound", "patterns", "--beta", "1") == 0
    assert capsys.readouterr().out.strip() == "104976"


def test_lowerbound_patterns_beta_guard(capsys):
    assert run_cli("lowerbound", "patterns", "--beta", "65") == 2


def test_lowerbound_crossover(capsys):
    assert run_cli("lowerbound", "crossover", "--beta", "0", "--delta", "1000") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["bound"] == 324 and report["holds"] is True


def test_lowerbound_lemmas(capsys):
    code = run_cli(
        "lowerbound", "lemmas", "--delta", "4", "--rounds", "30", "--trials", "5",
        "--seed", "1",
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["violations"] == []
    assert report["delta"] == 4 and report["trials"] == 5 and report["rounds"] == 30


def test_gen_graph_kind(tmp_path):
    out = tmp_path / "g.g"
    assert (
        run_cli(
            "gen", "--kind", "graph", "--n", "30", "--delta", "6", "--seed", "3",
            "--extra", "12", "--out", str(out),
        )
        == 0
    )
    g = parse_graph(read(out))
    assert g.n == 30 and g.max_degree() <= 6
    assert len(g.edges) > 29


def test_run_exit_one_on_cap_exhaustion(tmp_path, monkeypatch):
    monkeypatch.setenv("RSD_ROUND_CAP_MULTIPLIER", "1")
    g = tmp_path / "k2.g"
    g.write_text("2 1\n0 1\n")
    assert run_cli("run", str(g)) == 1


def test_run_batch_of_seeded_trees(tmp_path):
    # twenty seeded trees through the full command surface, all exit 0
    for seed in range(20):
        g = tmp_path / f"t{seed}.g"
        assert (
            run_cli(
                "gen", "--kind", "tree", "--n", str(5 + seed * 3), "--delta", "6",
                "--seed", str(seed), "--out", str(g),
            )
            == 0
        )
        assert run_cli("run", str(g)) == 0
