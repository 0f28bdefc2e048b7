"""End-to-end tests of the command-line surface."""

import json

import numpy as np
import pytest

from termdep.cli import DEFAULT_MU_GRID, DEFAULT_THETA_GRID, main


def read_report_map(path):
    rows = {}
    for line in path.read_text().splitlines()[1:]:
        qid, map_s, ndcg_s, p10_s = line.split(",")
        rows[qid] = float(map_s)
    return rows


@pytest.fixture(scope="module")
def planted_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("planted")
    assert main(["fixture", "--kind", "planted", "--out", str(out)]) == 0
    return {
        "dir": out,
        "corpus": str(out / "corpus.jsonl"),
        "queries": str(out / "queries.tsv"),
        "lexicon": str(out / "lexicon.tsv"),
    }


@pytest.fixture(scope="module")
def retrieval_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("retrieval")
    assert main(["fixture", "--kind", "retrieval", "--out", str(out)]) == 0
    return {
        "dir": out,
        "corpus": str(out / "corpus.jsonl"),
        "queries": str(out / "queries.tsv"),
        "lexicon": str(out / "lexicon.tsv"),
        "qrels": str(out / "qrels.txt"),
    }


def base_flags(paths):
    return ["--corpus", paths["corpus"], "--queries", paths["queries"]]


class TestFixtureCommand:
    def test_planted_files_written(self, planted_paths, capsys):
        out = planted_paths["dir"]
        for name in ("corpus.jsonl", "queries.tsv", "lexicon.tsv", "qrels.txt"):
            assert (out / name).exists()

    def test_retrieval_corpus_size(self, retrieval_paths):
        lines = (retrieval_paths["dir"] / "corpus.jsonl").read_text().splitlines()
        assert len(lines) == 200

    def test_idempotent(self, tmp_path):
        first = tmp_path / "one"
        main(["fixture", "--kind", "planted", "--out", str(first)])
        before = (first / "corpus.jsonl").read_bytes()
        main(["fixture", "--kind", "planted", "--out", str(first)])
        assert (first / "corpus.jsonl").read_bytes() == before

    def test_prints_paths(self, tmp_path, capsys):
        main(["fixture", "--kind", "planted", "--out", str(tmp_path / "p")])
        out = capsys.readouterr().out
        assert "corpus:" in out and "qrels:" in out


class TestIndexCommand:
    def test_summary_contents(self, planted_paths, tmp_path):
        out = tmp_path / "stats.json"
        code = main(["index", "--corpus", planted_paths["corpus"], "--out", str(out)])
        assert code == 0
        stats = json.loads(out.read_text())
        assert stats["doc_count"] == 24
        assert stats["total_terms"] == 24 * 6
        assert stats["vocab_size"] > 0

    def test_missing_corpus_exits_nonzero(self, tmp_path, capsys):
        out = tmp_path / "stats.json"
        code = main(["index", "--corpus", str(tmp_path / "nope.jsonl"), "--out", str(out)])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestWindowsCommand:
    def test_targets_include_synonyms(self, planted_paths, tmp_path):
        out = tmp_path / "windows.json"
        code = main(
            ["windows", *base_flags(planted_paths), "--lexicon", planted_paths["lexicon"], "--out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["format"] == 1
        assert payload["half_width"] == 5
        for term in ("red", "tape", "scarlet", "tax", "office", "bureau"):
            assert payload["targets"][term]["n_windows"] > 0


class TestScoreCommand:
    def test_scores_csv_and_selection(self, planted_paths, tmp_path):
        out = tmp_path / "scores.csv"
        code = main(
            [
                "score",
                *base_flags(planted_paths),
                "--lexicon",
                planted_paths["lexicon"],
                "--variant",
                "vector:tfidf",
                "--theta",
                "1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "qid,variant,n_q,scoreable,divergences"
        assert len(lines) == 3
        assert lines[1].startswith("nc1,vector:tfidf,1,true,")
        selected = (tmp_path / "selected.txt").read_text().split()
        assert selected == ["nc1"]

    def test_unscoreable_rows_have_blank_score(self, planted_paths, tmp_path):
        queries = tmp_path / "queries.tsv"
        queries.write_text("nc1\tred tape\ns1\ttax\n")
        out = tmp_path / "scores.csv"
        main(
            [
                "score",
                "--corpus",
                planted_paths["corpus"],
                "--queries",
                str(queries),
                "--lexicon",
                planted_paths["lexicon"],
                "--variant",
                "lm:sgt:qsum",
                "--out",
                str(out),
            ]
        )
        rows = out.read_text().splitlines()
        assert rows[2] == "s1,lm:sgt:qsum,,false,"

    def test_deterministic_across_threads(self, planted_paths, tmp_path):
        outs = []
        for k, threads in enumerate(("1", "4", "4")):
            out = tmp_path / f"scores{k}.csv"
            main(
                [
                    "score",
                    *base_flags(planted_paths),
                    "--lexicon",
                    planted_paths["lexicon"],
                    "--variant",
                    "lm:laplace:median",
                    "--threads",
                    threads,
                    "--out",
                    str(out),
                ]
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_unknown_variant_rejected_by_parser(self, planted_paths, tmp_path):
        with pytest.raises(SystemExit):
            main(
                [
                    "score",
                    *base_flags(planted_paths),
                    "--lexicon",
                    planted_paths["lexicon"],
                    "--variant",
                    "vector:bm25",
                    "--out",
                    str(tmp_path / "x.csv"),
                ]
            )


class TestRunCommand:
    def test_default_tag_is_mode(self, planted_paths, tmp_path):
        out = tmp_path / "bow.run"
        code = main(["run", *base_flags(planted_paths), "--mode", "bow", "--out", str(out)])
        assert code == 0
        fields = out.read_text().splitlines()[0].split()
        assert len(fields) == 6
        assert fields[1] == "Q0"
        assert fields[5] == "bow"

    def test_custom_tag(self, planted_paths, tmp_path):
        out = tmp_path / "tagged.run"
        main(["run", *base_flags(planted_paths), "--mode", "fd", "--tag", "mytag", "--out", str(out)])
        assert all(line.split()[5] == "mytag" for line in out.read_text().splitlines())

    def test_selective_from_file_matches_on_the_fly(self, planted_paths, tmp_path):
        selected = tmp_path / "sel.txt"
        selected.write_text("nc1\n")
        a = tmp_path / "a.run"
        main(
            [
                "run",
                *base_flags(planted_paths),
                "--mode",
                "selective",
                "--selected",
                str(selected),
                "--tag",
                "t",
                "--out",
                str(a),
            ]
        )
        b = tmp_path / "b.run"
        main(
            [
                "run",
                *base_flags(planted_paths),
                "--mode",
                "selective",
                "--lexicon",
                planted_paths["lexicon"],
                "--variant",
                "vector:tfidf",
                "--theta",
                "1",
                "--tag",
                "t",
                "--out",
                str(b),
            ]
        )
        assert a.read_bytes() == b.read_bytes()

    def test_selective_needs_selection_source(self, planted_paths, tmp_path):
        with pytest.raises(SystemExit, match="selective"):
            main(
                [
                    "run",
                    *base_flags(planted_paths),
                    "--mode",
                    "selective",
                    "--out",
                    str(tmp_path / "x.run"),
                ]
            )

    def test_selective_theta_zero_equals_bow(self, retrieval_paths, tmp_path):
        bow = tmp_path / "bow.run"
        main(["run", *base_flags(retrieval_paths), "--mode", "bow", "--tag", "t", "--out", str(bow)])
        sel = tmp_path / "sel.run"
        main(
            [
                "run",
                *base_flags(retrieval_paths),
                "--mode",
                "selective",
                "--lexicon",
                retrieval_paths["lexicon"],
                "--variant",
                "vector:tfidf",
                "--theta",
                "0",
                "--tag",
                "t",
                "--out",
                str(sel),
            ]
        )
        assert sel.read_bytes() == bow.read_bytes()


@pytest.fixture(scope="module")
def mode_runs(retrieval_paths, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    paths = {}
    for mode in ("bow", "fd"):
        path = out / f"{mode}.run"
        main(["run", *base_flags(retrieval_paths), "--mode", mode, "--out", str(path)])
        paths[mode] = path
    sel = out / "selective.run"
    main(
        [
            "run",
            *base_flags(retrieval_paths),
            "--mode",
            "selective",
            "--lexicon",
            retrieval_paths["lexicon"],
            "--variant",
            "vector:tfidf",
            "--theta",
            "10",
            "--out",
            str(sel),
        ]
    )
    paths["selective"] = sel
    return paths


class TestEvalFlow:
    def test_bow_and_fd_tie_overall(self, retrieval_paths, mode_runs, tmp_path):
        # Phrase treatment helps the dependent half exactly as much as it
        # hurts the compositional half.
        means = {}
        for mode in ("bow", "fd"):
            report = tmp_path / f"{mode}.csv"
            code = main(
                ["eval", "--run", str(mode_runs[mode]), "--qrels", retrieval_paths["qrels"], "--out", str(report)]
            )
            assert code == 0
            means[mode] = read_report_map(report)["all"]
        np.testing.assert_allclose(means["bow"], 0.6625, atol=1e-9)
        np.testing.assert_allclose(means["fd"], 0.6625, atol=1e-9)

    def test_selective_wins(self, retrieval_paths, mode_runs, tmp_path):
        report = tmp_path / "sel.csv"
        main(
            ["eval", "--run", str(mode_runs["selective"]), "--qrels", retrieval_paths["qrels"], "--out", str(report)]
        )
        rows = read_report_map(report)
        np.testing.assert_allclose(rows["all"], 1.0, atol=1e-9)

    def test_unjudged_run_qid_warns(self, retrieval_paths, mode_runs, tmp_path, capsys):
        patched = tmp_path / "patched.run"
        patched.write_text(mode_runs["bow"].read_text() + "q99 Q0 doc 1 -1.000000 bow\n")
        main(
            ["eval", "--run", str(patched), "--qrels", retrieval_paths["qrels"], "--out", str(tmp_path / "r.csv")]
        )
        assert "q99" in capsys.readouterr().err


class TestTuneCommand:
    def test_grid_defaults(self):
        assert DEFAULT_MU_GRID == (
            100.0,
            500.0,
            800.0,
            1000.0,
            2000.0,
            3000.0,
            4000.0,
            5000.0,
            8000.0,
            10000.0,
        )
        assert DEFAULT_THETA_GRID == tuple(range(1, 46))

    def test_small_grid_tuning(self, retrieval_paths, tmp_path):
        out = tmp_path / "tune.json"
        code = main(
            [
                "tune",
                *base_flags(retrieval_paths),
                "--lexicon",
                retrieval_paths["lexicon"],
                "--qrels",
                retrieval_paths["qrels"],
                "--variant",
                "vector:tfidf",
                "--mu-grid",
                "1000",
                "2000",
                "--theta-grid",
                "0",
                "10",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["measure"] == "map"
        assert len(payload["folds"]) == 3
        for fold in payload["folds"]:
            assert fold["mu"] == 1000.0
            assert fold["theta"] == 10
            np.testing.assert_allclose(fold["score"], 1.0, atol=1e-9)
        np.testing.assert_allclose(payload["mean_score"], 1.0, atol=1e-9)


class TestFigureDataCommand:
    def test_delta_sorted_descending(self, retrieval_paths, mode_runs, tmp_path):
        out = tmp_path / "fig"
        code = main(
            [
                "figure-data",
                "--qrels",
                retrieval_paths["qrels"],
                "--run-a",
                str(mode_runs["fd"]),
                "--run-b",
                str(mode_runs["bow"]),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        lines = (out / "delta.csv").read_text().splitlines()
        assert lines[0] == "qid,delta_map"
        assert len(lines) == 21
        deltas = [float(line.split(",")[1]) for line in lines[1:]]
        assert deltas == sorted(deltas, reverse=True)
        assert lines[1] == "q01,0.675000"
        assert lines[-1].endswith(",-0.675000")

    def test_sweep_rows_sorted_by_theta(self, retrieval_paths, mode_runs, tmp_path):
        out = tmp_path / "fig2"
        main(
            [
                "figure-data",
                "--qrels",
                retrieval_paths["qrels"],
                "--sweep",
                f"20={mode_runs['fd']}",
                "--sweep",
                f"0={mode_runs['bow']}",
                "--out",
                str(out),
            ]
        )
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "theta,mean_map"
        assert lines[1].startswith("0,")
        assert lines[2].startswith("20,")

    def test_no_inputs_rejected(self, retrieval_paths, tmp_path):
        with pytest.raises(SystemExit, match="figure-data"):
            main(
                ["figure-data", "--qrels", retrieval_paths["qrels"], "--out", str(tmp_path / "x")]
            )

    def test_malformed_sweep_rejected(self, retrieval_paths, mode_runs, tmp_path):
        with pytest.raises(SystemExit, match="THETA=RUNFILE"):
            main(
                [
                    "figure-data",
                    "--qrels",
                    retrieval_paths["qrels"],
                    "--sweep",
                    str(mode_runs["bow"]),
                    "--out",
                    str(tmp_path / "x"),
                ]
            )
