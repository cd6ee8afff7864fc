import json
import os

import pytest

from capeval.cli import main

SAMPLE = os.path.join(os.path.dirname(__file__), "..", "data", "sample")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run the pipeline once over the bundled sample corpus."""
    work = tmp_path_factory.mktemp("pipeline")
    corpus_dir = str(work / "corpus")

    assert main(["ingest",
                 "--captions", os.path.join(SAMPLE, "captions.tsv"),
                 "--videos", os.path.join(SAMPLE, "videos.tsv"),
                 "--out-dir", corpus_dir]) == 0

    run_args = []
    for name in ("run_alpha", "run_bravo", "run_charlie", "run_delta"):
        run_args += ["--run", os.path.join(SAMPLE, "runs", f"{name}.tsv")]

    report = str(work / "metrics.tsv")
    report_json = str(work / "metrics.json")
    assert main(["score-metrics", "--corpus-dir", corpus_dir, *run_args,
                 "--out", report, "--json-out", report_json]) == 0

    degraded = str(work / "degraded.tsv")
    assert main(["degrade", "--corpus-dir", corpus_dir, "--set", "A",
                 "--seed", "42", "--out", degraded]) == 0

    plan = str(work / "plan.json")
    assert main(["build-hits", "--corpus-dir", corpus_dir, *run_args,
                 "--degraded", degraded, "--include-human-set", "B",
                 "--hit-size", "60", "--pairs", "6", "--repeats", "6",
                 "--seed", "7", "--out", plan,
                 "--worker-export", str(work / "worker.json"),
                 "--mturk-csv", str(work / "batch.csv")]) == 0

    store = str(work / "store.tsv")
    assert main(["simulate", "--plan", plan,
                 "--config", os.path.join(SAMPLE, "sim_config.json"),
                 "--out", store]) == 0

    workers = str(work / "workers.tsv")
    assert main(["qc", "--plan", plan, "--store", store, "--min-pairs", "6",
                 "--out", workers]) == 0

    board = str(work / "leaderboard.tsv")
    coverage = str(work / "coverage.tsv")
    assert main(["score-systems", "--plan", plan, "--store", store,
                 "--min-pairs", "6", "--out", board,
                 "--coverage-out", coverage]) == 0
    assert "n_assessments" in open(coverage).read()

    matrix = str(work / "matrix.txt")
    matrix_tsv = str(work / "matrix.tsv")
    assert main(["sig-matrix", "--plan", plan, "--store", store,
                 "--min-pairs", "6", "--out", matrix,
                 "--tsv-out", matrix_tsv]) == 0

    meta = str(work / "meta.tsv")
    scatter = str(work / "scatter.tsv")
    assert main(["meta-eval", "--metric-report", report_json,
                 "--leaderboard", board, "--out", meta,
                 "--scatter-out", scatter]) == 0

    mir_out = str(work / "mir.tsv")
    assert main(["mir", "--corpus-dir", corpus_dir,
                 "--run", os.path.join(SAMPLE, "ranking", "rank_alpha.tsv"),
                 "--truth-set", "A", "--out", mir_out]) == 0

    sts_out = str(work / "sts_cross.tsv")
    assert main(["sts-cross", "--corpus-dir", corpus_dir,
                 "--out", sts_out]) == 0

    return {
        "work": work, "corpus_dir": corpus_dir, "report": report,
        "report_json": report_json, "degraded": degraded, "plan": plan,
        "store": store, "workers": workers, "board": board, "matrix": matrix,
        "matrix_tsv": matrix_tsv, "meta": meta, "scatter": scatter,
        "mir": mir_out, "sts": sts_out,
    }


def test_all_artifacts_exist(pipeline):
    for key in ("report", "report_json", "degraded", "plan", "store",
                "workers", "board", "matrix", "meta", "scatter", "mir", "sts"):
        assert os.path.exists(pipeline[key]), key


def test_artifacts_carry_provenance_headers(pipeline):
    for key in ("report", "degraded", "workers", "board", "matrix", "meta",
                "mir", "sts"):
        with open(pipeline[key]) as fh:
            head = fh.read(400)
        assert "config-digest:" in head, key
    with open(pipeline["plan"]) as fh:
        assert "config_digest" in json.load(fh)["_meta"]


def test_metric_report_prefers_stronger_runs(pipeline):
    data = json.loads(open(pipeline["report_json"]).read())
    means = data["means"]
    assert means["run_alpha"]["bleu"] > means["run_charlie"]["bleu"]
    assert means["run_alpha"]["cider"] > means["run_delta"]["cider"]


def test_leaderboard_recovers_latent_order(pipeline):
    rows = [line.split("\t") for line in open(pipeline["board"])
            if line.strip() and not line.startswith(("#", "system"))]
    order = [row[0] for row in rows]
    runs_only = [s for s in order
                 if s in ("run_alpha", "run_bravo", "run_charlie", "run_delta",
                          "human-B")]
    assert runs_only == ["human-B", "run_alpha", "run_bravo", "run_charlie",
                         "run_delta"]


def test_qc_table_flags_junk_workers(pipeline):
    body = open(pipeline["workers"]).read()
    assert "constant" in body
    lines = [l for l in body.splitlines() if l.startswith("constant")]
    assert all("failed" in l for l in lines)
    diligent = [l for l in body.splitlines() if l.startswith("diligent")]
    assert sum("passed" in l for l in diligent) >= int(0.9 * len(diligent))


def test_sig_matrix_mentions_systems(pipeline):
    body = open(pipeline["matrix"]).read()
    assert "human-B" in body and "run_alpha" in body
    assert "W" in body
    tsv = [l for l in open(pipeline["matrix_tsv"]) if not l.startswith("#")]
    assert tsv[0].startswith("row_system\tcol_system")
    assert any("\tW\t" in l for l in tsv)


def test_mir_output_has_mean(pipeline):
    body = open(pipeline["mir"]).read()
    assert "# mean_inverted_rank" in body


def test_determinism_of_seeded_commands(pipeline, tmp_path):
    out1 = str(tmp_path / "d1.tsv")
    out2 = str(tmp_path / "d2.tsv")
    for out in (out1, out2):
        assert main(["degrade", "--corpus-dir", pipeline["corpus_dir"],
                     "--set", "A", "--seed", "42", "--out", out]) == 0

    def payload(path):
        return [l for l in open(path) if not l.startswith("#")]

    assert payload(out1) == payload(out2)
    assert payload(out1) == payload(pipeline["degraded"])


def test_env_variable_fallback(pipeline, tmp_path, monkeypatch):
    out = str(tmp_path / "env.tsv")
    monkeypatch.setenv("CAPEVAL_CORPUS_DIR", pipeline["corpus_dir"])
    monkeypatch.setenv("CAPEVAL_SEED", "42")
    assert main(["degrade", "--set", "A", "--out", out]) == 0
    def payload(path):
        return [l for l in open(path) if not l.startswith("#")]
    assert payload(out) == payload(pipeline["degraded"])


def test_synonym_lexicon_lifts_sts(pipeline, tmp_path):
    out = str(tmp_path / "with_syn.json")
    args = ["score-metrics", "--corpus-dir", pipeline["corpus_dir"],
            "--run", os.path.join(SAMPLE, "runs", "run_bravo.tsv"),
            "--out", str(tmp_path / "with_syn.tsv"), "--json-out", out]
    assert main(args + ["--synonyms", os.path.join(SAMPLE, "synonyms.txt")]) == 0
    with_syn = json.loads(open(out).read())["means"]["run_bravo"]["sts"]
    plain = json.loads(open(pipeline["report_json"]).read())
    without = plain["means"]["run_bravo"]["sts"]
    assert with_syn >= without


def test_unknown_subcommand_fails():
    with pytest.raises(SystemExit):
        main(["definitely-not-a-command"])


def test_missing_file_is_a_diagnostic_not_a_traceback(tmp_path, capsys):
    code = main(["qc", "--plan", str(tmp_path / "nope.json"),
                 "--store", str(tmp_path / "nope.tsv"),
                 "--out", str(tmp_path / "out.tsv")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_constant_worker_listed_failed_exit_zero(pipeline, tmp_path):
    # a store containing one all-constant worker still yields exit 0
    out = str(tmp_path / "workers.tsv")
    code = main(["qc", "--plan", pipeline["plan"], "--min-pairs", "6",
                 "--store", pipeline["store"], "--out", out])
    assert code == 0
    body = open(out).read()
    assert "failed" in body
