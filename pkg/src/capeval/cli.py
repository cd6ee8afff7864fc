"""Operator command surface.

One binary, thirteen subcommands covering the whole pipeline: ingest,
score-metrics, mir, degrade, build-hits, serve, simulate, qc,
score-systems, sig-matrix, meta-eval, replicate-report, sts-cross.

Every flag falls back to an environment variable with the CAPEVAL_ prefix
(--hit-size -> CAPEVAL_HIT_SIZE). Every output artifact embeds the digest
of the configuration that produced it plus any seeds used.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analytics, corpus, degradation, hitplan, metrics, simcrowd, stats
from .errors import CapevalError
from .provenance import header_lines, meta_object
from .text import SynonymLexicon

ENV_PREFIX = "CAPEVAL_"


def _env_name(flag: str) -> str:
    return ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()


def _add(parser: argparse.ArgumentParser, *names, **kwargs) -> None:
    """add_argument with an environment-variable fallback for the default."""
    env_value = os.environ.get(_env_name(names[0]))
    if env_value is not None:
        if kwargs.get("action") in ("append",):
            kwargs["default"] = env_value.split(os.pathsep)
        elif "type" in kwargs:
            kwargs["default"] = kwargs["type"](env_value)
        else:
            kwargs["default"] = env_value
        kwargs["required"] = False
    parser.add_argument(*names, **kwargs)


def _config_of(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load_corpus_dir(corpus_dir: str) -> corpus.Corpus:
    return corpus.load_corpus(
        os.path.join(corpus_dir, "captions.tsv"),
        os.path.join(corpus_dir, "videos.tsv"),
    )


def _load_synonyms(path: str | None) -> SynonymLexicon | None:
    return SynonymLexicon.load(path) if path else None


def _write_text(path: str, body: str, config: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines(config):
            fh.write(line + "\n")
        fh.write(body)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    loaded = corpus.load_corpus(args.captions, args.videos)
    corpus.save_corpus(loaded, args.out_dir)
    counts = loaded.counts_by_source()
    print(f"videos: {len(loaded.videos)}")
    for source in sorted(counts):
        print(f"captions[{source}]: {counts[source]}")
    print(f"persisted to {args.out_dir}")
    return 0


def cmd_score_metrics(args) -> int:
    loaded = _load_corpus_dir(args.corpus_dir)
    runs = [corpus.load_run(path, "description", loaded) for path in args.run]
    report = metrics.score_runs(loaded, runs, _load_synonyms(args.synonyms))
    config = _config_of(args)
    metrics.write_metric_report(report, args.out, header_lines(config))
    if args.json_out:
        metrics.write_metric_report_json(report, args.json_out,
                                         meta_object(config))
    for run_id in sorted(report.means):
        means = report.means[run_id]
        print(f"{run_id}: bleu={means['bleu']:.4f} meteor={means['meteor']:.4f} "
              f"cider={means['cider']:.4f} sts={means['sts']:.4f}")
    return 0


def cmd_mir(args) -> int:
    loaded = _load_corpus_dir(args.corpus_dir)
    truth_set = loaded.sets.get(args.truth_set)
    if truth_set is None:
        raise CapevalError(f"corpus has no reference set {args.truth_set!r}")
    pool = {cap.caption_id for cap in truth_set.values()}
    run = corpus.load_run(args.run, "ranking", loaded, candidate_pool=pool)
    truth = {video_id: cap.caption_id for video_id, cap in truth_set.items()
             if video_id in run.rankings}
    ranks = metrics.inverted_ranks(run, truth)
    mir = sum(ranks.values()) / len(ranks)
    lines = ["video_id\tinverted_rank"]
    lines += [f"{v}\t{ranks[v]:.6f}" for v in sorted(ranks)]
    lines.append(f"# mean_inverted_rank\t{mir:.6f}")
    _write_text(args.out, "\n".join(lines) + "\n", _config_of(args))
    print(f"mean inverted rank over {len(ranks)} videos: {mir:.4f}")
    return 0


def cmd_degrade(args) -> int:
    loaded = _load_corpus_dir(args.corpus_dir)
    ref_set = loaded.sets.get(args.set)
    if ref_set is None:
        raise CapevalError(f"corpus has no reference set {args.set!r}")
    originals = [ref_set[v] for v in sorted(ref_set)]
    degraded = degradation.degrade_set(originals, seed=args.seed)
    degradation.write_degraded_set(degraded, args.out,
                                   header_lines(_config_of(args)))
    relaxed = sum(d.relaxed_span for _, d in degraded.pairs)
    print(f"degraded {len(degraded)} captions ({relaxed} with relaxed span)")
    return 0


def cmd_build_hits(args) -> int:
    loaded = _load_corpus_dir(args.corpus_dir)
    runs = [corpus.load_run(path, "description", loaded) for path in args.run]
    if args.include_human_set:
        ref_set = loaded.sets.get(args.include_human_set)
        if ref_set is None:
            raise CapevalError(
                f"corpus has no reference set {args.include_human_set!r}")
        runs.append(corpus.SystemRun(
            run_id=f"human-{args.include_human_set}",
            group_id="human",
            captions={v: cap.text for v, cap in ref_set.items()},
        ))
    pairs = degradation.load_degraded_set(args.degraded, loaded.captions)
    config = hitplan.HitConfig(hit_size=args.hit_size, qc_pairs=args.pairs,
                               repeats=args.repeats)
    urls = {v: ref.url for v, ref in loaded.videos.items()}
    plan = hitplan.build_hits(runs, pairs, config, seed=args.seed,
                              video_urls=urls)
    hitplan.save_plan(plan, args.out, meta_object(_config_of(args)))
    if args.worker_export:
        hitplan.write_worker_export(plan, args.worker_export)
    if args.mturk_csv:
        hitplan.write_mturk_batch(plan, args.mturk_csv)
    cost = hitplan.estimate_cost(len(plan.hits), args.rate_per_hit,
                                 args.fee_fraction)
    print(f"built {len(plan.hits)} HITs of {config.hit_size} items "
          f"(estimated cost {cost:.2f} at {args.rate_per_hit}/HIT "
          f"+ {args.fee_fraction:.0%} fee)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    plan = hitplan.load_plan(args.plan)
    app = create_app(plan, args.store, redundancy=args.redundancy,
                     session_timeout_minutes=args.timeout_minutes,
                     static_dir=args.static_dir)
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_simulate(args) -> int:
    plan = hitplan.load_plan(args.plan)
    population, latent_config, config_seed = simcrowd.load_sim_config(args.config)
    seed = args.seed if args.seed is not None else config_seed
    latent = simcrowd.LatentQuality.from_plan(plan, latent_config, seed=seed)
    records = simcrowd.simulate_assessments(plan, population, latent, seed=seed)
    config = dict(_config_of(args), effective_seed=seed)
    analytics.save_store(records, args.out, header_lines(config))
    print(f"simulated {len(records)} assessments from {len(population)} workers")
    return 0


def cmd_qc(args) -> int:
    plan = hitplan.load_plan(args.plan)
    records, skips = analytics.load_store(args.store)
    qc_config = analytics.QcConfig(alpha=args.alpha, min_pairs=args.min_pairs)
    profiles = analytics.profile_workers(records, plan, qc_config)
    _write_text(args.out, analytics.worker_report_tsv(profiles),
                _config_of(args))
    passed = sum(p.passed for p in profiles.values())
    print(f"{passed}/{len(profiles)} workers passed QC "
          f"(alpha={args.alpha}, min pairs={args.min_pairs}, "
          f"{skips} skipped items)")
    return 0


def _evaluate(args) -> analytics.EvaluationResult:
    plan = hitplan.load_plan(args.plan)
    records, _ = analytics.load_store(args.store)
    qc_config = analytics.QcConfig(alpha=args.alpha, min_pairs=args.min_pairs)
    return analytics.evaluate(records, plan, qc_config)


def cmd_score_systems(args) -> int:
    result = _evaluate(args)
    _write_text(args.out, analytics.leaderboard_tsv(result.scores),
                _config_of(args))
    if args.coverage_out:
        _write_text(args.coverage_out, result.table.coverage_tsv(),
                    _config_of(args))
    for score in result.scores:
        print(f"{score.system_id}\traw={score.raw_avg:.1f}\t"
              f"z={score.z_avg:+.3f}\tn={score.n}")
    return 0


def cmd_sig_matrix(args) -> int:
    result = _evaluate(args)
    samples = {
        system: values
        for system, values in result.table.z_samples().items()
        if len(values) >= 2
    }
    matrix = stats.significance_matrix(samples, alpha=args.alpha)
    body = matrix.render() + "\n"
    ties = matrix.ties()
    body += f"# ties: {len(ties)}\n"
    for a, b in ties:
        body += f"# tie\t{a}\t{b}\n"
    _write_text(args.out, body, _config_of(args))
    if args.tsv_out:
        lines = ["row_system\tcol_system\twin\tp_one_sided_row_gt_col"]
        for i, row in enumerate(matrix.systems):
            for j, col in enumerate(matrix.systems):
                if i == j:
                    continue
                lines.append(f"{row}\t{col}\t{'W' if matrix.wins[i][j] else '-'}"
                             f"\t{matrix.p_values[i][j]:.6g}")
        _write_text(args.tsv_out, "\n".join(lines) + "\n", _config_of(args))
    print(body.rstrip("\n"))
    return 0


def cmd_meta_eval(args) -> int:
    with open(args.metric_report, encoding="utf-8") as fh:
        report_data = json.load(fh)
    metric_means: dict[str, dict[str, float]] = {}
    for run_id, means in report_data["means"].items():
        for metric_name, value in means.items():
            metric_means.setdefault(metric_name, {})[run_id] = value
    scores = analytics.load_leaderboard_tsv(args.leaderboard)
    human_z = {s.system_id: s.z_avg for s in scores}
    report = stats.metric_meta_eval(metric_means, human_z)
    _write_text(args.out, report.to_tsv(), _config_of(args))
    if args.scatter_out:
        lines = ["metric\tsystem\tmetric_score\thuman_z"]
        for metric_name in sorted(report.scatter):
            for system, value, human in report.scatter[metric_name]:
                lines.append(f"{metric_name}\t{system}\t{value:.6f}\t{human:.6f}")
        _write_text(args.scatter_out, "\n".join(lines) + "\n", _config_of(args))
    for metric_name in sorted(report.correlations):
        print(f"r({metric_name}, human) = {report.correlations[metric_name]:+.3f}")
    return 0


def cmd_replicate_report(args) -> int:
    run1 = analytics.load_leaderboard_tsv(args.leaderboard1)
    run2 = analytics.load_leaderboard_tsv(args.leaderboard2)
    out = stats.replication_report(run1, run2)
    body = f"r_raw\t{out['r_raw']:.6f}\nr_z\t{out['r_z']:.6f}\n"
    _write_text(args.out, body, _config_of(args))
    print(body.rstrip("\n"))
    return 0


def cmd_sts_cross(args) -> int:
    loaded = _load_corpus_dir(args.corpus_dir)
    result = metrics.cross_reference_sts(loaded, args.set_a, args.set_b,
                                         _load_synonyms(args.synonyms))
    lines = ["video_id\tsts"]
    lines += [f"{v}\t{result.per_video[v]:.6f}" for v in sorted(result.per_video)]
    lines.append(f"# median\t{result.median:.6f}")
    lines.append("# histogram\t" + ",".join(str(c) for c in result.histogram))
    for video_id in result.skipped:
        lines.append(f"# skipped\t{video_id}")
    _write_text(args.out, "\n".join(lines) + "\n", _config_of(args))
    print(f"median cross-set similarity: {result.median:.3f} "
          f"({len(result.per_video)} videos, {len(result.skipped)} skipped)")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capeval",
        description="Video-caption evaluation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, validate and persist a corpus")
    _add(p, "--captions", required=True)
    _add(p, "--videos", required=True)
    _add(p, "--out-dir", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("score-metrics", help="segment metrics for runs")
    _add(p, "--corpus-dir", required=True)
    _add(p, "--run", action="append", required=True)
    _add(p, "--synonyms", default=None)
    _add(p, "--out", required=True)
    _add(p, "--json-out", default=None)
    p.set_defaults(func=cmd_score_metrics)

    p = sub.add_parser("mir", help="mean inverted rank for a ranking run")
    _add(p, "--corpus-dir", required=True)
    _add(p, "--run", required=True)
    _add(p, "--truth-set", default="A")
    _add(p, "--out", required=True)
    p.set_defaults(func=cmd_mir)

    p = sub.add_parser("degrade", help="build QC captions from a reference set")
    _add(p, "--corpus-dir", required=True)
    _add(p, "--set", default="A")
    _add(p, "--seed", type=int, default=0)
    _add(p, "--out", required=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("build-hits", help="assemble assessment batches")
    _add(p, "--corpus-dir", required=True)
    _add(p, "--run", action="append", required=True)
    _add(p, "--degraded", required=True)
    _add(p, "--include-human-set", default=None)
    _add(p, "--hit-size", type=int, default=100)
    _add(p, "--pairs", type=int, default=10)
    _add(p, "--repeats", type=int, default=10)
    _add(p, "--seed", type=int, default=0)
    _add(p, "--rate-per-hit", type=float, default=0.99)
    _add(p, "--fee-fraction", type=float, default=0.20)
    _add(p, "--out", required=True)
    _add(p, "--worker-export", default=None)
    _add(p, "--mturk-csv", default=None)
    p.set_defaults(func=cmd_build_hits)

    p = sub.add_parser("serve", help="run the rating-collection service")
    _add(p, "--plan", required=True)
    _add(p, "--store", required=True)
    _add(p, "--listen", default="127.0.0.1:8080")
    _add(p, "--redundancy", type=int, default=1)
    _add(p, "--timeout-minutes", type=float, default=60.0)
    _add(p, "--static-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="synthesize an assessment store")
    _add(p, "--plan", required=True)
    _add(p, "--config", required=True)
    _add(p, "--seed", type=int, default=None)
    _add(p, "--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("qc", help="worker quality-control table")
    _add(p, "--plan", required=True)
    _add(p, "--store", required=True)
    _add(p, "--alpha", type=float, default=0.05)
    _add(p, "--min-pairs", type=int, default=10)
    _add(p, "--out", required=True)
    p.set_defaults(func=cmd_qc)

    p = sub.add_parser("score-systems", help="system leaderboard")
    _add(p, "--plan", required=True)
    _add(p, "--store", required=True)
    _add(p, "--alpha", type=float, default=0.05)
    _add(p, "--min-pairs", type=int, default=10)
    _add(p, "--out", required=True)
    _add(p, "--coverage-out", default=None,
         help="per-caption assessment counts, for recollection planning")
    p.set_defaults(func=cmd_score_systems)

    p = sub.add_parser("sig-matrix", help="pairwise significance grid")
    _add(p, "--plan", required=True)
    _add(p, "--store", required=True)
    _add(p, "--alpha", type=float, default=0.05)
    _add(p, "--min-pairs", type=int, default=10)
    _add(p, "--out", required=True)
    _add(p, "--tsv-out", default=None)
    p.set_defaults(func=cmd_sig_matrix)

    p = sub.add_parser("meta-eval", help="metric correlation with human scores")
    _add(p, "--metric-report", required=True, help="JSON metric report")
    _add(p, "--leaderboard", required=True)
    _add(p, "--out", required=True)
    _add(p, "--scatter-out", default=None)
    p.set_defaults(func=cmd_meta_eval)

    p = sub.add_parser("replicate-report",
                       help="correlation between two collection runs")
    _add(p, "--leaderboard1", required=True)
    _add(p, "--leaderboard2", required=True)
    _add(p, "--out", required=True)
    p.set_defaults(func=cmd_replicate_report)

    p = sub.add_parser("sts-cross", help="similarity between reference sets")
    _add(p, "--corpus-dir", required=True)
    _add(p, "--set-a", default="A")
    _add(p, "--set-b", default="B")
    _add(p, "--synonyms", default=None)
    _add(p, "--out", required=True)
    p.set_defaults(func=cmd_sts_cross)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
