"""Command-line entry point: corpus indexing, end-to-end runs, and formula
evaluation.

Exit codes are a stable contract:
  0  success
  1  invalid input (bad config, malformed corpus under `index`, bad formula args)
  2  I/O failure (missing or unreadable/unusable files)
  3  integration failed (thresholds not met within the retry budget)
"""
from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .figures import plot_comparison, plot_tuning_trace
from .instruct import (
    DatasetFormatError,
    EmptyDatasetError,
    InstructSetupParams,
    instruct_effectiveness,
    load_instruct_jsonl,
)
from .orchestrator import (
    AdjustmentRule,
    InvalidConfigError,
    SystemConfig,
    Thresholds,
    build_manifest,
    integrate,
    validate_config,
)
from .pipeline import LatencySimParams
from .retrieval import (
    CorpusFormatError,
    Query,
    index_corpus,
    load_corpus_jsonl,
    make_query,
)
from .simulator import PoolTooSmallError, WorkloadSpec, run_experiment
from .tuning import (
    LatencyModelParams,
    TuningParams,
    adjust_cache_size,
    decisions_to_jsonl,
    latency_reduction,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_INTEGRATION_FAILED = 3


class EvalFormatError(ValueError):
    """Raised for malformed eval-set lines; names the line number."""


class ConfigError(ValueError):
    """Raised for structurally invalid run configs (unknown keys, bad types)."""


def load_eval_jsonl(path: str) -> list[tuple[Query, int]]:
    """Read {"query": str, "relevant_doc_id": int} pairs, one per line."""
    pairs: list[tuple[Query, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EvalFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            query = obj.get("query") if isinstance(obj, dict) else None
            doc_id = obj.get("relevant_doc_id") if isinstance(obj, dict) else None
            if not isinstance(query, str) or not isinstance(doc_id, int) or isinstance(doc_id, bool):
                raise EvalFormatError(
                    f"line {lineno}: expected string 'query' and integer 'relevant_doc_id'"
                )
            pairs.append((make_query(query), doc_id))
    return pairs


@dataclass
class RunConfig:
    system: SystemConfig
    workload: WorkloadSpec
    lsim: LatencySimParams
    corpus_path: str
    instruct_path: str
    eval_path: str
    out_dir: str | None


def _section(raw: dict, key: str) -> dict:
    value = raw.pop(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be an object")
    return dict(value)


def _num(section: dict, section_name: str, key: str, default, allow_none: bool = False):
    value = section.pop(key, default)
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{section_name}.{key}' must be a number")
    return value


def _int(section: dict, section_name: str, key: str, default, allow_none: bool = False):
    value = section.pop(key, default)
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{section_name}.{key}' must be an integer")
    return value


def _reject_unknown(section: dict, name: str) -> None:
    if section:
        raise ConfigError(f"unknown key '{name}.{next(iter(section))}'")


def parse_run_config(raw: dict) -> RunConfig:
    """Build a RunConfig from a parsed JSON document, rejecting unknown keys.

    Required: paths.corpus, paths.instruct_dataset, paths.eval_set. Every
    other key has the documented default from the corresponding dataclass.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    raw = dict(raw)

    paths = _section(raw, "paths")
    corpus_path = paths.pop("corpus", None)
    instruct_path = paths.pop("instruct_dataset", None)
    eval_path = paths.pop("eval_set", None)
    out_dir = paths.pop("out_dir", None)
    for label, value in (
        ("paths.corpus", corpus_path),
        ("paths.instruct_dataset", instruct_path),
        ("paths.eval_set", eval_path),
    ):
        if not isinstance(value, str):
            raise ConfigError(f"'{label}' is required and must be a string")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("'paths.out_dir' must be a string")
    _reject_unknown(paths, "paths")

    tuning_sec = _section(raw, "tuning")
    tparams = TuningParams(
        alpha=_num(tuning_sec, "tuning", "alpha", TuningParams.alpha),
        target_hit_ratio=_num(
            tuning_sec, "tuning", "target_hit_ratio", TuningParams.target_hit_ratio
        ),
        s_min=_int(tuning_sec, "tuning", "s_min", TuningParams.s_min),
        s_max=_int(tuning_sec, "tuning", "s_max", TuningParams.s_max),
        epoch_len=_int(tuning_sec, "tuning", "epoch_len", TuningParams.epoch_len),
    )
    _reject_unknown(tuning_sec, "tuning")

    lat_sec = _section(raw, "latency_model")
    lparams = LatencyModelParams(
        k=_num(lat_sec, "latency_model", "k", LatencyModelParams.k),
        d0=_num(lat_sec, "latency_model", "d0", LatencyModelParams.d0),
    )
    _reject_unknown(lat_sec, "latency_model")

    sim_sec = _section(raw, "latency_sim")
    lsim = LatencySimParams(
        cache_hit_ms=_num(sim_sec, "latency_sim", "cache_hit_ms", LatencySimParams.cache_hit_ms),
        backend_base_ms=_num(
            sim_sec, "latency_sim", "backend_base_ms", LatencySimParams.backend_base_ms
        ),
        per_doc_ms=_num(sim_sec, "latency_sim", "per_doc_ms", LatencySimParams.per_doc_ms),
    )
    _reject_unknown(sim_sec, "latency_sim")

    workload_sec = _section(raw, "workload")
    workload = WorkloadSpec(
        n_queries=_int(workload_sec, "workload", "n_queries", 10000),
        distinct_queries=_int(workload_sec, "workload", "distinct_queries", 1000),
        zipf_s=_num(workload_sec, "workload", "zipf_s", 1.0),
        seed=_int(workload_sec, "workload", "seed", 42),
    )
    _reject_unknown(workload_sec, "workload")

    th_sec = _section(raw, "thresholds")
    max_latency = _num(
        th_sec, "thresholds", "max_mean_latency_ms",
        Thresholds.max_mean_latency_ms, allow_none=True,
    )
    thresholds = Thresholds(
        min_hit_ratio=_num(th_sec, "thresholds", "min_hit_ratio", Thresholds.min_hit_ratio),
        max_mean_latency_ms=math.inf if max_latency is None else max_latency,
        min_precision_at_1=_num(
            th_sec, "thresholds", "min_precision_at_1", Thresholds.min_precision_at_1
        ),
    )
    _reject_unknown(th_sec, "thresholds")

    rule_sec = _section(raw, "adjustment_rule")
    rule = AdjustmentRule(
        alpha_factor=_num(
            rule_sec, "adjustment_rule", "alpha_factor", AdjustmentRule.alpha_factor
        ),
        target_slack=_num(
            rule_sec, "adjustment_rule", "target_slack", AdjustmentRule.target_slack
        ),
    )
    _reject_unknown(rule_sec, "adjustment_rule")

    retrieval_sec = _section(raw, "retrieval")
    k_retrieve = _int(retrieval_sec, "retrieval", "k", 5)
    _reject_unknown(retrieval_sec, "retrieval")

    system = SystemConfig(
        tparams=tparams,
        lparams=lparams,
        k_retrieve=k_retrieve,
        thresholds=thresholds,
        max_adjust_iterations=_int(raw, "", "max_adjust_iterations", 10),
        adjustment_rule=rule,
        initial_capacity=_int(raw, "", "initial_capacity", 64),
        window_size=_int(raw, "", "window_size", None, allow_none=True),
    )
    _reject_unknown(raw, "")
    return RunConfig(
        system=system,
        workload=workload,
        lsim=lsim,
        corpus_path=corpus_path,
        instruct_path=instruct_path,
        eval_path=eval_path,
        out_dir=out_dir,
    )


def cmd_index(corpus_path: str, out_path: str) -> int:
    try:
        docs = load_corpus_jsonl(corpus_path)
    except OSError as exc:
        print(f"error: cannot read corpus: {exc}", file=sys.stderr)
        return EXIT_IO
    except CorpusFormatError as exc:
        print(f"error: malformed corpus: {exc}", file=sys.stderr)
        return EXIT_INVALID
    index = index_corpus(docs)
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(index.to_dict(), fh, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        print(f"error: cannot write index: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"indexed {index.doc_count} documents")
    return EXIT_OK


def cmd_run(config_path: str, out_override: str | None, seed_override: int | None) -> int:
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        cfg = parse_run_config(raw)
        validate_config(cfg.system)
    except (ConfigError, InvalidConfigError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if seed_override is not None:
        cfg.workload = replace(cfg.workload, seed=seed_override)
    out_dir = out_override if out_override is not None else cfg.out_dir
    if out_dir is None:
        print("error: invalid config: no output directory (set paths.out_dir or --out)",
              file=sys.stderr)
        return EXIT_INVALID

    try:
        corpus = load_corpus_jsonl(cfg.corpus_path)
        instruct_dataset = load_instruct_jsonl(cfg.instruct_path)
        eval_set = load_eval_jsonl(cfg.eval_path)
    except OSError as exc:
        print(f"error: cannot read input file: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CorpusFormatError, DatasetFormatError, EvalFormatError) as exc:
        print(f"error: unusable input file: {exc}", file=sys.stderr)
        return EXIT_IO
    if not corpus:
        print("error: unusable input file: corpus is empty", file=sys.stderr)
        return EXIT_IO
    if not eval_set:
        print("error: unusable input file: eval set is empty", file=sys.stderr)
        return EXIT_IO

    if cfg.workload.n_queries < 1:
        print("error: invalid config: workload.n_queries must be >= 1", file=sys.stderr)
        return EXIT_INVALID

    try:
        result = integrate(
            cfg.system, instruct_dataset, corpus, eval_set, cfg.workload, cfg.lsim
        )
    except EmptyDatasetError as exc:
        print(f"error: unusable input file: {exc}", file=sys.stderr)
        return EXIT_IO
    except PoolTooSmallError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        generated_at = datetime.datetime.now(datetime.timezone.utc).isoformat()
        manifest = build_manifest(result, cfg.system, cfg.workload, cfg.lsim, generated_at)

        if not result.deployed:
            (out / "manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            (out / "decisions.jsonl").write_text(
                decisions_to_jsonl(result.decisions), encoding="utf-8"
            )
            print(
                f"integration failed after {len(result.iterations)} iteration(s); "
                f"outputs in {out}"
            )
            return EXIT_INTEGRATION_FAILED

        deployed_config = replace(cfg.system, tparams=result.config_used.tparams)
        report = run_experiment(deployed_config, cfg.workload, corpus, cfg.lsim)
        manifest["experiment"] = report.to_dict()

        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (out / "decisions.jsonl").write_text(
            decisions_to_jsonl(report.tuned_decisions), encoding="utf-8"
        )
        (out / "report.csv").write_text(report.to_table_csv(), encoding="utf-8")
        (out / "report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        plot_trace_path = out / "tuning_trace.png"
        plot_tuning_trace(
            report.tuned_decisions,
            str(plot_trace_path),
            target_hit_ratio=result.config_used.tparams.target_hit_ratio,
        )
        plot_comparison(report, str(out / "comparison.png"))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"deployed after {len(result.iterations)} iteration(s); outputs in {out}")
    return EXIT_OK


_FORMULAS = {
    "hit-ratio": ("hits total", 2),
    "latency-reduction": ("d k d0", 3),
    "cache-size": ("s_current alpha hit_ratio target", 4),
    "im": ("alpha beta gamma delta epsilon zeta x y", 8),
}


def _formula_value(name: str, args: list[float]) -> float:
    if name == "hit-ratio":
        hits, total = args
        if total <= 0:
            raise ValueError("total must be > 0")
        return hits / total
    if name == "latency-reduction":
        d, k, d0 = args
        if d < 0:
            raise ValueError("d must be >= 0")
        if d0 < 0:
            raise ValueError("d0 must be >= 0")
        return latency_reduction(d, LatencyModelParams(k=k, d0=d0))
    if name == "cache-size":
        s_current, alpha, observed, target = args
        if s_current < 0:
            raise ValueError("S_current must be >= 0")
        if not 0.0 <= observed <= 1.0:
            raise ValueError("hit_ratio must be within [0, 1]")
        return adjust_cache_size(
            s_current, observed, TuningParams(alpha=alpha, target_hit_ratio=target)
        )
    # name == "im"
    return instruct_effectiveness(InstructSetupParams(*args))


def cmd_formula(name: str, raw_args: list[str]) -> int:
    if name not in _FORMULAS:
        print(
            f"error: unknown formula '{name}' (choose from {', '.join(sorted(_FORMULAS))})",
            file=sys.stderr,
        )
        return EXIT_INVALID
    signature, arity = _FORMULAS[name]
    if len(raw_args) != arity:
        print(
            f"error: '{name}' takes {arity} arguments ({signature}), got {len(raw_args)}",
            file=sys.stderr,
        )
        return EXIT_INVALID
    try:
        args = [float(a) for a in raw_args]
    except ValueError:
        print(f"error: '{name}' arguments must be numbers", file=sys.stderr)
        return EXIT_INVALID
    try:
        value = _formula_value(name, args)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(format(value, "#.12g"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragcache",
        description="Cache-fronted retrieval pipeline: index corpora, run "
        "tuned-vs-static experiments, evaluate the core formulas.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build an index artifact from a JSONL corpus")
    p_index.add_argument("corpus", help="corpus file, one {'id', 'text'} object per line")
    p_index.add_argument("--out", required=True, help="path for the index artifact (JSON)")

    p_run = sub.add_parser("run", help="integrate, run the experiment, write reports")
    p_run.add_argument("--config", required=True, help="run config (JSON)")
    p_run.add_argument("--out", help="output directory (overrides paths.out_dir)")
    p_run.add_argument("--seed", type=int, help="workload seed override")

    p_formula = sub.add_parser("formula", help="print one formula value")
    p_formula.add_argument("name", help="hit-ratio | latency-reduction | cache-size | im")
    p_formula.add_argument("args", nargs="*", help="formula operands")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep 2 reserved for I/O.
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.command == "index":
        return cmd_index(args.corpus, args.out)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed)
    return cmd_formula(args.name, args.args)


def entrypoint() -> None:
    sys.exit(main())
