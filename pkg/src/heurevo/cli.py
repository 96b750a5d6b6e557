"""Command-line surface: run/resume searches, inspect journals, utilities.

Exit codes: 0 success, 1 run failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from typing import Any

from heurevo import corpus
from heurevo.bridge import WorkerBridge
from heurevo.cap import DirectionPartition, information_gain, shannon_entropy
from heurevo.core.config import config_from_sections, load_config_file
from heurevo.core.journal import journal_replay, masked_lines
from heurevo.core.types import (
    CANDIDATE_SIGNATURES,
    DEFAULT_SENSES,
    TASK_IDS,
    Heuristic,
    TaskSpec,
)
from heurevo.engines import evaluate_heuristic, generate_instances
from heurevo.engines.instances import InstanceSet
from heurevo.errors import ConfigError, HeurevoError
from heurevo.evolve import DEFAULT_OFFSPRING_RUNTIME, resume_search, run_search
from heurevo.llm.gateway import Gateway, MockScript
from heurevo.ppp import pearson

GATEWAY_MODES = ("live", "record", "replay", "mock")


def _resolve(base_dir: str, path: str) -> str:
    """Resolve a config-file path relative to the config file's directory."""
    if os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def task_from_section(section: dict[str, Any], base_dir: str) -> TaskSpec:
    """Build a TaskSpec from the [task] section of a config file."""
    if "task_id" not in section:
        raise ConfigError("config [task] section requires task_id")
    task_id = str(section["task_id"])
    if task_id not in TASK_IDS:
        raise ConfigError(f"unknown task_id {task_id!r}")
    if "train_instances" not in section:
        raise ConfigError("config [task] section requires train_instances")
    solver_params = dict(section.get("solver_params", {}))
    if "seed_source" in section:
        src_path = _resolve(base_dir, str(section["seed_source"]))
        with open(src_path, "r", encoding="utf-8") as fh:
            source = fh.read()
        seed = Heuristic(
            id="seed",
            source=source,
            runtime_tag=str(
                section.get(
                    "seed_runtime",
                    solver_params.get("offspring_runtime", DEFAULT_OFFSPRING_RUNTIME),
                )
            ),
            origin="seed",
        )
    else:
        seed = corpus.seed_heuristic(task_id)
    test = section.get("test_instances", "")
    return TaskSpec(
        task_id=task_id,
        sense=str(section.get("sense", DEFAULT_SENSES[task_id])),
        seed=seed,
        train_instances=_resolve(base_dir, str(section["train_instances"])),
        test_instances=_resolve(base_dir, str(test)) if test else "",
        candidate_signature=str(
            section.get("candidate_signature", CANDIDATE_SIGNATURES[task_id])
        ),
        solver_params=solver_params,
    )


def gateway_from_section(
    section: dict[str, Any], base_dir: str, mode_override: str | None = None
) -> Gateway:
    """Build a Gateway from the [provider] section of a config file."""
    mode = mode_override or section.get("mode")
    if not mode:
        raise ConfigError("provider mode required (config [provider].mode or --mode)")
    if mode not in GATEWAY_MODES:
        raise ConfigError(f"unknown provider mode {mode!r}")
    script = None
    if mode == "mock":
        if "script" not in section:
            raise ConfigError("mock mode requires [provider].script (a script file)")
        script = MockScript.from_file(_resolve(base_dir, str(section["script"])))
    cache_dir = section.get("cache_dir")
    return Gateway(
        mode,
        base_url=section.get("base_url"),
        model=section.get("model"),
        api_key=section.get("api_key"),
        cache_dir=_resolve(base_dir, str(cache_dir)) if cache_dir else None,
        script=script,
    )


def _fmt_gain(gain: Any) -> str:
    if gain is None:
        return "n/a"
    return f"{gain * 100:+.2f}%"


def _fmt_value(value: Any) -> str:
    if value is None:
        return "n/a"
    if not math.isfinite(value) or abs(value) >= 1e300:
        return "failed"
    return f"{value:.6g}"


def _print_run_report(journal_path: str, out=None) -> int:
    """Table-style summary of a finished run; returns an exit code."""
    out = out if out is not None else sys.stdout
    rr = journal_replay(journal_path)
    if not rr.finished:
        print(f"journal {journal_path}: run not finished (resumable)", file=out)
        return 1
    fin = next(e for e in rr.events if e.kind == "run_finished").payload
    best = rr.best
    print(f"journal: {journal_path}", file=out)
    print(
        f"task: {rr.task.task_id} ({rr.task.sense}); "
        f"iterations {fin['iterations_completed']} of {fin['horizon']}; "
        f"evaluations {fin['evaluations_used']} of {rr.config.max_evaluations}",
        file=out,
    )
    if best is not None:
        print(f"best heuristic: {best.id} (origin {best.origin})", file=out)
        print("  " + "\n  ".join(best.source.rstrip("\n").split("\n")), file=out)
    rows = [
        (
            "train",
            fin.get("seed_train_value"),
            fin.get("best_train_value"),
            fin.get("gain_train"),
        ),
        (
            "test",
            fin.get("seed_test_value"),
            fin.get("best_test_value"),
            fin.get("gain_test"),
        ),
    ]
    print(f"{'phase':<6} {'seed':>12} {'best':>12} {'gain':>9}", file=out)
    for phase, seed_v, best_v, gain in rows:
        if seed_v is None and best_v is None:
            continue
        print(
            f"{phase:<6} {_fmt_value(seed_v):>12} {_fmt_value(best_v):>12} "
            f"{_fmt_gain(gain):>9}",
            file=out,
        )
    usage = fin.get("usage", {})
    print(
        f"model usage: {usage.get('calls', 0)} calls, "
        f"{usage.get('context_tokens', 0)} context tokens, "
        f"{usage.get('generation_tokens', 0)} generation tokens",
        file=out,
    )
    return 0


# -- verbs ---------------------------------------------------------------


def _cmd_run(args: argparse.Namespace) -> int:
    sections = load_config_file(args.config)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    run_section = dict(sections["run"])
    if args.seed is not None:
        run_section["rng_seed"] = args.seed
    cfg = config_from_sections(run_section)
    task = task_from_section(sections["task"], base_dir)
    gateway = gateway_from_section(sections["provider"], base_dir, args.mode)
    journal_path = args.journal or (
        os.path.splitext(os.path.basename(args.config))[0] + ".journal.jsonl"
    )
    with WorkerBridge() as bridge:
        run_search(cfg, task, gateway, bridge, journal_path)
    return _print_run_report(journal_path)


def _cmd_resume(args: argparse.Namespace) -> int:
    provider: dict[str, Any] = {}
    base_dir = os.getcwd()
    if args.config:
        provider = load_config_file(args.config)["provider"]
        base_dir = os.path.dirname(os.path.abspath(args.config))
    gateway = gateway_from_section(provider, base_dir, args.mode)
    with WorkerBridge() as bridge:
        resume_search(args.journal, gateway, bridge)
    return _print_run_report(args.journal)


def _cmd_report(args: argparse.Namespace) -> int:
    rr = journal_replay(args.journal)
    out_path = args.out or (os.path.splitext(args.journal)[0] + ".csv")
    best_so_far: float | None = None
    count = 0
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["evaluation", "iteration", "heuristic_id", "value", "best_so_far"]
        )
        for event in rr.events:
            if event.kind != "evaluation_performed":
                continue
            count += 1
            value = float(event.payload["value"])
            if best_so_far is None or value < best_so_far:
                best_so_far = value
            writer.writerow(
                [
                    count,
                    event.payload.get("iteration", ""),
                    event.payload["heuristic_id"],
                    repr(value),
                    repr(best_so_far),
                ]
            )
    print(f"wrote {count} evaluation rows to {out_path}")
    if rr.finished:
        return _print_run_report(args.journal)
    print(f"journal {args.journal}: run not finished")
    return 0


def _cmd_eval_heuristic(args: argparse.Namespace) -> int:
    sections = load_config_file(args.config)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    task = task_from_section(sections["task"], base_dir)
    with open(args.source, "r", encoding="utf-8") as fh:
        source = fh.read()
    runtime = args.runtime or task.solver_params.get(
        "offspring_runtime", DEFAULT_OFFSPRING_RUNTIME
    )
    name = os.path.splitext(os.path.basename(args.source))[0]
    candidate = Heuristic(id=name, source=source, runtime_tag=runtime, origin="seed")
    directory = task.train_instances if args.phase == "train" else task.test_instances
    if not directory:
        raise ConfigError(f"task has no {args.phase} instance set")
    instances = InstanceSet(directory)
    with WorkerBridge() as bridge:
        record, detail = evaluate_heuristic(
            candidate, task, instances, bridge, iteration=0, phase=args.phase
        )
    if record.is_failure:
        print(
            f"{name}: evaluation failed on instance "
            f"{detail.get('failed_instance')}: {detail.get('diagnostic')}"
        )
        return 1
    print(f"{name}: {args.phase} fitness {record.value:.6g} ({task.sense})")
    for fname, obj in zip(instances.names, detail["instance_objectives"]):
        print(f"  {fname}: {obj:.6g}")
    for warning in detail.get("warnings", []):
        print(f"  warning: {warning}")
    return 0


def _cmd_gen_instances(args: argparse.Namespace) -> int:
    paths = generate_instances(
        args.task, count=args.count, size=args.size, rng_seed=args.seed,
        out_dir=args.out,
    )
    print(f"wrote {len(paths)} {args.task} instances to {args.out}")
    return 0


def _cmd_analyze_ig(args: argparse.Namespace) -> int:
    """Each input line: k followed by the k+1 partition probabilities."""
    with open(args.partition_file, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    rows = 0
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        try:
            k = int(fields[0])
            probs = tuple(float(x) for x in fields[1:])
            partition = DirectionPartition(k=k, probabilities=probs)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{args.partition_file}:{lineno}: {exc}") from exc
        entropy = shannon_entropy(probs)
        gain = information_gain(partition)
        bound = math.log(k + 1)
        ok = 0.0 - 1e-12 <= gain <= bound + 1e-12
        print(
            f"line {lineno}: k={k} H={entropy:.6f} IG={gain:.6f} "
            f"bound=ln(k+1)={bound:.6f} within_bounds={'yes' if ok else 'NO'}"
        )
        rows += 1
    if rows == 0:
        raise ConfigError(f"{args.partition_file}: no partitions found")
    return 0


def _cmd_calibrate_ppp(args: argparse.Namespace) -> int:
    rr = journal_replay(args.journal)
    delta = rr.config.delta
    # Prediction (xi) and decision-time bounds per heuristic id.
    predicted: dict[str, tuple[float, float, float]] = {}  # hid -> (xi, lb, ub)
    band_counts = {
        "accepted_band1": 0,
        "accepted_band2": 0,
        "accepted_band3": 0,
        "reevaluate": 0,
    }
    true_values: dict[str, float] = {}
    for event in rr.events:
        if event.kind == "prediction_made":
            lb, ub = event.payload["lb"], event.payload["ub"]
            for p in event.payload["predictions"]:
                predicted[p["heuristic_id"]] = (p["xi"], lb, ub)
        elif event.kind == "fitness_decided":
            for d in event.payload["decisions"]:
                if d["decision"] in band_counts:
                    band_counts[d["decision"]] += 1
        elif event.kind == "evaluation_performed":
            hid = event.payload["heuristic_id"]
            if hid in predicted and hid not in true_values:
                true_values[hid] = float(event.payload["value"])
    pairs = [
        (predicted[hid][0], true) for hid, true in sorted(true_values.items())
    ]
    print(f"journal: {args.journal} (delta={delta:g})")
    print(
        "decisions: "
        + ", ".join(f"{k}={v}" for k, v in sorted(band_counts.items()))
    )
    if not pairs:
        print("prediction pairs: none (no predicted heuristic was later evaluated)")
        return 0
    hits = 0
    for hid in sorted(true_values):
        xi, lb, ub = predicted[hid]
        if ub > lb and abs(xi - true_values[hid]) < delta * (ub - lb):
            hits += 1
    print(f"prediction pairs: {len(pairs)}")
    print(f"accuracy (|error| < delta*(ub-lb)): {hits / len(pairs):.4f}")
    try:
        corr = pearson([p[0] for p in pairs], [p[1] for p in pairs])
        print(f"pearson(xi, true): {corr:.4f}")
    except ConfigError:
        print("pearson(xi, true): n/a (needs >= 2 non-constant pairs)")
    return 0


def _cmd_replay_check(args: argparse.Namespace) -> int:
    rr = journal_replay(args.journal)
    if not rr.finished:
        print(f"journal {args.journal}: run not finished; nothing to verify")
        return 1
    gateway = Gateway("replay", cache_dir=args.cache)
    fd, rerun_path = tempfile.mkstemp(suffix=".jsonl", prefix="replay_check_")
    os.close(fd)
    try:
        with WorkerBridge() as bridge:
            run_search(rr.config, rr.task, gateway, bridge, rerun_path)
        original = masked_lines(args.journal)
        rerun = masked_lines(rerun_path)
    finally:
        os.unlink(rerun_path)
    if original == rerun:
        print(f"replay check: {len(original)} events, byte-identical (masked timing)")
        return 0
    limit = min(len(original), len(rerun))
    first_diff = next(
        (i for i in range(limit) if original[i] != rerun[i]), limit
    )
    print(
        f"replay check FAILED: journals diverge at event {first_diff} "
        f"({len(original)} vs {len(rerun)} events)"
    )
    return 1


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heurevo",
        description="Evolve code heuristics for combinatorial optimization.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run a search from a config file")
    p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--journal", help="journal path (default: <config>.journal.jsonl)")
    p.add_argument("--mode", choices=GATEWAY_MODES, help="override provider mode")
    p.add_argument("--seed", type=int, help="override run.rng_seed")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("resume", help="resume an interrupted run")
    p.add_argument("--journal", required=True, help="journal of the interrupted run")
    p.add_argument("--config", help="config file supplying [provider]")
    p.add_argument("--mode", choices=GATEWAY_MODES, help="override provider mode")
    p.set_defaults(func=_cmd_resume)

    p = sub.add_parser("report", help="summarize a journal; write best-so-far CSV")
    p.add_argument("--journal", required=True)
    p.add_argument("--out", help="CSV path (default: <journal>.csv)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("eval-heuristic", help="evaluate one heuristic source file")
    p.add_argument("--config", required=True, help="config file supplying [task]")
    p.add_argument("--source", required=True, help="heuristic source file")
    p.add_argument("--phase", choices=("train", "test"), default="train")
    p.add_argument("--runtime", help="runtime tag (default: task offspring runtime)")
    p.set_defaults(func=_cmd_eval_heuristic)

    p = sub.add_parser("gen-instances", help="generate a synthetic instance set")
    p.add_argument("--task", required=True, choices=TASK_IDS)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen_instances)

    p = sub.add_parser("analyze-ig", help="entropy/information-gain of partitions")
    p.add_argument("partition_file", help="lines of: k p_0 ... p_k")
    p.set_defaults(func=_cmd_analyze_ig)

    p = sub.add_parser("calibrate-ppp", help="prediction quality report for a journal")
    p.add_argument("--journal", required=True)
    p.set_defaults(func=_cmd_calibrate_ppp)

    p = sub.add_parser("replay-check", help="verify a journal reproduces from cache")
    p.add_argument("--journal", required=True)
    p.add_argument("--cache", required=True, help="record/replay cache directory")
    p.set_defaults(func=_cmd_replay_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HeurevoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
