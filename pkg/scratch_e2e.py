"""Scratch end-to-end exercise of run_search with a scripted gateway."""

import pathlib
import sys
import tempfile

from heurevo import corpus
from heurevo.bridge import WorkerBridge
from heurevo.core.journal import journal_replay, masked_lines, truncate_to_cursor
from heurevo.core.types import RunConfig, TaskSpec
from heurevo.engines import generate_instances
from heurevo.evolve import resume_search, run_search
from heurevo.llm.gateway import Gateway, MockScript, MockEntry


def fenced(source: str) -> str:
    return f"Here is the heuristic:\n```python\n{source}```\n"


INIT_VARIANTS = [
    "bpp_exp_decay", "bpp_threshold", "bpp_fill_ratio", "bpp_product",
    "bpp_softened_uniform", "bpp_squared_complement", "bpp_small_partner",
    "bpp_large_partner", "bpp_harmonic", "bpp_blend", "bpp_gaussian_fill",
]


def build_script() -> MockScript:
    entries = []
    for i in range(1, 15):
        name = INIT_VARIANTS[(i - 1) % len(INIT_VARIANTS)]
        entries.append(MockEntry(
            matcher="substring",
            pattern=f"initialization variant {i} of 14",
            response=fenced(corpus.corpus_source(name)),
            context_tokens=200, generation_tokens=80,
        ))
    entries.append(MockEntry(
        matcher="substring", pattern="Abstract the core components",
        response="- pairwise slack shaping\n- capacity-relative normalization\n- tie handling",
        context_tokens=300, generation_tokens=30,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="actionable search direction",
        response="Sharpen the promise peak around bin-filling pairs.",
        context_tokens=150, generation_tokens=20,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Reflect on the relative performance",
        response="Prefer denser packings over loose ones.",
        context_tokens=120, generation_tokens=18,
    ))
    # crossover: two pathological singles, then an endless duplicate
    entries.append(MockEntry(
        matcher="substring", pattern="learns primarily from the primary parent",
        response=fenced(corpus.corpus_source("bpp_nan_promise")), max_uses=1,
        context_tokens=400, generation_tokens=90,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="learns primarily from the primary parent",
        response=fenced(corpus.corpus_source("bpp_wrong_shape")), max_uses=1,
        context_tokens=400, generation_tokens=90,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="learns primarily from the primary parent",
        response=fenced(corpus.corpus_source("bpp_exp_decay")),
        context_tokens=400, generation_tokens=90,
    ))
    # mutation: one fresh healthy single, then duplicates of the seed
    entries.append(MockEntry(
        matcher="substring", pattern="Derive one mutated variant",
        response=fenced(corpus.corpus_source("bpp_negative_promise")), max_uses=1,
        context_tokens=350, generation_tokens=85,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Derive one mutated variant",
        response=fenced(corpus.corpus_source("bpp_complementarity")),
        context_tokens=350, generation_tokens=85,
    ))
    entries.append(MockEntry(
        matcher="substring", pattern="Predict the fitness value",
        response="\n".join("score=12.0 confidence=0.95" for _ in range(10)),
        context_tokens=500, generation_tokens=60,
    ))
    return MockScript(entries)


def make_task(tmp: pathlib.Path) -> TaskSpec:
    train = tmp / "train"
    test = tmp / "test"
    generate_instances("aco_bpp", count=3, size=25, rng_seed=5, out_dir=train)
    generate_instances("aco_bpp", count=3, size=25, rng_seed=6, out_dir=test)
    return TaskSpec(
        task_id="aco_bpp", sense="minimize",
        seed=corpus.seed_heuristic("aco_bpp"),
        train_instances=str(train), test_instances=str(test),
        candidate_signature="heuristic(demands, capacity) -> pairwise promise matrix",
        solver_params={"n_iterations": 10, "n_ants": 8},
    )


def check(journal_path: str, label: str, expect_ppp: bool):
    rr = journal_replay(journal_path)
    kinds = [e.kind for e in rr.events]
    evals = kinds.count("evaluation_performed")
    best_values = [e.payload["value"] for e in rr.events if e.kind == "best_updated"]
    monotone = all(a > b for a, b in zip(best_values, best_values[1:])) if len(best_values) > 1 else True
    finished = rr.finished
    has_pred = "prediction_made" in kinds
    fin = next(e for e in rr.events if e.kind == "run_finished")
    print(f"[{label}] events={len(rr.events)} evals={evals} finished={finished} "
          f"pop={len(rr.population)} best={rr.best.id}:{rr.best.fitness.value:.3f} "
          f"monotone={monotone} pred_events={has_pred} "
          f"gain_train={fin.payload.get('gain_train')} usage_calls={fin.payload['usage']['calls']}")
    assert finished
    assert monotone
    assert has_pred == expect_ppp
    assert evals <= 40
    return rr


def main():
    tmp = pathlib.Path(tempfile.mkdtemp())
    task = make_task(tmp)
    bridge = WorkerBridge()
    cfg = RunConfig(population_size=15, max_evaluations=40, rng_seed=11, ppp_enabled=False)

    # run 1: plain path (no PPP), mock recording into a cache
    cache1 = tmp / "cache1"
    gw1 = Gateway("mock", script=build_script(), cache_dir=str(cache1))
    best1, j1 = run_search(cfg, task, gw1, bridge, str(tmp / "run1.jsonl"))
    rr1 = check(j1, "hercules", expect_ppp=False)

    # run 2: identical config fresh script -> masked journals must match
    gw2 = Gateway("mock", script=build_script())
    best2, j2 = run_search(cfg, task, gw2, bridge, str(tmp / "run2.jsonl"))
    m1, m2 = masked_lines(j1), masked_lines(j2)
    print("determinism (mock twice):", m1 == m2)
    assert m1 == m2

    # run 3: replay mode straight from run 1's cache
    gw3 = Gateway("replay", cache_dir=str(cache1))
    best3, j3 = run_search(cfg, task, gw3, bridge, str(tmp / "run3.jsonl"))
    print("determinism (replay from cache):", masked_lines(j3) == m1)
    assert masked_lines(j3) == m1

    # run 4: interrupt + resume. Copy journal 1, chop its tail mid-line, resume via replay cache.
    j4 = tmp / "run4.jsonl"
    data = pathlib.Path(j1).read_bytes()
    j4.write_bytes(data[: int(len(data) * 0.6) + 7])  # mid-event cut
    rr_cut = journal_replay(str(j4))
    print(f"cut journal: truncated={rr_cut.truncated} checkpoint_seq={rr_cut.checkpoint_seq}")
    gw4 = Gateway("replay", cache_dir=str(cache1))
    best4, _ = resume_search(str(j4), gw4, bridge)
    m4 = masked_lines(str(j4))
    print("resume equals uninterrupted:", m4 == m1, f"best={best4.id}")
    assert m4 == m1

    # run 5: PPP path, confident predictions -> no post-init conventional evals
    cfg_p = RunConfig(population_size=15, max_evaluations=40, rng_seed=11, ppp_enabled=True)
    gw5 = Gateway("mock", script=build_script())
    best5, j5 = run_search(cfg_p, task, gw5, bridge, str(tmp / "run5.jsonl"))
    rr5 = check(j5, "ppp", expect_ppp=True)
    evals5 = sum(1 for e in rr5.events if e.kind == "evaluation_performed")
    evals1 = sum(1 for e in rr1.events if e.kind == "evaluation_performed")
    print(f"conventional evals: ppp={evals5} plain={evals1} (ppp strictly fewer: {evals5 < evals1})")
    decisions = [d["decision"] for e in rr5.events if e.kind == "fitness_decided" for d in e.payload["decisions"]]
    print("decision kinds seen:", sorted(set(decisions)))
    assert evals5 < evals1

    print("ALL E2E SMOKE CHECKS PASSED")


if __name__ == "__main__":
    main()
