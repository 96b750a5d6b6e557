"""CLI smoke pass: every verb exercised against a mock-scripted run."""
from __future__ import annotations

import json
import pathlib
import tempfile

from scratch_e2e import build_script
from heurevo.cli import main


def script_to_toml(path: pathlib.Path) -> None:
    """Serialize scratch_e2e's mock script as a TOML [[entries]] file."""
    lines = []
    for e in build_script().entries:
        lines.append("[[entries]]")
        lines.append(f"matcher = {json.dumps(e.matcher)}")
        lines.append(f"pattern = {json.dumps(e.pattern)}")
        lines.append(f"response = {json.dumps(e.response)}")
        if e.context_tokens:
            lines.append(f"context_tokens = {e.context_tokens}")
        if e.generation_tokens:
            lines.append(f"generation_tokens = {e.generation_tokens}")
        if e.max_uses is not None:
            lines.append(f"max_uses = {e.max_uses}")
        lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")


def write_config(tmp: pathlib.Path, ppp: bool) -> pathlib.Path:
    cfg = tmp / ("ppp.toml" if ppp else "mock.toml")
    cfg.write_text(
        f"""\
[run]
population_size = 15
max_evaluations = 40
rng_seed = 11
ppp_enabled = {"true" if ppp else "false"}

[task]
task_id = "aco_bpp"
train_instances = "train"
test_instances = "test"

[task.solver_params]
n_iterations = 10
n_ants = 8

[provider]
mode = "mock"
script = "script.toml"
cache_dir = "cache"
""",
        encoding="utf-8",
    )
    return cfg


def run() -> None:
    tmp = pathlib.Path(tempfile.mkdtemp())
    print("tmp:", tmp)

    # gen-instances, twice for determinism
    for sub, seed in (("train", 5), ("test", 6)):
        rc = main(["gen-instances", "--task", "aco_bpp", "--count", "3",
                   "--size", "25", "--seed", str(seed), "--out", str(tmp / sub)])
        assert rc == 0, rc
    rc = main(["gen-instances", "--task", "aco_bpp", "--count", "3",
               "--size", "25", "--seed", "5", "--out", str(tmp / "train2")])
    a = sorted((tmp / "train").glob("*.txt"))
    b = sorted((tmp / "train2").glob("*.txt"))
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b], "gen not deterministic"

    script_to_toml(tmp / "script.toml")
    cfg = write_config(tmp, ppp=False)
    journal = tmp / "run.jsonl"
    rc = main(["run", "--config", str(cfg), "--journal", str(journal)])
    print("run rc:", rc)
    assert rc == 0

    # report
    rc = main(["report", "--journal", str(journal), "--out", str(tmp / "curve.csv")])
    assert rc == 0
    rows = (tmp / "curve.csv").read_text().strip().split("\n")
    print("csv rows:", len(rows) - 1, "header:", rows[0])
    best_col = [float(r.split(",")[4]) for r in rows[1:]]
    assert all(x >= y for x, y in zip(best_col, best_col[1:])), "best col increasing!"

    # replay-check against the recorded cache
    rc = main(["replay-check", "--journal", str(journal), "--cache", str(tmp / "cache")])
    print("replay-check rc:", rc)
    assert rc == 0

    # analyze-ig
    part = tmp / "partitions.txt"
    part.write_text("4 0.2 0.2 0.2 0.2 0.2\n2 1.0 0.0 0.0\n# comment\n2 0.5 0.25 0.25\n")
    rc = main(["analyze-ig", str(part)])
    assert rc == 0

    # eval-heuristic on the seed source
    from heurevo import corpus
    src = tmp / "seed.py"
    src.write_text(corpus.corpus_source("bpp_complementarity"))
    rc = main(["eval-heuristic", "--config", str(cfg), "--source", str(src)])
    assert rc == 0
    rc = main(["eval-heuristic", "--config", str(cfg), "--source", str(src), "--phase", "test"])
    assert rc == 0

    # ppp run + calibrate
    cfg_p = write_config(tmp, ppp=True)
    jp = tmp / "ppp.jsonl"
    rc = main(["run", "--config", str(cfg_p), "--journal", str(jp)])
    assert rc == 0
    rc = main(["calibrate-ppp", "--journal", str(jp)])
    assert rc == 0

    # resume on a finished journal is a no-op success
    rc = main(["resume", "--journal", str(journal), "--config", str(cfg)])
    assert rc == 0

    # usage errors
    try:
        main(["frobnicate"])
        raise AssertionError("unknown verb accepted")
    except SystemExit as exc:
        assert exc.code == 2, exc.code
    # run failure: missing config file
    rc = main(["run", "--config", str(tmp / "absent.toml")])
    assert rc == 1, rc

    print("CLI SMOKE PASSED")


if __name__ == "__main__":
    run()
