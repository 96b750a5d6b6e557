"""Debug stage 4: diff resumed journal vs uninterrupted."""
import pathlib, tempfile, difflib
from scratch_e2e import build_script, make_task, masked_lines
from heurevo.core.config import RunConfig
from heurevo.llm.gateway import Gateway
from heurevo.bridge import WorkerBridge
from heurevo.evolve import run_search, resume_search
from heurevo.core.journal import journal_replay

tmp = pathlib.Path(tempfile.mkdtemp())
task = make_task(tmp)
bridge = WorkerBridge()
cfg = RunConfig(population_size=15, max_evaluations=40, rng_seed=11, ppp_enabled=False)
cache1 = tmp / "cache1"
gw1 = Gateway("mock", script=build_script(), cache_dir=str(cache1))
best1, j1 = run_search(cfg, task, gw1, bridge, str(tmp / "run1.jsonl"))
m1 = masked_lines(j1)

j4 = tmp / "run4.jsonl"
data = pathlib.Path(j1).read_bytes()
j4.write_bytes(data[: int(len(data) * 0.6) + 7])
rr_cut = journal_replay(str(j4))
print(f"cut: truncated={rr_cut.truncated} checkpoint_seq={rr_cut.checkpoint_seq} events={len(rr_cut.events)}")
gw4 = Gateway("replay", cache_dir=str(cache1))
best4, _ = resume_search(str(j4), gw4, bridge)
m4 = masked_lines(str(j4))
print("lines:", len(m1), len(m4))
for i, (a, b) in enumerate(zip(m1, m4)):
    if a != b:
        print(f"--- first diff at line {i}")
        print("RUN1:", a[:400])
        print("RES4:", b[:400])
        break
else:
    if len(m1) != len(m4):
        print("prefix equal; length differs")
        longer, name = (m1, "RUN1") if len(m1) > len(m4) else (m4, "RES4")
        print(name, "extra:", longer[min(len(m1), len(m4))][:400])
