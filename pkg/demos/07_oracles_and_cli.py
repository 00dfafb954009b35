"""
Oracles and the command line
============================

Small instances can be solved exactly by enumeration, which is how the
solvers are checked.  The same pipeline is reachable from the ``fairbid``
command: save an instance as a JSON config plus population CSV, then solve
and round it in separate invocations.
"""

import json
import tempfile
from pathlib import Path

from fairbid import Instance, brute_force_integer_opt, exact_lp
from fairbid.cli import main
from fairbid.io import save_instance_config

inst = Instance([1, 1, 2], [1, 1, 1], [0.5, 0.5, 1.0], budget=1.0, ids=["q1", "q2", "q3"])
alloc, opt = brute_force_integer_opt(inst)
print("integer optimum", opt, alloc.y, "| LP optimum", exact_lp(inst).objective)

with tempfile.TemporaryDirectory() as d:
    cfg, sol = Path(d, "e1.json"), Path(d, "sol.json")
    save_instance_config(inst, cfg)
    main(["solve", "--config", str(cfg), "--out", str(sol), "--deterministic"])
    print("solve ->", json.loads(sol.read_text())["objective"])
    main(["round", "--config", str(cfg), "--solution", str(sol), "--mode", "rand",
          "--trials", "5", "--out", str(Path(d, "r.json")), "--deterministic"])
    print("round ->", json.loads(Path(d, "r.json").read_text())["aggregate"])
