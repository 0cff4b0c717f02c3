"""
A resumable sweep over (n, k)
=============================

For k = 2^a - 1 the quotient should vanish except at n = 2^s or 2^s + 1.
The CLI writes one json line per pair, so an interrupted run picks up where
it stopped.
"""

import io
import json
import tempfile
from pathlib import Path

from foldrel.cli import run
from foldrel.obstruct import conjecture_sweep

for rec in conjecture_sweep(70, [3, 7, 15]):
    if rec.report.quotient_dim:
        print(rec.report.n, rec.report.k, rec.report.quotient_dim, rec.conforming)

ckpt = Path(tempfile.mkdtemp()) / "sweep.jsonl"
argv = ["sweep", "--n-max", "60", "--k", "3,7", "--checkpoint", str(ckpt)]

out = io.StringIO()
run(argv, out)
print(out.getvalue().splitlines()[0])

# Simulate a crash in the middle of a write.
lines = ckpt.read_text().splitlines()
ckpt.write_text("\n".join(lines[:40]) + "\n" + lines[40][:17])

out = io.StringIO()
code = run(argv + ["--format", "json"], out)
doc = json.loads(out.getvalue())
print("exit", code, "pairs", doc["count"], "violations", len(doc["violations"]))
