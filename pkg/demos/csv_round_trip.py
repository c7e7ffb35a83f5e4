#!/usr/bin/env python
"""Write simulated data as CSV, then run the command line tool on it."""
import json
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from hvac_compare.cli import main
from hvac_compare.ingest import write_dataset_csv
from hvac_compare.synth import SyntheticSpec, generate_dataset

work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
spec = SyntheticSpec(n_hours=24 * 60)
for k, base in ((1, 40.0), (2, 39.0)):
    d, _ = generate_dataset(replace(spec, seed=k, energy_base=base))
    write_dataset_csv(d, work / f"controller{k}.csv")
(work / "analysis.txt").write_text("# analysis settings\nalpha = 0.05\nreplicates = 499\n")

print((work / "controller1.csv").read_text().splitlines()[0])
print((work / "controller1.csv").read_text().splitlines()[1], "\n")

code = main(["compare", str(work / "controller1.csv"), str(work / "controller2.csv"),
             "--config", str(work / "analysis.txt"), "--out", str(work / "results"),
             "--seed", "7"])
report = json.loads((work / "results" / "report.json").read_text())
print("\nexit code", code)
print("energy:", report["energy"]["interpretation"])
print("comfort:", report["comfort"]["interpretation"])
print("files:", sorted(p.name for p in (work / "results").iterdir()))
