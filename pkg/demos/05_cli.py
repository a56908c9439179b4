"""
Running scenarios from the command line
=======================================

Write a scenario, run it with ``msnet run`` and summarise the output
directory with ``msnet report``.  The same calls work from a shell.
"""

from pathlib import Path
import tempfile

import yaml

from msnet.cli import main

work = Path(tempfile.mkdtemp())
doc = {
    "name": "mm1_demo",
    "seed": 11,
    "task": "Verify",
    "model": {"kind": "single_server",
              "marks": {"per_station": [{"kind": "exponential", "rate": 2.0}]}},
    "arrival": {"kind": "exponential", "rate": 1.0},
    "task_params": {"n_schedule": [1, 2, 4, 8], "replicas": 50_000, "count": 200_000},
}
scenario = work / "mm1_demo.yaml"
scenario.write_text(yaml.safe_dump(doc))

out = work / "runs" / "mm1_demo"
code = main(["run", str(scenario), "--output-dir", str(out)])
print("exit code", code, "->", sorted(p.name for p in out.iterdir()))
main(["report", str(work / "runs")])
