"""Sweep a small defense grid over several seeds through the CLI.

Writes a manifest, runs the experiment command, prints the aggregate
table it produced.  Rerunning reuses finished rows (delete the output
directory to start over).
"""

import json
import os
import sys
import tempfile

from graphpurify import save_dataset, synthetic_dataset
from graphpurify.cli import main

work = os.path.join(tempfile.gettempdir(), "graphpurify_sweep")
data_dir = os.path.join(work, "demo")
os.makedirs(work, exist_ok=True)

if not os.path.isfile(os.path.join(data_dir, "meta.json")):
    save_dataset(synthetic_dataset(num_nodes=120, seed=3, name="demo"), data_dir)

manifest = {
    "datasets": [data_dir],
    "attacks": [
        {"method": "none"},
        {"method": "dice", "rate": 0.2},
        {"method": "dice", "rate": 0.4},
    ],
    "purify": [
        {"scorer": "none"},
        {"scorer": "jaccard", "judge": "p:0.1", "filter": "s"},
        {"scorer": "kld", "judge": "p:0.1", "filter": "s", "iterate": True},
    ],
    "seeds": [0, 1, 2],
    "train": {"epochs": 150},
    "output_dir": os.path.join(work, "grid"),
}
manifest_path = os.path.join(work, "manifest.json")
with open(manifest_path, "w") as f:
    json.dump(manifest, f, indent=2)

rc = main(["experiment", "--manifest", manifest_path])
if rc != 0:
    sys.exit(rc)

# the _agg companion has one row per configuration, seeds averaged
agg = os.path.join(work, "grid", "results_agg.csv")
with open(agg) as f:
    header, *rows = f.read().strip().split("\n")

cols = header.split(",")
keep = ["attack", "rate", "scorer", "accuracy_mean", "accuracy_stderr"]
idx = [cols.index(c) for c in keep]
print("\n" + "  ".join(f"{c:>14}" for c in keep))
for row in rows:
    vals = row.split(",")
    print("  ".join(f"{vals[i]:>14}" for i in idx))
print(f"\nfull tables under {os.path.join(work, 'grid')}")
