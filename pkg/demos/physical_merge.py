# %% [markdown]
# # Physical rough merge on planar patches
#
# Two patches are joined through a column of |+> qubits. Joint X-vertex
# measurements give the merge outcome, and Pauli frame updates absorb the
# rest.

# %%
import json
from pathlib import Path

from zxsurgery import surfacesim as ss
from zxsurgery import surgery as sg

ws = ss.LatticeWorkspace(seed=1)
a = ss.patch_init(ws, "a", 3, 3, "+")
b = ss.patch_init(ws, "b", 3, 3, "-")
print("qubits per patch:", a.n, "stabilizers:", len(a.plaquettes()))

# %% X_L ⊗ X_L = -1 here, so the merge outcome is always 1
bit = ss.rough_merge_phys(ws, "a", "b", "c", sg.FIRST)
print("outcome:", bit, "child X_L:", ss.logical_expectation(ws, "c", "X"))

# %% sweep every forced outcome and compare with the logical Kraus maps
for conv in sg.CONVENTIONS:
    rep = ss.extract_logical_channel(ss.ROUGH_MERGE, conv, 3, 3)
    print(conv, "cases:", len(rep.cases), "pass:", rep.passed)

# %% unforced runs on |0>|0> give a fair coin
counts = ss.merge_statistics(ss.ROUGH_MERGE, sg.FIRST, "0", "0", 2000, seed=0)
print(counts)

# %% the same experiment from a config file, as `zxs surface run` does
config = json.loads((Path(__file__).parent / "configs" / "rough-merge-2x2.json").read_text())
records = ss.run_config(config)
print(len(records), "records, all pass:", all(r["pass"] for r in records))
