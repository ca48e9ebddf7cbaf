# %% [markdown]
# # CNOT from a smooth split and a rough merge
#
# Build the procedure, list its branches, and check each one against a
# Pauli-dressed CNOT.

# %%
import numpy as np

from zxsurgery import rewrite as rw
from zxsurgery import surgery as sg
from zxsurgery import tensorcore as tc
from zxsurgery import verify as vf
from zxsurgery import zxgraph as zg

proc = sg.cnot_standard()
ens = sg.enumerate_branches(proc)
print(proc.name, "ops:", [op.name for op in proc.ops])

# %% the positive branch is CNOT/√2
K0 = ens[0].kraus
print(np.round(K0 * np.sqrt(2), 6).real)
print("max error:", tc.max_abs_diff(K0, tc.CNOT / np.sqrt(2)))

# %% each branch happens half the time on any product of Pauli eigenstates
for label in ["00", "++", "0+", "i-"]:
    print(label, sg.branch_probabilities(ens, tc.ket(label)))

# %% the ZX picture of the negative branch, before and after normalisation
d = sg.branch_to_zx(proc, 1)
nf, steps = rw.normalize(d)
print(len(d.nodes), "nodes ->", len(nf.nodes), "nodes via", [s.rule for s in steps])
print("same tensor:", rw.semantics_equal(d, nf))

# %% every variant and convention yields a Pauli-dressed CNOT
for prefix, p in vf.cnot_variants():
    for br in sg.enumerate_branches(p).branches:
        found = vf.find_real_dressing(br.kraus * 2 ** (p.n_outcomes / 2), 1e-10)
        print(f"{prefix:28s} {br.outcomes}  ({found[0] or 'I'} ⊗ {found[1] or 'I'})·CNOT")
