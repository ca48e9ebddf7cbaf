# %% [markdown]
# # T gates by merging with magic states
#
# A smooth merge with |A> = |0> + e^{iπ/4}|1> applies R_z(±π/4); a conditional
# |Y> merge fixes the wrong sign.

# %%
import numpy as np

from zxsurgery import rewrite as rw
from zxsurgery import surfacesim as ss
from zxsurgery import surgery as sg
from zxsurgery import tensorcore as tc
from zxsurgery import zxgraph as zg

ens = sg.enumerate_branches(sg.t_merge())
for br in ens.branches:
    phase = tc.phase_between(br.kraus, tc.rz((-1) ** br.outcomes[0] * np.pi / 4) / np.sqrt(2))
    print("outcome", br.outcomes, "-> R_z(%+.0f°), global phase %.3f rad" % ((-1) ** br.outcomes[0] * 45, np.angle(phase)))

# %% the negative branch as a diagram collapses to one green spider
nf, _ = rw.normalize(sg.branch_to_zx(sg.t_merge(), 1))
(s,) = nf.spiders()
print("normal form phase:", zg.format_phase(nf.nodes[s].phase))

# %% the repaired procedure is T on every branch, up to a heralded Z
T = tc.rz(np.pi / 4)
for br in sg.enumerate_branches(sg.t_deterministic()).branches:
    plain = tc.equal_up_to_global_phase(2 * br.kraus, T)
    print(br.outcomes, "T" if plain else "Z·T")

# %% the same merge on distance-2 patches, simulated as a dense statevector
rep = ss.dense_merge_check(ss.SMOOTH_MERGE, sg.FIRST, tc.green_state(np.pi / 4), tc.ket("+"))
for b in rep.branches:
    print(f"outcome {b.outcome}: p = {b.probability:.6f}, fidelity = {b.fidelity:.12f}")
