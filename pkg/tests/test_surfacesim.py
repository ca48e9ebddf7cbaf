import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zxsurgery import surfacesim as ss
from zxsurgery import surgery as sg
from zxsurgery import tensorcore as tc


def _symplectic(pauli: dict, n: int) -> np.ndarray:
    v = np.zeros(2 * n, dtype=np.uint8)
    for q, p in pauli.items():
        v[q] = p in "XY"
        v[n + q] = p in "ZY"
    return v


def _anticommute(a, b, n) -> bool:
    return bool((a[:n] @ b[n:] + a[n:] @ b[:n]) % 2)


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        piv = [i for i in range(rank, m.shape[0]) if m[i, col]]
        if not piv:
            continue
        m[[rank, piv[0]]] = m[[piv[0], rank]]
        for i in range(m.shape[0]):
            if i != rank and m[i, col]:
                m[i] ^= m[rank]
        rank += 1
    return rank


def _patch(h, w):
    coords = ss.patch_coords(h, w)
    return ss.PlanarPatch("p", h, w, dict(zip(coords, range(len(coords)))))


# -- geometry ---------------------------------------------------------------


@pytest.mark.parametrize("h, w", list(itertools.product(range(2, 6), repeat=2)))
def test_geometry_invariants(h, w):
    p = _patch(h, w)
    n, m = ss.expected_counts(h, w)
    assert p.n == n == h * w + (h - 1) * (w - 1)
    vecs = [_symplectic(ss.stabilizer_pauli(k, mem), n) for k, mem in p.plaquettes()]
    assert len(vecs) == m
    assert _gf2_rank(np.array(vecs)) == m
    for a, b in itertools.combinations(vecs, 2):
        assert not _anticommute(a, b, n)
    zl, xl = _symplectic(p.logical("Z"), n), _symplectic(p.logical("X"), n)
    assert _anticommute(zl, xl, n)
    for v in vecs:
        assert not _anticommute(zl, v, n) and not _anticommute(xl, v, n)


def test_distance_three_counts():
    assert ss.expected_counts(3, 3) == (13, 12)
    p = _patch(3, 3)
    assert len(p.z_logical()) == 3 and len(p.x_logical()) == 3


def test_patch_too_small():
    with pytest.raises(ss.GeometryError):
        ss.patch_init(ss.LatticeWorkspace(), "p", 1, 3)


def test_label_clash():
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "p", 2, 2)
    with pytest.raises(ValueError):
        ss.patch_init(ws, "p", 2, 2)


# -- initialisation and measurement -----------------------------------------


@pytest.mark.parametrize(
    "label, which, value",
    [("0", "Z", 1), ("1", "Z", -1), ("+", "X", 1), ("-", "X", -1), ("i", "Y", 1), ("j", "Y", -1), ("0", "X", 0)],
)
def test_patch_init_logical_values(label, which, value):
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "p", 3, 3, label)
    assert ss.logical_expectation(ws, "p", which) == value


def test_plaquettes_are_plus_one_after_init():
    ws = ss.LatticeWorkspace()
    p = ss.patch_init(ws, "p", 3, 3, "0")
    assert ws.backend.n == 13
    for kind, mem in p.plaquettes():
        assert ws.measure(ss.stabilizer_pauli(kind, mem)) == 0


def test_small_plus_patch_has_five_qubits():
    ws = ss.LatticeWorkspace()
    assert ss.patch_init(ws, "p", 2, 2, "+").n == 5


def test_measure_examples():
    ws = ss.LatticeWorkspace()
    (q,) = ws.new_qubits(1)
    assert ws.measure({q: "Z"}, forced=1) == 0
    assert ws.measure({q: "X"}, forced=1) == 1
    assert ws.backend.expectation({q: "X"}) == -1


# -- splits ---------------------------------------------------------------------


@pytest.mark.parametrize("forced", list(itertools.product((0, 1), repeat=2)))
def test_rough_split_of_plus(forced):
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "p", 3, 7, "+")
    ss.rough_split_phys(ws, "p", "a", "b", forced=forced)
    assert ws.expectation({"a": "X"}) == 1
    assert ws.expectation({"b": "X"}) == 1


def test_rough_split_of_zero_correlates():
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "p", 3, 7, "0")
    ss.rough_split_phys(ws, "p", "a", "b", forced=(1, 0))
    assert ws.expectation({"a": "Z", "b": "Z"}) == 1
    assert ws.expectation({"a": "Z"}) == 0


def test_all_plus_outcomes_leave_frame_unchanged():
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "p", 3, 7, "0")
    ss.rough_split_phys(ws, "p", "a", "b", forced=(0, 0))
    assert not any(ws.fx) and not any(ws.fz)


def test_split_width_too_small():
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "p", 2, 3)
    with pytest.raises(ss.GeometryError):
        ss.rough_split_phys(ws, "p", "a", "b")


@pytest.mark.parametrize("op, h, w, chains", [
    (ss.ROUGH_SPLIT, 3, 7, ("bottom", "bottom")),
    (ss.SMOOTH_SPLIT, 7, 3, ("right", "right")),
])
@pytest.mark.parametrize("state", ss.STATE_NAMES)
def test_split_frame_equivalence(op, h, w, chains, state):
    """Both daughters corrected toward the far boundary give the same logical data."""
    m = ss.split_outcome_count(op, h, w)
    for forced in itertools.product((0, 1), repeat=m):
        a, b = ss.LatticeWorkspace(), ss.LatticeWorkspace()
        for ws in (a, b):
            ss.patch_init(ws, "p", h, w, state)
        ss.run_split(a, op, "p", "x", "y", forced)
        ss.run_split(b, op, "p", "x", "y", forced, chains)
        assert ss.observed_table(a, ["x", "y"]) == ss.observed_table(b, ["x", "y"])


def test_mismatched_chains_are_caught():
    rep = ss.extract_logical_channel(ss.ROUGH_SPLIT, None, 3, 7, chains=("top", "bottom"))
    assert not rep.passed
    flipped = {k for c in rep.failures for k in c.expected if c.expected[k] != c.observed[k]}
    assert "ZZ" in flipped


# -- merges ---------------------------------------------------------------------


@pytest.mark.parametrize("conv", sg.CONVENTIONS)
def test_rough_merge_plus_plus(conv):
    for seed in range(5):
        ws = ss.LatticeWorkspace(seed=seed)
        ss.patch_init(ws, "a", 3, 3, "+")
        ss.patch_init(ws, "b", 3, 3, "+")
        assert ss.rough_merge_phys(ws, "a", "b", "c", conv) == 0
        assert ws.expectation({"c": "X"}) == 1


@pytest.mark.parametrize("conv", sg.CONVENTIONS)
def test_rough_merge_plus_minus_matches_kraus(conv):
    ws = ss.LatticeWorkspace(seed=3)
    ss.patch_init(ws, "a", 3, 3, "+")
    ss.patch_init(ws, "b", 3, 3, "-")
    assert ss.rough_merge_phys(ws, "a", "b", "c", conv) == 1
    out = sg.merge_kraus(sg.ROUGH, conv, 1) @ tc.ket("+-")
    expected = ss.logical_table(out / tc.two_norm(out), 1)
    assert ss.observed_table(ws, ["c"]) == expected


@pytest.mark.parametrize("forced", list(itertools.product((0, 1), repeat=3)))
def test_rough_merge_zero_zero_both_branches(forced):
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "a", 3, 3, "0")
    ss.patch_init(ws, "b", 3, 3, "0")
    bit = ss.rough_merge_phys(ws, "a", "b", "c", sg.FIRST, forced, (0, 0))
    assert bit == sum(forced) % 2
    assert ws.expectation({"c": "Z"}) == 1


def test_merge_shape_mismatch():
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "a", 2, 2)
    ss.patch_init(ws, "b", 3, 2)
    with pytest.raises(ss.GeometryError):
        ss.rough_merge_phys(ws, "a", "b", "c")


@pytest.mark.parametrize("op", ss.OPERATIONS)
@pytest.mark.parametrize("conv", sg.CONVENTIONS)
def test_channel_agreement_small(op, conv):
    h, w = {ss.ROUGH_SPLIT: (2, 5), ss.SMOOTH_SPLIT: (5, 2)}.get(op, (2, 2))
    rep = ss.extract_logical_channel(op, conv, h, w)
    assert rep.passed, rep.failures[:3]


def test_corrupted_convention_fails():
    ws_conv, kraus_conv = sg.FIRST, sg.SECOND
    ws = ss.LatticeWorkspace()
    ss.patch_init(ws, "a", 2, 2, "+")
    ss.patch_init(ws, "b", 2, 2, "0")
    bit = ss.rough_merge_phys(ws, "a", "b", "c", ws_conv, (1, 0), (0,))
    out = sg.merge_kraus(sg.ROUGH, kraus_conv, bit) @ tc.ket("+0")
    assert ss.observed_table(ws, ["c"]) != ss.logical_table(out / tc.two_norm(out), 1)


# -- dense oracle ------------------------------------------------------------------


def test_dense_encode_zero_and_magic():
    ws = ss.LatticeWorkspace.dense()
    ss.patch_init_dense(ws, "p", 2, 2, tc.ket("0"))
    assert ss.logical_expectation(ws, "p", "Z") == pytest.approx(1.0)
    ws = ss.LatticeWorkspace.dense()
    A = tc.green_state(np.pi / 4)
    ss.patch_init_dense(ws, "p", 2, 2, A)
    assert ss.logical_expectation(ws, "p", "X") == pytest.approx(np.cos(np.pi / 4), abs=1e-9)
    amp = ss.dense_decode(ws, "p")
    assert abs(np.vdot(A.ravel(), amp)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_dense_encoded_state_is_in_codespace():
    ws = ss.LatticeWorkspace.dense()
    p = ss.patch_init_dense(ws, "p", 2, 2, tc.green_state(0.3))
    for kind, mem in p.plaquettes():
        assert ws.backend.expectation(ss.stabilizer_pauli(kind, mem)) == pytest.approx(1.0)


def test_dense_t_merge():
    rep = ss.dense_merge_check(ss.SMOOTH_MERGE, sg.FIRST, tc.green_state(np.pi / 4), tc.ket("+"))
    for b in rep.branches:
        assert b.probability == pytest.approx(0.5, abs=1e-9)
        assert b.fidelity >= 1 - 1e-9
    # decoded states are R_z(±π/4)|+⟩ up to phase: check via ⟨X⟩, ⟨Y⟩
    c = np.cos(np.pi / 4)
    assert rep.branch(0).expectations["X"] == pytest.approx(c) and rep.branch(0).expectations["Y"] == pytest.approx(c)
    assert rep.branch(1).expectations["Y"] == pytest.approx(-c)


def test_dense_y_merge_second_convention():
    rep = ss.dense_merge_check(ss.SMOOTH_MERGE, sg.SECOND, tc.green_state(np.pi / 2), tc.ket("+"))
    assert {b.outcome for b in rep.branches} == {0, 1}
    for b in rep.branches:
        assert b.fidelity >= 1 - 1e-9 and b.probability == pytest.approx(0.5)


def test_dense_rough_zero_zero():
    rep = ss.dense_merge_check(ss.ROUGH_MERGE, sg.FIRST, tc.ket("0"), tc.ket("0"))
    for b in rep.branches:
        assert b.expectations["Z"] == pytest.approx(1.0)


@pytest.mark.parametrize("op", [ss.ROUGH_MERGE, ss.SMOOTH_MERGE])
@pytest.mark.parametrize("states", ["00", "+-", "0+", "i0"])
def test_dense_and_tableau_agree(op, states):
    s1, s2 = states
    dense = ss.dense_merge_check(op, sg.FIRST, tc.ket(s1), tc.ket(s2))
    tab = ss.tableau_merge_paths(op, sg.FIRST, s1, s2)
    dpaths = {(p["forced"], p["aux"]): p for p in dense.paths}
    assert set(dpaths) == {(p["forced"], p["aux"]) for p in tab}
    for p in tab:
        d = dpaths[(p["forced"], p["aux"])]
        assert d["probability"] == pytest.approx(p["probability"], abs=1e-9)
        for k in "XYZ":
            assert d["expectations"][k] == pytest.approx(p["expectations"][k], abs=1e-9)


def test_dense_size_cap():
    with pytest.raises(ss.SizeCapError):
        ss.dense_merge_check(ss.ROUGH_MERGE, sg.FIRST, tc.ket("0"), tc.ket("0"), 3, 3)


# -- statistics and configs -----------------------------------------------------------


def test_merge_statistics_seeded():
    a = ss.merge_statistics(ss.ROUGH_MERGE, sg.FIRST, "0", "0", 300, seed=4)
    b = ss.merge_statistics(ss.ROUGH_MERGE, sg.FIRST, "0", "0", 300, seed=4)
    assert a == b
    assert ss.merge_statistics(ss.ROUGH_MERGE, sg.FIRST, "+", "-", 50, seed=1) == {0: 0, 1: 50}


def test_run_config_forced_single_record():
    recs = ss.run_config({"op": ss.ROUGH_MERGE, "h": 2, "w": 2, "inputs": ["+", "-"], "forced": [1, 0]})
    assert len(recs) == 1 and recs[0]["pass"] and recs[0]["outcome"] == 1


def test_run_config_sweep_and_jsonl():
    recs = ss.run_config({"op": ss.SMOOTH_SPLIT, "h": 5, "w": 2, "inputs": ["0"]})
    assert len(recs) == 2 and all(r["pass"] for r in recs)
    lines = ss.records_to_jsonl(recs).splitlines()
    assert len(lines) == 2 and lines[0].startswith("{")


def test_run_config_unknown_op():
    with pytest.raises(ValueError):
        ss.run_config({"op": "braid"})


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(ss.STATE_NAMES), st.sampled_from(ss.STATE_NAMES), st.integers(0, 2**16))
def test_random_merge_paths_agree_with_kraus(s1, s2, seed):
    ws = ss.LatticeWorkspace(seed=seed)
    ss.patch_init(ws, "a", 2, 2, s1)
    ss.patch_init(ws, "b", 2, 2, s2)
    conv = sg.CONVENTIONS[seed % 2]
    bit = ss.smooth_merge_phys(ws, "a", "b", "c", conv)
    out = sg.merge_kraus(sg.SMOOTH, conv, bit) @ tc.ket(s1 + s2)
    assert tc.two_norm(out) > 1e-9
    assert ss.observed_table(ws, ["c"]) == ss.logical_table(out / tc.two_norm(out), 1)
