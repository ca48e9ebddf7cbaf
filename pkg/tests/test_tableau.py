import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zxsurgery import tensorcore as tc
from zxsurgery.tableau import Tableau

MATS = {"X": tc.X, "Y": tc.Y, "Z": tc.Z}


def _op(n, gates):
    """Dense operator for {qubit: 2x2} on n qubits, qubit 0 most significant."""
    return tc.kron_all(*[gates.get(q, tc.I2) for q in range(n)])


def _cnot(n, c, t):
    P0, P1 = np.diag([1, 0]), np.diag([0, 1])
    return _op(n, {c: P0}) + _op(n, {c: P1, t: tc.X})


def _dense_expectation(psi, pauli, n):
    P = _op(n, {q: MATS[p] for q, p in pauli.items()})
    return float(np.real(tc.adjoint(psi) @ P @ psi).item())


def test_fresh_qubits_are_zero():
    t = Tableau(3)
    assert t.expectation({0: "Z"}) == 1
    assert t.expectation({1: "X"}) == 0
    assert t.measure({2: "Z"}) == (0, False)


def test_forced_outcome_only_when_random():
    t = Tableau(1)
    assert t.measure({0: "Z"}, forced=1) == (0, False)
    assert t.measure({0: "X"}, forced=1) == (1, True)
    assert t.expectation({0: "X"}) == -1


def test_random_measurement_needs_source():
    t = Tableau(1)
    t.h(0)
    with pytest.raises(ValueError):
        t.measure({0: "Z"})


def test_bell_pair_correlations():
    t = Tableau(2)
    t.h(0)
    t.cnot(0, 1)
    assert t.expectation({0: "Z", 1: "Z"}) == 1
    assert t.expectation({0: "X", 1: "X"}) == 1
    assert t.expectation({0: "Y", 1: "Y"}) == -1
    assert t.expectation({0: "Z"}) == 0


def test_apply_pauli_flips_signs():
    t = Tableau(2)
    t.apply_pauli({0: "X", 1: "Y"})
    assert t.expectation({0: "Z"}) == -1
    assert t.expectation({1: "Z"}) == -1


def test_add_qubits_keeps_state():
    t = Tableau(1)
    t.h(0)
    t.s(0)
    new = t.add_qubits(2)
    assert new == [1, 2]
    assert t.expectation({0: "Y"}) == 1
    assert t.expectation({1: "Z", 2: "Z"}) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_dense_simulation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    t = Tableau(n)
    psi = tc.ket("0" * n)
    for _ in range(int(rng.integers(0, 20))):
        g = int(rng.integers(4 if n > 1 else 3))
        q = int(rng.integers(n))
        if g == 0:
            t.h(q)
            psi = _op(n, {q: tc.H}) @ psi
        elif g == 1:
            t.s(q)
            psi = _op(n, {q: np.diag([1, 1j])}) @ psi
        elif g == 2:
            p = "XYZ"[int(rng.integers(3))]
            t.apply_pauli({q: p})
            psi = _op(n, {q: MATS[p]}) @ psi
        else:
            c, tt = rng.choice(n, size=2, replace=False)
            t.cnot(int(c), int(tt))
            psi = _cnot(n, int(c), int(tt)) @ psi
    for _ in range(5):
        k = int(rng.integers(1, n + 1))
        qs = rng.choice(n, size=k, replace=False)
        pauli = {int(q): "XYZ"[int(rng.integers(3))] for q in qs}
        assert t.expectation(pauli) == pytest.approx(_dense_expectation(psi, pauli, n), abs=1e-9)
    # a random measurement projects consistently with the dense state
    pauli = {0: "XYZ"[int(rng.integers(3))]}
    before = _dense_expectation(psi, pauli, n)
    bit, random = t.measure(pauli, rng=rng)
    assert random == (abs(before) < 1 - 1e-9)
    assert t.expectation(pauli) == (-1 if bit else 1)
