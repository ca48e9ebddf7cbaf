"""Logical-level lattice surgery: Kraus operators, procedures and their ZX pictures.

Conventions used throughout:

* outcome bit 0 means the measured product is +1;
* the first-declared qubit label is the most significant tensor factor;
* a merge ``(q1, q2) -> q`` treats ``q1`` as the first parent, and the
  convention ``"first"``/``"second"`` names the parent whose side absorbs
  the byproduct chain on a −1 outcome.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import tensorcore as tc
from . import zxgraph as zg

SMOOTH = "smooth"
ROUGH = "rough"
FIRST = "first"
SECOND = "second"
CONVENTIONS = (FIRST, SECOND)
KINDS = (SMOOTH, ROUGH)

MAX_OUTCOME_BITS = 20
PROCEDURE_VERSION = "lsp-1"


class ProcedureError(ValueError):
    pass


# -- Kraus catalog ---------------------------------------------------------


def _outer(out_label: str, in_label: str) -> np.ndarray:
    return tc.ket(out_label) @ tc.bra(in_label)


def split_kraus(kind: str) -> np.ndarray:
    """Isometry of a split: U_S copies the Z basis, U_R the X basis."""
    if kind == SMOOTH:
        return _outer("00", "0") + _outer("11", "1")
    if kind == ROUGH:
        return _outer("++", "+") + _outer("--", "-")
    raise ValueError(f"unknown split kind {kind!r}")


def merge_kraus(kind: str, conv: str, outcome: int) -> np.ndarray:
    """Kraus operator of a merge for the given outcome bit and convention."""
    if kind not in KINDS:
        raise ValueError(f"unknown merge kind {kind!r}")
    if conv not in CONVENTIONS:
        raise ValueError(f"unknown frame convention {conv!r}")
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if kind == SMOOTH:
        if outcome == 0:
            return _outer("0", "00") + _outer("1", "11")
        if conv == FIRST:
            return _outer("0", "10") + _outer("1", "01")
        return _outer("0", "01") + _outer("1", "10")
    if outcome == 0:
        return _outer("+", "++") + _outer("-", "--")
    if conv == FIRST:
        return _outer("+", "-+") + _outer("-", "+-")
    return _outer("+", "+-") + _outer("-", "-+")


def byproduct_pauli(kind: str) -> np.ndarray:
    """Pauli by which the two conventions' negative-branch operators differ."""
    return tc.X if kind == SMOOTH else tc.Z


# -- procedure data model --------------------------------------------------


@dataclass(frozen=True)
class Prep:
    q: str
    color: str  # zg.GREEN or zg.RED
    phase: Fraction = Fraction(0)
    cond: int | None = None  # use ``phase`` only when this outcome bit is 1

    @property
    def name(self) -> str:
        return "prep_g" if self.color == zg.GREEN else "prep_r"

    def phase_for(self, bits) -> Fraction:
        if self.cond is None or bits[self.cond]:
            return self.phase
        return Fraction(0)


@dataclass(frozen=True)
class Split:
    kind: str
    q: str
    out: tuple

    @property
    def name(self) -> str:
        return "split_s" if self.kind == SMOOTH else "split_r"


@dataclass(frozen=True)
class Merge:
    kind: str
    inputs: tuple
    out: str
    conv: str = FIRST

    @property
    def name(self) -> str:
        return "merge_s" if self.kind == SMOOTH else "merge_r"


@dataclass(frozen=True)
class Measure:
    basis: str  # "z" or "x"
    q: str

    @property
    def name(self) -> str:
        return f"measure_{self.basis}"


@dataclass(frozen=True)
class PauliIf:
    q: str
    pauli: str  # "x" or "z"
    cond: int = -1  # outcome index, or -1 for always

    name = "pauli_if"

    def fires(self, bits) -> bool:
        return self.cond < 0 or bool(bits[self.cond])


def prep_g(q, phase=0, cond=None):
    return Prep(q, zg.GREEN, zg.reduce_phase(Fraction(phase)), cond)


def prep_r(q, phase=0, cond=None):
    return Prep(q, zg.RED, zg.reduce_phase(Fraction(phase)), cond)


def split_s(q, q1, q2):
    return Split(SMOOTH, q, (q1, q2))


def split_r(q, q1, q2):
    return Split(ROUGH, q, (q1, q2))


def merge_s(q1, q2, q, conv=FIRST):
    return Merge(SMOOTH, (q1, q2), q, conv)


def merge_r(q1, q2, q, conv=FIRST):
    return Merge(ROUGH, (q1, q2), q, conv)


def measure_z(q):
    return Measure("z", q)


def measure_x(q):
    return Measure("x", q)


@dataclass
class Procedure:
    inputs: list
    ops: list
    outputs: list
    name: str = ""

    @property
    def n_outcomes(self) -> int:
        return sum(isinstance(op, (Merge, Measure)) for op in self.ops)

    def outcome_ops(self) -> list:
        return [op for op in self.ops if isinstance(op, (Merge, Measure))]


def validate_procedure(p: Procedure) -> None:
    """Raise :class:`ProcedureError` unless ``p`` is dataflow-valid."""
    if len(set(p.inputs)) != len(p.inputs):
        raise ProcedureError("duplicate input labels")
    live = list(p.inputs)
    seen = set(p.inputs)
    bits = 0

    def need(q, i):
        if q not in live:
            raise ProcedureError(f"op {i}: qubit {q!r} is not live")

    def fresh(q, i):
        if q in seen:
            raise ProcedureError(f"op {i}: label {q!r} is already in use")
        seen.add(q)
        live.append(q)

    for i, op in enumerate(p.ops):
        if isinstance(op, Prep):
            if op.color not in zg.SPIDER_KINDS:
                raise ProcedureError(f"op {i}: bad preparation colour {op.color!r}")
            if op.cond is not None and not 0 <= op.cond < bits:
                raise ProcedureError(f"op {i}: condition bit {op.cond} not yet produced")
            fresh(op.q, i)
        elif isinstance(op, Split):
            if op.kind not in KINDS or len(op.out) != 2 or op.out[0] == op.out[1]:
                raise ProcedureError(f"op {i}: malformed split")
            need(op.q, i)
            live.remove(op.q)
            for q in op.out:
                fresh(q, i)
        elif isinstance(op, Merge):
            q1, q2 = op.inputs
            if op.kind not in KINDS or op.conv not in CONVENTIONS or q1 == q2:
                raise ProcedureError(f"op {i}: malformed merge")
            need(q1, i)
            need(q2, i)
            live.remove(q1)
            live.remove(q2)
            fresh(op.out, i)
            bits += 1
        elif isinstance(op, Measure):
            if op.basis not in ("z", "x"):
                raise ProcedureError(f"op {i}: unknown measurement basis {op.basis!r}")
            need(op.q, i)
            live.remove(op.q)
            bits += 1
        elif isinstance(op, PauliIf):
            if op.pauli not in ("x", "z"):
                raise ProcedureError(f"op {i}: unknown Pauli {op.pauli!r}")
            if op.cond >= bits:
                raise ProcedureError(f"op {i}: condition bit {op.cond} not yet produced")
            need(op.q, i)
        else:
            raise ProcedureError(f"op {i}: unknown operation {op!r}")
    if sorted(live) != sorted(p.outputs) or len(set(p.outputs)) != len(p.outputs):
        raise ProcedureError(f"live qubits {live} do not match outputs {p.outputs}")
    if bits > MAX_OUTCOME_BITS:
        raise ProcedureError(f"{bits} outcome bits exceed the cap of {MAX_OUTCOME_BITS}")


# -- branch enumeration ----------------------------------------------------


@dataclass
class Branch:
    outcomes: tuple
    kraus: np.ndarray


@dataclass
class BranchEnsemble:
    procedure: Procedure
    branches: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.branches)

    def __getitem__(self, i) -> Branch:
        return self.branches[i]

    def completeness_error(self) -> float:
        total = sum(tc.adjoint(b.kraus) @ b.kraus for b in self.branches)
        return tc.max_abs_diff(total, np.eye(total.shape[0]))


def _apply(K, live, targets, op, new_labels):
    """Act with ``op`` (2^k_out × 2^k_in) on ``targets`` of a multi-qubit map.

    New labels take the slot of the first target, or go last for preparations.
    """
    n, dim = len(live), K.shape[1]
    pos = [live.index(t) for t in targets]
    rest = [q for q in live if q not in targets]
    slot = sum(1 for q in live[: pos[0]] if q not in targets) if pos else len(rest)
    T = K.reshape((2,) * n + (dim,))
    T = np.moveaxis(T, pos, list(range(len(pos))))
    T = op @ T.reshape(2 ** len(pos), -1)
    k = len(new_labels)
    T = T.reshape((2,) * (k + len(rest)) + (dim,))
    T = np.moveaxis(T, list(range(k)), list(range(slot, slot + k)))
    new_live = rest[:slot] + list(new_labels) + rest[slot:]
    return T.reshape(2 ** len(new_live), dim), new_live


_EFFECTS = {("z", 0): "0", ("z", 1): "1", ("x", 0): "+", ("x", 1): "-"}


def _prep_ket(color, phase) -> np.ndarray:
    alpha = zg.phase_angle(phase)
    return tc.green_state(alpha) if color == zg.GREEN else tc.red_state(alpha)


def branch_kraus(p: Procedure, outcomes) -> np.ndarray:
    """Kraus operator of ``p`` for one outcome vector."""
    bits = tuple(int(b) for b in outcomes)
    if len(bits) != p.n_outcomes:
        raise ProcedureError(f"expected {p.n_outcomes} outcome bits, got {len(bits)}")
    live = list(p.inputs)
    K = np.eye(2 ** len(live), dtype=complex)
    k = 0
    for op in p.ops:
        if isinstance(op, Prep):
            K, live = _apply(K, live, [], _prep_ket(op.color, op.phase_for(bits)), [op.q])
        elif isinstance(op, Split):
            K, live = _apply(K, live, [op.q], split_kraus(op.kind), list(op.out))
        elif isinstance(op, Merge):
            m = merge_kraus(op.kind, op.conv, bits[k])
            K, live = _apply(K, live, list(op.inputs), m, [op.out])
            k += 1
        elif isinstance(op, Measure):
            K, live = _apply(K, live, [op.q], tc.bra(_EFFECTS[op.basis, bits[k]]), [])
            k += 1
        elif isinstance(op, PauliIf):
            if op.fires(bits):
                P = tc.X if op.pauli == "x" else tc.Z
                K, live = _apply(K, live, [op.q], P, [op.q])
    perm = [live.index(q) for q in p.outputs]
    T = K.reshape((2,) * len(live) + (K.shape[1],))
    T = np.transpose(T, perm + [len(live)])
    return T.reshape(2 ** len(live), K.shape[1])


def outcome_vectors(m: int):
    return list(itertools.product((0, 1), repeat=m))


def enumerate_branches(p: Procedure) -> BranchEnsemble:
    validate_procedure(p)
    ens = BranchEnsemble(p)
    for bits in outcome_vectors(p.n_outcomes):
        ens.branches.append(Branch(bits, branch_kraus(p, bits)))
    return ens


def branch_probability(e: BranchEnsemble, i: int, rho) -> float:
    if not 0 <= i < len(e.branches):
        raise IndexError(f"branch index {i} out of range")
    rho = tc.as_matrix(rho)
    if abs(np.trace(rho) - 1) > 1e-9:
        raise ValueError("density operator must have unit trace")
    K = e.branches[i].kraus
    return float(np.real(np.trace(K @ rho @ tc.adjoint(K))))


def branch_probabilities(e: BranchEnsemble, psi) -> np.ndarray:
    psi = tc.as_matrix(psi)
    return np.array([tc.two_norm(b.kraus @ psi) ** 2 for b in e.branches])


def _draw(probs, rng, size=None):
    probs = np.clip(np.asarray(probs, dtype=float), 0, None)
    return rng.choice(len(probs), size=size, p=probs / probs.sum())


def sample(p: Procedure, psi, seed: int = 0, ensemble: BranchEnsemble | None = None):
    """Draw one branch for pure input ``psi``; returns (bits, normalised output)."""
    psi = tc.as_matrix(psi)
    if abs(tc.two_norm(psi) - 1) > 1e-9:
        raise ValueError("input state must be normalised")
    e = ensemble or enumerate_branches(p)
    rng = np.random.default_rng(seed)
    i = int(_draw(branch_probabilities(e, psi), rng))
    out = e.branches[i].kraus @ psi
    return e.branches[i].outcomes, out / tc.two_norm(out)


def sample_many(p: Procedure, psi, trials: int, seed: int = 0) -> dict:
    """Outcome-vector histogram over ``trials`` independent runs."""
    psi = tc.as_matrix(psi)
    e = enumerate_branches(p)
    rng = np.random.default_rng(seed)
    idx = _draw(branch_probabilities(e, psi), rng, size=trials)
    counts = np.bincount(idx, minlength=len(e))
    return {e.branches[i].outcomes: int(c) for i, c in enumerate(counts) if c}


# -- ZX bridge -------------------------------------------------------------


def _pi_between(d: zg.ZXDiagram, a: int, b: int, color: str) -> None:
    x = d.add_spider(color, 1)
    d.add_edge(a, x)
    d.add_edge(x, b)


def procedure_to_zx(p: Procedure, outcomes) -> zg.ZXDiagram:
    """ZX diagram of one branch; evaluates exactly to :func:`branch_kraus`."""
    validate_procedure(p)
    bits = tuple(int(b) for b in outcomes)
    if len(bits) != p.n_outcomes:
        raise ProcedureError(f"expected {p.n_outcomes} outcome bits, got {len(bits)}")
    d = zg.ZXDiagram()
    end = {q: d.add_input() for q in p.inputs}
    k = 0
    for op in p.ops:
        if isinstance(op, Prep):
            end[op.q] = d.add_spider(op.color, op.phase_for(bits))
        elif isinstance(op, Split):
            s = d.add_spider(zg.GREEN if op.kind == SMOOTH else zg.RED)
            d.add_edge(end.pop(op.q), s)
            end[op.out[0]] = end[op.out[1]] = s
        elif isinstance(op, Merge):
            color = zg.GREEN if op.kind == SMOOTH else zg.RED
            m = d.add_spider(color)
            fixed = 0 if op.conv == FIRST else 1
            for j, q in enumerate(op.inputs):
                src = end.pop(q)
                if bits[k] and j == fixed:
                    _pi_between(d, src, m, zg.RED if color == zg.GREEN else zg.GREEN)
                else:
                    d.add_edge(src, m)
            end[op.out] = m
            k += 1
        elif isinstance(op, Measure):
            color = zg.RED if op.basis == "z" else zg.GREEN
            e = d.add_spider(color, bits[k])
            d.add_edge(end.pop(op.q), e)
            k += 1
        elif isinstance(op, PauliIf) and op.fires(bits):
            x = d.add_spider(zg.RED if op.pauli == "x" else zg.GREEN, 1)
            d.add_edge(end[op.q], x)
            end[op.q] = x
    for q in p.outputs:
        o = d.add_output()
        d.add_edge(end[q], o)
    return d


def branch_to_zx(p: Procedure, index: int) -> zg.ZXDiagram:
    vectors = outcome_vectors(p.n_outcomes)
    if not 0 <= index < len(vectors):
        raise IndexError(f"branch index {index} out of range")
    return procedure_to_zx(p, vectors[index])


# -- model verification ----------------------------------------------------


def probe_labels(n_inputs: int) -> list:
    if n_inputs == 0:
        return [""]
    if n_inputs == 1:
        return ["0", "1", "+", "-"]
    if n_inputs == 2:
        return ["00", "01", "++", "+-", "0+"]
    base = ["0" * n_inputs, "+" * n_inputs, "0+" * (n_inputs // 2) + "0" * (n_inputs % 2)]
    return base


def pauli_fingerprint(a, b, n_qubits: int):
    """Label of a Pauli string P with a ≅ P·b (global phase), else None."""
    for label in itertools.product("IXYZ", repeat=n_qubits):
        P = tc.pauli_string("".join(label)) if label else np.eye(1)
        if tc.equal_up_to_global_phase(a, P @ b, 1e-9):
            return "".join(label)
    return None


@dataclass
class BranchCheck:
    outcomes: tuple
    kraus_error: float
    probability_error: float
    passed: bool
    fingerprint: str | None = None


@dataclass
class ModelReport:
    name: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def _flip_conventions(p: Procedure) -> Procedure:
    ops = [
        Merge(op.kind, op.inputs, op.out, SECOND if op.conv == FIRST else FIRST)
        if isinstance(op, Merge)
        else op
        for op in p.ops
    ]
    return Procedure(list(p.inputs), ops, list(p.outputs), p.name)


def verify_model(p: Procedure, tol: float = tc.TOL, corrupt: bool = False) -> ModelReport:
    """Compare every branch's ZX diagram against its Kraus operator.

    With ``corrupt`` the Kraus side uses the opposite merge conventions, a
    negative control whose failures carry a Pauli fingerprint.
    """
    ens = enumerate_branches(_flip_conventions(p) if corrupt else p)
    probes = probe_labels(len(p.inputs))
    checks = []
    for i, br in enumerate(ens.branches):
        diagram = procedure_to_zx(p, br.outcomes)
        value = zg.evaluate(diagram)
        kerr = tc.max_abs_diff(value, br.kraus)
        perr = 0.0
        for label in probes:
            rho = tc.density(tc.ket(label)) if label else np.ones((1, 1))
            prob = branch_probability(ens, i, rho)
            fed = zg.compose_sequential(zg.state_diagram(label), diagram) if label else diagram
            perr = max(perr, abs(zg.two_norm_of(fed) ** 2 - prob))
        ok = kerr <= tol and perr <= tol
        fp = None if ok else pauli_fingerprint(br.kraus, value, len(p.outputs))
        checks.append(BranchCheck(br.outcomes, kerr, perr, ok, fp))
    return ModelReport(p.name, checks)


# -- built-in procedures ---------------------------------------------------


def cnot_standard(conv=FIRST) -> Procedure:
    return Procedure(
        ["c", "t"],
        [split_s("c", "c1", "c2"), merge_r("c2", "t", "t1", conv)],
        ["c1", "t1"],
        "cnot-standard",
    )


def cnot_roughsplit(conv=FIRST) -> Procedure:
    return Procedure(
        ["c", "t"],
        [split_r("t", "t1", "t2"), merge_s("c", "t1", "c1", conv)],
        ["c1", "t2"],
        "cnot-roughsplit",
    )


def cnot_bellpair(conv_s=FIRST, conv_r=FIRST) -> Procedure:
    return Procedure(
        ["c", "t"],
        [
            prep_g("b"),
            split_s("b", "b1", "b2"),
            merge_s("c", "b1", "c1", conv_s),
            merge_r("b2", "t", "t1", conv_r),
        ],
        ["c1", "t1"],
        "cnot-bellpair",
    )


def cnot_splitsplit_roughcap(conv=FIRST) -> Procedure:
    return Procedure(
        ["c", "t"],
        [
            split_s("c", "c1", "c2"),
            split_r("t", "t1", "t2"),
            merge_r("c2", "t1", "m", conv),
            measure_z("m"),
        ],
        ["c1", "t2"],
        "cnot-splitsplit-roughcap",
    )


def cnot_splitsplit_smoothcap(conv=FIRST) -> Procedure:
    return Procedure(
        ["c", "t"],
        [
            split_s("c", "c1", "c2"),
            split_r("t", "t1", "t2"),
            merge_s("c2", "t1", "m", conv),
            measure_x("m"),
        ],
        ["c1", "t2"],
        "cnot-splitsplit-smoothcap",
    )


def magic_merge(phase, conv=FIRST, name="t-merge") -> Procedure:
    """Merge a green-phase resource state into the data qubit (smooth)."""
    return Procedure(["q"], [prep_g("a", phase), merge_s("a", "q", "q1", conv)], ["q1"], name)


def t_merge(conv=FIRST) -> Procedure:
    return magic_merge(Fraction(1, 4), conv, "t-merge")


def y_merge(conv=FIRST) -> Procedure:
    return magic_merge(Fraction(1, 2), conv, "y-merge")


def t_deterministic(conv_t=SECOND, conv_y=FIRST) -> Procedure:
    """T merge, an X controlled on its outcome when the byproduct lands on the
    data side, then a |Y⟩ merge only when the first outcome was −1.

    With ``conv_t="second"`` the negative T branch carries an X byproduct,
    which the ``pauli_if`` removes; with ``"first"`` no X is needed.
    """
    ops = [prep_g("a", Fraction(1, 4)), merge_s("a", "q", "q1", conv_t)]
    if conv_t == SECOND:
        ops.append(PauliIf("q1", "x", 0))
    ops += [prep_g("y", Fraction(1, 2), cond=0), merge_s("y", "q1", "q2", conv_y)]
    return Procedure(["q"], ops, ["q2"], "t-deterministic")


BUILTINS = {
    "cnot-standard": cnot_standard,
    "cnot-roughsplit": cnot_roughsplit,
    "cnot-bellpair": cnot_bellpair,
    "cnot-splitsplit-roughcap": cnot_splitsplit_roughcap,
    "cnot-splitsplit-smoothcap": cnot_splitsplit_smoothcap,
    "t-merge": t_merge,
    "y-merge": y_merge,
    "t-deterministic": t_deterministic,
}


def builtin_procedures() -> dict:
    """The eight named procedures with their default conventions."""
    return {name: build() for name, build in BUILTINS.items()}


def builtin(name: str, *convs) -> Procedure:
    try:
        build = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown procedure {name!r}; choose from {sorted(BUILTINS)}") from None
    return build(*convs)


# -- random procedures -----------------------------------------------------


def random_procedure(seed: int, max_ops: int = 6, max_live: int = 4, max_bits: int = 6) -> Procedure:
    """Small dataflow-valid procedure for property tests."""
    rng = np.random.default_rng(seed)
    n_in = int(rng.integers(1, 3))
    inputs = [f"i{k}" for k in range(n_in)]
    live = list(inputs)
    ops, bits, counter = [], 0, 0

    def fresh():
        nonlocal counter
        counter += 1
        return f"q{counter}"

    phases = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1)]
    for _ in range(int(rng.integers(1, max_ops + 1))):
        choice = rng.choice(["prep", "split", "merge", "measure", "pauli"])
        if choice == "prep" and len(live) < max_live:
            q = fresh()
            color = zg.GREEN if rng.random() < 0.5 else zg.RED
            ops.append(Prep(q, color, phases[int(rng.integers(4))]))
            live.append(q)
        elif choice == "split" and len(live) < max_live and live:
            q = live[int(rng.integers(len(live)))]
            a, b = fresh(), fresh()
            ops.append(Split(SMOOTH if rng.random() < 0.5 else ROUGH, q, (a, b)))
            i = live.index(q)
            live[i : i + 1] = [a, b]
        elif choice == "merge" and len(live) >= 2 and bits < max_bits:
            i, j = rng.choice(len(live), size=2, replace=False)
            q1, q2 = live[int(i)], live[int(j)]
            q = fresh()
            kind = SMOOTH if rng.random() < 0.5 else ROUGH
            ops.append(Merge(kind, (q1, q2), q, FIRST if rng.random() < 0.5 else SECOND))
            live = [x for x in live if x not in (q1, q2)] + [q]
            bits += 1
        elif choice == "measure" and len(live) >= 2 and bits < max_bits:
            q = live[int(rng.integers(len(live)))]
            ops.append(Measure("z" if rng.random() < 0.5 else "x", q))
            live.remove(q)
            bits += 1
        elif choice == "pauli" and live:
            q = live[int(rng.integers(len(live)))]
            cond = int(rng.integers(-1, bits)) if bits else -1
            ops.append(PauliIf(q, "x" if rng.random() < 0.5 else "z", cond))
    outputs = list(live)
    rng.shuffle(outputs)
    return Procedure(inputs, ops, outputs, f"random-{seed}")


# -- procedure files -------------------------------------------------------


def _phase_json(ph: Fraction) -> dict:
    return {"num": ph.numerator, "den": ph.denominator}


def procedure_to_dict(p: Procedure) -> dict:
    ops = []
    for op in p.ops:
        if isinstance(op, Prep):
            rec = {"op": op.name, "q": op.q, "phase": _phase_json(op.phase)}
            if op.cond is not None:
                rec["cond"] = op.cond
        elif isinstance(op, Split):
            rec = {"op": op.name, "q": op.q, "out": list(op.out)}
        elif isinstance(op, Merge):
            rec = {"op": op.name, "in": list(op.inputs), "out": op.out, "conv": op.conv}
        elif isinstance(op, Measure):
            rec = {"op": op.name, "q": op.q}
        else:
            rec = {"op": "pauli_if", "q": op.q, "p": op.pauli, "cond": op.cond}
        ops.append(rec)
    out = {"version": PROCEDURE_VERSION}
    if p.name:
        out["name"] = p.name
    out.update({"inputs": list(p.inputs), "ops": ops, "outputs": list(p.outputs)})
    return out


def _field(rec, key, where, kind=str):
    if key not in rec:
        raise ProcedureError(f"{where}: missing field {key!r}")
    value = rec[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ProcedureError(f"{where}.{key}: expected an integer")
    if kind is str and not isinstance(value, str):
        raise ProcedureError(f"{where}.{key}: expected a string")
    if kind is list and not (isinstance(value, list) and len(value) == 2):
        raise ProcedureError(f"{where}.{key}: expected a pair of labels")
    return value


def procedure_from_dict(data) -> Procedure:
    if not isinstance(data, dict):
        raise ProcedureError("top level: expected a JSON object")
    if data.get("version", PROCEDURE_VERSION) != PROCEDURE_VERSION:
        raise ProcedureError(f"version: unsupported format {data.get('version')!r}")
    ops = []
    for i, rec in enumerate(data.get("ops", [])):
        where = f"ops[{i}]"
        if not isinstance(rec, dict):
            raise ProcedureError(f"{where}: expected an object")
        name = rec.get("op")
        if name in ("prep_g", "prep_r"):
            ph = rec.get("phase", {"num": 0, "den": 1})
            num = _field(ph, "num", f"{where}.phase", int)
            den = _field(ph, "den", f"{where}.phase", int)
            if den <= 0:
                raise ProcedureError(f"{where}.phase.den: must be positive")
            cond = rec.get("cond")
            color = zg.GREEN if name == "prep_g" else zg.RED
            ops.append(Prep(_field(rec, "q", where), color, zg.reduce_phase(num, den), cond))
        elif name in ("split_s", "split_r"):
            kind = SMOOTH if name == "split_s" else ROUGH
            ops.append(Split(kind, _field(rec, "q", where), tuple(_field(rec, "out", where, list))))
        elif name in ("merge_s", "merge_r"):
            kind = SMOOTH if name == "merge_s" else ROUGH
            conv = rec.get("conv", FIRST)
            if conv not in CONVENTIONS:
                raise ProcedureError(f"{where}.conv: expected 'first' or 'second'")
            ins = tuple(_field(rec, "in", where, list))
            ops.append(Merge(kind, ins, _field(rec, "out", where), conv))
        elif name in ("measure_z", "measure_x"):
            ops.append(Measure(name[-1], _field(rec, "q", where)))
        elif name == "pauli_if":
            ops.append(PauliIf(_field(rec, "q", where), _field(rec, "p", where), _field(rec, "cond", where, int)))
        else:
            raise ProcedureError(f"{where}.op: unknown operation {name!r}")
    p = Procedure(list(data.get("inputs", [])), ops, list(data.get("outputs", [])), data.get("name", ""))
    validate_procedure(p)
    return p


def read_procedure(path) -> Procedure:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProcedureError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return procedure_from_dict(data)


def write_procedure(p: Procedure, path) -> None:
    Path(path).write_text(json.dumps(procedure_to_dict(p), indent=2) + "\n", encoding="utf-8")
