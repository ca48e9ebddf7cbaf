"""Physical planar surface code: patches, Pauli frames, splits and merges.

Patch geometry
--------------
A patch of height ``h`` and width ``w`` has qubits at ``(r, c)`` with
``0 ≤ r ≤ 2h−2``, ``0 ≤ c ≤ 2w−2`` and ``r + c`` even, so
``h·w + (h−1)(w−1)`` of them. Z-faces sit at (odd r, even c) and
X-vertices at (even r, odd c); each acts on its up-to-four neighbours.
The left and right edges are rough, the top and bottom smooth.
``Z_L`` is row 0 (``w`` qubits), ``X_L`` is column 0 (``h`` qubits).

Frames
------
The workspace keeps a per-qubit Pauli frame ``F`` with physical state
``F·|ideal⟩``. A measured Pauli's frame-adjusted value is its raw value
times −1 for every frame bit it anticommutes with. Corrections only ever
edit the frame.

Two backends execute the same protocol: a stabilizer tableau (any size)
and a dense statevector (at most :data:`DENSE_MAX_QUBITS` qubits) for
non-stabilizer inputs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import surgery as sg
from . import tensorcore as tc
from .tableau import Tableau

DENSE_MAX_QUBITS = 12
STATE_NAMES = ("0", "1", "+", "-", "i", "j")
ROUGH_SPLIT, SMOOTH_SPLIT = "rough_split", "smooth_split"
ROUGH_MERGE, SMOOTH_MERGE = "rough_merge", "smooth_merge"
OPERATIONS = (ROUGH_SPLIT, SMOOTH_SPLIT, ROUGH_MERGE, SMOOTH_MERGE)


class GeometryError(ValueError):
    pass


class SizeCapError(ValueError):
    pass


# -- geometry --------------------------------------------------------------


def patch_coords(h: int, w: int) -> list:
    return [(r, c) for r in range(2 * h - 1) for c in range(2 * w - 1) if (r + c) % 2 == 0]


def _around(r: int, c: int) -> list:
    return [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]


@dataclass
class PlanarPatch:
    label: str
    h: int
    w: int
    qubits: dict  # (r, c) -> global qubit index

    @property
    def n(self) -> int:
        return len(self.qubits)

    def _members(self, r: int, c: int) -> list:
        return [self.qubits[p] for p in _around(r, c) if p in self.qubits]

    def z_faces(self) -> list:
        return [
            self._members(r, c) for r in range(1, 2 * self.h - 1, 2) for c in range(0, 2 * self.w - 1, 2)
        ]

    def x_vertices(self) -> list:
        return [
            self._members(r, c) for r in range(0, 2 * self.h - 1, 2) for c in range(1, 2 * self.w - 1, 2)
        ]

    def plaquettes(self) -> list:
        """(type, member indices) for every stabilizer generator."""
        return [("Z", m) for m in self.z_faces()] + [("X", m) for m in self.x_vertices()]

    def z_logical(self) -> list:
        return [self.qubits[(0, c)] for c in range(0, 2 * self.w - 1, 2)]

    def x_logical(self) -> list:
        return [self.qubits[(r, 0)] for r in range(0, 2 * self.h - 1, 2)]

    def logical(self, which: str) -> dict:
        """Physical Pauli of logical X, Y or Z (Y = iXZ, carried by a Y at the corner)."""
        if which == "X":
            return {q: "X" for q in self.x_logical()}
        if which == "Z":
            return {q: "Z" for q in self.z_logical()}
        if which == "Y":
            p = {q: "X" for q in self.x_logical()}
            p.update({q: "Z" for q in self.z_logical()})
            p[self.qubits[(0, 0)]] = "Y"
            return p
        raise ValueError(f"unknown logical operator {which!r}")


def expected_counts(h: int, w: int) -> tuple:
    n = h * w + (h - 1) * (w - 1)
    return n, n - 1


def stabilizer_pauli(kind: str, members) -> dict:
    return {q: kind for q in members}


def _check_size(h: int, w: int) -> None:
    if h < 2 or w < 2:
        raise GeometryError(f"patch must be at least 2x2, got {h}x{w}")


# -- backends --------------------------------------------------------------


class TableauBackend:
    dense = False

    def __init__(self):
        self.tab = Tableau()
        self.prob = 1.0

    def copy(self):
        b = TableauBackend()
        b.tab, b.prob = self.tab.copy(), self.prob
        return b

    @property
    def n(self) -> int:
        return self.tab.n

    def add_qubits(self, k: int, basis: str = "0") -> list:
        idx = self.tab.add_qubits(k)
        if basis == "+":
            for q in idx:
                self.tab.h(q)
        return idx

    def measure(self, pauli: dict, forced=None, rng=None) -> tuple:
        bit, random = self.tab.measure(pauli, forced, rng)
        if random:
            self.prob *= 0.5
        honoured = forced is None or random or bit == forced
        return bit, honoured

    def apply_pauli(self, pauli: dict) -> None:
        self.tab.apply_pauli(pauli)

    def expectation(self, pauli: dict) -> float:
        return float(self.tab.expectation(pauli))


_PAULI_MATS = {"X": tc.X, "Y": tc.Y, "Z": tc.Z}


class DenseBackend:
    dense = True

    def __init__(self):
        self.psi = np.ones(1, dtype=complex)
        self.prob = 1.0

    def copy(self):
        b = DenseBackend()
        b.psi, b.prob = self.psi.copy(), self.prob
        return b

    @property
    def n(self) -> int:
        return int(np.log2(self.psi.size))

    def append_state(self, vec) -> list:
        vec = np.asarray(vec, dtype=complex).ravel()
        k = int(np.log2(vec.size))
        if self.n + k > DENSE_MAX_QUBITS:
            raise SizeCapError(f"dense backend limited to {DENSE_MAX_QUBITS} qubits")
        start = self.n
        self.psi = np.kron(self.psi, vec)
        return list(range(start, start + k))

    def add_qubits(self, k: int, basis: str = "0") -> list:
        return self.append_state(tc.ket(basis * k))

    def apply_to(self, psi, pauli: dict):
        n = self.n
        t = psi.reshape((2,) * n)
        for q, p in pauli.items():
            t = np.moveaxis(np.tensordot(_PAULI_MATS[p], t, axes=([1], [q])), 0, q)
        return t.reshape(-1)

    def apply_pauli(self, pauli: dict) -> None:
        self.psi = self.apply_to(self.psi, pauli)

    def expectation(self, pauli: dict) -> float:
        return float(np.real(np.vdot(self.psi, self.apply_to(self.psi, pauli))))

    def measure(self, pauli: dict, forced=None, rng=None) -> tuple:
        """Project; a forced outcome is always taken, with its probability recorded."""
        p_psi = self.apply_to(self.psi, pauli)
        plus = (self.psi + p_psi) / 2
        p0 = float(np.real(np.vdot(plus, plus)))
        if forced is None:
            if rng is None:
                raise ValueError("random outcome needs either forced or rng")
            forced = int(rng.random() >= p0)
        post = plus if forced == 0 else (self.psi - p_psi) / 2
        p = p0 if forced == 0 else max(0.0, 1.0 - p0)
        self.prob *= p
        norm = np.sqrt(p)
        self.psi = post / norm if norm > 1e-12 else post
        return int(forced), p > 1e-12


# -- workspace -------------------------------------------------------------


@dataclass
class LatticeWorkspace:
    backend: object = field(default_factory=TableauBackend)
    seed: int = 0
    patches: dict = field(default_factory=dict)
    fx: list = field(default_factory=list)
    fz: list = field(default_factory=list)
    log: list = field(default_factory=list)
    honoured: bool = True

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)

    @classmethod
    def dense(cls, seed: int = 0) -> "LatticeWorkspace":
        return cls(backend=DenseBackend(), seed=seed)

    def copy(self, seed=None) -> "LatticeWorkspace":
        ws = LatticeWorkspace(self.backend.copy(), self.seed if seed is None else seed)
        ws.patches = {k: PlanarPatch(p.label, p.h, p.w, dict(p.qubits)) for k, p in self.patches.items()}
        ws.fx, ws.fz, ws.log = list(self.fx), list(self.fz), list(self.log)
        ws.honoured = self.honoured
        return ws

    # qubits and frame

    def new_qubits(self, k: int, basis: str = "0") -> list:
        idx = self.backend.add_qubits(k, basis)
        self.fx += [0] * k
        self.fz += [0] * k
        return idx

    def frame_parity(self, pauli: dict) -> int:
        odd = 0
        for q, p in pauli.items():
            odd ^= (p in "XY" and self.fz[q]) ^ (p in "ZY" and self.fx[q])
        return int(odd)

    def frame_apply(self, pauli: dict) -> None:
        for q, p in pauli.items():
            if p in "XY":
                self.fx[q] ^= 1
            if p in "ZY":
                self.fz[q] ^= 1

    def measure(self, pauli: dict, forced=None, tag: str = "") -> int:
        """Measure and return the frame-adjusted outcome bit."""
        raw, honoured = self.backend.measure(pauli, forced, self.rng)
        self.honoured &= honoured
        adj = raw ^ self.frame_parity(pauli)
        self.log.append((tag, raw, adj))
        return adj

    def patch(self, label: str) -> PlanarPatch:
        try:
            return self.patches[label]
        except KeyError:
            raise KeyError(f"no live patch {label!r}") from None

    def _fresh(self, label: str) -> None:
        if label in self.patches:
            raise ValueError(f"patch label {label!r} already in use")

    # observables

    def logical_pauli(self, spec: dict) -> dict:
        """Physical Pauli for a product of logical operators, e.g. {"a": "X", "b": "Z"}."""
        out = {}
        for label, which in spec.items():
            if which == "I":
                continue
            out.update(self.patch(label).logical(which))
        return out

    def expectation(self, spec: dict) -> float:
        """Frame-adjusted expectation of a logical Pauli product."""
        pauli = self.logical_pauli(spec)
        if not pauli:
            return 1.0
        v = self.backend.expectation(pauli)
        return -v if self.frame_parity(pauli) else v

    def physical_state(self):
        """Dense state with the frame undone (dense backend only)."""
        corr = {}
        for q in range(len(self.fx)):
            if self.fx[q] and self.fz[q]:
                corr[q] = "Y"
            elif self.fx[q]:
                corr[q] = "X"
            elif self.fz[q]:
                corr[q] = "Z"
        return self.backend.apply_to(self.backend.psi, corr) if corr else self.backend.psi


def logical_expectation(ws: LatticeWorkspace, label: str, which: str) -> float:
    """+1 / −1 for a determined logical value, 0 when it is random."""
    return ws.expectation({label: which})


# -- initialisation --------------------------------------------------------


def patch_init(ws: LatticeWorkspace, label: str, h: int, w: int, logical: str = "0", forced=0) -> PlanarPatch:
    """Fresh patch in a logical Pauli eigenstate, all plaquettes +1."""
    ws._fresh(label)
    _check_size(h, w)
    if logical not in STATE_NAMES:
        raise ValueError(f"unknown logical state {logical!r}")
    coords = patch_coords(h, w)
    basis = "+" if logical in "+-" else "0"
    idx = ws.new_qubits(len(coords), basis)
    patch = PlanarPatch(label, h, w, dict(zip(coords, idx)))
    kind = "Z" if basis == "+" else "X"
    gens = patch.z_faces() if kind == "Z" else patch.x_vertices()
    for members in gens:
        ws.backend.measure(stabilizer_pauli(kind, members), forced=forced, rng=ws.rng)
    if logical == "1":
        ws.backend.apply_pauli(patch.logical("X"))
    elif logical == "-":
        ws.backend.apply_pauli(patch.logical("Z"))
    elif logical in "ij":
        ws.backend.measure(patch.logical("Y"), forced=0 if logical == "i" else 1, rng=ws.rng)
    ws.patches[label] = patch
    return patch


def dense_encode(psi, h: int = 2, w: int = 2) -> np.ndarray:
    """Codespace state of an (h, w) patch carrying logical ``psi``.

    ``|L0⟩`` is the projection of ``|0…0⟩`` and ``|L1⟩ = X_L|L0⟩``.
    """
    patch = PlanarPatch("enc", h, w, dict(zip(patch_coords(h, w), range(len(patch_coords(h, w))))))
    return _encode_on(patch, psi)


def _encode_on(patch: PlanarPatch, psi) -> np.ndarray:
    psi = tc.as_matrix(psi).ravel()
    n = patch.n
    if n > DENSE_MAX_QUBITS:
        raise SizeCapError(f"{n} qubits exceed the dense cap of {DENSE_MAX_QUBITS}")
    order = sorted(patch.qubits.values())
    local = {q: i for i, q in enumerate(order)}
    tmp = DenseBackend()
    tmp.psi = np.zeros(2**n, dtype=complex)
    tmp.psi[0] = 1.0
    for kind, members in patch.plaquettes():
        p = {local[q]: kind for q in members}
        tmp.psi = (tmp.psi + tmp.apply_to(tmp.psi, p)) / 2
    norm = np.linalg.norm(tmp.psi)
    assert norm > 1e-9, "codespace projection vanished"
    l0 = tmp.psi / norm
    l1 = tmp.apply_to(l0, {local[q]: "X" for q in patch.x_logical()})
    return psi[0] * l0 + psi[1] * l1


def patch_init_dense(ws: LatticeWorkspace, label: str, h: int, w: int, psi) -> PlanarPatch:
    ws._fresh(label)
    coords = patch_coords(h, w)
    vec = dense_encode(psi, h, w)
    idx = ws.backend.append_state(vec)
    ws.fx += [0] * len(idx)
    ws.fz += [0] * len(idx)
    patch = PlanarPatch(label, h, w, dict(zip(coords, idx)))
    ws.patches[label] = patch
    return patch


def dense_decode(ws: LatticeWorkspace, label: str) -> np.ndarray:
    """Logical amplitudes (a0, a1) of a patch spanning the whole dense state."""
    patch = ws.patch(label)
    if sorted(patch.qubits.values()) != list(range(ws.backend.n)):
        raise ValueError("decode needs the patch to own every qubit of the state")
    state = ws.physical_state()
    l0 = _encode_on(patch, [1, 0])
    l1 = _encode_on(patch, [0, 1])
    return np.array([np.vdot(l0, state), np.vdot(l1, state)])


# -- splits ----------------------------------------------------------------


def _chain_rows(r: int, top: int, bottom: int, toward: str) -> range:
    """Even rows from the defect at odd row ``r`` to the top or bottom edge."""
    return range(top, r, 2) if toward == "top" else range(r + 1, bottom + 1, 2)


def rough_split_phys(ws, label, l1, l2, w1=None, forced=None, chains=("top", "top")) -> list:
    """Z-measure an interior column; daughters of widths ``w1`` and ``w − w1``.

    A −1 on the measured qubit at row r flips the daughters' boundary faces
    at row r; each is repaired by an X chain running up (or down) its
    boundary column.
    """
    p = ws.patch(label)
    w1 = p.w // 2 if w1 is None else w1
    if w1 < 2 or p.w - w1 < 2:
        raise GeometryError(f"cannot split width {p.w} into {w1} + {p.w - w1}; both need ≥ 2")
    ws._fresh(l1)
    ws._fresh(l2)
    cs = 2 * w1 - 1
    rows = list(range(1, 2 * p.h - 1, 2))
    forced = list(forced) if forced is not None else [None] * len(rows)
    outcomes = []
    for r, f in zip(rows, forced):
        outcomes.append(ws.measure({p.qubits[(r, cs)]: "Z"}, f, tag="split"))
    left = {rc: q for rc, q in p.qubits.items() if rc[1] < cs}
    right = {(r, c - cs - 1): q for (r, c), q in p.qubits.items() if c > cs}
    bottom = 2 * p.h - 2
    for r, b in zip(rows, outcomes):
        if b:
            for col, toward in ((cs - 1, chains[0]), (cs + 1, chains[1])):
                ws.frame_apply({p.qubits[(rr, col)]: "X" for rr in _chain_rows(r, 0, bottom, toward)})
    del ws.patches[label]
    ws.patches[l1] = PlanarPatch(l1, p.h, w1, left)
    ws.patches[l2] = PlanarPatch(l2, p.h, p.w - w1, right)
    return outcomes


def smooth_split_phys(ws, label, l1, l2, h1=None, forced=None, chains=("left", "left")) -> list:
    """X-measure an interior row; Z chains run along the daughters' boundary rows."""
    p = ws.patch(label)
    h1 = p.h // 2 if h1 is None else h1
    if h1 < 2 or p.h - h1 < 2:
        raise GeometryError(f"cannot split height {p.h} into {h1} + {p.h - h1}; both need ≥ 2")
    ws._fresh(l1)
    ws._fresh(l2)
    rs = 2 * h1 - 1
    cols = list(range(1, 2 * p.w - 1, 2))
    forced = list(forced) if forced is not None else [None] * len(cols)
    outcomes = []
    for c, f in zip(cols, forced):
        outcomes.append(ws.measure({p.qubits[(rs, c)]: "X"}, f, tag="split"))
    top = {rc: q for rc, q in p.qubits.items() if rc[0] < rs}
    bot = {(r - rs - 1, c): q for (r, c), q in p.qubits.items() if r > rs}
    right_edge = 2 * p.w - 2
    for c, b in zip(cols, outcomes):
        if b:
            for row, toward in ((rs - 1, chains[0]), (rs + 1, chains[1])):
                span = _chain_rows(c, 0, right_edge, "top" if toward == "left" else "bottom")
                ws.frame_apply({p.qubits[(row, cc)]: "Z" for cc in span})
    del ws.patches[label]
    ws.patches[l1] = PlanarPatch(l1, h1, p.w, top)
    ws.patches[l2] = PlanarPatch(l2, p.h - h1, p.w, bot)
    return outcomes


# -- merges ----------------------------------------------------------------


def _pair_defects(positions: list):
    """Pair sorted defect positions; returns (pairs, leftover or None)."""
    pos = sorted(positions)
    pairs = [(pos[i], pos[i + 1]) for i in range(0, len(pos) - 1, 2)]
    return pairs, (pos[-1] if len(pos) % 2 else None)


def rough_merge_phys(ws, l1, l2, out, conv=sg.FIRST, forced_join=None, forced_aux=None) -> int:
    """Join two patches side by side through a fresh |+⟩ column.

    The h join X-vertices multiply to X_L⊗X_L; their frame-adjusted XOR is
    the merge outcome bit. −1 vertices are paired by Z strings on the new
    column, and an unpaired one is sent along its row into the first
    (``conv="first"``) or second parent.
    """
    a, b = ws.patch(l1), ws.patch(l2)
    if a.h != b.h:
        raise GeometryError(f"rough merge needs equal heights, got {a.h} and {b.h}")
    if out != l1 and out != l2:
        ws._fresh(out)
    h, c = a.h, 2 * a.w - 1
    new_rows = list(range(1, 2 * h - 1, 2))
    new = ws.new_qubits(len(new_rows), "+")
    qubits = dict(a.qubits)
    qubits.update({(r, c): q for r, q in zip(new_rows, new)})
    qubits.update({(r, cc + c + 1): q for (r, cc), q in b.qubits.items()})
    child = PlanarPatch(out, h, a.w + b.w, qubits)
    join_rows = list(range(0, 2 * h - 1, 2))
    fj = list(forced_join) if forced_join is not None else [None] * h
    fa = list(forced_aux) if forced_aux is not None else [None] * len(new_rows)
    joins = [ws.measure(stabilizer_pauli("X", child._members(r, c)), f, "join") for r, f in zip(join_rows, fj)]
    for r, q, f in zip(new_rows, new, fa):
        if ws.measure(stabilizer_pauli("Z", child._members(r, c - 1)), f, "aux"):
            ws.frame_apply({q: "X"})
    pairs, left = _pair_defects([r for r, bit in zip(join_rows, joins) if bit])
    for ra, rb in pairs:
        ws.frame_apply({qubits[(r, c)]: "Z" for r in range(ra + 1, rb, 2)})
    if left is not None:
        span = range(0, c, 2) if conv == sg.FIRST else range(c + 1, 2 * child.w - 1, 2)
        ws.frame_apply({qubits[(left, cc)]: "Z" for cc in span})
    del ws.patches[l1], ws.patches[l2]
    ws.patches[out] = child
    return int(np.bitwise_xor.reduce(joins)) if joins else 0


def smooth_merge_phys(ws, l1, l2, out, conv=sg.FIRST, forced_join=None, forced_aux=None) -> int:
    """Join two patches top to bottom through a fresh |0⟩ row (Z_L⊗Z_L)."""
    a, b = ws.patch(l1), ws.patch(l2)
    if a.w != b.w:
        raise GeometryError(f"smooth merge needs equal widths, got {a.w} and {b.w}")
    if out != l1 and out != l2:
        ws._fresh(out)
    w, r = a.w, 2 * a.h - 1
    new_cols = list(range(1, 2 * w - 1, 2))
    new = ws.new_qubits(len(new_cols), "0")
    qubits = dict(a.qubits)
    qubits.update({(r, c): q for c, q in zip(new_cols, new)})
    qubits.update({(rr + r + 1, c): q for (rr, c), q in b.qubits.items()})
    child = PlanarPatch(out, a.h + b.h, w, qubits)
    join_cols = list(range(0, 2 * w - 1, 2))
    fj = list(forced_join) if forced_join is not None else [None] * w
    fa = list(forced_aux) if forced_aux is not None else [None] * len(new_cols)
    joins = [ws.measure(stabilizer_pauli("Z", child._members(r, c)), f, "join") for c, f in zip(join_cols, fj)]
    for c, q, f in zip(new_cols, new, fa):
        if ws.measure(stabilizer_pauli("X", child._members(r - 1, c)), f, "aux"):
            ws.frame_apply({q: "Z"})
    pairs, left = _pair_defects([c for c, bit in zip(join_cols, joins) if bit])
    for ca, cb in pairs:
        ws.frame_apply({qubits[(r, c)]: "X" for c in range(ca + 1, cb, 2)})
    if left is not None:
        span = range(0, r, 2) if conv == sg.FIRST else range(r + 1, 2 * child.h - 1, 2)
        ws.frame_apply({qubits[(rr, left)]: "X" for rr in span})
    del ws.patches[l1], ws.patches[l2]
    ws.patches[out] = child
    return int(np.bitwise_xor.reduce(joins)) if joins else 0


# -- logical channel extraction -------------------------------------------


_LOGICAL_PAULIS = {"X": tc.X, "Y": tc.Y, "Z": tc.Z, "I": tc.I2}


def logical_table(psi, n: int) -> dict:
    """Expectation of every non-identity n-qubit Pauli, rounded to {−1, 0, 1}."""
    psi = tc.as_matrix(psi)
    psi = psi / tc.two_norm(psi)
    out = {}
    for label in itertools.product("IXYZ", repeat=n):
        if set(label) == {"I"}:
            continue
        v = float(np.real((tc.adjoint(psi) @ tc.pauli_string("".join(label)) @ psi)[0, 0]))
        out["".join(label)] = int(np.round(v)) if abs(abs(v) - 1) < 1e-9 else 0
    return out


def observed_table(ws: LatticeWorkspace, labels: list) -> dict:
    out = {}
    for label in itertools.product("IXYZ", repeat=len(labels)):
        if set(label) == {"I"}:
            continue
        v = ws.expectation(dict(zip(labels, label)))
        out["".join(label)] = int(np.round(v))
    return out


@dataclass
class ChannelCase:
    inputs: str
    forced: tuple
    outcome: int | None
    expected: dict
    observed: dict
    passed: bool
    note: str = ""
    aux: tuple = ()


@dataclass
class ChannelReport:
    operation: str
    conv: str | None
    h: int
    w: int
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.cases) and all(c.passed for c in self.cases)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]


def _kind(operation: str) -> str:
    return sg.ROUGH if operation.startswith("rough") else sg.SMOOTH


def run_split(ws, operation, label, l1, l2, forced=None, chains=None):
    if operation == ROUGH_SPLIT:
        return rough_split_phys(ws, label, l1, l2, forced=forced, chains=chains or ("top", "top"))
    return smooth_split_phys(ws, label, l1, l2, forced=forced, chains=chains or ("left", "left"))


def run_merge(ws, operation, l1, l2, out, conv, forced_join=None, forced_aux=None):
    fn = rough_merge_phys if operation == ROUGH_MERGE else smooth_merge_phys
    return fn(ws, l1, l2, out, conv, forced_join, forced_aux)


def split_outcome_count(operation: str, h: int, w: int) -> int:
    return h - 1 if operation == ROUGH_SPLIT else w - 1


def join_count(operation: str, h: int, w: int) -> int:
    return h if operation == ROUGH_MERGE else w


def extract_logical_channel(operation, conv, h, w, inputs=None, aux_patterns=None, chains=None) -> ChannelReport:
    """Run ``operation`` on logical Pauli eigenstates over every forced outcome
    vector and compare frame-adjusted logical expectations with the Kraus maps.

    Splits act on one (h, w) patch; merges join two (h, w) patches.
    """
    if operation not in OPERATIONS:
        raise ValueError(f"unknown operation {operation!r}")
    report = ChannelReport(operation, conv, h, w)
    kind = _kind(operation)
    if operation in (ROUGH_SPLIT, SMOOTH_SPLIT):
        inputs = inputs or list(STATE_NAMES)
        U = sg.split_kraus(kind)
        m = split_outcome_count(operation, h, w)
        for state in inputs:
            base = LatticeWorkspace()
            patch_init(base, "p", h, w, state)
            expected = logical_table(U @ tc.ket(state), 2)
            for forced in itertools.product((0, 1), repeat=m):
                ws = base.copy()
                run_split(ws, operation, "p", "a", "b", forced, chains)
                obs = observed_table(ws, ["a", "b"])
                report.cases.append(ChannelCase(state, forced, None, expected, obs, obs == expected))
        return report
    inputs = inputs or ["".join(p) for p in itertools.product("0+i", repeat=2)]
    aux_patterns = aux_patterns or ["zeros", "ones"]
    m = join_count(operation, h, w)
    n_aux = m - 1
    for state in inputs:
        base = LatticeWorkspace()
        patch_init(base, "a", h, w, state[0])
        patch_init(base, "b", h, w, state[1])
        psi = tc.ket(state)
        branch = {bit: sg.merge_kraus(kind, conv, bit) @ psi for bit in (0, 1)}
        possible = {bit for bit, v in branch.items() if tc.two_norm(v) > 1e-9}
        seen = set()
        for forced in itertools.product((0, 1), repeat=m):
            for pattern in aux_patterns:
                aux = [0] * n_aux if pattern == "zeros" else [1] * n_aux
                ws = base.copy()
                bit = run_merge(ws, operation, "a", "b", "c", conv, forced, aux)
                seen.add(bit)
                if bit not in possible:
                    report.cases.append(ChannelCase(state, forced, bit, {}, {}, False, "impossible branch", tuple(aux)))
                    continue
                expected = logical_table(branch[bit], 1)
                obs = observed_table(ws, ["c"])
                report.cases.append(ChannelCase(state, forced, bit, expected, obs, obs == expected, aux=tuple(aux)))
        if seen != possible:
            report.cases.append(
                ChannelCase(state, (), None, {}, {}, False, f"branches seen {sorted(seen)} vs possible {sorted(possible)}")
            )
    return report


# -- dense checks -----------------------------------------------------------


@dataclass
class DenseBranch:
    outcome: int
    probability: float
    fidelity: float
    expectations: dict


@dataclass
class DenseReport:
    operation: str
    conv: str
    branches: list
    paths: list

    def branch(self, bit: int) -> DenseBranch:
        for b in self.branches:
            if b.outcome == bit:
                return b
        raise KeyError(bit)


def dense_merge_check(operation, conv, psi1, psi2, h: int = 2, w: int = 2) -> DenseReport:
    """Statevector execution of a merge on encoded inputs, all outcome paths.

    Each path's decoded logical state is compared with the normalised
    Kraus image for its merge outcome.
    """
    if operation not in (ROUGH_MERGE, SMOOTH_MERGE):
        raise ValueError("dense check covers merges only")
    n_total = 2 * (h * w + (h - 1) * (w - 1)) + (h - 1 if operation == ROUGH_MERGE else w - 1)
    if n_total > DENSE_MAX_QUBITS:
        raise SizeCapError(f"{n_total} qubits exceed the dense cap of {DENSE_MAX_QUBITS}")
    kind = _kind(operation)
    psi1, psi2 = tc.as_matrix(psi1).ravel(), tc.as_matrix(psi2).ravel()
    psi = np.kron(psi1, psi2).reshape(-1, 1)
    base = LatticeWorkspace.dense()
    patch_init_dense(base, "a", h, w, psi1)
    patch_init_dense(base, "b", h, w, psi2)
    m = join_count(operation, h, w)
    paths = []
    for forced in itertools.product((0, 1), repeat=m):
        for aux in itertools.product((0, 1), repeat=m - 1):
            ws = base.copy()
            bit = run_merge(ws, operation, "a", "b", "c", conv, forced, aux)
            prob = ws.backend.prob
            if prob < 1e-12:
                continue
            amp = dense_decode(ws, "c").reshape(-1, 1)
            target = sg.merge_kraus(kind, conv, bit) @ psi
            fid = float(abs((tc.adjoint(target) @ amp)[0, 0]) ** 2 / (tc.two_norm(target) ** 2 * tc.two_norm(amp) ** 2))
            exps = {p: ws.expectation({"c": p}) for p in "XYZ"}
            paths.append({"forced": forced, "aux": aux, "outcome": bit, "probability": prob, "fidelity": fid, "expectations": exps})
    branches = []
    for bit in (0, 1):
        mine = [p for p in paths if p["outcome"] == bit]
        if not mine:
            continue
        total = sum(p["probability"] for p in mine)
        fid = min(p["fidelity"] for p in mine)
        branches.append(DenseBranch(bit, total, fid, mine[0]["expectations"]))
    return DenseReport(operation, conv, branches, paths)


def tableau_merge_paths(operation, conv, s1: str, s2: str, h: int = 2, w: int = 2) -> list:
    """Forced-outcome paths of a merge on the tableau, mirroring the dense sweep."""
    base = LatticeWorkspace()
    patch_init(base, "a", h, w, s1)
    patch_init(base, "b", h, w, s2)
    m = join_count(operation, h, w)
    paths = []
    for forced in itertools.product((0, 1), repeat=m):
        for aux in itertools.product((0, 1), repeat=m - 1):
            ws = base.copy()
            ws.honoured = True
            bit = run_merge(ws, operation, "a", "b", "c", conv, forced, aux)
            if not ws.honoured:
                continue
            exps = {p: ws.expectation({"c": p}) for p in "XYZ"}
            paths.append({"forced": forced, "aux": aux, "outcome": bit, "probability": ws.backend.prob / base.backend.prob, "expectations": exps})
    return paths


# -- Monte Carlo -------------------------------------------------------------


def merge_statistics(operation, conv, s1, s2, trials, seed=0, h=2, w=2) -> dict:
    """Counts of merge outcome bits over unforced, seeded trials."""
    base = LatticeWorkspace(seed=seed)
    patch_init(base, "a", h, w, s1)
    patch_init(base, "b", h, w, s2)
    rng = np.random.default_rng(seed)
    counts = {0: 0, 1: 0}
    for _ in range(trials):
        ws = base.copy(seed=int(rng.integers(2**63)))
        counts[run_merge(ws, operation, "a", "b", "c", conv)] += 1
    return counts


# -- experiment configs ------------------------------------------------------


def run_config(config: dict) -> list:
    """Execute an experiment description; returns report records (one per branch)."""
    op = config.get("op")
    if op not in OPERATIONS:
        raise ValueError(f"unknown op {op!r}; expected one of {OPERATIONS}")
    h, w = int(config.get("h", 2)), int(config.get("w", 2))
    conv = config.get("conv", sg.FIRST)
    inputs = config.get("inputs") or (["+"] if "split" in op else ["0", "0"])
    forced = config.get("forced")
    trials = int(config.get("trials") or 0)
    seed = int(config.get("seed", 0))
    records = []
    if "merge" in op:
        state = "".join(inputs)
        if trials and forced is None:
            counts = merge_statistics(op, conv, inputs[0], inputs[1], trials, seed, h, w)
            probs = sg.branch_probabilities(_merge_ensemble(op, conv), tc.ket(state))
            for bit in (0, 1):
                freq = counts[bit] / trials
                sigma = np.sqrt(max(probs[bit] * (1 - probs[bit]), 1e-12) / trials)
                records.append({
                    "op": op, "h": h, "w": w, "conv": conv, "inputs": inputs, "outcome": bit,
                    "count": counts[bit], "frequency": freq, "predicted": float(probs[bit]),
                    "pass": bool(abs(freq - probs[bit]) <= 3 * sigma + 1e-12),
                })
            return records
        rep = extract_logical_channel(op, conv, h, w, inputs=[state])
        cases = rep.cases
        if forced is not None:
            cases = [c for c in cases if list(c.forced) == list(forced)][:1]
    else:
        rep = extract_logical_channel(op, conv, h, w, inputs=list(inputs))
        cases = rep.cases
        if forced is not None:
            cases = [c for c in cases if list(c.forced) == list(forced)]
    for c in cases:
        records.append({
            "op": op, "h": h, "w": w, "conv": conv, "inputs": c.inputs, "forced": list(c.forced),
            **({"aux": list(c.aux)} if c.aux else {}),
            "outcome": c.outcome, "predicted": c.expected, "observed": c.observed,
            "pass": c.passed, **({"note": c.note} if c.note else {}),
        })
    return records


def _merge_ensemble(op, conv):
    kind = _kind(op)
    p = sg.Procedure(["a", "b"], [sg.Merge(kind, ("a", "b"), "c", conv)], ["c"])
    return sg.enumerate_branches(p)


def records_to_jsonl(records: list) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
