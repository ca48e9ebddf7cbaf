"""ZX diagrams: open multigraphs of green (Z) and red (X) spiders.

Node semantics use mixed normalisation:

* a spider of degree 1 is a unit-norm state or effect,
  green ``(|0⟩ + e^{iα}|1⟩)/√2`` and red ``(|+⟩ + e^{iα}|−⟩)/√2``;
* a spider of degree k ≥ 2 is the unnormalised sum
  ``|b…b⟩ + e^{iα}|b'…b'⟩`` over its basis (computational for green,
  ``|±⟩`` for red), with input legs transposed rather than conjugated.

Under this convention the two-spider CNOT picture evaluates to CNOT/√2,
and the positive branch of a merge is exactly its spider.

Wire order: ``inputs[0]`` / ``outputs[0]`` is the most significant qubit
of the evaluated matrix, whose rows are indexed by outputs and columns
by inputs.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import tensorcore as tc

GREEN = "z"
RED = "x"
INPUT = "in"
OUTPUT = "out"
SPIDER_KINDS = (GREEN, RED)
NODE_KINDS = (INPUT, OUTPUT, GREEN, RED)

#: Maximum number of wires (edges) :func:`evaluate` will contract.
MAX_WIRES = 24


class InvalidDiagram(ValueError):
    pass


class CapExceeded(tc.DimensionLimitError):
    pass


def reduce_phase(num, den=1) -> Fraction:
    """Phase ``(num/den)·π`` reduced into ``[0, 2)``, as a multiple of π."""
    if den == 0:
        raise ValueError("phase denominator must be nonzero")
    return Fraction(num, den) % 2


def phase_angle(phase: Fraction) -> float:
    return float(phase) * np.pi


def format_phase(phase: Fraction) -> str:
    if phase == 0:
        return "0"
    if phase == 1:
        return "π"
    num, den = phase.numerator, phase.denominator
    head = "π" if num == 1 else f"{num}π"
    return head if den == 1 else f"{head}/{den}"


@dataclass(frozen=True)
class Node:
    kind: str
    phase: Fraction = Fraction(0)

    @property
    def is_spider(self) -> bool:
        return self.kind in SPIDER_KINDS

    @property
    def is_boundary(self) -> bool:
        return self.kind in (INPUT, OUTPUT)


@dataclass(eq=False)
class ZXDiagram:
    scalar: complex = 1.0 + 0j
    nodes: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    # -- construction ------------------------------------------------------

    def _fresh_id(self) -> int:
        return max(self.nodes, default=-1) + 1

    def add_node(self, kind: str, phase=0, node_id=None) -> int:
        if kind not in NODE_KINDS:
            raise InvalidDiagram(f"unknown node kind {kind!r}")
        nid = self._fresh_id() if node_id is None else node_id
        if nid in self.nodes:
            raise InvalidDiagram(f"duplicate node id {nid}")
        ph = reduce_phase(phase) if kind in SPIDER_KINDS else Fraction(0)
        self.nodes[nid] = Node(kind, ph)
        if kind == INPUT:
            self.inputs.append(nid)
        elif kind == OUTPUT:
            self.outputs.append(nid)
        return nid

    def add_input(self) -> int:
        return self.add_node(INPUT)

    def add_output(self) -> int:
        return self.add_node(OUTPUT)

    def add_spider(self, color: str, phase=0) -> int:
        if color not in SPIDER_KINDS:
            raise InvalidDiagram(f"spider colour must be 'z' or 'x', not {color!r}")
        return self.add_node(color, phase)

    def add_edge(self, a: int, b: int) -> None:
        self.edges.append((a, b) if a <= b else (b, a))

    def remove_edge(self, a: int, b: int) -> None:
        self.edges.remove((a, b) if a <= b else (b, a))

    def remove_node(self, n: int) -> None:
        del self.nodes[n]
        self.edges = [e for e in self.edges if n not in e]
        if n in self.inputs:
            self.inputs.remove(n)
        if n in self.outputs:
            self.outputs.remove(n)

    def set_phase(self, n: int, phase) -> None:
        self.nodes[n] = Node(self.nodes[n].kind, reduce_phase(phase))

    def copy(self) -> "ZXDiagram":
        return copy.deepcopy(self)

    # -- queries -----------------------------------------------------------

    def degree(self, n: int) -> int:
        return sum((a == n) + (b == n) for a, b in self.edges)

    def neighbors(self, n: int) -> list:
        """Neighbour ids with multiplicity (one entry per incident edge)."""
        out = []
        for a, b in self.edges:
            if a == n:
                out.append(b)
            elif b == n:
                out.append(a)
        return out

    def edge_count(self, a: int, b: int) -> int:
        key = (a, b) if a <= b else (b, a)
        return self.edges.count(key)

    def spiders(self) -> list:
        return sorted(n for n, node in self.nodes.items() if node.is_spider)

    @property
    def arity(self) -> tuple:
        return len(self.inputs), len(self.outputs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZXDiagram):
            return NotImplemented
        return (
            complex(self.scalar) == complex(other.scalar)
            and self.nodes == other.nodes
            and sorted(self.edges) == sorted(other.edges)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
        )

    def __repr__(self) -> str:
        return (
            f"ZXDiagram(spiders={len(self.spiders())}, edges={len(self.edges)}, "
            f"in={len(self.inputs)}, out={len(self.outputs)}, scalar={self.scalar:.6g})"
        )


# -- validation -----------------------------------------------------------


def validate(d: ZXDiagram) -> list:
    """Return a list of invariant violations; empty means the diagram is valid."""
    problems = []
    for a, b in d.edges:
        if a not in d.nodes or b not in d.nodes:
            problems.append(f"edge ({a}, {b}) references a missing node")
        if a == b:
            problems.append(f"self-loop on node {a}")
    deg = {n: 0 for n in d.nodes}
    for a, b in d.edges:
        if a in deg:
            deg[a] += 1
        if b in deg:
            deg[b] += 1
    for n, node in d.nodes.items():
        if node.kind not in NODE_KINDS:
            problems.append(f"node {n} has unknown kind {node.kind!r}")
        elif node.is_boundary and deg[n] != 1:
            problems.append(f"boundary node {n} has degree {deg[n]}, expected 1")
        elif node.is_spider and deg[n] < 1:
            problems.append(f"spider {n} has degree 0")
        if node.is_spider and not (0 <= node.phase < 2):
            problems.append(f"spider {n} phase {node.phase} not reduced mod 2")
    ins = sorted(n for n, v in d.nodes.items() if v.kind == INPUT)
    outs = sorted(n for n, v in d.nodes.items() if v.kind == OUTPUT)
    if sorted(d.inputs) != ins or len(set(d.inputs)) != len(d.inputs):
        problems.append("input list does not match the set of input nodes")
    if sorted(d.outputs) != outs or len(set(d.outputs)) != len(d.outputs):
        problems.append("output list does not match the set of output nodes")
    s = complex(d.scalar)
    if not np.isfinite(s.real) or not np.isfinite(s.imag):
        problems.append("scalar is not finite")
    elif s == 0:
        problems.append("scalar is zero")
    return problems


def check(d: ZXDiagram) -> None:
    problems = validate(d)
    if problems:
        raise InvalidDiagram("; ".join(problems))


# -- node semantics -------------------------------------------------------


def spider_tensor(color: str, phase, degree: int) -> np.ndarray:
    """Spider as a rank-``degree`` tensor with every leg written as a ket."""
    if degree < 1:
        raise InvalidDiagram("spiders of degree 0 have no tensor")
    if color not in SPIDER_KINDS:
        raise InvalidDiagram(f"unknown spider colour {color!r}")
    alpha = phase_angle(reduce_phase(Fraction(phase)))
    t = np.zeros((2,) * degree, dtype=complex)
    t[(0,) * degree] = 1
    t[(1,) * degree] = np.exp(1j * alpha)
    if color == RED:
        for axis in range(degree):
            t = np.moveaxis(np.tensordot(tc.H, t, axes=([1], [axis])), 0, axis)
    if degree == 1:
        t = t * tc.SQRT1_2
    return t


def node_tensor(color: str, phase, n_out: int, n_in: int) -> np.ndarray:
    """Spider as a ``2**n_out × 2**n_in`` matrix (outputs index rows)."""
    t = spider_tensor(color, phase, n_out + n_in)
    return t.reshape(2**n_out, 2**n_in)


# -- evaluation -----------------------------------------------------------


def evaluate(d: ZXDiagram) -> np.ndarray:
    """Scalar times the full contraction of the diagram."""
    check(d)
    if len(d.edges) > MAX_WIRES:
        raise CapExceeded(f"{len(d.edges)} wires exceed the cap of {MAX_WIRES}")
    next_index = 0
    boundary_index = {}
    legs = {n: [] for n in d.nodes if d.nodes[n].is_spider}
    operands = []
    for a, b in d.edges:
        ia = next_index
        next_index += 1
        ends = []
        for n in (a, b):
            if d.nodes[n].is_boundary and n in boundary_index:
                raise InvalidDiagram(f"boundary {n} used twice")
            ends.append(n)
        if d.nodes[a].is_boundary and d.nodes[b].is_boundary:
            ib = next_index
            next_index += 1
            boundary_index[a], boundary_index[b] = ia, ib
            operands += [tc.I2, [ia, ib]]
            continue
        for n in ends:
            if d.nodes[n].is_boundary:
                boundary_index[n] = ia
            else:
                legs[n].append(ia)
    for n, idx in legs.items():
        node = d.nodes[n]
        operands += [spider_tensor(node.kind, node.phase, len(idx)), idx]
    out_idx = [boundary_index[n] for n in d.outputs] + [boundary_index[n] for n in d.inputs]
    n_out, n_in = len(d.outputs), len(d.inputs)
    if operands:
        t = np.einsum(*operands, out_idx, optimize="greedy")
    else:
        t = np.ones((), dtype=complex)
    return complex(d.scalar) * np.asarray(t, dtype=complex).reshape(2**n_out, 2**n_in)


def two_norm_of(d: ZXDiagram) -> float:
    return tc.two_norm(evaluate(d))


# -- structural operations ------------------------------------------------


def dagger_diagram(d: ZXDiagram) -> ZXDiagram:
    """Adjoint: swap inputs and outputs, negate phases, conjugate the scalar."""
    check(d)
    out = ZXDiagram(scalar=complex(d.scalar).conjugate())
    swap = {INPUT: OUTPUT, OUTPUT: INPUT}
    for n, node in d.nodes.items():
        if node.is_spider:
            out.nodes[n] = Node(node.kind, reduce_phase(-node.phase))
        else:
            out.nodes[n] = Node(swap[node.kind])
    out.edges = list(d.edges)
    out.inputs = list(d.outputs)
    out.outputs = list(d.inputs)
    return out


def _relabel(d: ZXDiagram, offset: int) -> ZXDiagram:
    out = ZXDiagram(scalar=d.scalar)
    out.nodes = {n + offset: node for n, node in d.nodes.items()}
    out.edges = [(a + offset, b + offset) for a, b in d.edges]
    out.inputs = [n + offset for n in d.inputs]
    out.outputs = [n + offset for n in d.outputs]
    return out


def _splice_out(d: ZXDiagram, n: int) -> None:
    """Delete a degree-2 node and join its two neighbours by one edge."""
    nb = d.neighbors(n)
    if len(nb) != 2:
        raise InvalidDiagram(f"cannot splice node {n} of degree {len(nb)}")
    del d.nodes[n]
    d.edges = [e for e in d.edges if n not in e]
    a, b = nb
    if a == n and b == n:
        d.scalar *= 2  # closed loop of bare wire: trace of identity
    else:
        d.add_edge(a, b)


def _remove_self_loops(d: ZXDiagram) -> None:
    """Contract self-loops on spiders (trace over two legs)."""
    for n in list(d.nodes):
        loops = d.edge_count(n, n)
        if not loops:
            continue
        node = d.nodes[n]
        if node.is_boundary:
            raise InvalidDiagram(f"self-loop on boundary {n}")
        d.edges = [e for e in d.edges if e != (n, n)]
        rest = d.degree(n)
        if rest >= 2:
            continue
        alpha = phase_angle(node.phase)
        if rest == 1:
            d.scalar *= np.sqrt(2)  # unnormalised 1-leg sum vs. unit-norm state
        else:
            d.scalar *= 1 + np.exp(1j * alpha)
            del d.nodes[n]


def compose_sequential(f: ZXDiagram, g: ZXDiagram) -> ZXDiagram:
    """``g ∘ f``: feed f's outputs into g's inputs, wire by wire."""
    if len(f.outputs) != len(g.inputs):
        raise InvalidDiagram(
            f"arity mismatch: {len(f.outputs)} outputs into {len(g.inputs)} inputs"
        )
    check(f)
    check(g)
    offset = max(f.nodes, default=-1) + 1
    g2 = _relabel(g, offset)
    out = ZXDiagram(scalar=complex(f.scalar) * complex(g2.scalar))
    out.nodes = {**f.nodes, **g2.nodes}
    out.edges = list(f.edges) + list(g2.edges)
    joins = list(zip(f.outputs, g2.inputs))
    for fo, gi in joins:
        out.add_edge(fo, gi)
    out.inputs = list(f.inputs)
    out.outputs = list(g2.outputs)
    for fo, gi in joins:
        for n in (fo, gi):
            if n in out.nodes:
                if out.edge_count(n, n):
                    out.edges = [e for e in out.edges if e != (n, n)]
                    del out.nodes[n]
                    out.scalar *= 2
                else:
                    _splice_out(out, n)
    _remove_self_loops(out)
    return out


def compose_parallel(f: ZXDiagram, g: ZXDiagram) -> ZXDiagram:
    """``f ⊗ g`` with f on the more significant wires."""
    offset = max(f.nodes, default=-1) + 1
    g2 = _relabel(g, offset)
    out = ZXDiagram(scalar=complex(f.scalar) * complex(g2.scalar))
    out.nodes = {**f.nodes, **g2.nodes}
    out.edges = list(f.edges) + list(g2.edges)
    out.inputs = list(f.inputs) + list(g2.inputs)
    out.outputs = list(f.outputs) + list(g2.outputs)
    return out


def compact(d: ZXDiagram) -> ZXDiagram:
    """Renumber nodes 0..n−1 (inputs, outputs, then spiders by old id)."""
    order = list(d.inputs) + list(d.outputs) + d.spiders()
    remap = {old: new for new, old in enumerate(order)}
    out = ZXDiagram(scalar=d.scalar)
    out.nodes = {remap[n]: d.nodes[n] for n in order}
    out.edges = sorted(tuple(sorted((remap[a], remap[b]))) for a, b in d.edges)
    out.inputs = [remap[n] for n in d.inputs]
    out.outputs = [remap[n] for n in d.outputs]
    return out


# -- small constructors ---------------------------------------------------


def wire(n: int = 1) -> ZXDiagram:
    d = ZXDiagram()
    ins = [d.add_input() for _ in range(n)]
    outs = [d.add_output() for _ in range(n)]
    for i, o in zip(ins, outs):
        d.add_edge(i, o)
    return d


def spider_diagram(color: str, phase=0, n_in: int = 1, n_out: int = 1) -> ZXDiagram:
    """A single spider with ``n_in`` input and ``n_out`` output wires."""
    d = ZXDiagram()
    ins = [d.add_input() for _ in range(n_in)]
    outs = [d.add_output() for _ in range(n_out)]
    s = d.add_spider(color, phase)
    for b in ins + outs:
        d.add_edge(b, s)
    return d


def state_diagram(label: str) -> ZXDiagram:
    """Product state from ``0 1 + -`` characters using degree-1 spiders."""
    table = {"0": (RED, 0), "1": (RED, 1), "+": (GREEN, 0), "-": (GREEN, 1)}
    d = ZXDiagram()
    outs = [d.add_output() for _ in label]
    for c, o in zip(label, outs):
        try:
            color, ph = table[c]
        except KeyError:
            raise ValueError(f"no spider state for {c!r}") from None
        s = d.add_spider(color, ph)
        d.add_edge(s, o)
    return d


def cnot_diagram() -> ZXDiagram:
    """Green control spider joined to a red target spider; evaluates to CNOT/√2."""
    d = ZXDiagram()
    ci, ti = d.add_input(), d.add_input()
    co, to = d.add_output(), d.add_output()
    g = d.add_spider(GREEN)
    r = d.add_spider(RED)
    for a, b in ((ci, g), (g, co), (ti, r), (r, to), (g, r)):
        d.add_edge(a, b)
    return d
