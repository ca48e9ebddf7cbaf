"""Scalar-exact ZX rewrite rules, a terminating normaliser and a semantic oracle.

Every rule returns a fresh diagram plus a :class:`RewriteStep` whose
``scalar_delta`` has already been multiplied into the new diagram's scalar,
so ``evaluate`` is preserved exactly (up to float round-off).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import tensorcore as tc
from .zxgraph import (
    GREEN,
    RED,
    Node,
    ZXDiagram,
    check,
    evaluate,
    phase_angle,
    reduce_phase,
)

SPIDER_FUSION = "SpiderFusion"
IDENTITY_REMOVAL = "IdentityRemoval"
PI_COPY = "PiCopy"
PI_ABSORB = "PiAbsorb"
RULES = (SPIDER_FUSION, IDENTITY_REMOVAL, PI_COPY, PI_ABSORB)

RANDOM_PHASES = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(3, 2))


class RewriteError(ValueError):
    """A rule's preconditions do not hold at the requested site."""


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    site: tuple
    scalar_delta: complex


def _spider(d: ZXDiagram, n: int) -> Node:
    node = d.nodes.get(n)
    if node is None:
        raise RewriteError(f"node {n} does not exist")
    if not node.is_spider:
        raise RewriteError(f"node {n} is not a spider")
    return node


# -- spider fusion --------------------------------------------------------


def fusion_scalar(deg_a: int, deg_b: int, links: int, phase: Fraction) -> complex:
    """Scalar picked up when fusing two spiders joined by ``links`` edges.

    Degree-1 spiders carry a 1/√2 that the unnormalised sum does not, the
    fused spider regains it if it ends with degree 1, and a fully contracted
    pair leaves the closed value 1 + e^{iγ}.
    """
    c = tc.SQRT1_2 ** ((deg_a == 1) + (deg_b == 1))
    rest = deg_a + deg_b - 2 * links
    if rest == 1:
        c *= np.sqrt(2)
    elif rest == 0:
        c *= 1 + np.exp(1j * phase_angle(phase))
    return complex(c)


def fuse_spiders(d: ZXDiagram, a: int, b: int):
    """Merge adjacent same-colour spiders ``a`` and ``b`` into the lower id."""
    na, nb = _spider(d, a), _spider(d, b)
    if a == b:
        raise RewriteError("cannot fuse a spider with itself")
    if na.kind != nb.kind:
        raise RewriteError(f"spiders {a} and {b} have different colours")
    links = d.edge_count(a, b)
    if links == 0:
        raise RewriteError(f"spiders {a} and {b} are not adjacent")
    keep, gone = min(a, b), max(a, b)
    gamma = reduce_phase(na.phase + nb.phase)
    delta = fusion_scalar(d.degree(a), d.degree(b), links, gamma)
    if abs(delta) < 1e-12:
        raise RewriteError(f"fusing {a} and {b} closes to the zero scalar")
    out = d.copy()
    key = (keep, gone)
    out.edges = [e for e in out.edges if e != key]
    moved = []
    for e in out.edges:
        if gone in e:
            other = e[0] if e[1] == gone else e[1]
            moved.append(other)
    out.edges = [e for e in out.edges if gone not in e]
    del out.nodes[gone]
    for other in moved:
        out.add_edge(keep, other)
    if out.degree(keep) == 0:
        del out.nodes[keep]
    else:
        out.nodes[keep] = Node(na.kind, gamma)
    out.scalar = complex(out.scalar) * delta
    return out, RewriteStep(SPIDER_FUSION, (a, b), delta)


# -- identity removal -----------------------------------------------------


def remove_identity(d: ZXDiagram, n: int):
    """Delete a phase-0 degree-2 spider and splice its wires."""
    node = _spider(d, n)
    if d.degree(n) != 2:
        raise RewriteError(f"spider {n} has degree {d.degree(n)}, not 2")
    if node.phase != 0:
        raise RewriteError(f"spider {n} has nonzero phase {node.phase}π")
    u, v = d.neighbors(n)
    if u == v:
        raise RewriteError(f"removing spider {n} would create a self-loop on {u}")
    out = d.copy()
    out.edges = [e for e in out.edges if n not in e]
    del out.nodes[n]
    out.add_edge(u, v)
    return out, RewriteStep(IDENTITY_REMOVAL, (n,), 1.0 + 0j)


# -- π copy / absorb ------------------------------------------------------


def _pi_move(d: ZXDiagram, pi_node: int, spider: int, rule: str):
    p, s = _spider(d, pi_node), _spider(d, spider)
    if p.phase != 1:
        raise RewriteError(f"node {pi_node} has phase {p.phase}π; only π can be copied")
    if d.degree(pi_node) != 2:
        raise RewriteError(f"π node {pi_node} has degree {d.degree(pi_node)}, not 2")
    if p.kind == s.kind:
        raise RewriteError("π node and spider must have opposite colours")
    if d.edge_count(pi_node, spider) != 1:
        raise RewriteError(f"π node {pi_node} must share exactly one edge with {spider}")
    (w,) = [x for x in d.neighbors(pi_node) if x != spider]
    legs = [x for x in d.neighbors(spider) if x != pi_node]
    alpha = phase_angle(s.phase)
    delta = complex(np.exp(1j * alpha))
    out = d.copy()
    out.edges = [e for e in out.edges if pi_node not in e and spider not in e]
    del out.nodes[pi_node]
    out.add_edge(w, spider)
    out.nodes[spider] = Node(s.kind, reduce_phase(-s.phase))
    for x in legs:
        q = out.add_spider(p.kind, 1)
        out.add_edge(spider, q)
        out.add_edge(q, x)
    out.scalar = complex(out.scalar) * delta
    return out, RewriteStep(rule, (pi_node, spider), delta)


def copy_pi_through(d: ZXDiagram, pi_node: int, spider: int):
    """Push a π node through an opposite-colour spider onto its other legs.

    The spider may sit in any orientation and have any degree ≥ 2; its
    phase α is negated and the scalar gains e^{iα} (1 when α = 0).
    """
    if d.nodes.get(spider) is not None and d.degree(spider) < 2:
        raise RewriteError(f"spider {spider} has degree {d.degree(spider)}; use absorb_pi")
    return _pi_move(d, pi_node, spider, PI_COPY)


def absorb_pi(d: ZXDiagram, pi_node: int, spider: int):
    """Absorb a π node into an adjacent opposite-colour degree-1 spider."""
    if d.nodes.get(spider) is not None and d.degree(spider) != 1:
        raise RewriteError(f"spider {spider} has degree {d.degree(spider)}, not 1")
    return _pi_move(d, pi_node, spider, PI_ABSORB)


# -- site enumeration and normalisation -----------------------------------


def fusion_sites(d: ZXDiagram) -> list:
    sites = []
    for a in d.spiders():
        for b in sorted(set(d.neighbors(a))):
            if b > a and d.nodes[b].is_spider and d.nodes[b].kind == d.nodes[a].kind:
                sites.append((a, b))
    return sites


def identity_sites(d: ZXDiagram) -> list:
    return [
        n
        for n in d.spiders()
        if d.nodes[n].phase == 0 and d.degree(n) == 2 and len(set(d.neighbors(n))) == 2
    ]


def _pi_sites(d: ZXDiagram, want_degree_one: bool) -> list:
    sites = []
    for p in d.spiders():
        node = d.nodes[p]
        if node.phase != 1 or d.degree(p) != 2:
            continue
        for s in sorted(set(d.neighbors(p))):
            other = d.nodes[s]
            if not other.is_spider or other.kind == node.kind or d.edge_count(p, s) != 1:
                continue
            if (d.degree(s) == 1) == want_degree_one:
                sites.append((p, s))
    return sites


def pi_copy_sites(d: ZXDiagram) -> list:
    return _pi_sites(d, want_degree_one=False)


def pi_absorb_sites(d: ZXDiagram) -> list:
    return _pi_sites(d, want_degree_one=True)


def apply_rule(d: ZXDiagram, rule: str, site: tuple):
    if rule == SPIDER_FUSION:
        return fuse_spiders(d, *site)
    if rule == IDENTITY_REMOVAL:
        return remove_identity(d, *site)
    if rule == PI_COPY:
        return copy_pi_through(d, *site)
    if rule == PI_ABSORB:
        return absorb_pi(d, *site)
    raise RewriteError(f"unknown rule {rule!r}")


def all_sites(d: ZXDiagram) -> list:
    """Every (rule, site) pair whose preconditions hold in ``d``."""
    out = [(SPIDER_FUSION, s) for s in fusion_sites(d)]
    out += [(IDENTITY_REMOVAL, (n,)) for n in identity_sites(d)]
    out += [(PI_COPY, s) for s in pi_copy_sites(d)]
    out += [(PI_ABSORB, s) for s in pi_absorb_sites(d)]
    return out


def _first_step(d: ZXDiagram):
    for a, b in fusion_sites(d):
        try:
            return fuse_spiders(d, a, b)
        except RewriteError:
            continue
    for n in identity_sites(d):
        return remove_identity(d, n)
    for p, s in pi_absorb_sites(d):
        return absorb_pi(d, p, s)
    return None


def normalize(d: ZXDiagram):
    """Apply fusion, identity removal and π absorption until none fires.

    Rules are tried in that order at the lowest node ids first. Each step
    removes at least one node, so the loop ends within the initial node
    count. π copying grows the diagram and is never applied here.
    """
    check(d)
    steps = []
    cur = d.copy()
    while True:
        res = _first_step(cur)
        if res is None:
            return cur, steps
        cur, step = res
        steps.append(step)


# -- semantic comparison --------------------------------------------------


def semantics_diff(d1: ZXDiagram, d2: ZXDiagram, mode: str = "exact"):
    """(comparable, max residual, reason) for two diagrams."""
    if d1.arity != d2.arity:
        return False, float("inf"), f"boundary signatures differ: {d1.arity} vs {d2.arity}"
    a, b = evaluate(d1), evaluate(d2)
    return True, tc.comparison_error(a, b, mode), ""


def semantics_equal(d1: ZXDiagram, d2: ZXDiagram, mode: str = "exact", tol: float = tc.TOL) -> bool:
    if d1.arity != d2.arity:
        return False
    return tc.compare(evaluate(d1), evaluate(d2), mode, tol)


# -- random generator -----------------------------------------------------


@dataclass(frozen=True)
class RandomLimits:
    max_spiders: int = 6
    max_boundaries: int = 4
    max_degree: int = 4
    extra_edges: int = 2


def random_diagram(seed: int, limits: RandomLimits = RandomLimits()) -> ZXDiagram:
    """Deterministic small random diagram for property testing."""
    rng = np.random.default_rng(seed)
    n_sp = int(rng.integers(1, limits.max_spiders + 1))
    n_bd = int(rng.integers(1 if n_sp == 1 else 0, limits.max_boundaries + 1))
    n_in = int(rng.integers(0, n_bd + 1))
    d = ZXDiagram()
    ins = [d.add_input() for _ in range(n_in)]
    outs = [d.add_output() for _ in range(n_bd - n_in)]
    sp = []
    for _ in range(n_sp):
        color = GREEN if rng.random() < 0.5 else RED
        phase = RANDOM_PHASES[int(rng.integers(len(RANDOM_PHASES)))]
        sp.append(d.add_spider(color, phase))

    def open_slots(pool):
        return [s for s in pool if d.degree(s) < limits.max_degree]

    for i in range(1, n_sp):
        parent = open_slots(sp[:i])
        d.add_edge(sp[i], parent[int(rng.integers(len(parent)))])
    for b in ins + outs:
        pool = open_slots(sp)
        d.add_edge(b, pool[int(rng.integers(len(pool)))])
    for _ in range(int(rng.integers(0, limits.extra_edges + 1))):
        pool = open_slots(sp)
        if len(pool) < 2:
            break
        i, j = rng.choice(len(pool), size=2, replace=False)
        d.add_edge(pool[int(i)], pool[int(j)])
    return d
