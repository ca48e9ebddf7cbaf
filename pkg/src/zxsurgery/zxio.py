"""JSON diagram files ("zxs-1") and Graphviz DOT export.

File layout::

    {"version": "zxs-1",
     "scalar": {"re": 1.0, "im": 0.0},
     "nodes": [{"id": 0, "kind": "in", "order": 0},
               {"id": 4, "kind": "z", "phase": {"num": 1, "den": 4}}, ...],
     "edges": [[0, 4], ...]}

Boundary ``order`` 0 is the most significant qubit (top wire).
"""

from __future__ import annotations

import json
import warnings
from fractions import Fraction
from pathlib import Path

from .zxgraph import (
    GREEN,
    INPUT,
    NODE_KINDS,
    OUTPUT,
    RED,
    Node,
    ZXDiagram,
    format_phase,
    validate,
)

FORMAT_VERSION = "zxs-1"


class ParseError(ValueError):
    """Malformed diagram file; the message names the offending field."""


class PhaseReducedWarning(UserWarning):
    pass


def diagram_to_dict(d: ZXDiagram) -> dict:
    nodes = []
    for n in sorted(d.nodes):
        node = d.nodes[n]
        rec = {"id": n, "kind": node.kind}
        if node.kind == INPUT:
            rec["order"] = d.inputs.index(n)
        elif node.kind == OUTPUT:
            rec["order"] = d.outputs.index(n)
        else:
            rec["phase"] = {"num": node.phase.numerator, "den": node.phase.denominator}
        nodes.append(rec)
    s = complex(d.scalar)
    return {
        "version": FORMAT_VERSION,
        "scalar": {"re": s.real, "im": s.imag},
        "nodes": nodes,
        "edges": [list(e) for e in sorted(d.edges)],
    }


def dumps(d: ZXDiagram) -> str:
    return json.dumps(diagram_to_dict(d), indent=2) + "\n"


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def diagram_from_dict(data) -> ZXDiagram:
    if not isinstance(data, dict):
        raise ParseError("top level: expected a JSON object")
    version = data.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError(f"version: unsupported format {version!r}")
    sc = data.get("scalar", {"re": 1.0, "im": 0.0})
    if not isinstance(sc, dict):
        raise ParseError("scalar: expected an object with 're' and 'im'")
    scalar = complex(_number(sc.get("re", 0.0), "scalar.re"), _number(sc.get("im", 0.0), "scalar.im"))
    raw_nodes = data.get("nodes")
    if not isinstance(raw_nodes, list):
        raise ParseError("nodes: expected a list")
    d = ZXDiagram(scalar=scalar)
    ins, outs = {}, {}
    for i, rec in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: expected an object")
        nid = _int(rec.get("id"), f"{where}.id")
        if nid in d.nodes:
            raise ParseError(f"{where}.id: duplicate node id {nid}")
        kind = rec.get("kind")
        if kind not in NODE_KINDS:
            raise ParseError(f"{where}.kind: unknown node kind {kind!r}")
        if kind in (GREEN, RED):
            ph = rec.get("phase", {"num": 0, "den": 1})
            if not isinstance(ph, dict):
                raise ParseError(f"{where}.phase: expected an object with 'num' and 'den'")
            num = _int(ph.get("num", 0), f"{where}.phase.num")
            den = _int(ph.get("den", 1), f"{where}.phase.den")
            if den <= 0:
                raise ParseError(f"{where}.phase.den: must be a positive integer, got {den}")
            raw = Fraction(num, den)
            reduced = raw % 2
            if reduced != raw or raw.denominator != den:
                warnings.warn(
                    f"{where}.phase: {num}/{den} reduced to {reduced.numerator}/{reduced.denominator}",
                    PhaseReducedWarning,
                    stacklevel=2,
                )
            d.nodes[nid] = Node(kind, reduced)
        else:
            order = _int(rec.get("order"), f"{where}.order")
            table = ins if kind == INPUT else outs
            if order in table:
                raise ParseError(f"{where}.order: duplicate {kind} order {order}")
            table[order] = nid
            d.nodes[nid] = Node(kind)
    for table, name in ((ins, "input"), (outs, "output")):
        if sorted(table) != list(range(len(table))):
            raise ParseError(f"nodes: {name} orders {sorted(table)} are not 0..{len(table) - 1}")
    d.inputs = [ins[k] for k in range(len(ins))]
    d.outputs = [outs[k] for k in range(len(outs))]
    raw_edges = data.get("edges", [])
    if not isinstance(raw_edges, list):
        raise ParseError("edges: expected a list")
    for i, e in enumerate(raw_edges):
        if not isinstance(e, list) or len(e) != 2:
            raise ParseError(f"edges[{i}]: expected a pair [id, id]")
        a, b = _int(e[0], f"edges[{i}][0]"), _int(e[1], f"edges[{i}][1]")
        for x in (a, b):
            if x not in d.nodes:
                raise ParseError(f"edges[{i}]: unknown node id {x}")
        d.add_edge(a, b)
    problems = validate(d)
    if problems:
        raise ParseError("invalid diagram: " + "; ".join(problems))
    return d


def loads(text: str) -> ZXDiagram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return diagram_from_dict(data)


def read_diagram(path) -> ZXDiagram:
    return loads(Path(path).read_text(encoding="utf-8"))


def write_diagram(d: ZXDiagram, path) -> None:
    Path(path).write_text(dumps(d), encoding="utf-8")


_DOT_STYLE = {
    GREEN: 'shape=circle, style=filled, fillcolor="#b8f0b8"',
    RED: 'shape=circle, style=filled, fillcolor="#f5b5b5"',
    INPUT: "shape=point",
    OUTPUT: "shape=point",
}


def to_dot(d: ZXDiagram, name: str = "zx") -> str:
    lines = [f"graph {name} {{", "  rankdir=TB;"]
    for n in sorted(d.nodes):
        node = d.nodes[n]
        if node.is_spider:
            label = format_phase(node.phase) if node.phase else ""
            lines.append(f'  n{n} [{_DOT_STYLE[node.kind]}, label="{label}"];')
        else:
            lines.append(f"  n{n} [{_DOT_STYLE[node.kind]}];")
    for a, b in sorted(d.edges):
        lines.append(f"  n{a} -- n{b};")
    s = complex(d.scalar)
    lines.append(f'  label="scalar {s.real:.6g}{s.imag:+.6g}i";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(d: ZXDiagram, path) -> None:
    Path(path).write_text(to_dot(d), encoding="utf-8")
