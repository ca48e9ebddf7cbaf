import json
import warnings
from fractions import Fraction

import numpy as np
import pytest

from zxsurgery import rewrite as rw
from zxsurgery import zxgraph as zg
from zxsurgery import zxio


def test_round_trip_cnot(tmp_path):
    d = zg.cnot_diagram()
    d.scalar = np.exp(0.3j) / 3
    path = tmp_path / "cnot.zxs"
    zxio.write_diagram(d, path)
    back = zxio.read_diagram(path)
    assert back == d
    assert complex(back.scalar) == complex(d.scalar)


@pytest.mark.parametrize("seed", range(25))
def test_round_trip_random(seed):
    d = rw.random_diagram(seed)
    d.scalar = complex(np.random.default_rng(seed).normal(), 0.1)
    assert zxio.loads(zxio.dumps(d)) == d


def _doc(**over):
    doc = {
        "version": "zxs-1",
        "scalar": {"re": 1.0, "im": 0.0},
        "nodes": [
            {"id": 0, "kind": "in", "order": 0},
            {"id": 1, "kind": "out", "order": 0},
            {"id": 2, "kind": "z", "phase": {"num": 1, "den": 4}},
        ],
        "edges": [[0, 2], [2, 1]],
    }
    doc.update(over)
    return json.dumps(doc)


def test_zero_denominator_is_a_parse_error():
    bad = json.loads(_doc())
    bad["nodes"][2]["phase"]["den"] = 0
    with pytest.raises(zxio.ParseError, match=r"nodes\[2\]\.phase\.den"):
        zxio.loads(json.dumps(bad))


def test_unknown_kind_and_bad_json():
    bad = json.loads(_doc())
    bad["nodes"][2]["kind"] = "h"
    with pytest.raises(zxio.ParseError, match="unknown node kind"):
        zxio.loads(json.dumps(bad))
    with pytest.raises(zxio.ParseError, match="line 1"):
        zxio.loads("{nope")
    with pytest.raises(zxio.ParseError, match="unknown node id"):
        zxio.loads(_doc(edges=[[0, 9]]))
    with pytest.raises(zxio.ParseError, match="order"):
        bad = json.loads(_doc())
        bad["nodes"][0]["order"] = 3
        zxio.loads(json.dumps(bad))


def test_unreduced_phase_warns_and_reduces():
    bad = json.loads(_doc())
    bad["nodes"][2]["phase"] = {"num": 18, "den": 8}
    with pytest.warns(zxio.PhaseReducedWarning):
        d = zxio.loads(json.dumps(bad))
    assert d.nodes[2].phase == Fraction(1, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        zxio.loads(_doc())


def test_dot_export(tmp_path):
    path = tmp_path / "cnot.dot"
    zxio.export_dot(zg.cnot_diagram(), path)
    text = path.read_text()
    assert text.startswith("graph zx {")
    assert text.count("shape=circle") == 2
    assert text.count("shape=point") == 4
    assert text.count(" -- ") == 5
    assert "#b8f0b8" in text and "#f5b5b5" in text


def test_dot_labels_phase():
    d = zg.spider_diagram(zg.GREEN, Fraction(7, 4))
    assert 'label="7π/4"' in zxio.to_dot(d)
