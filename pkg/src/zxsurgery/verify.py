"""Verification suites tying ZX diagrams, Kraus operators and the physical layer together.

Each case records an anchor naming the identity it checks, the comparison
mode, the largest residual found and a pass flag.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import rewrite as rw
from . import surfacesim as ss
from . import surgery as sg
from . import tensorcore as tc
from . import zxgraph as zg

SUITES = ("zx-rules", "cnot", "appendix", "tgate", "physical")
S2 = 1 / np.sqrt(2)


@dataclass
class Case:
    case_id: str
    anchor: str
    mode: str
    max_error: float
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    suite: str
    cases: list = field(default_factory=list)

    def add(self, case_id, anchor, mode, error, tol, detail=""):
        err = float(error)
        self.cases.append(Case(case_id, anchor, mode, err, bool(err <= tol), detail))

    def flag(self, case_id, anchor, ok, detail=""):
        self.cases.append(Case(case_id, anchor, "check", 0.0 if ok else 1.0, bool(ok), detail))

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.cases)

    @property
    def failed(self) -> int:
        return len(self.cases) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        cases = sorted(self.cases, key=lambda c: c.case_id)
        return {
            "suite": self.suite,
            "cases": [_case_dict(c) for c in cases],
            "summary": {"total": len(cases), "passed": self.passed, "failed": self.failed},
        }


def _case_dict(c: Case) -> dict:
    d = asdict(c)
    d["pass"] = d.pop("passed")
    if not np.isfinite(d["max_error"]):
        d["max_error"] = None
    return d


def merge_reports(name: str, reports) -> VerifyReport:
    out = VerifyReport(name)
    for r in reports:
        for c in r.cases:
            out.cases.append(Case(f"{r.suite}/{c.case_id}", c.anchor, c.mode, c.max_error, c.passed, c.detail))
    return out


# -- helpers ---------------------------------------------------------------


def _pauli_product(word: str) -> np.ndarray:
    """Matrix of a Pauli word applied right-to-left, e.g. "ZX" = Z·X."""
    m = tc.I2
    for ch in word:
        m = m @ tc.PAULIS[ch]
    return m


def dressed_cnot(control: str = "", target: str = "") -> np.ndarray:
    """(P_c ⊗ P_t)·CNOT for Pauli words acting after the gate."""
    return np.kron(_pauli_product(control), _pauli_product(target)) @ tc.CNOT


def decorated_cnot(segments: dict, outcome_bits: int) -> zg.ZXDiagram:
    """Two-spider CNOT with π nodes on named segments.

    ``segments`` maps ``c_in``, ``c_out``, ``t_in``, ``t_out`` or ``link`` to a
    list of colours listed from the input side; every node carries phase π.
    The scalar makes the bare picture evaluate to CNOT / 2^{bits/2}.
    """
    d = zg.ZXDiagram(scalar=2 ** (-outcome_bits / 2) * np.sqrt(2))
    ci, ti = d.add_input(), d.add_input()
    co, to = d.add_output(), d.add_output()
    g, r = d.add_spider(zg.GREEN), d.add_spider(zg.RED)

    def run(a, b, colours):
        prev = a
        for colour in colours:
            x = d.add_spider(colour, 1)
            d.add_edge(prev, x)
            prev = x
        d.add_edge(prev, b)

    run(ci, g, segments.get("c_in", []))
    run(g, co, segments.get("c_out", []))
    run(ti, r, segments.get("t_in", []))
    run(r, to, segments.get("t_out", []))
    run(g, r, segments.get("link", []))
    return d


_WORD_COLOURS = {"X": zg.RED, "Z": zg.GREEN}


def word_segments(control: str, target: str) -> dict:
    """π decorations on the output legs matching ``dressed_cnot(control, target)``."""
    return {
        "c_out": [_WORD_COLOURS[ch] for ch in reversed(control)],
        "t_out": [_WORD_COLOURS[ch] for ch in reversed(target)],
    }


def find_real_dressing(K: np.ndarray, tol: float):
    """Words (c, t) over {"", X, Z, ZX} with K ≅ (P_c⊗P_t)·CNOT, or None."""
    words = ["", "X", "Z", "ZX"]
    for c, t in itertools.product(words, repeat=2):
        if tc.equal_up_to_sign(K, dressed_cnot(c, t), tol):
            return c, t
    return None


# -- zx-rules --------------------------------------------------------------


def suite_zx_rules(tol: float = tc.TOL, fuzz: int = 200) -> VerifyReport:
    rep = VerifyReport("zx-rules")
    for k in range(8):
        ph = Fraction(k, 4)
        for colour in zg.SPIDER_KINDS:
            prep = zg.spider_diagram(colour, ph, 0, 1)
            meas = zg.spider_diagram(colour, -ph, 1, 0)
            err = tc.max_abs_diff(zg.evaluate(zg.dagger_diagram(prep)), zg.evaluate(meas))
            rep.add(f"dagger/{colour}/{k}pi_4", "prep-effect adjoint pair", "exact", err, tol)
    a, b = Fraction(1, 4), Fraction(1, 2)
    chain = zg.compose_sequential(zg.spider_diagram(zg.GREEN, a), zg.spider_diagram(zg.GREEN, b))
    fused = rw.normalize(chain)[0]
    rep.add("spider-law/series", "phases add under fusion", "exact",
            tc.max_abs_diff(zg.evaluate(fused), zg.evaluate(zg.spider_diagram(zg.GREEN, a + b))), tol)
    # Frobenius family at phase 0
    unit = zg.compose_sequential(zg.spider_diagram(zg.GREEN, 0, 1, 2), zg.compose_parallel(zg.wire(), zg.spider_diagram(zg.GREEN, 0, 1, 0)))
    ident = zg.wire()
    ident.scalar = S2
    rep.add("frobenius/unit", "unit law", "exact", tc.max_abs_diff(zg.evaluate(unit), zg.evaluate(ident)), tol)
    left = zg.compose_sequential(
        zg.compose_parallel(zg.wire(), zg.spider_diagram(zg.GREEN, 0, 1, 2)),
        zg.compose_parallel(zg.spider_diagram(zg.GREEN, 0, 2, 1), zg.wire()),
    )
    right = zg.compose_sequential(zg.spider_diagram(zg.GREEN, 0, 2, 1), zg.spider_diagram(zg.GREEN, 0, 1, 2))
    rep.add("frobenius/slide", "Frobenius law", "exact",
            tc.max_abs_diff(zg.evaluate(rw.normalize(left)[0]), zg.evaluate(right)), tol)
    special = zg.compose_sequential(zg.spider_diagram(zg.GREEN, 0, 1, 2), zg.spider_diagram(zg.GREEN, 0, 2, 1))
    rep.add("frobenius/special", "specialness", "exact",
            tc.max_abs_diff(zg.evaluate(rw.normalize(special)[0]), tc.I2), tol)
    # π copy, both colours, both orientations
    for spider, pi in ((zg.GREEN, zg.RED), (zg.RED, zg.GREEN)):
        d = zg.ZXDiagram()
        i = d.add_input()
        o1, o2 = d.add_output(), d.add_output()
        p, s = d.add_spider(pi, 1), d.add_spider(spider)
        for x, y in ((i, p), (p, s), (s, o1), (s, o2)):
            d.add_edge(x, y)
        for orient, dd in (("down", d), ("up", zg.dagger_diagram(d))):
            after, _ = rw.copy_pi_through(dd, p, s)
            err = tc.max_abs_diff(zg.evaluate(dd), zg.evaluate(after))
            rep.add(f"pi-copy/{spider}/{orient}", "π commutes through opposite colour", "exact", err, tol)
    # fuzzed soundness
    worst, worst_norm, applied = 0.0, 0.0, 0
    for seed in range(fuzz):
        d = rw.random_diagram(seed)
        ref = zg.evaluate(d)
        for rule, site in rw.all_sites(d):
            try:
                after, _ = rw.apply_rule(d, rule, site)
            except rw.RewriteError:
                continue
            applied += 1
            worst = max(worst, tc.max_abs_diff(ref, zg.evaluate(after)))
        worst_norm = max(worst_norm, tc.max_abs_diff(ref, zg.evaluate(rw.normalize(d)[0])))
    rep.add("fuzz/rules", "rule soundness", "exact", worst, tol, f"{applied} applications over {fuzz} seeds")
    rep.add("fuzz/normalize", "normalisation soundness", "exact", worst_norm, tol, f"{fuzz} seeds")
    return rep


# -- cnot --------------------------------------------------------------------


def cnot_variants():
    """(case prefix, procedure) for every variant under every convention choice."""
    F, S = sg.FIRST, sg.SECOND
    out = []
    for conv in (F, S):
        out.append((f"standard/{conv}", sg.cnot_standard(conv)))
        out.append((f"roughsplit/{conv}", sg.cnot_roughsplit(conv)))
    for cs, cr in itertools.product((F, S), repeat=2):
        out.append((f"bellpair/s-{cs}/r-{cr}", sg.cnot_bellpair(cs, cr)))
    for conv in (F, S):
        out.append((f"roughcap/{conv}", sg.cnot_splitsplit_roughcap(conv)))
        out.append((f"smoothcap/{conv}", sg.cnot_splitsplit_smoothcap(conv)))
    return out


def suite_cnot(tol: float = tc.TOL) -> VerifyReport:
    rep = VerifyReport("cnot")
    rep.add("two-spider", "two-spider CNOT is CNOT/√2", "exact",
            tc.max_abs_diff(zg.evaluate(zg.cnot_diagram()), S2 * tc.CNOT), tol)
    u_s = zg.compose_parallel(zg.spider_diagram(zg.GREEN, 0, 1, 2), zg.wire())
    k0r = zg.compose_parallel(zg.wire(), zg.spider_diagram(zg.RED, 0, 2, 1))
    rep.add("split-then-merge", "(I⊗K0R)(U_S⊗I) = CNOT/√2", "exact",
            tc.max_abs_diff(zg.evaluate(zg.compose_sequential(u_s, k0r)), S2 * tc.CNOT), tol)
    std = sg.enumerate_branches(sg.cnot_standard())
    perr = max(abs(sg.branch_probability(std, 0, tc.density(tc.ket(a + b))) - 0.5)
               for a, b in itertools.product("01+-ij", repeat=2))
    rep.add("standard/positive-probability", "positive branch has probability 1/2", "exact", perr, tol)
    for prefix, proc in cnot_variants():
        ens = sg.enumerate_branches(proc)
        model = sg.verify_model(proc, tol)
        scale = 2 ** (proc.n_outcomes / 2)
        for br, chk in zip(ens.branches, model.checks):
            bits = "".join(map(str, br.outcomes))
            found = find_real_dressing(br.kraus * scale, tol)
            err = max(chk.kraus_error, chk.probability_error)
            detail = "no Pauli dressing" if found is None else f"({found[0] or 'I'}⊗{found[1] or 'I'})·CNOT"
            rep.add(f"{prefix}/{bits}", "branch is a Pauli-dressed CNOT", "sign",
                    err if found is not None else float("inf"), tol, detail)
    return rep


# -- dressing table --------------------------------------------------------------

# (pattern, convention key, outcome bits, control word, target word, mode)
DRESSING_TABLE = [
    ("standard", (sg.FIRST,), (1,), "Z", "", "exact"),
    ("standard", (sg.SECOND,), (1,), "Z", "Z", "exact"),
    ("roughsplit", (sg.FIRST,), (1,), "X", "X", "exact"),
    ("roughsplit", (sg.SECOND,), (1,), "", "X", "exact"),
    ("bellpair", (sg.FIRST, sg.FIRST), (1, 1), "ZX", "X", "exact"),
    ("bellpair", (sg.SECOND, sg.FIRST), (1, 1), "Z", "X", "sign"),
    ("bellpair", (sg.FIRST, sg.SECOND), (1, 1), "XZ", "ZX", "sign"),
    ("bellpair", (sg.SECOND, sg.SECOND), (1, 1), "Z", "ZX", "sign"),
    ("roughcap", (sg.FIRST,), (1, 0), "Z", "", "exact"),
    ("roughcap", (sg.SECOND,), (1, 0), "Z", "", "exact"),
    ("smoothcap", (sg.FIRST,), (1, 0), "", "X", "exact"),
    ("smoothcap", (sg.SECOND,), (1, 0), "", "X", "exact"),
]

_BUILD = {
    "standard": sg.cnot_standard,
    "roughsplit": sg.cnot_roughsplit,
    "bellpair": sg.cnot_bellpair,
    "roughcap": sg.cnot_splitsplit_roughcap,
    "smoothcap": sg.cnot_splitsplit_smoothcap,
}


def display_chain(proc: sg.Procedure, bits, control: str, target: str) -> list:
    """Branch picture, its normal form, and the decorated CNOT it reduces to."""
    d = sg.procedure_to_zx(proc, bits)
    return [d, rw.normalize(d)[0], decorated_cnot(word_segments(control, target), proc.n_outcomes)]


def suite_dressings(tol: float = tc.TOL) -> VerifyReport:
    rep = VerifyReport("appendix")
    for name, convs, bits, cw, tw, mode in DRESSING_TABLE:
        proc = _BUILD[name](*convs)
        key = f"{name}/{'-'.join(convs)}/{''.join(map(str, bits))}"
        K = sg.branch_kraus(proc, bits) * 2 ** (proc.n_outcomes / 2)
        target = dressed_cnot(cw, tw)
        rep.add(f"{key}/table", f"({cw or 'I'}⊗{tw or 'I'})·CNOT", mode, tc.comparison_error(K, target, mode), tol)
        if mode == "sign":
            rep.flag(f"{key}/needs-sign", "equality holds only up to sign",
                     not tc.approx_equal(K, target, tol))
        chain = display_chain(proc, bits, cw, tw)
        for i in range(len(chain) - 1):
            step_mode = "exact" if i == 0 else mode
            ok, err, why = rw.semantics_diff(chain[i], chain[i + 1], step_mode)
            rep.add(f"{key}/step{i}", "displayed rewrite step", step_mode, err if ok else float("inf"), tol, why)
    for name, build in _BUILD.items():
        convs = [(c,) for c in sg.CONVENTIONS] if name != "bellpair" else list(itertools.product(sg.CONVENTIONS, repeat=2))
        for conv in convs:
            proc = build(*conv)
            listed = {bits for n, c, bits, *_ in DRESSING_TABLE if n == name and c == conv}
            for bits in sg.outcome_vectors(proc.n_outcomes):
                if bits in listed:
                    continue
                K = sg.branch_kraus(proc, bits) * 2 ** (proc.n_outcomes / 2)
                found = find_real_dressing(K, tol)
                rep.flag(f"{name}/{'-'.join(conv)}/{''.join(map(str, bits))}/generic",
                         "every branch is a Pauli-dressed CNOT", found is not None,
                         "" if found is None else f"({found[0] or 'I'}⊗{found[1] or 'I'})·CNOT")
    return rep


# -- tgate ----------------------------------------------------------------------


def t_byproduct(bits) -> np.ndarray:
    """Heralded Pauli left on the data by the deterministic T procedure."""
    return tc.Z if bits[0] and bits[-1] else tc.I2


def suite_tgate(tol: float = tc.TOL) -> VerifyReport:
    rep = VerifyReport("tgate")
    probes = [tc.ket(s) for s in "01+-ij"]
    for name, alpha in (("t-merge", np.pi / 4), ("y-merge", np.pi / 2)):
        for conv in sg.CONVENTIONS:
            proc = sg.magic_merge(Fraction(alpha / np.pi).limit_denominator(8), conv, name)
            ens = sg.enumerate_branches(proc)
            for br in ens.branches:
                b = br.outcomes[0]
                ideal = S2 * tc.rz(alpha if b == 0 else -alpha)
                if conv == sg.SECOND and b:
                    ideal = tc.X @ ideal
                rep.add(f"{name}/{conv}/{b}/operator", "merge realises R_z(±α)", "phase",
                        tc.comparison_error(br.kraus, ideal, "phase"), tol)
                perr = max(abs(tc.two_norm(br.kraus @ p) ** 2 - 0.5) for p in probes)
                rep.add(f"{name}/{conv}/{b}/probability", "each branch has probability 1/2", "exact", perr, tol)
    # exact phase of the negative T branch and its picture
    neg = sg.branch_kraus(sg.t_merge(), (1,))
    rep.add("t-merge/negative/exact", "e^{iπ/4}/√2 · R_z(−π/4)", "exact",
            tc.max_abs_diff(neg, np.exp(1j * np.pi / 4) * S2 * tc.rz(-np.pi / 4)), tol)
    for b, phase in ((0, Fraction(1, 4)), (1, Fraction(7, 4))):
        d = sg.procedure_to_zx(sg.t_merge(), (b,))
        nf = rw.normalize(d)[0]
        spiders = nf.spiders()
        shape_ok = (
            len(spiders) == 1
            and nf.nodes[spiders[0]].kind == zg.GREEN
            and nf.nodes[spiders[0]].phase == phase
        )
        rep.flag(f"t-merge/{b}/normal-form", f"normalises to one green {zg.format_phase(phase)} spider", shape_ok)
        rep.add(f"t-merge/{b}/normal-form-value", "normal form keeps the value", "exact",
                tc.max_abs_diff(zg.evaluate(nf), zg.evaluate(d)), tol)
    # the alternate convention differs by an X controlled on the outcome
    for name, alpha in (("t-merge", Fraction(1, 4)), ("y-merge", Fraction(1, 2))):
        a = sg.enumerate_branches(sg.magic_merge(alpha, sg.FIRST, name))
        b = sg.enumerate_branches(sg.magic_merge(alpha, sg.SECOND, name))
        for ba, bb in zip(a.branches, b.branches):
            bit = ba.outcomes[0]
            P = tc.X if bit else tc.I2
            rep.add(f"{name}/conventions/{bit}", "conventions differ by a controlled NOT", "phase",
                    tc.comparison_error(bb.kraus, P @ ba.kraus, "phase"), tol)
    # deterministic T
    T = tc.rz(np.pi / 4)
    for conv_t in sg.CONVENTIONS:
        proc = sg.t_deterministic(conv_t)
        ens = sg.enumerate_branches(proc)
        for i, br in enumerate(ens.branches):
            bits = br.outcomes
            k = br.kraus / tc.two_norm(br.kraus) * np.sqrt(2)
            rep.add(f"t-deterministic/{conv_t}/{''.join(map(str, bits))}", "T up to a heralded Pauli", "phase",
                    tc.comparison_error(k, t_byproduct(bits) @ T, "phase"), tol)
        total = sum(sg.branch_probability(ens, i, tc.density(tc.ket("+"))) for i in range(len(ens)))
        rep.add(f"t-deterministic/{conv_t}/complete", "branch probabilities sum to 1", "exact", abs(total - 1), tol)
    return rep


# -- physical --------------------------------------------------------------------

SPLIT_SIZES = {ss.ROUGH_SPLIT: [(3, 7), (2, 5)], ss.SMOOTH_SPLIT: [(7, 3), (5, 2)]}
MERGE_SIZES = [(3, 3), (2, 2)]


def suite_physical(tol: float = tc.TOL, trials: int = 10_000, seed: int = 0) -> VerifyReport:
    rep = VerifyReport("physical")
    n, m = ss.expected_counts(3, 3)
    ws = ss.LatticeWorkspace()
    p = ss.patch_init(ws, "p", 3, 3, "0")
    rep.flag("geometry/3x3", "13 qubits and 12 stabilizers", (p.n, len(p.plaquettes())) == (13, 12) == (n, m))
    for op, sizes in SPLIT_SIZES.items():
        for h, w in sizes:
            r = ss.extract_logical_channel(op, None, h, w)
            rep.flag(f"{op}/{h}x{w}", "split realises its isometry", r.passed, f"{len(r.cases)} cases")
    for op in (ss.ROUGH_MERGE, ss.SMOOTH_MERGE):
        for conv in sg.CONVENTIONS:
            for h, w in MERGE_SIZES:
                r = ss.extract_logical_channel(op, conv, h, w)
                rep.flag(f"{op}/{conv}/{h}x{w}", "merge realises its Kraus pair", r.passed, f"{len(r.cases)} cases")
    neg = ss.extract_logical_channel(ss.ROUGH_SPLIT, None, 3, 7, chains=("top", "bottom"))
    rep.flag("negative-control/mismatched-chains", "mismatched chain boundaries are caught", not neg.passed,
             f"{len(neg.failures)} failing cases")
    # dense, non-stabilizer inputs
    A = tc.green_state(np.pi / 4)
    dense = ss.dense_merge_check(ss.SMOOTH_MERGE, sg.FIRST, A, tc.ket("+"))
    for br in dense.branches:
        rep.add(f"dense/t/{br.outcome}/probability", "magic merge branch probability 1/2", "exact",
                abs(br.probability - 0.5), 1e-9)
        rep.add(f"dense/t/{br.outcome}/fidelity", "decoded state is R_z(±π/4)|+⟩", "phase", 1 - br.fidelity, 1e-9)
    # statistics
    counts = ss.merge_statistics(ss.ROUGH_MERGE, sg.FIRST, "0", "0", trials, seed)
    freq = counts[1] / trials
    rep.add("stats/00", "random outcome for |00⟩", "exact", abs(freq - 0.5), 0.015, f"frequency {freq:.4f}")
    counts = ss.merge_statistics(ss.ROUGH_MERGE, sg.FIRST, "+", "-", max(trials // 10, 100), seed)
    rep.add("stats/+-", "deterministic −1 for |+−⟩", "exact", abs(counts[1] / sum(counts.values()) - 1), 0.0)
    return rep


def run_suite(name: str, tol: float = tc.TOL, fuzz: int = 200, seed: int = 0) -> VerifyReport:
    if name == "all":
        return merge_reports("all", [run_suite(s, tol, fuzz, seed) for s in SUITES])
    if name == "zx-rules":
        return suite_zx_rules(tol, fuzz)
    if name == "cnot":
        return suite_cnot(tol)
    if name == "appendix":
        return suite_dressings(tol)
    if name == "tgate":
        return suite_tgate(tol)
    if name == "physical":
        return suite_physical(tol, seed=seed)
    raise ValueError(f"unknown suite {name!r}; choose from {('all',) + SUITES}")


def timed(fn, *args, **kwargs):
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t
