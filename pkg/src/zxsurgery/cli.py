"""Command-line interface: ``zxs zx|surgery|surface|verify``.

Exit codes:
    0  success (for ``verify``: every case passed)
    1  verification failures or a failing surface report
    2  unreadable or malformed input, unknown names
    3  dimension cap exceeded
    4  internal soundness failure (a rewrite changed the tensor)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import rewrite as rw
from . import surfacesim as ss
from . import surgery as sg
from . import tensorcore as tc
from . import verify as vf
from . import zxgraph as zg
from . import zxio

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CAP, EXIT_UNSOUND = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def tolerance() -> float:
    raw = os.environ.get("ZXS_TOL")
    if not raw:
        return tc.TOL
    try:
        tol = float(raw)
    except ValueError:
        raise CliError(f"ZXS_TOL={raw!r} is not a number", EXIT_PARSE) from None
    if not tol > 0:
        raise CliError(f"ZXS_TOL must be positive, got {raw}", EXIT_PARSE)
    return tol


def bundled(name: str) -> Path | None:
    """Path of a bundled data file, accepting the name with or without suffix."""
    root = resources.files("zxsurgery") / "data"
    for cand in (name, f"{name}.zxs", f"{name}.json"):
        p = root / cand
        if p.is_file():
            return Path(str(p))
    return None


def load_diagram(ref: str) -> zg.ZXDiagram:
    path = Path(ref)
    if not path.is_file():
        path = bundled(ref)
        if path is None:
            raise CliError(f"no diagram file or bundled diagram named {ref!r}", EXIT_PARSE)
    try:
        return zxio.read_diagram(path)
    except zxio.ParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def load_procedure(ref: str) -> sg.Procedure:
    path = Path(ref)
    if path.is_file():
        try:
            return sg.read_procedure(path)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    if ref in sg.BUILTINS:
        return sg.builtin(ref)
    raise CliError(f"no procedure file or built-in named {ref!r}; built-ins: {', '.join(sg.BUILTINS)}", EXIT_PARSE)


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- zx ------------------------------------------------------------------------


def cmd_zx_eval(args) -> int:
    d = load_diagram(args.diagram)
    m = zg.evaluate(d)
    payload = {"shape": list(m.shape), "matrix": matrix_to_json(m)}
    if args.out:
        Path(args.out).write_text(json.dumps(payload) + "\n")
    else:
        with np.printoptions(precision=6, suppress=True):
            print(f"shape {m.shape[0]}x{m.shape[1]}, scalar-inclusive")
            print(m)
    return EXIT_OK


def fuzz_report(seeds: int, tol: float) -> dict:
    failures, applied = [], 0
    for seed in range(seeds):
        d = rw.random_diagram(seed)
        ref = zg.evaluate(d)
        for rule, site in rw.all_sites(d):
            try:
                after, _ = rw.apply_rule(d, rule, site)
            except rw.RewriteError:
                continue
            applied += 1
            err = tc.max_abs_diff(ref, zg.evaluate(after))
            if err > tol:
                failures.append({"seed": seed, "rule": rule, "site": list(site), "error": err})
        err = tc.max_abs_diff(ref, zg.evaluate(rw.normalize(d)[0]))
        if err > tol:
            failures.append({"seed": seed, "rule": "normalize", "site": [], "error": err})
    return {"seeds": seeds, "applications": applied, "failures": failures}


def cmd_zx_simplify(args) -> int:
    tol = tolerance()
    if args.fuzz:
        rep = fuzz_report(args.fuzz, tol)
        print(f"fuzz: {rep['seeds']} diagrams, {rep['applications']} rule applications, "
              f"{len(rep['failures'])} failures")
        for f in rep["failures"]:
            print(f"  seed {f['seed']} {f['rule']} at {f['site']}: error {f['error']:.3e}")
        if rep["failures"]:
            return EXIT_UNSOUND
        if args.diagram is None:
            return EXIT_OK
    if args.diagram is None:
        raise CliError("simplify needs a diagram unless --fuzz is given", EXIT_PARSE)
    d = load_diagram(args.diagram)
    nf, steps = rw.normalize(d)
    err = tc.max_abs_diff(zg.evaluate(d), zg.evaluate(nf))
    if err > tol:
        raise CliError(f"normalisation changed the tensor by {err:.3e}", EXIT_UNSOUND)
    emit(zxio.dumps(nf), args.out)
    if args.steps:
        log = [{"rule": s.rule, "site": list(s.site), "scalar_delta": [s.scalar_delta.real, s.scalar_delta.imag]}
               for s in steps]
        text = "".join(json.dumps(x) + "\n" for x in log)
        if args.steps == "-":
            sys.stderr.write(text)
        else:
            Path(args.steps).write_text(text)
    return EXIT_OK


def cmd_zx_dot(args) -> int:
    emit(zxio.to_dot(load_diagram(args.diagram)), args.out)
    return EXIT_OK


# -- surgery -------------------------------------------------------------------


def cmd_surgery_sample(args) -> int:
    proc = load_procedure(args.procedure)
    try:
        psi = tc.ket(args.state)
    except (ValueError, KeyError) as exc:
        raise CliError(f"bad state {args.state!r}: {exc}", EXIT_PARSE) from None
    if psi.shape[0] != 2 ** len(proc.inputs):
        raise CliError(f"state {args.state!r} has {int(np.log2(psi.shape[0]))} qubits; "
                       f"{proc.name or 'procedure'} takes {len(proc.inputs)}", EXIT_PARSE)
    counts = sg.sample_many(proc, psi, args.trials, args.seed)
    probs = sg.branch_probabilities(sg.enumerate_branches(proc), psi)
    rows = []
    for i, bits in enumerate(sg.outcome_vectors(proc.n_outcomes)):
        c = counts.get(bits, 0)
        rows.append({"outcomes": "".join(map(str, bits)) or "-", "count": c,
                     "frequency": c / args.trials, "probability": float(probs[i])})
    if args.json:
        emit(json.dumps({"procedure": proc.name, "state": args.state, "seed": args.seed,
                         "trials": args.trials, "histogram": rows}, indent=2) + "\n", args.json)
    else:
        print(f"{proc.name or args.procedure} on |{args.state}>, {args.trials} trials, seed {args.seed}")
        print(f"{'outcomes':>10} {'count':>8} {'freq':>8} {'prob':>8}")
        for r in rows:
            print(f"{r['outcomes']:>10} {r['count']:>8} {r['frequency']:>8.4f} {r['probability']:>8.4f}")
    return EXIT_OK


# -- surface -------------------------------------------------------------------


def cmd_surface_run(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{args.config}: {exc}", EXIT_PARSE) from None
    configs = config if isinstance(config, list) else [config]
    records = []
    for c in configs:
        if args.seed is not None:
            c = {**c, "seed": args.seed}
        try:
            records += ss.run_config(c)
        except (ss.GeometryError, ValueError) as exc:
            if isinstance(exc, ss.SizeCapError):
                raise CliError(str(exc), EXIT_CAP) from None
            raise CliError(str(exc), EXIT_PARSE) from None
    emit(ss.records_to_jsonl(records), args.out)
    return EXIT_OK if all(r["pass"] for r in records) else EXIT_FAIL


# -- verify --------------------------------------------------------------------


def cmd_verify(args) -> int:
    rep = vf.run_suite(args.suite, tolerance(), fuzz=args.fuzz, seed=args.seed)
    data = rep.to_dict()
    if args.json:
        emit(json.dumps(data, indent=2, sort_keys=True) + "\n", None if args.json == "-" else args.json)
    for c in data["cases"]:
        if not c["pass"] or args.verbose:
            tag = "PASS" if c["pass"] else "FAIL"
            print(f"{tag} {c['case_id']} [{c['anchor']}] {c['mode']} err={c['max_error']:.2e} {c['detail']}",
                  file=sys.stderr if args.json == "-" else sys.stdout)
    s = data["summary"]
    print(f"suite {rep.suite}: {s['passed']}/{s['total']} passed, {s['failed']} failed",
          file=sys.stderr if args.json == "-" else sys.stdout)
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zxs", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    zx = sub.add_parser("zx", help="diagram evaluation, rewriting and export")
    zsub = zx.add_subparsers(dest="action", required=True)
    e = zsub.add_parser("eval", help="evaluate a diagram to its matrix")
    e.add_argument("diagram", help="diagram file or bundled name (cnot, wire, t-negative)")
    e.add_argument("--out", help="write {shape, matrix} JSON with [re, im] pairs")
    e.set_defaults(func=cmd_zx_eval)
    s = zsub.add_parser("simplify", help="normalise a diagram")
    s.add_argument("diagram", nargs="?")
    s.add_argument("--out", help="write the normalised diagram here instead of stdout")
    s.add_argument("--steps", nargs="?", const="-", help="write a JSON-lines step log (default: stderr)")
    s.add_argument("--fuzz", type=int, default=0, metavar="N", help="also check rule soundness on N random diagrams")
    s.set_defaults(func=cmd_zx_simplify)
    d = zsub.add_parser("dot", help="export Graphviz DOT")
    d.add_argument("diagram")
    d.add_argument("--out")
    d.set_defaults(func=cmd_zx_dot)

    su = sub.add_parser("surgery", help="logical-level procedures")
    ssub = su.add_subparsers(dest="action", required=True)
    sm = ssub.add_parser("sample", help="sample outcome vectors")
    sm.add_argument("procedure", help="procedure JSON file or built-in name")
    sm.add_argument("--state", required=True, help="product state label, e.g. ++ or 0+")
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--trials", type=int, default=10_000)
    sm.add_argument("--json", help="write the histogram as JSON")
    sm.set_defaults(func=cmd_surgery_sample)

    sf = sub.add_parser("surface", help="physical surface-code simulation")
    fsub = sf.add_subparsers(dest="action", required=True)
    r = fsub.add_parser("run", help="run an experiment config, emit JSON lines")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out")
    r.set_defaults(func=cmd_surface_run)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", default="all", choices=("all",) + vf.SUITES)
    v.add_argument("--json", help="write the report as JSON ('-' for stdout)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fuzz", type=int, default=200, help="random diagrams in the zx-rules suite")
    v.add_argument("--verbose", "-v", action="store_true", help="list passing cases too")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"zxs: {exc}", file=sys.stderr)
        return exc.code
    except tc.DimensionLimitError as exc:
        print(f"zxs: {exc}", file=sys.stderr)
        return EXIT_CAP
    except zxio.ParseError as exc:
        print(f"zxs: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
