"""
Command-line driver.

    wvlab analytic --builtin hardy
    wvlab analytic --builtin pigeonhole:2 --op "ZZ=Z@1*Z@2"
    wvlab simulate --builtin cheshire --mode weak --op "SMILE_L=Z@1*0.5*(I@2+Z@2)"
    wvlab simulate --builtin pigeonhole:2 --mode strong --op "ZZ=Z@1*Z@2"
    wvlab verify --builtin all

Exit codes: 0 ok, 1 failed verification, 2 invalid input, 3 orthogonal
pre/post selection, 4 coupling outside the requested regime (use --force).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings

from . import opexpr, pointer, scenarios, tsvf
from .scenariofile import ScenarioFileError, load_scenario_file

log = logging.getLogger("wvlab")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_ORTHOGONAL, EXIT_REGIME = 0, 1, 2, 3, 4

DEFAULT_SEED = 42
DEFAULT_WEAK_EPSILON = 0.05
DEFAULT_STRONG_RATIO = 50.0

CONVENTIONS = """\
basis conventions:
  amplitudes are ordered with subsystem 1 slowest: on dims [2,2] the order
  is |00>, |01>, |10>, |11>; index 0 is spin up / P0, index 1 is spin down / P1.
  hardy     particles (positron, electron); index 0 = overlapping arm O, 1 = NO
  cheshire  spin is subsystem 1, box is subsystem 2; box index 0 = L, 1 = R,
            so the left-box projector is 0.5*(I@2 + Z@2) = P0@2
  |+y> = (|up> + i|down>)/sqrt(2)

operator expressions (opexpr-v1):
  expr := term (('+'|'-') term)* ; term := factor ('*' factor)*
  factor := scalar | NAME '@' INDEX | '(' expr ')'
  NAME in I X Y Z P0 P1 Pp Pm ; INDEX is 1-based ; scalars 0.5, -2, 1i

the default seed is 42; published reproduction numbers use it.
"""


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 2:
        raise argparse.ArgumentTypeError("need at least 2 samples")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wvlab",
        description="Weak values, ABL statistics and pointer simulations "
                    "for pre- and post-selected quantum systems.",
        epilog=CONVENTIONS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, ops=True):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--builtin", metavar="NAME",
                         help="hardy, cheshire, epr-bohm or pigeonhole:N")
        src.add_argument("--scenario", metavar="PATH", help="scenario-v1 JSON file")
        if ops:
            p.add_argument("--op", action="append", default=[], metavar="LABEL=EXPR",
                           help="observable to use instead of the scenario's own (repeatable)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("analytic", help="exact weak values and ABL distributions",
                       epilog=CONVENTIONS, formatter_class=argparse.RawDescriptionHelpFormatter)
    scenario_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo pointer simulation",
                       epilog=CONVENTIONS, formatter_class=argparse.RawDescriptionHelpFormatter)
    scenario_args(p)
    p.add_argument("--mode", choices=("weak", "strong"), default="weak")
    p.add_argument("--epsilon", type=_positive, default=None,
                   help=f"coupling strength (default {DEFAULT_WEAK_EPSILON} weak, "
                        f"{DEFAULT_STRONG_RATIO:g}*sigma strong)")
    p.add_argument("--sigma", type=_positive, default=1.0, help="pointer width (default 1)")
    p.add_argument("--samples", type=_count, default=100_000,
                   help="post-selected readings to collect per batch (default 100000)")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--readout", choices=("both", "position", "momentum"), default="both",
                   help="weak mode: pointer channels to read (position gives the real "
                        "part, momentum the imaginary part)")
    p.add_argument("--force", action="store_true",
                   help="run even if the coupling is outside the mode's regime")

    p = sub.add_parser("verify", help="recompute the expected values of a scenario")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", metavar="NAME", help="a builtin name, or 'all'")
    src.add_argument("--scenario", metavar="PATH", help="scenario-v1 JSON file with expected_weak")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    return parser


# -- helpers -------------------------------------------------------------------

def _load(args) -> scenarios.Scenario:
    if args.scenario:
        try:
            return load_scenario_file(args.scenario)
        except ScenarioFileError as exc:
            raise CliError(EXIT_INVALID, str(exc)) from None
    try:
        return scenarios.builtin(args.builtin)
    except (KeyError, ValueError) as exc:
        raise CliError(EXIT_INVALID, exc.args[0]) from None


def _observables(s: scenarios.Scenario, ops: list[str]):
    """``[(label, expr or None, operator)]`` for the requested observables."""
    if not ops:
        return [(k, s.expressions.get(k), v) for k, v in s.observables.items()]
    out = []
    for raw in ops:
        label, sep, text = raw.partition("=")
        if not sep or not label.strip():
            raise CliError(EXIT_INVALID, f"--op must look like LABEL=EXPR, got {raw!r}")
        try:
            op = opexpr.operator(text, s.shape)
        except opexpr.ParseError as exc:
            raise CliError(EXIT_INVALID, f"--op {label}: {exc}") from None
        except (IndexError, ValueError) as exc:
            raise CliError(EXIT_INVALID, f"--op {label}: {exc}") from None
        out.append((label.strip(), text.strip(), op))
    return out


def _pair(z: complex) -> list[float]:
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def _weak(tsv, op) -> complex:
    try:
        return tsvf.weak_value(tsv, op)
    except tsvf.OrthogonalSelection as exc:
        raise CliError(EXIT_ORTHOGONAL, f"pre/post selection is orthogonal: {exc}") from None


def _abl(tsv, op):
    if not op.hermitian:
        return None
    try:
        return [[a, p] for a, p in tsvf.abl_distribution(tsv, op).outcomes]
    except tsvf.AllOutcomesForbidden:
        return None


def _base_entry(tsv, label, expr, op) -> dict:
    entry = {"label": label}
    if expr is not None:
        entry["expr"] = expr
    entry["hermitian"] = op.hermitian
    entry["weak_value"] = _pair(_weak(tsv, op))
    entry["abl"] = _abl(tsv, op)
    return entry


# -- commands ------------------------------------------------------------------

def cmd_analytic(args, argv) -> dict:
    s = _load(args)
    rows = [_base_entry(s.tsv, *item) for item in _observables(s, args.op)]
    return {"command": argv, "scenario": s.name, "dims": list(s.shape.dims),
            "observables": rows}


def cmd_simulate(args, argv) -> dict:
    s = _load(args)
    sigma = args.sigma
    eps = args.epsilon
    if eps is None:
        eps = DEFAULT_WEAK_EPSILON if args.mode == "weak" else DEFAULT_STRONG_RATIO * sigma
    if args.mode == "strong" and args.readout == "momentum":
        raise CliError(EXIT_INVALID, "strong mode reads the pointer position")
    cfg = pointer.PointerConfig(eps, sigma)
    if args.mode == "weak" and cfg.ratio > pointer.WEAK_MAX_RATIO and not args.force:
        raise CliError(EXIT_REGIME, f"eps/sigma = {cfg.ratio:g} is not weak "
                                    f"(<= {pointer.WEAK_MAX_RATIO:g}); pass --force to run anyway")

    rows = []
    for label, expr, op in _observables(s, args.op):
        entry = _base_entry(s.tsv, label, expr, op)
        if not op.hermitian:
            raise CliError(EXIT_INVALID, f"{label}: pointer coupling needs a Hermitian observable")
        ps = pointer.post_selected_pointer(s.tsv, op, cfg)
        attempts = pointer.attempts_for(ps, args.samples)
        log.info("%s: success probability %.4g, %d attempts", label, ps.success_prob, attempts)
        sim = {"success_prob": ps.success_prob, "attempted": attempts}
        if args.mode == "weak":
            sim.update(_simulate_weak(s, op, cfg, attempts, args))
        else:
            sim.update(_simulate_strong(s, op, cfg, attempts, args, label))
        entry["simulation"] = sim
        rows.append(entry)
    return {
        "command": argv, "scenario": s.name, "dims": list(s.shape.dims), "seed": args.seed,
        "mode": args.mode,
        "pointer": {"epsilon": cfg.epsilon, "sigma": cfg.sigma, "readout": args.readout,
                    "grid_points": cfg.grid_points, "grid_pad": cfg.grid_pad},
        "observables": rows,
    }


def _simulate_weak(s, op, cfg, attempts, args) -> dict:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", pointer.RegimeWarning)
        est = pointer.estimate_weak_value(s.tsv, op, cfg, attempts, args.seed, force=True)
    re, im = est.value.real, est.value.imag
    se_re, se_im = est.std_error
    if args.readout == "position":
        im = se_im = None
    elif args.readout == "momentum":
        re = se_re = None
    return {
        "estimate": [re, im],
        "std_error": [se_re, se_im],
        "accepted": [est.position.accepted, est.momentum.accepted],
    }


def _simulate_strong(s, op, cfg, attempts, args, label) -> dict:
    try:
        freqs = pointer.strong_outcome_frequencies(s.tsv, op, cfg, attempts, args.seed,
                                                   force=args.force)
    except pointer.RegimeError as exc:
        raise CliError(EXIT_REGIME, f"{label}: {exc}; pass --force to run anyway") from None
    return {
        "frequencies": [[a, f, c] for a, f, c in freqs],
        "accepted": sum(c for _, _, c in freqs),
    }


def cmd_verify(args, argv):
    if args.builtin == "all":
        suite = scenarios.all_builtins()
    else:
        suite = [_load(args)]
    reports = [scenarios.verify(s) for s in suite]
    doc = {
        "command": argv,
        "passed": all(r.passed for r in reports),
        "scenarios": [{
            "scenario": r.scenario,
            "passed": r.passed,
            "checks": [{"label": c.label, "expected": _pair(c.expected),
                        "computed": _pair(c.computed), "abs_error": c.abs_error,
                        "pass": c.passed} for c in r.checks],
        } for r in reports],
    }
    return doc


# -- output --------------------------------------------------------------------

def _csv_rows(command: str, doc: dict):
    if command == "verify":
        for sc in doc["scenarios"]:
            for c in sc["checks"]:
                yield sc["scenario"], c["label"], *c["expected"], "expected"
                yield sc["scenario"], c["label"], *c["computed"], "computed"
        return
    name = doc["scenario"]
    for row in doc["observables"]:
        label = row["label"]
        yield name, label, *row["weak_value"], "weak_value"
        for a, p in row["abl"] or []:
            yield name, label, p, 0.0, f"abl_probability[{a:g}]"
        sim = row.get("simulation")
        if not sim:
            continue
        if "estimate" in sim:
            yield name, label, *sim["estimate"], "estimate"
            yield name, label, *sim["std_error"], "std_error"
        for a, f, _ in sim.get("frequencies", []):
            yield name, label, f, 0.0, f"frequency[{a:g}]"


def _render(command: str, fmt: str, doc: dict) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "label", "re", "im", "quantity"])
        for r in _csv_rows(command, doc):
            w.writerow(["" if v is None else v for v in r])
        return buf.getvalue()
    lines = []
    for sc in doc["scenarios"]:
        lines.append(f"{sc['scenario']}: {'PASS' if sc['passed'] else 'FAIL'}")
        for c in sc["checks"]:
            exp = complex(*c["expected"])
            got = complex(*c["computed"])
            lines.append(f"  {'ok  ' if c['pass'] else 'FAIL'} {c['label']:<40} "
                         f"expected {_fmt(exp):>12}  computed {_fmt(got):>22}  "
                         f"err {c['abs_error']:.1e}")
    lines.append("all checks passed" if doc["passed"] else "verification FAILED")
    return "\n".join(lines) + "\n"


def _fmt(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        doc = COMMANDS[args.command](args, argv)
    except CliError as exc:
        print(f"wvlab: error: {exc}", file=sys.stderr)
        return exc.code
    sys.stdout.write(_render(args.command, args.format, doc))
    if args.command == "verify" and not doc["passed"]:
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
