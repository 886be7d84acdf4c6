"""
cli module
Batch command line: build catalog instances, compute oscillation profiles,
Hausdorff and Wijsman tables, UC-subset scans and convergence experiments,
writing plot-ready CSV/JSON.

Usage::

    python -m oscillation_lab.cli catalog build comb --param M=40 --out comb.json
    python -m oscillation_lab.cli oscillation --space comb.json --subset axis --depth 20 --out axis.csv

Exit codes: 0 ok, 2 input error, 3 resolution inadequacy, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from fractions import Fraction

from oscillation_lab import catalog
from oscillation_lab.config import RunConfig
from oscillation_lab.convergence import (
    adequate_delta_depth,
    iterated_limit_failure_demo,
    joint_continuity_experiment,
    strong_uniform_check,
    very_strong_uniform_check,
)
from oscillation_lab.db import RunLedger, run_key
from oscillation_lab.descriptors import dump_instance, load_instance
from oscillation_lab.errors import (
    ArgumentError,
    DescriptorError,
    InvariantViolation,
    ResolutionError,
    StructuralError,
)
from oscillation_lab.exporters import dump_to_csv, dump_to_json, format_cell, json_default
from oscillation_lab.hyperspace import distance_functional_gap, enlargement_certificate, hausdorff, wijsman_profile
from oscillation_lab.metric_core import SubsetRef
from oscillation_lab.oscillation import Omega_profile, Omega_star_profile, omega_profile
from oscillation_lab.ucset import default_scan_scale, uc_defect_scan, uc_equivalence_probe
from oscillation_lab.utils.io import archive_copy

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(message)s",
    datefmt="%H:%M:%S",
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOLUTION = 3
EXIT_INVARIANT = 4


class ResolutionFlagged(Exception):
    """
    Exception raised after a command wrote its output but a report flagged
    inadequate sample resolution.
    """

    def __init__(self, verdict: str, output: str | None):
        super().__init__(verdict)
        self.verdict = verdict
        self.output = output


def _parse_param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ArgumentError(f"parameters are key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        try:
            value = float(Fraction(raw))
        except (ValueError, ZeroDivisionError):
            value = raw
    return key, value


def _eps(text: str | None, exact: bool):
    if text is None:
        return Fraction(1, 2) if exact else 0.5
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ArgumentError(f"eps must be a number or p/q, got {text!r}") from exc
    return value if exact else float(value)


def _emit(payload, out: str | None) -> None:
    if out:
        dump_to_json(payload, out)
        logging.info(f"wrote {out}")
    else:
        print(json.dumps(payload, indent=2, ensure_ascii=False, default=json_default))


def _require_space(config: RunConfig):
    if not config.space:
        raise ArgumentError("--space is required")
    return load_instance(config.space)


def cmd_catalog(args, config: RunConfig) -> tuple[str, str | None]:
    """
    ``catalog list`` or ``catalog build <name> --param k=v ... [--transform f]``.
    """
    if args.action == "list":
        listing = [{"name": name, "defaults": catalog.DEFAULT_PARAMETERS[name]} for name in sorted(catalog.CATALOG)]
        _emit(listing, config.out)
        return "listed", config.out
    if not args.name:
        raise ArgumentError("catalog build needs an instance name")
    params = dict(_parse_param(p) for p in args.param or [])
    inst = catalog.build(args.name, **params)
    if args.transform:
        inst = catalog.apply_metric_transform(inst, args.transform)
    out = config.out or f"{inst.name}.json"
    dump_instance(inst, out)
    return "built", out


def cmd_oscillation(args, config: RunConfig) -> tuple[str, str | None]:
    """
    Omega / Omega* / omega profiles of one function as CSV
    ``kind,n,value`` with one ``# verdict_<kind>`` footer line per kind.
    """
    inst = _require_space(config)
    f = inst.function(config.function)
    rows, footer = [], {}
    for kind in config.kinds:
        if kind == "omega":
            if config.point is None:
                raise ArgumentError("the omega profile needs --point")
            profile = omega_profile(f, config.point, config.depth, cap=config.cap, jobs=config.jobs)
        else:
            if len(config.subsets) != 1:
                raise ArgumentError(f"the {kind} profile needs exactly one --subset")
            A = inst.subset(config.subsets[0])
            build = Omega_profile if kind == "Omega" else Omega_star_profile
            profile = build(f, A, config.depth, cap=config.cap, jobs=config.jobs)
        rows.extend(profile.rows())
        footer[f"verdict_{profile.kind}"] = profile.verdict
    out = config.out or "profile.csv"
    dump_to_csv(["kind", "n", "value"], rows, out, footer=footer)
    return ";".join(f"{k}={v}" for k, v in footer.items()), out


def cmd_hausdorff(args, config: RunConfig) -> tuple[str, str | None]:
    """
    H(A, B), the distance-functional gap and, with ``--eps``, the
    mutual-containment certificate. With ``--set-sequence`` the Wijsman table
    ``n,point_id,deviation`` is written as CSV instead.
    """
    inst = _require_space(config)
    if config.set_sequence:
        seq = inst.set_sequences.get(config.set_sequence)
        if seq is None:
            raise ArgumentError(f"instance {inst.name!r} has no set sequence {config.set_sequence!r}")
        probe = inst.subset(config.subsets[0]) if config.subsets else seq.limit_candidate
        report = wijsman_profile(seq, probe, tol=config.tol, jobs=config.jobs)
        out = config.out or "wijsman.csv"
        dump_to_csv(["n", "point_id", "deviation"], report.rows, out, footer={"verdict": report.verdict})
        return report.verdict, out
    if len(config.subsets) != 2:
        raise ArgumentError("hausdorff needs two --subset names")
    A, B = (inst.subset(name) for name in config.subsets)
    H = hausdorff(A, B)
    gap = distance_functional_gap(A, B, SubsetRef.whole(inst.space))
    payload = {"A": config.subsets[0], "B": config.subsets[1], "hausdorff": H, "functional_gap": gap}
    if config.eps is not None:
        payload["eps"] = _eps(config.eps, inst.space.exact)
        payload["mutual_containment"] = enlargement_certificate(A, B, payload["eps"])
    _emit(payload, config.out)
    return format_cell(H), config.out


def cmd_uc_scan(args, config: RunConfig) -> tuple[str, str | None]:
    """
    Scan, pair, witness function and profiles in one JSON report; exit 3 if
    the scan flagged its scale.
    """
    inst = _require_space(config)
    if len(config.subsets) != 1:
        raise ArgumentError("uc-scan needs exactly one --subset")
    A = inst.subset(config.subsets[0])
    if config.delta is None or config.separation is None:
        delta, s = default_scan_scale(A)
        delta = config.delta if config.delta is not None else delta
        s = config.separation if config.separation is not None else s
    else:
        delta, s = config.delta, config.separation
    scan = uc_defect_scan(A, delta, s, config.k_min, config.k_max)
    functions = [inst.function(config.function)] if config.function in inst.functions else list(inst.functions.values())
    probe = uc_equivalence_probe(A, functions, config.depth, scan=scan, cap=config.cap, jobs=config.jobs)
    payload = {
        "instance": inst.name,
        "subset": config.subsets[0],
        "scan": scan.to_descriptor(),
        "profiles": [
            {"function": f.name, "verdict": p.verdict, "values": list(p.values)}
            for f, p in zip(functions, probe.profiles)
        ],
        "pair": probe.pair.to_descriptor() if probe.pair is not None else None,
        "witness_profile": list(probe.witness_profile.values) if probe.witness_profile is not None else None,
        "witness_verdict": probe.witness_verdict,
        "consistent": probe.consistent,
    }
    out = config.out or "uc_scan.json"
    dump_to_json(payload, out)
    if scan.flags:
        raise ResolutionFlagged(scan.verdict, out)
    return scan.verdict, out


def cmd_converge(args, config: RunConfig) -> tuple[str, str | None]:
    """
    Convergence table as CSV ``check,index,value,detail``:

    - with a function sequence: strong and very strong verdicts on the subset
      plus per-delta violations, and with ``--set-sequence`` the joint
      continuity table;
    - on an instance with a product net and no sequence: row and diagonal
      checks of the iterated-limit demo.
    """
    inst = _require_space(config)
    eps = _eps(config.eps, inst.space.exact)
    rows, footer = [], {}
    if config.sequence is None and inst.product_net is not None:
        report = iterated_limit_failure_demo(inst.product_net, eps=eps, J=config.delta_grid or 10)
        rows.extend(["row", k, passed, report.row_deltas[k - 1]] for k, passed in enumerate(report.rows_passed, 1))
        rows.extend(["diagonal", delta, first_k, ""] for delta, first_k in report.diagonal.items())
        footer = {"rows_ok": report.rows_ok, "diagonal_fails": report.diagonal_fails}
        if report.resolving_K is not None:
            footer["resolving_K"] = report.resolving_K
        verdict = "rows_pass_diagonal_fails" if report.rows_ok and report.diagonal_fails else "unexpected"
    else:
        if config.sequence is None or config.sequence not in inst.sequences:
            raise ArgumentError(f"--sequence must name one of {sorted(inst.sequences)}")
        fs = inst.sequences[config.sequence]
        A = inst.subset(config.subsets[0]) if config.subsets else SubsetRef.whole(inst.space)
        J = config.delta_grid if config.delta_grid is not None else inst.parameters.get("delta_depth")
        J = J if J is not None else adequate_delta_depth(len(fs))
        strong = strong_uniform_check(fs, A, eps, J=J, jobs=config.jobs)
        very = very_strong_uniform_check(fs, A, eps, J=J, jobs=config.jobs)
        rows.append(["strong", strong.lambda0, strong.passed, strong.within_grid])
        rows.append(["very_strong", very.lambda0, very.passed, very.delta])
        rows.extend(["violation", delta, last, ""] for delta, last in very.violations.items())
        footer = {"strong": strong.passed, "very_strong": very.passed, "delta_depth": J}
        verdict = f"strong={strong.passed};very_strong={very.passed}"
        if config.set_sequence:
            seq = inst.set_sequences.get(config.set_sequence)
            if seq is None:
                raise ArgumentError(f"instance {inst.name!r} has no set sequence {config.set_sequence!r}")
            joint = joint_continuity_experiment(fs, seq, config.depth, tol=config.tol, jobs=config.jobs)
            rows.extend(["joint", lam, omega, f"{format_cell(H)};{format_cell(dev)};{format_cell(hit)}"]
                        for lam, omega, H, dev, hit in joint.rows)
            footer.update({"joint_verdict": joint.verdict, "certificate": joint.certificate,
                           "tail_deviation": joint.tail_deviation})
            verdict += f";joint={joint.verdict}"
    out = config.out or "converge.csv"
    dump_to_csv(["check", "index", "value", "detail"], rows, out, footer=footer)
    return verdict, out


COMMANDS = {
    "catalog": cmd_catalog,
    "oscillation": cmd_oscillation,
    "hausdorff": cmd_hausdorff,
    "uc-scan": cmd_uc_scan,
    "converge": cmd_converge,
}

CONFIG_FLAGS = (
    "space", "subsets", "function", "sequence", "set_sequence", "point", "kinds", "depth", "eps", "tol",
    "delta_grid", "delta", "separation", "k_min", "k_max", "cap", "out", "jobs", "archive", "ledger",
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--space", help="instance document (JSON)")
    common.add_argument("--subset", dest="subsets", action="append", help="subset name (repeatable)")
    common.add_argument("--function", help="function name")
    common.add_argument("--sequence", help="function sequence name")
    common.add_argument("--set-sequence", dest="set_sequence", help="set sequence name")
    common.add_argument("--point", type=int, help="PointId for the omega profile")
    common.add_argument("--kind", dest="kinds", action="append", help="Omega, Omega_star or omega (repeatable)")
    common.add_argument("--depth", type=int, help="depth N")
    common.add_argument("--eps", help="tolerance eps, number or p/q")
    common.add_argument("--tol", type=float, help="convergence tolerance")
    common.add_argument("--delta-grid", dest="delta_grid", type=int, help="delta grid depth J")
    common.add_argument("--delta", type=float, help="UC scan isolation threshold")
    common.add_argument("--separation", type=float, help="UC scan separation s")
    common.add_argument("--k-min", dest="k_min", type=int)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--cap", type=float, help="divergence cap for profiles")
    common.add_argument("--out", help="output file")
    common.add_argument("--jobs", type=int, help="worker threads")
    common.add_argument("--archive", help="archive directory for timestamped copies")
    common.add_argument("--ledger", help="SQLite run ledger")

    parser = argparse.ArgumentParser(prog="oscillation_lab", description="Oscillation, hyperspace and UC-subset experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    cat = sub.add_parser("catalog", parents=[common], help="list or build catalog instances")
    cat.add_argument("action", choices=["list", "build"])
    cat.add_argument("name", nargs="?")
    cat.add_argument("--param", action="append", help="builder parameter key=value (repeatable)")
    cat.add_argument("--transform", help="apply the metric transform of this function")
    for name in ("oscillation", "hausdorff", "uc-scan", "converge"):
        sub.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or "").strip().splitlines()[0])
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in CONFIG_FLAGS if getattr(args, k, None) is not None}
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.from_dict(overrides)


def _record(config: RunConfig, command: str, verdict: str, code: int, output: str | None) -> None:
    if output and config.archive:
        archive_copy(output, config.archive, command)
    if config.ledger:
        ledger = RunLedger(config.ledger)
        try:
            ledger.record_run({
                "run_key": run_key(command, config.to_dict()),
                "command": command,
                "verdict": verdict,
                "exit_code": code,
                "output_path": output,
                "ran_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            })
        finally:
            ledger.close()


def main(argv=None) -> int:
    """
    Parse arguments, run one subcommand and map its outcome to an exit code.

    :param argv: Arguments without the program name; defaults to ``sys.argv``.
    :type argv: list[str] or None
    :returns: The exit code.
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    config = None
    try:
        config = _config_from_args(args)
        verdict, output = COMMANDS[args.command](args, config)
        code = EXIT_OK
    except ResolutionFlagged as exc:
        logging.warning(f"{args.command}: sample resolution flagged; output written to {exc.output}")
        verdict, output, code = exc.verdict, exc.output, EXIT_RESOLUTION
    except (DescriptorError, StructuralError, ArgumentError) as exc:
        logging.error(f"{args.command}: {exc}")
        verdict, output, code = "input_error", None, EXIT_INPUT
    except ResolutionError as exc:
        logging.error(f"{args.command}: sample too coarse: {exc}")
        verdict, output, code = "resolution_error", None, EXIT_RESOLUTION
    except InvariantViolation as exc:
        logging.error(f"{args.command}: invariant violated: {exc}")
        verdict, output, code = "invariant_violation", None, EXIT_INVARIANT
    if config is not None:
        _record(config, args.command, verdict, code, output)
    logging.info(f"{args.command} finished with exit code {code} ({verdict})")
    return code


if __name__ == "__main__":
    sys.exit(main())
