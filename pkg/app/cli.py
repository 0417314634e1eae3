"""
Command-line entry point of the Nielsen Orbit Lab.

    python -m app.cli classify --matrix 5,0,0,1/5
    python -m app.cli experiment-density --trials 200 --seed 7 --output density.jsonl
    python -m app.cli prg-census --group SL2 --p 5 --k 3

Per-trial records are JSON lines on stdout (or --output) followed by one
summary row; logs go to stderr.  Exit codes: 0 success, 1 failed
verification, 2 validation error, 3 budget or precision refusal.
"""

import argparse
import json
import sys
from typing import List, Optional, TextIO

from app import constants
from app.config import get_settings
from app.exceptions import ConfigValidationError, LabError
from app.models.census_models import FiniteGroupKind
from app.models.experiment_models import ExperimentKind, TupleFamily
from app.models.field_models import FieldKind, FieldSpec
from app.services import density, nielsen, prg, psl2, treeaut
from app.services.experiment_service import experiment_service
from app.services.lab_service import lab_service
from app.services.nielsen import MarkedTuple
from app.utils.helpers import parse_rational_matrix, parse_tuple, read_text, split_entries, to_json_line
from app.utils.logger import configure_logging, get_logger
from app.utils.validators import validate_census, validate_experiment_config, validate_field

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Argument groups
# ---------------------------------------------------------------------------

def _add_field_args(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument("--field", choices=[k.value for k in FieldKind], default=settings.field_kind)
    parser.add_argument("--p", type=int, default=settings.prime, help="residue characteristic")
    parser.add_argument("--precision", type=int, default=settings.precision, help="tracked digits N")


def _add_tuple_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--entry", action="append", default=[], help="matrix encoding (repeatable)")
    parser.add_argument("--matrix", action="append", default=[], help="four rationals a,b,c,d (repeatable)")
    parser.add_argument("--input", help="file with one matrix encoding per line")


def _add_experiment_args(parser: argparse.ArgumentParser, k_default: int) -> None:
    settings = get_settings()
    parser.add_argument("--k", type=int, default=k_default)
    parser.add_argument("--trials", type=int, default=settings.trials)
    parser.add_argument("--seed", type=int, default=settings.seed)
    parser.add_argument("--workers", type=int, default=settings.workers)
    parser.add_argument("--length-law", type=float, default=settings.length_law)
    parser.add_argument("--max-translation", type=int, default=settings.max_translation)
    parser.add_argument("--output", help="JSON-lines destination (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="nielsen-lab", description=settings.app_name)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify an element of PSL2(K) or a tree portrait")
    _add_field_args(p)
    p.add_argument("--entry", help="matrix encoding")
    p.add_argument("--matrix", help="four rationals a,b,c,d")
    p.add_argument("--portrait", help="file holding a serialized tree portrait")
    p.add_argument("--no-oracle", action="store_true", help="skip the displacement-oracle cross-check")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("reduce", help="Nielsen word making the first entry elliptic")
    _add_field_args(p)
    _add_tuple_args(p)
    p.add_argument("--budget", type=int, default=settings.reduction_budget)

    p = sub.add_parser("normalize", help="normalize a tuple into O, or run the normalization experiment")
    _add_field_args(p)
    _add_tuple_args(p)
    _add_experiment_args(p, k_default=max(3, settings.tuple_size))
    p.add_argument("--family", choices=[f.value for f in TupleFamily], default=TupleFamily.MIXED.value)
    p.add_argument("--budget", type=int, default=settings.reduction_budget)
    p.add_argument("--scan-radius", type=int, default=settings.scan_radius)

    p = sub.add_parser("certify", help="search for a density certificate")
    _add_field_args(p)
    _add_tuple_args(p)
    p.add_argument("--word-length", type=int, default=settings.word_length)
    p.add_argument("--nd-level", type=int, default=settings.nd_level)

    p = sub.add_parser("experiment-density", help="seeded density Monte Carlo")
    _add_field_args(p)
    _add_experiment_args(p, k_default=2)
    p.add_argument("--family", choices=[TupleFamily.GENERIC.value, TupleFamily.SUBFIELD.value], default="generic")
    p.add_argument("--subfield-power", type=int, default=2)
    p.add_argument("--word-length", type=int, default=settings.word_length)
    p.add_argument("--nd-level", type=int, default=settings.nd_level)

    p = sub.add_parser("experiment-treeaut", help="seeded portrait experiment on the abstract tree")
    _add_experiment_args(p, k_default=3)
    p.add_argument("--q", type=int, default=settings.tree_degree)
    p.add_argument("--depth", type=int, default=settings.tree_depth)
    p.add_argument("--scan-radius", type=int, default=settings.scan_radius)

    p = sub.add_parser("prg-census", help="Nielsen orbits on all k-tuples of SL2(F_p) or PSL2(F_p)")
    p.add_argument("--group", choices=[g.value for g in FiniteGroupKind], default=FiniteGroupKind.SL2.value)
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--allow-large", action="store_true", help="use the large-census tuple budget")
    p.add_argument("--csv", help="write one orbit per row to this file")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("verify", help="re-check a certificate or a Nielsen word against a tuple")
    _add_field_args(p)
    _add_tuple_args(p)
    p.add_argument("--certificate", help="file holding a serialized certificate")
    p.add_argument("--word", help="Nielsen word, e.g. 'R+ 1 2, T 2 3'")
    p.add_argument("--target", choices=["O", "elliptic"], default="O")

    return parser


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------

def _field(args: argparse.Namespace) -> FieldSpec:
    return validate_field({"kind": args.field, "p": args.p, "precision": args.precision})


def _tuple(args: argparse.Namespace, spec: FieldSpec) -> MarkedTuple:
    entries = list(args.entry) + split_entries(read_text(args.input))
    matrices = list(parse_tuple(spec, entries).entries) if entries else []
    matrices.extend(parse_rational_matrix(spec, text) for text in args.matrix)
    if not matrices:
        raise ConfigValidationError("no tuple given: use --entry, --matrix or --input")
    return MarkedTuple(tuple(matrices))


def _open_output(path: Optional[str], stdout: TextIO) -> TextIO:
    return open(path, "w", encoding="utf-8") if path else stdout


def _emit(obj, stdout: TextIO) -> None:
    stdout.write(to_json_line(obj) + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_classify(args: argparse.Namespace, stdout: TextIO) -> int:
    if args.portrait:
        response = lab_service.classify_portrait(treeaut.decode(read_text(args.portrait)))
    else:
        spec = _field(args)
        if args.entry:
            g = psl2.decode(spec, args.entry)
        elif args.matrix:
            g = parse_rational_matrix(spec, args.matrix)
        else:
            raise ConfigValidationError("classify needs --entry, --matrix or --portrait")
        response = lab_service.classify(g, oracle=not args.no_oracle)
    if args.format == "json":
        _emit(response, stdout)
        return constants.EXIT_OK
    parts = [f"{response.kind} ℓ={response.translation_length}"]
    if response.trace_valuation is not None:
        parts.append(f"v(tr)={response.trace_valuation}")
    if response.oracle_agrees is not None:
        parts.append("oracle agrees" if response.oracle_agrees else f"oracle disagrees (ℓ={response.oracle_length})")
    stdout.write(", ".join(parts) + "\n")
    return constants.EXIT_OK if response.oracle_agrees is not False else constants.EXIT_FAILURE


def cmd_reduce(args: argparse.Namespace, stdout: TextIO) -> int:
    spec = _field(args)
    _emit(lab_service.reduce(_tuple(args, spec), args.budget), stdout)
    return constants.EXIT_OK


def _experiment_config(args: argparse.Namespace, kind: ExperimentKind, **extra) -> dict:
    data = {
        "kind": kind,
        "k": args.k,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "length_law": args.length_law,
        "max_translation": args.max_translation,
        "output": args.output,
    }
    data.update(extra)
    return data


def _run_experiment(data: dict, stdout: TextIO) -> int:
    config = validate_experiment_config(data)
    stream = _open_output(config.output, stdout)
    try:
        experiment_service.run(config, stream)
    finally:
        if stream is not stdout:
            stream.close()
    return constants.EXIT_OK


def cmd_normalize(args: argparse.Namespace, stdout: TextIO) -> int:
    spec = _field(args)
    if args.entry or args.matrix or args.input:
        _emit(lab_service.normalize(_tuple(args, spec), args.budget, args.scan_radius), stdout)
        return constants.EXIT_OK
    data = _experiment_config(
        args,
        ExperimentKind.NORMALIZE,
        family=args.family,
        field=spec,
        reduction_budget=args.budget,
        scan_radius=args.scan_radius,
    )
    return _run_experiment(data, stdout)


def cmd_certify(args: argparse.Namespace, stdout: TextIO) -> int:
    spec = _field(args)
    certificate = lab_service.certify(_tuple(args, spec), args.word_length, args.nd_level)
    stdout.write(density.encode_certificate(certificate) + "\n")
    return constants.EXIT_OK


def cmd_experiment_density(args: argparse.Namespace, stdout: TextIO) -> int:
    data = _experiment_config(
        args,
        ExperimentKind.DENSITY,
        family=args.family,
        field=_field(args),
        subfield_power=args.subfield_power,
        word_length=args.word_length,
        nd_level=args.nd_level,
    )
    return _run_experiment(data, stdout)


def cmd_experiment_treeaut(args: argparse.Namespace, stdout: TextIO) -> int:
    data = _experiment_config(
        args,
        ExperimentKind.TREEAUT,
        tree={"q": args.q, "depth": args.depth},
        scan_radius=args.scan_radius,
    )
    return _run_experiment(data, stdout)


def cmd_prg(args: argparse.Namespace, stdout: TextIO) -> int:
    kind = validate_census(args.group, args.p, args.k)
    report = lab_service.census(kind, args.p, args.k, args.allow_large)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as f:
            prg.write_csv(report, f)
    if args.format == "json":
        _emit(report.model_dump(mode="json", exclude={"rows"}), stdout)
    else:
        stdout.write("\n".join(report.summary_lines()) + "\n")
    return constants.EXIT_OK


def cmd_verify(args: argparse.Namespace, stdout: TextIO) -> int:
    spec = _field(args)
    t = _tuple(args, spec)
    if args.certificate:
        verified = lab_service.verify_certificate(t, read_text(args.certificate))
        what = "certificate"
    elif args.word is not None:
        verified = lab_service.verify_word(t, nielsen.parse_word(args.word), args.target)
        what = f"word ({args.target})"
    else:
        raise ConfigValidationError("verify needs --certificate or --word")
    stdout.write(json.dumps({"verified": bool(verified), "checked": what}) + "\n")
    return constants.EXIT_OK if verified else constants.EXIT_FAILURE


COMMANDS = {
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "normalize": cmd_normalize,
    "certify": cmd_certify,
    "experiment-density": cmd_experiment_density,
    "experiment-treeaut": cmd_experiment_treeaut,
    "prg-census": cmd_prg,
    "verify": cmd_verify,
}


def main(argv: Optional[List[str]] = None, stdout: TextIO = sys.stdout, stderr: TextIO = sys.stderr) -> int:
    settings = get_settings()
    configure_logging(settings.log_level, settings.log_format)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, stdout)
    except LabError as e:
        logger.warning("command refused", command=args.command, error=type(e).__name__, details=e.details)
        stderr.write(f"error: {type(e).__name__}: {e.message}\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
