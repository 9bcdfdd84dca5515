"""
The analysis commands: sco, check-reduction, reduce, ndim-reduce, deteqs, coorder1,
classify, eiconal and meta.

All of them share one set of flags; the request decides which inputs the command
accepts.

Functions:
- request_from_args(args): AnalysisRequest of the parsed arguments.
- settings_from_args(args): Settings overrides of the parsed arguments.
- analyze_with_args(args): Run the command and emit the report.
- add_analysis_arguments(parser): Add the shared flags.
"""
import argparse
import json
import logging
import os
import sys

from redmod.errors import AnalysisError, InvalidRequest
from redmod.request import AnalysisRequest, error_document, run
from redmod.utils.io_util import read_equation
from redmod.utils.json_util import dumps_report, read_json, write_report
from redmod.utils.summary_util import print_report

logger = logging.getLogger(__name__)

COMMANDS = {
    "sco": "Strong and weak singularity co-orders of a module",
    "check-reduction": "Conditional invariance criterion of a module",
    "reduce": "Reduced equation of a shift module",
    "ndim-reduce": "Reduce an equation to an algebraic one by an invariant",
    "deteqs": "Determining system of an evolution equation",
    "coorder1": "Determining system of an equation of co-order one",
    "classify": "Co-orders for quasi-linear second-order equations",
    "eiconal": "Eiconal residual and meta-singular module of a wave equation",
    "meta": "Meta-singularity co-order of a differential function",
}


def _json_or_path(value):
    """Inline JSON, a path to a JSON file, or the text itself."""
    if value is None:
        return None
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        pass
    if os.path.exists(value):
        return read_json(value)
    return value


def settings_from_args(args):
    return {
        "seed": args.seed,
        "samples": args.samples,
        "max_nodes": args.max_nodes,
        "max_jet_order": args.max_jet_order,
        "cross_check": False if args.no_cross_check else None,
    }


def request_from_args(args):
    """
    Build the request of the parsed arguments.

    Raises:
        InvalidRequest: If both or neither of `--eq` and `--expr` are given where
            an equation is needed.
    """
    if args.eq is not None and args.expr is not None:
        raise InvalidRequest("Give the equation either as --eq or as --expr")
    equation = read_equation(args.eq) if args.eq is not None else args.expr
    options = {k: v for k, v in settings_from_args(args).items() if v is not None}
    if args.strict:
        options["strict"] = True
    data = {
        "command": args.command,
        "context": _json_or_path(args.context),
        "equation": equation,
        "module": _json_or_path(args.module),
        "phi": args.phi,
        "phi1": args.phi1,
        "phi2": args.phi2,
        "psi": args.psi,
        "eta": args.eta,
        "tau": args.tau,
        "p": args.p,
        "directions": args.directions,
        "hat": args.hat,
        "inverse": args.inverse,
        "kind": args.kind,
        "a": _json_or_path(args.a),
        "b": args.b,
        "count": args.count,
        "variant": args.variant,
        "xi": args.xi,
        "options": options,
    }
    return AnalysisRequest.from_dict(data)


def analyze_with_args(args):
    request = request_from_args(args)
    try:
        report = run(request)
    except AnalysisError as e:
        logger.warning("%s: %s", type(e).__name__, e)
        report = error_document(request.command, e)
    if args.output:
        write_report(report, args.output)
    if args.pretty:
        print_report(report)
    elif args.json or not args.output:
        sys.stdout.write(dumps_report(report))


def add_settings_arguments(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="Seed of sampled zero tests and random modules")
    parser.add_argument("--samples", type=int, default=None,
                        help="Number of sample points of each zero test (default: 20)")
    parser.add_argument("--max-nodes", type=int, default=None,
                        help="Largest expression size accepted (default: 2000000)")
    parser.add_argument("--max-jet-order", type=int, default=None,
                        help="Highest derivative order (default: 12)")
    parser.add_argument("--no-cross-check", action="store_true",
                        help="Trust canonical forms without sampling")


def add_analysis_arguments(parser: argparse.ArgumentParser):
    """
    Add the flags shared by all analysis commands.

    Args:
        parser (argparse.ArgumentParser): The sub-parser of one command.
    """
    parser.add_argument("--eq", type=str, help="Equation file")
    parser.add_argument("--expr", type=str, help="Equation text, instead of --eq")
    parser.add_argument("--module", type=str, help="Module as inline JSON or a JSON file")
    parser.add_argument("--context", type=str,
                        help="Context as inline JSON or a JSON file; inferred from the inputs when absent")
    parser.add_argument("--phi", type=str, help="Invariant phi(x, u)")
    parser.add_argument("--phi1", type=str, help="First invariant of a pair")
    parser.add_argument("--phi2", type=str, help="Second invariant of a pair")
    parser.add_argument("--psi", type=str, help="Solution candidate of the eiconal equation")
    parser.add_argument("--eta", type=str, nargs="+", help="Coefficients eta^s")
    parser.add_argument("--tau", type=str, nargs="+", help="Coefficients tau^s of a wave module")
    parser.add_argument("--p", type=int, help="Number of leading checked coordinates")
    parser.add_argument("--directions", type=int, nargs="+",
                        help="Checked or shifted directions (0-based)")
    parser.add_argument("--hat", type=int, help="Distinguished direction of co-order one")
    parser.add_argument("--inverse", type=str,
                        help="Solution family u = f(x, kappa) of the invariant")
    parser.add_argument("--kind", type=str, choices=["elliptic", "evolution", "wave"],
                        help="Kind of quasi-linear equation")
    parser.add_argument("--a", type=str,
                        help="Coefficient matrix: identity, a scalar, inline JSON or a JSON file")
    parser.add_argument("--b", type=str, help="Lower-order term of a quasi-linear equation")
    parser.add_argument("--count", type=int, help="Number of sampled submodules (default: 10)")
    parser.add_argument("--variant", type=str, choices=["involutive", "weak", "special"],
                        help="Variant of the meta-singularity co-order")
    parser.add_argument("--xi", type=str, nargs="+", help="Coefficients of the special family")
    parser.add_argument("--strict", action="store_true",
                        help="Fail instead of returning an unknown verdict")
    add_settings_arguments(parser)
    output = parser.add_mutually_exclusive_group()
    output.add_argument("--json", action="store_true",
                        help="Print the JSON report (the default)")
    output.add_argument("--pretty", action="store_true", help="Render a Markdown summary")
    parser.add_argument("-o", "--output", type=str, help="Write the JSON report to this file")
