"""
redmod: singularity co-orders, reduction modules and determining systems

Usage:
    redmod sco --eq eq.txt --module module.json
    redmod check-reduction --eq heat.txt --phi "u*exp(-t-x)"
    redmod eiconal --a identity --psi "t+x1"
    redmod batch -i requests.jsonl -o reports.jsonl
    redmod export -i reports.jsonl -o reports.xlsx

Commands:
    sco, check-reduction, reduce, ndim-reduce, deteqs, coorder1, classify,
    eiconal, meta   Analyses; see `redmod <command> -h`
    batch           Run a jsonl or xlsx file of requests
    export          Convert reports to xlsx, csv or html
"""
import argparse
import logging
import sys

from rich.logging import RichHandler

from redmod.commands.analyze import COMMANDS, add_analysis_arguments, analyze_with_args
from redmod.commands.batch import add_batch_arguments, batch_with_args
from redmod.commands.export import add_export_arguments, export_with_args
from redmod.errors import RedmodError

logger = logging.getLogger("redmod")


def _setup_logging(verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(message)s",
                        handlers=[RichHandler(rich_tracebacks=True)], force=True)


def cli(argv=None):
    """
    redmod: singularity co-orders, reduction modules and determining systems

    Exits with 0 when the analysis completed, whatever the verdicts and including
    analysis errors reported as error documents, 2 on input errors and resource
    limits and 3 on internal errors.
    """
    parser = argparse.ArgumentParser(
        description="redmod: singularity co-orders, reduction modules and determining systems")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    subparsers = parser.add_subparsers(dest="redmod help")

    for command, help_ in COMMANDS.items():
        parser_analysis = subparsers.add_parser(command, help=help_)
        add_analysis_arguments(parser_analysis)
        parser_analysis.set_defaults(func=analyze_with_args, command=command)

    parser_batch = subparsers.add_parser("batch", help="Run a jsonl or xlsx file of requests")
    add_batch_arguments(parser_batch)
    parser_batch.set_defaults(func=batch_with_args)

    parser_export = subparsers.add_parser("export", help="Convert reports to xlsx, csv or html")
    add_export_arguments(parser_export)
    parser_export.set_defaults(func=export_with_args)

    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    if not hasattr(args, 'func'):
        parser.print_help()
        return
    try:
        args.func(args)
    except RedmodError as e:
        logger.error("%s: %s", type(e).__name__, e)
        sys.exit(e.exit_code)
    except OSError as e:
        logger.error("%s", e)
        sys.exit(2)
