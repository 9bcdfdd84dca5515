"""
Runs many analysis requests, one isolated analysis per worker task.

Functions:
- read_requests(input_path): Request objects of a JSONL file or an Excel sheet.
- run_batch(requests, workers, options): Report documents in request order.
- batch_with_args(args): Command entry point.
- add_batch_arguments(parser): Add command line arguments.
"""
import argparse
import json
import logging
from multiprocessing import Pool

import pandas as pd

from redmod.commands.analyze import add_settings_arguments, settings_from_args
from redmod.request import run_safely
from redmod.utils.json_util import read_jsonl, write_jsonl
from redmod.utils.path_util import suffix_of

logger = logging.getLogger(__name__)


def _cell(value):
    if isinstance(value, str) and value.strip()[:1] in ("{", "["):
        return json.loads(value)
    return value


def read_requests(input_path):
    """
    Request objects of a JSONL file, or of an Excel sheet with one request per row.

    Sheet cells holding JSON objects or lists (module, context, eta, a, options) are
    decoded; empty cells are dropped.
    """
    if suffix_of(input_path) in ("xlsx", "xls"):
        df = pd.read_excel(input_path)
        if "-" in df.columns:
            df = df.drop(columns="-")
        return [{k: _cell(v) for k, v in row.items() if not pd.isna(v)}
                for row in df.to_dict(orient="records")]
    return read_jsonl(input_path)


def _with_options(request, options):
    if not isinstance(request, dict):
        return request
    return {**request, "options": {**options, **request.get("options", {})}}


def run_batch(requests, workers=1, options=None):
    """
    Run every request; domain errors become error documents.

    Args:
        requests (list[dict]): Request objects.
        workers (int): Worker processes; 1 runs in this process.
        options (dict, optional): Settings applied to requests that do not set them.

    Returns:
        list[dict]: Report documents in the order of `requests`.
    """
    requests = [_with_options(r, options or {}) for r in requests]
    if workers <= 1:
        return [run_safely(r) for r in requests]
    with Pool(workers) as pool:
        return pool.map(run_safely, requests)


def batch_with_args(args):
    requests = read_requests(args.input)
    options = {k: v for k, v in settings_from_args(args).items() if v is not None}
    reports = run_batch(requests, args.workers, options)
    failed = sum(1 for r in reports if "error" in r)
    write_jsonl(args.output, reports)
    logger.info("%s reports written to %s, %s failed", len(reports), args.output, failed)


def add_batch_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("-i", "--input", type=str, required=True,
                        help="Requests, as a jsonl file or an xlsx sheet")
    parser.add_argument("-o", "--output", type=str, default="reports.jsonl",
                        help="The output jsonl file (default: reports.jsonl)")
    parser.add_argument("--workers", type=int, default=1,
                        help="Number of worker processes (default: 1)")
    add_settings_arguments(parser)
