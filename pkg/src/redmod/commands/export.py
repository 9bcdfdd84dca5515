"""
Converts a report JSONL file into a table or an HTML page.

Functions:
- reports_to_frame(reports): One row per report, nested keys flattened.
- export_reports(input_path, output_path): Write xlsx, csv or html by suffix.
- export_with_args(args): Command entry point.
- add_export_arguments(parser): Add command line arguments.
"""
import argparse
import json

import markdown
import pandas as pd

from redmod.errors import InvalidRequest
from redmod.utils.json_util import read_jsonl
from redmod.utils.path_util import ensure_parent_dir, suffix_of
from redmod.utils.summary_util import report_to_markdown


def reports_to_frame(reports):
    df = pd.json_normalize(reports)
    for column in df.columns:
        df[column] = df[column].map(lambda v: json.dumps(v, sort_keys=True)
                                    if isinstance(v, (list, dict)) else v)
    return df


def export_reports(input_path, output_path):
    """
    Convert the reports of `input_path` according to the suffix of `output_path`.

    Raises:
        InvalidRequest: If the suffix is not xlsx, csv or html.
    """
    reports = read_jsonl(input_path)
    suffix = suffix_of(output_path)
    ensure_parent_dir(output_path)
    if suffix == "xlsx":
        reports_to_frame(reports).to_excel(output_path, engine="xlsxwriter", index=False)
    elif suffix == "csv":
        reports_to_frame(reports).to_csv(output_path, index=False)
    elif suffix == "html":
        text = "\n\n---\n\n".join(report_to_markdown(r) for r in reports)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(markdown.markdown(text, extensions=['extra']))
    else:
        raise InvalidRequest(f"Unrecognised export format {suffix!r}")


def export_with_args(args):
    export_reports(args.input, args.output)


def add_export_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("-i", "--input", type=str, required=True, help="Report jsonl file")
    parser.add_argument("-o", "--output", type=str, required=True,
                        help="Output file; the suffix picks xlsx, csv or html")
