"""
JSON and JSONL reading and writing for requests and report documents.

Functions:
- read_json(input_path): Reads a JSON file.
- read_jsonl(input_path): Reads a JSONL file and returns a list of dictionaries.
- write_jsonl(output_path, data, mode="w"): Writes data to a JSONL file.
- dumps_report(report): Deterministic text of a report.
- write_report(report, output_path): Writes a report document.
"""
import json
import logging

from redmod.errors import InvalidRequest
from redmod.utils.path_util import ensure_parent_dir

logger = logging.getLogger(__name__)


def read_json(input_path):
    """
    Read a JSON file.

    Raises:
        InvalidRequest: If the file is not valid JSON.
    """
    with open(input_path, 'r', encoding='utf-8') as file:
        try:
            return json.load(file)
        except json.JSONDecodeError as e:
            raise InvalidRequest(f"{input_path} is not valid JSON: {e}") from e


def read_jsonl(input_path):
    """
    Read a JSONL file of requests or reports; blank lines are skipped.

    Args:
        input_path (str): The JSONL file.

    Returns:
        list[dict]: One object per non-blank line.

    Raises:
        InvalidRequest: If a line is not valid JSON.
    """
    lines = []
    with open(input_path, 'r', encoding='utf-8') as file:
        for number, line in enumerate(file, start=1):
            if not line.strip():
                continue
            try:
                lines.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise InvalidRequest(f"{input_path}:{number} is not valid JSON: {e}") from e
    return lines


def write_jsonl(output_path, data, mode="w"):
    """
    Write objects as JSON Lines with sorted keys, creating parent directories.

    Args:
        output_path (str): The output file.
        data (list[dict]): Objects to write, one per line.
        mode (str, optional): "w" to replace the file, "a" to append. Defaults to "w".
    """
    ensure_parent_dir(output_path)
    with open(output_path, mode, encoding="utf-8") as file:
        for item in data:
            file.write(json.dumps(item, ensure_ascii=False, sort_keys=True) + "\n")


def dumps_report(report):
    """Report text: sorted keys, 2-space indentation and a trailing newline."""
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(report, output_path):
    """Write a report document, creating parent directories."""
    ensure_parent_dir(output_path)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(dumps_report(report))
    logger.info("Report written to %s", output_path)
