"""
Path helpers for report and export files.

Functions:
- ensure_dir(path): Create a directory if missing.
- ensure_parent_dir(path): Create the parent directory of a file.
- suffix_of(path): Lower-case extension, which picks export and batch formats.
"""
import os
import logging

logger = logging.getLogger(__name__)


def ensure_dir(path):
    """
    Ensure that a directory exists at the given path.

    Args:
        path (str): The path of the directory to be created. Empty means the
            current directory.
    """
    if path:
        os.makedirs(path, exist_ok=True)


def ensure_parent_dir(path):
    """
    Ensure that the parent directory of the given path exists.

    Parameters:
        path (str): The path for which the parent directory needs to be ensured.
    """
    ensure_dir(os.path.dirname(path))


def suffix_of(path):
    """Lower-case extension of `path` without the dot."""
    return os.path.splitext(path)[1].lower().lstrip(".")
