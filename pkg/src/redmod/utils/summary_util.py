"""
Human-readable summaries of report documents, rendered as Markdown with rich.

Functions:
- report_to_markdown(report): Markdown text of a report.
- print_report(report, console): Render a report on the console.
"""
from rich.console import Console
from rich.markdown import Markdown

_HIDDEN = {"schema", "command", "context"}


def _format(value):
    if isinstance(value, bool) or value is None:
        return f"`{value}`"
    if isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, str):
        return f"`{value}`" if value else "``"
    if isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value):
        return ", ".join(_format(v) for v in value) if value else "none"
    return None


def _section(lines, data, level):
    for key in sorted(data):
        if key in _HIDDEN:
            continue
        value = data[key]
        text = _format(value)
        if text is not None:
            lines.append(f"- **{key}**: {text}")
        elif isinstance(value, dict):
            lines.append(f"\n{'#' * level} {key}\n")
            _section(lines, value, min(level + 1, 6))
        else:
            lines.append(f"\n{'#' * level} {key}\n")
            for i, item in enumerate(value):
                if isinstance(item, dict):
                    lines.append(f"{'#' * min(level + 1, 6)} {key} {i + 1}\n")
                    _section(lines, item, min(level + 2, 6))
                else:
                    lines.append(f"- {item}")


def report_to_markdown(report):
    """Markdown text of a report document."""
    context = report.get("context") or {}
    lines = [f"# redmod {report.get('command', '')}", ""]
    if context:
        lines.append(f"Coordinates: {', '.join(context.get('coordinates', []))}")
        lines.append("")
    if "error" in report:
        error = report["error"]
        lines.append(f"**{error['type']}**: {error['message']}")
        return "\n".join(lines) + "\n"
    _section(lines, report, 2)
    return "\n".join(lines) + "\n"


def print_report(report, console=None):
    console = console or Console()
    console.print(Markdown(report_to_markdown(report)))
