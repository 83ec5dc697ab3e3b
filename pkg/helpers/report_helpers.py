"""
This module defines helper functions for rendering human-readable reports
from the Jinja2 templates in ``templates/``.
"""
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"


def _format_number(value, digits=3):
    """Fixed-point for table cells; empty for missing values."""
    if value is None or value == "":
        return "-"
    return f"{value:.{digits}f}"


def _percent(alpha_key):
    return f"{100.0 * (1.0 - float(alpha_key)):g}%"


def create_environment(template_dir=TEMPLATE_DIR):
    """Jinja2 environment with the number filters the report templates use."""
    environment = Environment(
        loader=FileSystemLoader(str(template_dir)),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    environment.filters["num"] = _format_number
    environment.filters["level"] = _percent
    return environment


def render_report(template_name, **context):
    """Render a template with the given context."""
    return create_environment().get_template(template_name).render(**context)


def write_report(path, template_name, **context):
    """Render a template into ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(template_name, **context), encoding="utf-8")
    return path
