"""UI."""

from teamform.ui.reporter import Reporter

__all__ = ["Reporter"]
