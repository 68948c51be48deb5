"""Interactive meeting scheduling: constraint elicitation, weighted solving, suggestions."""

__version__ = "0.1.0"
