"""Cross-network board recommendation: timeline text -> ontology topics -> diverse boards."""

__version__ = "0.1.0"
