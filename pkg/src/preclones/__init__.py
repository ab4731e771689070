"""Preclone algebra over ranked trees, tree automata, a Lindstrom-quantifier
logic, and a compiler from formulas to block-product recognizers."""

__version__ = "0.1.0"
