"""Representation-theoretic machinery of the open quantum Toda chain.

Modules: params, algebra (PBW engine), borel_weil, whittaker, evaluator,
intertwiners, sln_search, relations, cli.
"""

__version__ = "0.1.0"
