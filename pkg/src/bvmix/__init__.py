"""Numerics for mixing of passive scalars transported by divergence-free
BV velocity fields on the torus: negative-norm functionals, averaged
mollifiers, exactly solvable flows, transport, commutator bound reports,
tower-scale arithmetic, and pigeonhole parameter selection.
"""

__version__ = "0.1.0"
