"""Folded algebraic-geometric codes from cyclotomic function fields.

Exact-arithmetic construction of the function field, its message spaces,
encoders, and an interpolation-plus-automorphism list decoder, with folded
Reed-Solomon codes as a special case of the same machinery.
"""

__version__ = "0.1.0"
