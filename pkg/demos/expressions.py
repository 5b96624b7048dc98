"""
Operator expressions
====================

Observables can be written as sums and products of Pauli atoms on
subsystems (1-based), and compared with matrices built by hand.
"""

import numpy as np

from wvlab.hilbert import embed, identity, pauli
from wvlab.opexpr import operator, parse, pretty

dims = (2, 2)
tree = parse("0.5*(I@1 + Z@1 * Z@2)")
print("parsed:", tree)
print("pretty:", pretty(tree))

built = operator("0.5*(I@1 + Z@1 * Z@2)", dims)
by_hand = 0.5 * (identity(dims) + embed(pauli("Z"), 0, dims) @ embed(pauli("Z"), 1, dims))
print("max entry difference:", np.max(np.abs(built.entries - by_hand.entries)))
print(np.real(built.entries))
