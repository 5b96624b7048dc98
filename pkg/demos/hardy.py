"""
Overlapping interferometers as weak values
==========================================

Two overlapping interferometers, one for a positron and one for an
electron. Each particle is in the overlapping arm (O) or not (NO).
Pre-select the state left after no annihilation, post-select the
outcome the paradox is built on, and ask for the occupation weak values.
"""

import numpy as np

from wvlab import builtin, weak_value, abl_distribution

hardy = builtin("hardy")
print("pre/post overlap:", np.round(hardy.tsv.overlap, 6))

# joint occupations: the "both in NO" projector comes out at -1
for label in ("O.O", "O.NO", "NO.O", "NO.NO"):
    value = round(weak_value(hardy.tsv, hardy.observables[label]).real, 12) + 0.0
    print(f"<{label}>_w = {value:+.3f}")

# the four projectors still sum to the identity
total = sum(weak_value(hardy.tsv, hardy.observables[k]) for k in ("O.O", "O.NO", "NO.O", "NO.NO"))
print("sum of the joint table:", np.round(total, 12))

# a strong measurement of a single projector never sees the negative value
dist = abl_distribution(hardy.tsv, hardy.observables["NO.NO"])
print("ABL outcomes for NO.NO:", [(a, round(p, 4)) for a, p in dist.outcomes])
