"""
EPR-Bohm pairs and a pre-selected singlet
=========================================

A singlet is pre-selected and Alice/Bob post-select spin along y and x.
The joint weak table has a negative entry, and its rows and columns
still add up to the single-particle weak values.
"""

import numpy as np

from wvlab import builtin, weak_value

epr = builtin("epr-bohm")
labels = [["A:up_y B:up_x", "A:up_y B:down_x"], ["A:down_y B:up_x", "A:down_y B:down_x"]]
table = np.array([[weak_value(epr.tsv, epr.observables[k]).real for k in row] for row in labels])
print("joint table (rows A up_y/down_y, columns B up_x/down_x):")
print(np.round(table, 12))
print("row sums:   ", np.round(table.sum(axis=1), 12))
print("column sums:", np.round(table.sum(axis=0), 12))

yx = weak_value(epr.tsv, epr.observables["sigma_y^A sigma_x^B"])
print(f"<sigma_y^A sigma_x^B>_w = {yx.real:+.3f} (imaginary part {abs(yx.imag):.1e})")
