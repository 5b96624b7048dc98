"""
Three pigeons, two boxes
========================

Each spin is pre-selected in +x and post-selected in +y; sigma_z says
which box it is in. No pair is found in the same box, weakly or with
certainty under ABL, even though every single particle is at <Z> = 0.
"""

import itertools

from wvlab import builtin, weak_value, abl_expectation

pigeons = builtin("pigeonhole:3")
for k in (1, 2, 3):
    z = pigeons.observables[f"Z{k}"]
    w = weak_value(pigeons.tsv, z)
    print(f"particle {k}: <Z>_w = {abs(w.real):.3f}{w.imag:+.3f}i"
          f"   ABL <Z> = {abs(abl_expectation(pigeons.tsv, z)):.3f}")

for j, k in itertools.combinations((1, 2, 3), 2):
    same = pigeons.observables[f"same{j}{k}"]
    zz = pigeons.observables[f"Z{j}Z{k}"]
    print(f"pair {j}{k}: <same box>_w = {abs(weak_value(pigeons.tsv, same)):.1e}"
          f"   ABL <ZZ> = {abl_expectation(pigeons.tsv, zz):+.3f}")
