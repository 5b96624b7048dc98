"""
The Cheshire cat
================

A spin-1/2 particle in a two-box interferometer. The particle is found
weakly in the right box, while its spin is found weakly in the left box.
"""

from wvlab import builtin, weak_value

cat = builtin("cheshire")
w = {label: weak_value(cat.tsv, op) for label, op in cat.observables.items()}

print("particle in left box  <Pi_L>_w       =", round(w["Pi_L"].real, 12))
print("particle in right box <Pi_R>_w       =", round(w["Pi_R"].real, 12))
print("spin in left box      <sigma_z Pi_L>_w =", round(w["sigma_z Pi_L"].real, 12))
print("spin in right box     <sigma_z Pi_R>_w =", round(w["sigma_z Pi_R"].real, 12))

# weak values are linear but not multiplicative
print("<sigma_z>_w * <Pi_L>_w =", round((w["sigma_z"] * w["Pi_L"]).real, 12))
