"""
Strong coupling recovers the ABL rule
=====================================

With eps/sigma = 50 the pointer branches no longer overlap; sorting the
post-selected readings by branch gives outcome frequencies that match
the ABL probabilities.
"""

from wvlab import builtin, abl_distribution
from wvlab.pointer import PointerConfig, attempts_for, post_selected_pointer, strong_outcome_frequencies

cat = builtin("cheshire")
op = cat.observables["sigma_z Pi_L"]
cfg = PointerConfig(epsilon=50.0)

ps = post_selected_pointer(cat.tsv, op, cfg)
freqs = strong_outcome_frequencies(cat.tsv, op, cfg, attempts_for(ps, 50_000), seed=42)
abl = abl_distribution(cat.tsv, op)
for a, f, count in freqs:
    print(f"outcome {a:+.0f}: simulated {f:.4f} ({count} readings)   ABL {abl.probability(a):.4f}")
