"""
Reading a weak value off a pointer
==================================

A Gaussian pointer is coupled to sigma_z with strength eps << sigma, the
system is post-selected, and the pointer is read. The mean position gives
the real part of the weak value and the mean momentum the imaginary part.
"""

from wvlab import builtin, weak_value
from wvlab.pointer import PointerConfig, attempts_for, estimate_weak_value, post_selected_pointer

pigeons = builtin("pigeonhole:2")
z1 = pigeons.observables["Z1"]
cfg = PointerConfig(epsilon=0.05, sigma=1.0)

ps = post_selected_pointer(pigeons.tsv, z1, cfg)
print(f"post-selection succeeds with probability {ps.success_prob:.4f}")

est = estimate_weak_value(pigeons.tsv, z1, cfg, attempts_for(ps, 100_000), seed=42)
print("exact    :", weak_value(pigeons.tsv, z1))
print(f"estimated: {est.value:.3f} +- ({est.std_error[0]:.3f}, {est.std_error[1]:.3f})")
print("accepted readings:", est.position.accepted, est.momentum.accepted)
