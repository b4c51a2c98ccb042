"""Explicit almost-invariant sets in the homology-cover tower.

A_n keeps the base vertex and the first k coordinates of the cover free.
Its size and edge boundary follow closed forms, and the normalized
indicator is almost fixed by both generators.
"""

from qrnorms.folner import build_A, choose_k, folner_report
from qrnorms.quotients import ag_tower

tower = ag_tower(3, unwind=[None, None, 7])
ks = choose_k(tower)
print("k chosen per level:", ks)
for row in folner_report(build_A(tower, ks), tower):
    print(f"level {row.level}: |A|={row.size:5d} of {row.nu:6d}  |dA|={row.boundary:4d}  "
          f"|dA|/|A|={row.ratio_boundary:.4f}  residuals=({row.residual_a:.3f}, {row.residual_b:.3f})  "
          f"formulas ok={row.size_formula_ok and row.boundary_formula_ok}")
