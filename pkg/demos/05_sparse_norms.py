"""Sparse norms across the tower.

N_s(a, n) is the largest value of ||lambda_n(a) xi|| over unit vectors
supported on s points.  With s = 1 it is the largest column norm; with
s = nu_n it is the full operator norm.  The report puts it next to the
operator norm, the norm on the new part of level n and the truncated
regular norm.
"""

from qrnorms.quotients import ag_tower
from qrnorms.sparse_norms import GrowthFunction, norm_interpolation_report
from qrnorms.words import averaging_element

tower = ag_tower(2)
x = averaging_element()
for name, gamma in [("gamma = 1", GrowthFunction.minimal(3)),
                    ("gamma = (1, 2, 12)", GrowthFunction((1, 2, 12))),
                    ("gamma = nu", GrowthFunction.maximal(tower.sizes))]:
    print(name)
    for row in norm_interpolation_report(x, tower, gamma, regular_radius=6):
        print(f"  level {row.level}: s={row.budget:3d}  N_s={row.sparse_norm:.4f} ({row.sparse_strategy})"
              f"  lambda={row.lambda_norm:.4f}  regular={row.regular_norm:.4f}")
