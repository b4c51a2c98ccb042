"""Norms of group-algebra elements on finite quotients of the free group.

Quotient towers (iterated Z/2 homology covers and SL2 congruence
quotients), word geometry on them, operator and sparse norms, spectral
gaps and Følner sets.
"""

from .folner import almost_invariant, boundary, build_A, choose_k, folner_report
from .geometry import alpha, ball, check_isometric_lifting, cluster_support, distances
from .quotients import (
    FiniteQuotient,
    QuotientTower,
    ag_tower,
    load_quotient,
    save_quotient,
    sl2_family,
    sl2_quotient,
    sl2_tower,
    tower_validate,
)
from .sparse_norms import (
    GrowthFunction,
    compare_growth,
    min_invariance_deficiency,
    norm_interpolation_report,
    sparse_norm,
    tau_lower_bound,
)
from .spectra import assemble, op_norm, regular_norm, rho_norm, spectral_gap
from .words import GroupAlgebraElement, Word, averaging_element, parse_element, parse_word

__all__ = [
    "FiniteQuotient", "GroupAlgebraElement", "GrowthFunction", "QuotientTower", "Word",
    "ag_tower", "almost_invariant", "alpha", "assemble", "averaging_element", "ball",
    "boundary", "build_A", "check_isometric_lifting", "choose_k", "cluster_support",
    "compare_growth", "distances", "folner_report", "load_quotient", "min_invariance_deficiency",
    "norm_interpolation_report", "op_norm", "parse_element", "parse_word", "regular_norm",
    "rho_norm", "save_quotient", "sl2_family", "sl2_quotient", "sl2_tower", "sparse_norm",
    "spectral_gap", "tau_lower_bound", "tower_validate",
]
