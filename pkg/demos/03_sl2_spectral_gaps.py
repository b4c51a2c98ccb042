"""Spectral gaps of SL2(Z/m) quotients generated by the Sanov matrices.

For each modulus the averaging operator lambda(x) acts on l2 of the
finite group; its second eigenvalue mu_2 stays away from 1, which is
what makes the family an expander.
"""

from qrnorms.geometry import alpha
from qrnorms.quotients import sl2_quotient
from qrnorms.spectra import spectral_gap
from qrnorms.words import averaging_element

x = averaging_element()
print(" m     nu   alpha   mu_2      delta")
for m in (3, 5, 7, 11, 13):
    q = sl2_quotient(m)
    g = spectral_gap(q, x)
    print(f"{m:2d} {q.size:6d} {alpha(q).value:6d}   {g.mu2:.5f}   {g.delta:.5f}")
