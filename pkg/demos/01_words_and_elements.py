"""Reduced words and group-algebra elements of the free group on a, b.

Capital letters are inverses.  Elements are finite sums of words with
complex coefficients; multiplication is convolution.
"""

from qrnorms.words import adjoint, averaging_element, kesten_norm, parse_element, parse_word

w = parse_word("abBAab")
print("abBAab reduces to", w, "of length", len(w))
print("(ab)(Ba) =", parse_word("ab") * parse_word("Ba"))
print("inverse of aab:", parse_word("aab").inverse())

x = averaging_element()
print("\naveraging element x =", x)
print("x is self-adjoint:", adjoint(x) == x)

# x*x puts weight 1/4 on the identity: the return probability of a
# two-step simple random walk on the 4-regular tree
xx = x * x
print("x*x =", xx)
print("coefficient of e in x*x:", xx.coeff(""))

a = parse_element("(1+2j)*ab - 0.5*B")
print("\na =", a, "  a* =", adjoint(a))
print("norm of x on l2(F_2) (Kesten):", kesten_norm())
