"""
Fold maps in codimension -1
===========================

Collapse the Dold relations with rho_1 and watch which degrees leave room
for a nonzero cobordism class.
"""

from foldrel.dold import dold_image
from foldrel.obstruct import classify_codim1, quotient_dim

# The image of rho_1 in degree n has basis x^j t^(n-2j), j = 1..n/2.
img = dold_image(9, 1)
print("degree 9 basis:", img.labels)
print("rank of the collapsed relations:", img.rank)

# Two basis monomials are left over, and they are exactly the non-pivot columns.
print("complement:", [img.labels[c] for c in img.complement()])

# In degree 8 only x^4 survives, and x t^6 agrees with it modulo the relations.
rep = quotient_dim(8, 1)
print("n=8:", rep.quotient_dim, rep.complement)

# Scan a range of degrees.  Only three shapes of n carry a nonzero quotient.
for n in range(2, 70):
    r = classify_codim1(n)
    if r.quotient.quotient_dim:
        print(f"{n:3d}  {r.cls.value:3s}  dim {r.quotient.quotient_dim}  {list(r.quotient.complement)}")
