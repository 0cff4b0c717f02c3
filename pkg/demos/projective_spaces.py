"""
Singular maps of projective spaces
==================================

Stiefel-Whitney classes of RP^n come from (1+x)^(n+1), and equal-degree
products that disagree rule out several classes of singular maps.
"""

from foldrel.obstruct import MapClass, OneGenRing, cp_verdict, min_relation_threshold, rp_verdict
from foldrel.parity2 import ktheory_profile

ring = OneGenRing.rp(13)
print("nonzero classes of RP^13:", [d for d in range(1, 14) if ring.w(d)])

# Smallest threshold l such that the classes w_i, i >= l, satisfy no forced equality.
print("minimal threshold:", min_relation_threshold(ring))

rep = rp_verdict(13, 12)
for v in rep.verdicts:
    print(f"  {v.map_class.value:13s} {v.rule:20s} {v.status}")

# For RP^31 the classes vanish, so the K-theory rule does the work.
print(ktheory_profile(5))
for target in range(20, 32):
    r = rp_verdict(31, target)
    print(target, "fold:", r.obstructed(MapClass.FOLD), " tame:", r.obstructed(MapClass.TAME_CORANK1))

# Complex projective spaces: the top rational Pontryagin class.
v = cp_verdict(4, 7)
print(v.status, v.witness)
