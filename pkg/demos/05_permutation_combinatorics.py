"""The permutation group behind the higher moments.

Run with ``python3 demos/05_permutation_combinatorics.py``.
"""

from rmte_sff import theory
from rmte_sff.combinatorics import (
    GmElement,
    a_k_enumerate,
    a_k_extended_enumerate,
    commutant_bruteforce,
    embed,
    fixed_point_count,
    group_order,
)

# %% Elements of G_m
# A permutation rho of m copies together with a cyclic shift of each copy,
# acting on m t points.
g = GmElement([1, 0], [1, 2])
print("embedding of (swap, shifts (1, 2)) at t = 3:", embed(g, 3).tolist())
print("fixed points:", fixed_point_count(g, 3))

# %% G_m is exactly the commutant of the periodic shift
m, t = 2, 3
brute = commutant_bruteforce(m, t)
print(f"commuting permutations of {m * t} points: {len(brute)}, |G_m| = {group_order(m, t)}")

# %% Fixed-point histogram A_k(t)
for m in (1, 2, 3):
    for t in (2, 4):
        counts = a_k_enumerate(m, t)
        closed = tuple(theory.a_k_closed_form(m, k, t) for k in range(m + 1))
        print(f"m={m} t={t}: enumerated {counts}, closed form {closed}")

# %% Several subsystems: fixed points common to L - 1 elements
a = a_k_extended_enumerate(2, 2, 3)
print("L=3, m=2, t=2:", a, "sum", sum(a), "= |G_2|^2 =", group_order(2, 2) ** 2)
print("derangements !0..!6:", [theory.subfactorial(n) for n in range(7)])
print("A_2(t) polynomial coefficients:", [theory.a_k_polynomial(2, k) for k in range(3)])
