"""Shuffle relations: which iterated integrals need their own quadrature.

Run with ``python3 demos/02_shuffle_algebra.py``.
"""
# %%
from stratflow.shuffle import (classify_word, parts_reduce, shuffle_product,
                               solve_shuffle_system)

# %% Products of integrals are sums of shuffled words
print("J_1 J_12 =", shuffle_product((1,), (1, 2)).render())

# %% Integration by parts for sandwich words i^p j i^q
for w in ["121", "1211", "11211"]:
    print(f"J_{{{w}}} =", parts_reduce(w).render())

# %% Four letters {1,1,2,2}: everything reduces to two-block words
s4 = solve_shuffle_system("1122")
print(f"{{1,1,2,2}}: {s4.n_equations} equations, rank {s4.rank}, double sums {s4.generators}")

# %% Five letters {1,1,1,2,2}: one word is left over
s5 = solve_shuffle_system("11122")
print(f"{{1,1,1,2,2}}: {s5.n_equations} equations, rank {s5.rank}")
print("generators:", ["".join(map(str, g)) for g in s5.basis])
for w in ["12121", "21211", "11122"]:
    print(f"  {w}: {classify_word(w)}")
