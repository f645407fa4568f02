"""Iterated Stratonovich integrals: means, bridge projections and quadrature.

Run with ``python3 demos/01_iterated_integrals.py``.
"""
# %%
import numpy as np

from stratflow.harness import quadrature_check
from stratflow.integrals import (bridge_polynomial, conditional_expectation, expected_signature,
                                 linear_path_integral)
from stratflow.wiener import generate_paths

# %% Unconditional means come from tilings of the word by "0" and "ii"
for word in ["11", "12", "1122", "011", "101", "0"]:
    c, k = expected_signature(tuple(int(ch) for ch in word))
    print(f"E[J_{word}] = {c} h^{k}")

# %% Given only the step increments, the best estimate is a polynomial in them
for word in [(1, 2), (1, 0, 1), (1, 0, 2), (1, 1, 2)]:
    print(f"E[J_{''.join(map(str, word))} | x] =", bridge_polynomial(word).render())

# %% Conditioning on Q subintervals: compare with a fine piecewise linear path
g = generate_paths(2, 1.0, 1, 512, seed=0, paths=range(2000))
x = np.moveaxis(g.increments, 1, 0)
fine = linear_path_integral((1, 2), x, 1 / 512)
for q in (1, 4, 16, 64):
    xq = x.reshape(2, -1, q, 512 // q).sum(-1)
    err = np.sqrt(np.mean((conditional_expectation((1, 2), xq, 1 / q) - fine) ** 2))
    print(f"Q={q:3d}  L2 error of E[J_12 | F_Q]: {err:.4f}")

# %% The same measurement packaged, with the predicted exponents
res = quadrature_check("12", 1.0, (1, 2, 4, 8, 16), 5000)
print(f"slope {res.slope:.3f}, predicted h^{res.predicted[0]} / Q^{res.predicted[1]}")
