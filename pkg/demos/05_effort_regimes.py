"""Evaluation effort against quadrature effort.

Run with ``python3 demos/05_effort_regimes.py``.
"""
# %%
from fractions import Fraction

from stratflow.harness import ExperimentSpec, effort_model, run_experiment
from stratflow.integrals import beta, critical_stepsize, effort_exponent
from stratflow.linalg import eval_flops

# %% Error-vs-quadrature-effort exponents for distinct non-zero indices
for M in (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5, 2), Fraction(3)):
    row = [f"l={l}: {effort_exponent(M, l)}" for l in range(2, 7) if 2 * M >= l]
    print(f"M={M}:", ", ".join(row), f"(beta(M,2) = {beta(M, 2)})")

# %% Per-step evaluation flops for 2x2 systems and the predicted crossover
for label in ("magnus-05", "magnus-1", "magnus-15"):
    print(label, "flops/step:", eval_flops(label, 2))
print("h_cr for magnus-1:", critical_stepsize(1, 2, 2, 1.0, "magnus-1"))

# %% Measured tallies (a few paths suffice: the counts are deterministic)
spec = ExperimentSpec("linear-2w", ("magnus-1",), n_paths=10, n_batches=10, ref_factor=1)
rep = run_experiment(spec)
m = effort_model(rep)["magnus-1"]
for r, regime in zip(sorted(rep.rows, key=lambda r: -r.h), m["regimes"]):
    print(f"h={r.h:.5f}  eval={r.eval_flops:>8.0f}  quad={r.quad_ops:>8.0f}  {regime}")
print("measured crossover:", m["h_crossover"], " predicted:", m["h_cr_predicted"])
