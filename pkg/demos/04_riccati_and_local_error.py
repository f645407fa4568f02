"""A matrix Riccati equation through its linearization.

The diffusion matrices of the linearized system commute, so the
uniformly accurate Magnus schemes apply.
Run with ``python3 demos/04_riccati_and_local_error.py``.
"""
# %%
import numpy as np

from stratflow.fixtures import b_matrix, c_matrix, riccati_problem, riccati_system
from stratflow.harness import ExperimentSpec, run_experiment
from stratflow.integrators import integrate, integrate_rk32, local_error_gap, riccati_extract
from stratflow.wiener import generate

system = riccati_system()
print("commuting diffusion:", system.commuting_diffusion)

# %% One path: Magnus on the linear system against a direct scheme for u
g = generate(2, 1.0, 64, 8, seed=1)
y, _ = integrate("magnus-ua-15", system, g, np.vstack([np.eye(2), np.eye(2)]), return_path=False)
u_rk, _ = integrate_rk32(riccati_problem(), g)
print("u(1) via Magnus:\n", riccati_extract(y))
print("u(1) via rk32-additive:\n", u_rk)

# %% Mean-square one-step remainders: Neumann minus Magnus is positive semi-definite
est = local_error_gap(system, 0.125, 1, 5000, 1)
print("smallest eigenvalue of the gap:", est.min_eigenvalue(), "+-", est.eigen_stderr())

# %% Without commuting diffusions there is no such ordering
print("eigenvalues of b:", np.round(np.linalg.eigvalsh(b_matrix()), 5))
print("eigenvalues of c:", np.round(np.linalg.eigvalsh(c_matrix()), 5))

# %% Global errors
spec = ExperimentSpec("riccati-9.1", ("neumann-1", "magnus-ua-1", "rk32-additive"),
                      n_paths=100, n_batches=10)
for r in run_experiment(spec).rows:
    print(f"{r.scheme:<15}{r.h:>10.5f}{r.error:>12.3e}")
