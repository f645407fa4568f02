"""Strong convergence of Neumann and Magnus schemes on a two-Wiener system.

A reduced run (200 paths); the acceptance suite uses 2000.
Run with ``python3 demos/03_two_wiener_convergence.py``.
"""
# %%
from stratflow.harness import ExperimentSpec, matched_effort_offset, run_experiment, slope

spec = ExperimentSpec("linear-2w", ("neumann-05", "magnus-05", "neumann-1", "magnus-1",
                                    "magnus-1:corrected"),
                      n_paths=200, n_batches=20, seed=0)
report = run_experiment(spec)

# %% Error and effort per row
print(f"{'scheme':<20}{'h':>10}{'Q':>6}{'error':>11}{'ci90':>10}{'effort':>10}")
for r in report.rows:
    print(f"{r.scheme:<20}{r.h:>10.5f}{r.Q:>6d}{r.error:>11.4f}{r.ci90:>10.4f}{r.effort:>10.0f}")

# %% Observed orders
for s in dict.fromkeys(r.scheme for r in report.rows):
    print(f"{s:<20} slope vs h {slope(report.select(s), 'h', 'error'):.2f}")

# %% Order 1 against order 1/2 at equal effort, in decades
print("offset:", round(matched_effort_offset(report, "magnus-1", "magnus-05"), 2))
