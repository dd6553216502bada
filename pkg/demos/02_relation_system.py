"""The quadratic relation system on matrix triples (h, x, k).

Canonical exact representations on a grid, their block projection, and how
the three residual views (defining relations, block form, order form) react
to perturbations.
"""

import numpy as np

from qcwb import (
    QcTriple,
    canonical_generators,
    factor_x,
    high_level_residuals,
    low_level_residuals,
    op_norm,
    positivity_residuals,
    t_matrix,
)

m = 8
trip = canonical_generators(m)
print(f"canonical representation on {m} grid points, dimension {trip.dim}")
print("defining-relation residuals:", {k: f"{v:.2e}" for k, v in low_level_residuals(trip).items()})

t = t_matrix(trip)
print("block matrix is a projection:", op_norm(t @ t - t))
print("its trace (= 2m exactly):", np.trace(t).real)

# the block form and the defining relations control each other
rng = np.random.default_rng(2)
noise = rng.standard_normal((trip.dim, trip.dim)) + 1j * rng.standard_normal((trip.dim, trip.dim))
perturbed = QcTriple(trip.h, trip.x + 1e-3 * noise / op_norm(noise), trip.k)
low = low_level_residuals(perturbed)
high = high_level_residuals(perturbed)
print("\nafter a 1e-3 perturbation of x:")
print("  defining residuals:", {k: f"{v:.2e}" for k, v in low.items()})
print("  block-form residuals:", {k: f"{v:.2e}" for k, v in high.items()})
print("  each defining residual <= sum of block-form ones:",
      all(v <= sum(high.values()) + 1e-12 for v in low.values()))

# the weak (order) form only asks 0 <= T <= 1; a norm-one x breaks it
z = np.zeros((2, 2), dtype=complex)
e21 = np.array([[0, 0], [1, 0]], dtype=complex)
print("\nweak-system residuals for h=k=0, ||x||=1:",
      {k: f"{v:.3f}" for k, v in positivity_residuals(QcTriple(z, e21, z)).items()})

# x factors through eighth roots of k and h; the factor is a contraction
y = factor_x(trip)
print("\ncorner factor norm:", f"{op_norm(y):.4f}", "(a contraction)")
