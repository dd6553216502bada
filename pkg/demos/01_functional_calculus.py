"""Tour of the dense linear algebra kernel.

Eigendecompositions, functional calculus, fractional powers, and the
nearest-projection map, with the independent cyclic-Jacobi backend held up
against LAPACK.
"""

import numpy as np

from qcwb import (
    PROFILES,
    frac_power,
    func_calc,
    herm_eig,
    jacobi_eigh,
    nearest_projection,
    op_norm,
    unitary_exp,
)

rng = np.random.default_rng(1)

# a random 6x6 Hermitian matrix
x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
h = 0.5 * (x + x.conj().T)

es = herm_eig(h)
print("eigenvalues:", np.round(es.eigenvalues, 4))
print("reconstruction error:", op_norm(es.apply(es.eigenvalues) - h))

# the self-contained Jacobi backend agrees with LAPACK
w_jac, _ = jacobi_eigh(h)
print("jacobi vs lapack eigenvalue gap:", np.max(np.abs(w_jac - es.eigenvalues)))
es_jac = herm_eig(h, PROFILES["jacobi"])
print("jacobi profile reconstruction:", op_norm(es_jac.apply(es_jac.eigenvalues) - h))

# functional calculus: clamp the spectrum into [0, 1]
clamped = func_calc(h, lambda t: np.clip(t, 0.0, 1.0))
print("clamped spectrum:", np.round(np.linalg.eigvalsh(clamped), 4))

# exp(2 pi i P) is the identity for a projection P
p = func_calc(h, lambda t: np.where(t >= 0, 1.0, 0.0))
print("unitary_exp on a projection ~ identity:", op_norm(unitary_exp(p) - np.eye(6)))

# eighth root of a positive matrix, recombined
pos = clamped + 0.1 * np.eye(6)
root = frac_power(pos, 1 / 8)
back = np.linalg.matrix_power(root, 8)
print("eighth-root recombination error:", op_norm(back - pos))

# nearest projection: spectrum in [0, 0.2] u [0.8, 1] snaps to {0, 1}
spectrum = np.concatenate([rng.uniform(0, 0.2, 3), rng.uniform(0.8, 1, 3)])
u = es.basis
almost = (u * spectrum) @ u.conj().T
proj = nearest_projection(almost)
print("projected idempotency defect:", op_norm(proj @ proj - proj))
print("distance moved:", op_norm(proj - almost), "<= worst eigenvalue displacement:",
      np.max(np.abs(np.where(spectrum >= 0.5, 1.0, 0.0) - spectrum)))
