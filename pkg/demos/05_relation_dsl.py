"""The relation language: parse, pretty-print, evaluate, sweep.

Relations are star-polynomials (optionally composed with registered scalar
functions) declared equal to zero.  The stock file below carries the
quadratic system; a consequence expression is then tracked as the residual
budget tightens.
"""

import numpy as np

from qcwb import (
    QC_RELATION_SOURCE,
    canonical_generators,
    delta_eps_sweep,
    parse,
    parse_expression,
    pretty,
    residuals,
)
from qcwb.relations import perturbation_sampler

rs = parse(QC_RELATION_SOURCE)
print("parsed relations:", rs.labels())
print("\npretty-printed source:\n" + pretty(rs))

trip = canonical_generators(4)
env = {"h": trip.h, "x": trip.x, "k": trip.k}
print("residuals on the canonical representation:")
for label, value in residuals(rs, env).items():
    print(f"  {label:14s} {value:.2e}")

# a consequence of the relations: x*x <= h - h^2, here as a norm expression
consequence = parse_expression("x'*x - (h - h'*h)", rs.variables)
sampler = perturbation_sampler(m=4)
print("\nconsequence norm as the relation budget delta shrinks:")
table = delta_eps_sweep(
    rs,
    consequence,
    sampler,
    deltas=[1e-2, 1e-3, 1e-4, 1e-5],
    samples_per_delta=5,
    rng=np.random.default_rng(5),
)
for delta, observed in table:
    print(f"  delta = {delta:.0e}   max ||consequence|| observed = {observed:.3e}")
