"""Index pipeline over a discretized interval algebra.

The ambient algebra A holds matrix-valued functions on a uniform grid over
[0, 1]; the quotient map evaluates at the two endpoints, and its kernel I
holds the functions vanishing there.  Given an exact representation of the
quadratic relation system in the quotient (one matrix triple per endpoint),
the pipeline

1. lifts h and k to orthogonal positive contractions over the grid
   (positive/negative parts of a linear interpolant),
2. lifts x through the corner factorization x = k^(1/8) y h^(1/8), with y
   interpolated between its endpoint values,
3. forms the blocked matrix T fiberwise and clamps its spectrum to [0, 1],
4. exponentiates: U = exp(2 pi i T'), a unitary path equal to the identity
   at both endpoints,
5. collapses the four blocks of U to the single unitary
   u = -1 + u11 + u12 + u21 + u22 and accumulates the phase of det u across
   the grid.

The resulting integer winding is the index obstruction carried by the input:
it vanishes exactly when a spectral gap around 1/2 lets the fiberwise
threshold produce an exact lift of the representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    CLAMP01,
    DEFAULT_PROFILE,
    POS,
    NEG,
    DimMismatch,
    ToleranceProfile,
    _eigh_raw,
    frac_power,
    func_calc,
    hermitian_part,
    op_norm,
    unitary_exp,
)
from .qc_model import (
    QcTriple,
    canonical_fiber,
    factor_x,
    low_level_residuals,
    t_matrix,
)
from .structures import CornerQuad, SupportViolation, homotopy_theta, support_projection

__all__ = [
    "NotOrthogonal",
    "LiftResidual",
    "EndpointDefect",
    "WindingIllConditioned",
    "NoSpectralGap",
    "IntervalModel",
    "GridFunction",
    "BoundaryResult",
    "TLift",
    "GridRepresentation",
    "EndpointPair",
    "builtin_scenario",
    "SCENARIO_NAMES",
    "lift_orthogonal_positive",
    "lift_T",
    "boundary_unitary",
    "exact_projection_lift",
    "homotopy_collapse",
    "winding_number",
    "run_scenario",
]


class NotOrthogonal(ValueError):
    """The endpoint h, k pairs are not orthogonal positive contractions."""


class LiftResidual(RuntimeError):
    """The lifted path does not match the endpoint data."""


class EndpointDefect(RuntimeError):
    """The exponentiated path is not the identity at the endpoints."""


class WindingIllConditioned(RuntimeError):
    """Phase steps too large for a trustworthy winding on this grid."""


class NoSpectralGap(RuntimeError):
    """The lifted path's spectrum crosses 1/2: no exact projection lift here."""


# ---------------------------------------------------------------------------
# model and grid functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalModel:
    """Uniform grid t_i = i/m on [0, 1] with n x n matrix fibers."""

    grid_size: int
    fiber_dim: int

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError(f"grid size must be >= 1, got {self.grid_size}")
        if self.fiber_dim < 1:
            raise ValueError(f"fiber dim must be >= 1, got {self.fiber_dim}")

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.grid_size + 1, dtype=float) / self.grid_size


@dataclass(frozen=True)
class GridFunction:
    """A matrix for every grid point, stacked as an (m+1, n, n) array."""

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=complex)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise DimMismatch(f"grid function needs (m+1, n, n), got {a.shape}")
        object.__setattr__(self, "values", a)

    @property
    def grid_size(self) -> int:
        return self.values.shape[0] - 1

    @property
    def fiber_dim(self) -> int:
        return self.values.shape[1]

    def at(self, i: int) -> np.ndarray:
        return self.values[i]

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.values[0], self.values[-1]

    def lipschitz_estimate(self, profile: ToleranceProfile = DEFAULT_PROFILE) -> float:
        m = self.grid_size
        if m == 0:
            return 0.0
        dt = 1.0 / m
        return max(
            op_norm(self.values[i + 1] - self.values[i], profile) / dt
            for i in range(m)
        )

    def fiberwise(self, f) -> "GridFunction":
        return GridFunction(np.stack([f(v) for v in self.values]))


@dataclass(frozen=True)
class EndpointPair:
    """An element of the quotient: one matrix per endpoint of [0, 1]."""

    at0: np.ndarray
    at1: np.ndarray


def interpolate_pair(
    pair: EndpointPair, model: IntervalModel, scheme: str = "linear"
) -> GridFunction:
    """A grid path joining the endpoint values.

    ``linear`` uses straight-line weights; ``cosine`` uses the smoothed
    weights (1 + cos(pi t))/2, which agree at the endpoints but differ in
    between (used to confirm winding does not depend on the lift).
    """
    ts = model.points
    if scheme == "linear":
        w0 = 1.0 - ts
    elif scheme == "cosine":
        w0 = 0.5 * (1.0 + np.cos(np.pi * ts))
    else:
        raise ValueError(f"unknown interpolation scheme {scheme!r}")
    vals = np.stack(
        [w * pair.at0 + (1.0 - w) * pair.at1 for w in w0]
    )
    return GridFunction(vals)


@dataclass(frozen=True)
class BScenarioRep:
    """An exact representation in the quotient: a triple per endpoint."""

    at0: QcTriple
    at1: QcTriple

    def __post_init__(self):
        if self.at0.dim != self.at1.dim:
            raise DimMismatch("endpoint triples differ in dimension")

    @property
    def fiber_dim(self) -> int:
        return self.at0.dim


SCENARIO_NAMES = ("eval-at-one", "zero", "matched-endpoints", "doubled")


def builtin_scenario(name: str) -> BScenarioRep:
    """The stock endpoint representations used by the acceptance runs.

    ``eval-at-one``: the rank-one corner compression of the diagonal endpoint
    representation at one end, zero at the other.  Its index class is the
    generator, so the winding comes out at +-1.  ``zero``: both endpoints
    zero.  ``matched-endpoints``: the same midpoint fiber at both ends (index
    zero, and an exact projection lift exists).  ``doubled``: the direct sum
    of ``eval-at-one`` with itself.
    """
    z2 = np.zeros((2, 2), dtype=complex)
    e11 = np.diag([1.0, 0.0]).astype(complex)
    zero2 = QcTriple(z2, z2, z2)
    if name == "zero":
        return BScenarioRep(zero2, zero2)
    if name == "eval-at-one":
        return BScenarioRep(QcTriple(e11, z2, z2), zero2)
    if name == "matched-endpoints":
        fiber = canonical_fiber(0.5)
        return BScenarioRep(fiber, fiber)
    if name == "doubled":
        base = builtin_scenario("eval-at-one")
        return BScenarioRep(
            base.at0.direct_sum(base.at0), base.at1.direct_sum(base.at1)
        )
    raise ValueError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------


def _check_positive_contraction(
    name: str, m: np.ndarray, profile: ToleranceProfile, tol: float = 1e-8
) -> None:
    w = _eigh_raw(hermitian_part(m), profile).eigenvalues
    if w.size and (float(w[0]) < -tol or float(w[-1]) > 1.0 + tol):
        raise NotOrthogonal(
            f"{name} is not a positive contraction (spectrum [{w[0]:.3e}, {w[-1]:.3e}])"
        )


def lift_orthogonal_positive(
    hb: EndpointPair,
    kb: EndpointPair,
    model: IntervalModel,
    profile: ToleranceProfile = DEFAULT_PROFILE,
) -> tuple[GridFunction, GridFunction]:
    """Lift orthogonal positive contraction pairs to the whole grid.

    The difference h - k is interpolated linearly; its positive and negative
    parts recover the endpoints exactly (orthogonality makes pos(h - k) = h)
    and stay orthogonal at every grid point.
    """
    for name, m in (("h(0)", hb.at0), ("h(1)", hb.at1), ("k(0)", kb.at0), ("k(1)", kb.at1)):
        _check_positive_contraction(name, m, profile)
    for label, (hh, kk) in {
        "endpoint 0": (hb.at0, kb.at0),
        "endpoint 1": (hb.at1, kb.at1),
    }.items():
        if op_norm(hh @ kk, profile) > 1e-10 * max(1.0, op_norm(hh) * op_norm(kk)):
            raise NotOrthogonal(f"h and k fail orthogonality at {label}")
    c = interpolate_pair(
        EndpointPair(hb.at0 - kb.at0, hb.at1 - kb.at1), model
    )
    h = c.fiberwise(lambda v: func_calc(v, POS, profile))
    k = c.fiberwise(lambda v: func_calc(v, NEG, profile))
    return h, k


@dataclass(frozen=True)
class TLift:
    """The lifted path T' together with the data used to build it."""

    t_prime: GridFunction
    h: GridFunction
    k: GridFunction
    x: GridFunction
    y: GridFunction
    t_raw: GridFunction
    endpoint_defect: float
    corner_defect: float
    rho: tuple[complex, complex]


def _scalar_parts(
    t_prime: GridFunction,
    h: GridFunction,
    k: GridFunction,
    profile: ToleranceProfile,
) -> tuple[complex, complex, float]:
    """Extract the two scalar slots of the linking decomposition.

    At every fiber whose h (resp. k) support has a complement, the scalar is
    the compression of the diagonal block to that complement; fibers with
    full support contribute nothing.  Returns the medians and the largest
    corner-leak defect observed.
    """
    n = h.fiber_dim
    alphas: list[float] = []
    betas: list[float] = []
    leak = 0.0
    for i in range(t_prime.grid_size + 1):
        tp = t_prime.at(i)
        t11, t12 = tp[:n, :n], tp[:n, n:]
        t22 = tp[n:, n:]
        ph = support_projection(h.at(i), profile)
        pk = support_projection(k.at(i), profile)
        compl_h = np.eye(n, dtype=complex) - ph
        compl_k = np.eye(n, dtype=complex) - pk
        rank_ch = round(float(np.trace(compl_h).real))
        rank_ck = round(float(np.trace(compl_k).real))
        if rank_ch > 0:
            alphas.append(float((np.trace(compl_h @ t11) / rank_ch).real))
        if rank_ck > 0:
            betas.append(float((np.trace(compl_k @ t22) / rank_ck).real))
        # corner discipline of the off-diagonal block
        leak = max(leak, op_norm(t12 - ph @ t12 @ pk, profile))
    alpha = float(np.median(alphas)) if alphas else 1.0
    beta = float(np.median(betas)) if betas else 0.0
    return complex(alpha), complex(beta), leak


def lift_T(
    rep: BScenarioRep,
    model: IntervalModel,
    scheme: str = "linear",
    profile: ToleranceProfile = DEFAULT_PROFILE,
    endpoint_tol: float = 1e-9,
) -> TLift:
    """Lift an exact quotient representation to a clamped path T' of blocks.

    The corner factor y is computed at each endpoint with the pseudo-inverse
    sandwich, interpolated across the grid, and re-sandwiched between the
    eighth roots of the lifted k and h.  The clamped path matches the
    endpoint block matrices to ``endpoint_tol``.
    """
    for which, trip in (("0", rep.at0), ("1", rep.at1)):
        worst = max(low_level_residuals(trip, profile).values())
        if worst > 1e-10:
            raise LiftResidual(
                f"endpoint {which} is not an exact representation (residual {worst:.3e})"
            )
    if model.fiber_dim != rep.fiber_dim:
        raise DimMismatch(
            f"model fiber dim {model.fiber_dim} != representation dim {rep.fiber_dim}"
        )
    n = rep.fiber_dim
    h, k = lift_orthogonal_positive(
        EndpointPair(rep.at0.h, rep.at1.h),
        EndpointPair(rep.at0.k, rep.at1.k),
        model,
        profile,
    )
    y_ends = EndpointPair(
        factor_x(rep.at0, profile), factor_x(rep.at1, profile)
    )
    y = interpolate_pair(y_ends, model, scheme)

    def x_at(i: int) -> np.ndarray:
        k8 = frac_power(k.at(i), 0.125, profile)
        h8 = frac_power(h.at(i), 0.125, profile)
        return k8 @ y.at(i) @ h8

    x = GridFunction(np.stack([x_at(i) for i in range(model.grid_size + 1)]))

    def t_at(i: int) -> np.ndarray:
        return t_matrix(
            QcTriple(h.at(i), x.at(i), k.at(i)), profile, check_hermitian=False
        )

    t_raw = GridFunction(np.stack([t_at(i) for i in range(model.grid_size + 1)]))
    t_prime = t_raw.fiberwise(lambda v: func_calc(v, CLAMP01, profile))

    end0 = t_matrix(rep.at0, profile)
    end1 = t_matrix(rep.at1, profile)
    defect = max(
        op_norm(t_prime.at(0) - end0, profile),
        op_norm(t_prime.at(model.grid_size) - end1, profile),
    )
    if defect > endpoint_tol:
        raise LiftResidual(f"clamped path misses the endpoints by {defect:.3e}")
    alpha, beta, leak = _scalar_parts(t_prime, h, k, profile)
    return TLift(
        t_prime=t_prime,
        h=h,
        k=k,
        x=x,
        y=y,
        t_raw=t_raw,
        endpoint_defect=defect,
        corner_defect=leak,
        rho=(alpha, beta),
    )


# ---------------------------------------------------------------------------
# winding
# ---------------------------------------------------------------------------


def winding_number(
    mats: list[np.ndarray] | np.ndarray,
    max_step: float = np.pi / 2,
) -> tuple[int, float, float]:
    """Accumulated phase of det along a discrete path, as an integer count.

    Returns (winding, rounding residual, largest phase step).  Raises
    :class:`WindingIllConditioned` when a step reaches ``max_step`` or the
    total strays more than 0.1 turns from an integer.
    """
    dets = [complex(np.linalg.det(m)) for m in mats]
    for i, d in enumerate(dets):
        if abs(d) < 1e-12:
            raise WindingIllConditioned(f"determinant vanishes at grid point {i}")
    steps = [
        float(np.angle(dets[i + 1] / dets[i])) for i in range(len(dets) - 1)
    ]
    largest = max((abs(s) for s in steps), default=0.0)
    if largest >= max_step:
        raise WindingIllConditioned(
            f"phase step {largest:.3f} rad exceeds {max_step:.3f}; refine the grid"
        )
    total = sum(steps) / (2.0 * np.pi)
    winding = int(round(total))
    residual = abs(total - winding)
    if residual > 0.1:
        raise WindingIllConditioned(
            f"accumulated phase {total:.4f} turns is not close to an integer"
        )
    return winding, residual, largest


@dataclass(frozen=True)
class BoundaryResult:
    """The collapsed unitary path and its index certificates."""

    u: GridFunction
    winding: int
    unitarity_defect: float
    endpoint_defect: float
    phase_step_max: float

    def to_obj(self) -> dict:
        return {
            "winding": int(self.winding),
            "unitarity_defect": float(self.unitarity_defect),
            "endpoint_defect": float(self.endpoint_defect),
        }

    def invariants_hold(self, tol: float = 1e-8) -> bool:
        return self.unitarity_defect <= tol and self.endpoint_defect <= tol


def boundary_unitary(
    t_prime: GridFunction,
    model: IntervalModel,
    profile: ToleranceProfile = DEFAULT_PROFILE,
    endpoint_tol: float = 1e-8,
) -> BoundaryResult:
    """Exponentiate the lifted path and extract the collapsed winding unitary.

    U = exp(2 pi i T') fiberwise must be the identity at both endpoints
    (:class:`EndpointDefect` otherwise); the four n x n blocks collapse to
    u = -1 + u11 + u12 + u21 + u22, whose det phase is accumulated across
    the grid.
    """
    two_n = t_prime.fiber_dim
    if two_n % 2 != 0 or two_n != 2 * model.fiber_dim:
        raise DimMismatch(
            f"expected fibers of dim {2 * model.fiber_dim}, got {two_n}"
        )
    n = model.fiber_dim
    u_big = t_prime.fiberwise(lambda v: unitary_exp(v, profile))
    eye2n = np.eye(two_n, dtype=complex)
    end_defect_big = max(
        op_norm(u_big.at(0) - eye2n, profile),
        op_norm(u_big.at(model.grid_size) - eye2n, profile),
    )
    if end_defect_big > endpoint_tol:
        raise EndpointDefect(
            f"exp path is not the identity at the endpoints (defect {end_defect_big:.3e})"
        )
    eye = np.eye(n, dtype=complex)

    def collapse(v: np.ndarray) -> np.ndarray:
        return -eye + v[:n, :n] + v[:n, n:] + v[n:, :n] + v[n:, n:]

    u = u_big.fiberwise(collapse)
    unit_defect = max(
        op_norm(u.at(i) @ u.at(i).conj().T - eye, profile)
        for i in range(model.grid_size + 1)
    )
    end_defect = max(
        op_norm(u.at(0) - eye, profile),
        op_norm(u.at(model.grid_size) - eye, profile),
    )
    winding, _, step_max = winding_number(u.values)
    return BoundaryResult(
        u=u,
        winding=winding,
        unitarity_defect=unit_defect,
        endpoint_defect=end_defect,
        phase_step_max=step_max,
    )


# ---------------------------------------------------------------------------
# exact projection lift
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridRepresentation:
    """An exact representation over the whole grid, one triple per point."""

    h: GridFunction
    x: GridFunction
    k: GridFunction
    max_residual: float
    endpoint_defect: float

    def triple_at(self, i: int) -> QcTriple:
        return QcTriple(self.h.at(i), self.x.at(i), self.k.at(i))


def exact_projection_lift(
    rep: BScenarioRep,
    model: IntervalModel,
    gamma: float = 0.05,
    scheme: str = "linear",
    profile: ToleranceProfile = DEFAULT_PROFILE,
) -> GridRepresentation:
    """Lift through the spectral threshold when a gap around 1/2 exists.

    Scans the fiberwise spectrum of the unclamped path T; if any eigenvalue
    falls inside (1/2 - gamma, 1/2 + gamma), :class:`NoSpectralGap` is raised
    (the winding of the boundary pipeline is the obstruction).  Otherwise
    thresholding at 1/2 is continuous in the fibers and the blocks of the
    resulting projection path form an exact representation lifting the input.
    """
    lift = lift_T(rep, model, scheme, profile)
    n = model.fiber_dim
    for i in range(model.grid_size + 1):
        w = _eigh_raw(lift.t_raw.at(i), profile).eigenvalues
        inside = w[(w > 0.5 - gamma) & (w < 0.5 + gamma)]
        if inside.size:
            raise NoSpectralGap(
                f"fiber {i} has spectrum {inside.round(4).tolist()} within "
                f"{gamma} of 1/2; no exact lift on this path"
            )

    def threshold(v: np.ndarray) -> np.ndarray:
        es = _eigh_raw(v, profile)
        return hermitian_part(es.apply(np.where(es.eigenvalues >= 0.5, 1.0, 0.0)))

    p = lift.t_raw.fiberwise(threshold)
    eye = np.eye(n, dtype=complex)
    h = p.fiberwise(lambda v: hermitian_part(eye - v[:n, :n]))
    x = p.fiberwise(lambda v: v[n:, :n])
    k = p.fiberwise(lambda v: hermitian_part(v[n:, n:]))
    worst = 0.0
    for i in range(model.grid_size + 1):
        trip = QcTriple(h.at(i), x.at(i), k.at(i))
        worst = max(worst, max(low_level_residuals(trip, profile).values()))
    end_defect = max(
        op_norm(h.at(0) - rep.at0.h, profile),
        op_norm(x.at(0) - rep.at0.x, profile),
        op_norm(k.at(0) - rep.at0.k, profile),
        op_norm(h.at(model.grid_size) - rep.at1.h, profile),
        op_norm(x.at(model.grid_size) - rep.at1.x, profile),
        op_norm(k.at(model.grid_size) - rep.at1.k, profile),
    )
    if worst > 1e-10:
        raise LiftResidual(f"thresholded lift has residual {worst:.3e}")
    if end_defect > 1e-9:
        raise LiftResidual(f"thresholded lift misses endpoints by {end_defect:.3e}")
    return GridRepresentation(
        h=h, x=x, k=k, max_residual=worst, endpoint_defect=end_defect
    )


# ---------------------------------------------------------------------------
# homotopy collapse
# ---------------------------------------------------------------------------


def homotopy_collapse(
    u_prime: GridFunction,
    h: GridFunction,
    k: GridFunction,
    s: float = 0.0,
    profile: ToleranceProfile = DEFAULT_PROFILE,
    unitary_tol: float = 1e-8,
) -> tuple[GridFunction, int, int]:
    """Carry the block unitary path along the corner homotopy to ``s``.

    Writes each fiber as 1 + (corner quadruple) - the identity's scalar parts
    are stripped off the diagonal blocks - and maps the quadruple through
    theta_s, restoring the unit afterwards.  At s = 0 the result is
    diag(u, 1) with u the collapsed winding unitary; at s = 1 it is the
    input.  Returns (collapsed path at s, winding of its det, winding of the
    input's det); the two windings are asserted equal, since the homotopy
    passes through unitaries fiberwise.
    """
    two_n = u_prime.fiber_dim
    n = two_n // 2
    if 2 * n != two_n or h.fiber_dim != n or k.fiber_dim != n:
        raise DimMismatch("u_prime fibers must be twice the size of h, k fibers")
    eye = np.eye(n, dtype=complex)
    eye2 = np.eye(two_n, dtype=complex)
    out_vals = []
    for i in range(u_prime.grid_size + 1):
        v = u_prime.at(i)
        quad = CornerQuad(
            v[:n, :n] - eye, v[:n, n:], v[n:, :n], v[n:, n:] - eye
        )
        ph = support_projection(h.at(i), profile)
        pk = support_projection(k.at(i), profile)
        pairs = (
            (ph, quad.x11, ph),
            (ph, quad.x12, pk),
            (pk, quad.x21, ph),
            (pk, quad.x22, pk),
        )
        for pl, xx, pr in pairs:
            defect = op_norm(pl @ xx @ pr - xx, profile)
            if defect > profile.support_tol * max(1.0, op_norm(xx, profile)):
                raise SupportViolation(
                    f"fiber {i} block leaks outside its corner by {defect:.3e}"
                )
        out_vals.append(eye2 + homotopy_theta(quad, s))
    out = GridFunction(np.stack(out_vals))
    worst_unitary = max(
        op_norm(out.at(i) @ out.at(i).conj().T - eye2, profile)
        for i in range(out.grid_size + 1)
    )
    if worst_unitary > unitary_tol:
        raise WindingIllConditioned(
            f"homotopy image loses unitarity by {worst_unitary:.3e}"
        )
    w_out, _, _ = winding_number(out.values)
    w_in, _, _ = winding_number(u_prime.values)
    if w_out != w_in:
        raise WindingIllConditioned(
            f"homotopy changed the winding: {w_in} -> {w_out}"
        )
    return out, w_out, w_in


# ---------------------------------------------------------------------------
# end-to-end runs
# ---------------------------------------------------------------------------


def run_scenario(
    name_or_rep: str | BScenarioRep,
    grid_size: int = 64,
    scheme: str = "linear",
    profile: ToleranceProfile = DEFAULT_PROFILE,
    refine_until: float = np.pi / 4,
    max_grid: int = 4096,
) -> tuple[BoundaryResult, TLift, IntervalModel]:
    """Full pipeline with automatic grid refinement.

    Doubles the grid until the largest det phase step drops below
    ``refine_until`` (or the grid cap is reached), then returns the boundary
    result, the lift, and the model actually used.
    """
    rep = (
        builtin_scenario(name_or_rep)
        if isinstance(name_or_rep, str)
        else name_or_rep
    )
    m = grid_size
    while True:
        model = IntervalModel(grid_size=m, fiber_dim=rep.fiber_dim)
        lift = lift_T(rep, model, scheme, profile)
        result = boundary_unitary(lift.t_prime, model, profile)
        if result.phase_step_max < refine_until or m >= max_grid:
            return result, lift, model
        m *= 2
