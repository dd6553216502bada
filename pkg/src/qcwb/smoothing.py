"""Turn an approximate representation into an exact nearby one.

Given a triple (h, x, k) whose relation residuals are small, the algorithm
uses only functional calculus with smooth cutoffs plus one spectral
threshold:

1.  s = (h + h* - k - k*) / 2, the balanced difference;
2.  h2 = g_plus(s), k2 = g_minus(s) with a smooth ramp g_plus that vanishes
    on the negative axis and equals the identity above theta/2;
3.  x2 = q_minus(s) x q_plus(s) with a smooth indicator q_plus rising from
    0 to 1 over a narrow ramp, so x2 is squeezed into the k2-h2 corner;
4.  T2 = [[1 - h2, x2*], [x2, k2]]; if ||T2^2 - T2|| < 1/4 the spectrum of
    T2 avoids 1/2, and thresholding at 1/2 yields an exact projection P;
5.  read the output triple off the blocks of P.

Support orthogonality of g_plus and g_minus makes the output orthogonality
exact up to rounding, and the whole construction moves each component only
O(theta) plus the spectral displacement of the threshold step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_PROFILE,
    GapTooSmall,
    RealFunction,
    ToleranceProfile,
    _eigh_raw,
    func_calc,
    hermitian_part,
    nearest_projection,
    op_norm,
    smooth_step,
)
from .qc_model import QcTriple, low_level_residuals

__all__ = [
    "SpectralGapFailure",
    "ResidualTooLarge",
    "NoWorkableTheta",
    "SmoothingParams",
    "SmoothingReport",
    "make_gplus",
    "make_gminus",
    "make_qplus",
    "make_qminus",
    "cutoff_from_spec",
    "smooth_representation",
    "auto_theta",
]


class SpectralGapFailure(RuntimeError):
    """The blocked matrix T2 has spectrum too close to 1/2 to threshold."""


class ResidualTooLarge(ValueError):
    """Input residuals or norms exceed what the algorithm accepts."""


class NoWorkableTheta(RuntimeError):
    """The downward search over cutoff widths found no success."""

    def __init__(self, message: str, last_failure: str = "gap"):
        super().__init__(message)
        self.last_failure = last_failure


# ---------------------------------------------------------------------------
# cutoff functions
# ---------------------------------------------------------------------------


def make_gplus(theta: float) -> RealFunction:
    """Smooth positive-part ramp: 0 on t <= 0, identity above theta/2.

    On [0, theta/2] it is t * step(2t/theta), so t - theta/2 <= g(t) <= t
    pointwise on the positive axis.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    half = 0.5 * theta

    def fn(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0.0, 0.0, np.where(t >= half, t, t * smooth_step(t / half)))

    return RealFunction("gplus", fn, smoothness="smooth")


def make_gminus(theta: float) -> RealFunction:
    g = make_gplus(theta)

    def fn(t: np.ndarray) -> np.ndarray:
        return g(-np.asarray(t, dtype=float))

    return RealFunction("gminus", fn, smoothness="smooth")


def make_qplus(theta: float, ramp_width: float | None = None) -> RealFunction:
    """Smooth indicator of the positive axis: 0 on t <= 0, 1 above ramp_width.

    The default ramp width theta^2/4 keeps sqrt(t - t^2) * (1 - q(t)^2)
    below theta/2 on [0, 1], which is the slack the squeezing step needs.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if ramp_width is None:
        ramp_width = theta * theta / 4.0
    if ramp_width <= 0 or ramp_width > theta * theta / 4.0 + 1e-15:
        raise ValueError(
            f"ramp_width must lie in (0, theta^2/4], got {ramp_width}"
        )
    width = ramp_width

    def fn(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0.0, 0.0, np.where(t >= width, 1.0, smooth_step(t / width)))

    return RealFunction("qplus", fn, smoothness="smooth")


def make_qminus(theta: float, ramp_width: float | None = None) -> RealFunction:
    q = make_qplus(theta, ramp_width)

    def fn(t: np.ndarray) -> np.ndarray:
        return q(-np.asarray(t, dtype=float))

    return RealFunction("qminus", fn, smoothness="smooth")


_CUTOFF_MAKERS = {
    "gplus": lambda theta, ramp: make_gplus(theta),
    "gminus": lambda theta, ramp: make_gminus(theta),
    "qplus": make_qplus,
    "qminus": make_qminus,
}


def cutoff_from_spec(spec: dict) -> RealFunction:
    """Rebuild a cutoff from its serialized (name, theta, ramp_width) form."""
    maker = _CUTOFF_MAKERS.get(spec.get("name"))
    if maker is None:
        raise ValueError(f"unknown cutoff {spec.get('name')!r}")
    return maker(float(spec["theta"]), spec.get("ramp_width"))


# ---------------------------------------------------------------------------
# parameters and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothingParams:
    """Tuning of one smoothing run.

    ``epsilon`` is the target distance (must sit in (0, 1/4)); ``theta`` the
    ramp width of the g cutoffs; ``ramp_width`` the plateau width of the q
    cutoffs (at most theta^2/4); ``delta`` the residual budget the input must
    meet.  The guarantee is existential in delta: callers supply it, the run
    reports failure when it was too generous.
    """

    epsilon: float
    theta: float
    ramp_width: float | None = None
    delta: float | None = None
    profile: ToleranceProfile = field(default=DEFAULT_PROFILE)

    def __post_init__(self):
        if not (0.0 < self.epsilon < 0.25):
            raise ValueError(f"epsilon must lie in (0, 1/4), got {self.epsilon}")
        if self.theta <= 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.ramp_width is None:
            object.__setattr__(self, "ramp_width", self.theta**2 / 4.0)
        if self.ramp_width <= 0 or self.ramp_width > self.theta**2 / 4.0 + 1e-15:
            raise ValueError("ramp_width must lie in (0, theta^2/4]")
        if self.delta is None:
            object.__setattr__(self, "delta", self.epsilon / 2.0)


@dataclass
class SmoothingReport:
    """Residuals, spectra, and distances recorded along one smoothing run."""

    input_residuals: dict[str, float]
    s_min: float
    s_max: float
    t2_defect: float
    t2_within_half_epsilon: bool
    output_residuals: dict[str, float]
    dist_h: float
    dist_k: float
    dist_x: float
    theta: float
    ramp_width: float
    epsilon: float
    success: bool

    def to_obj(self) -> dict:
        return {
            "input_residuals": self.input_residuals,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "t2_defect": self.t2_defect,
            "t2_within_half_epsilon": self.t2_within_half_epsilon,
            "output_residuals": self.output_residuals,
            "distances": {"h": self.dist_h, "k": self.dist_k, "x": self.dist_x},
            "cutoffs": [
                {"name": "gplus", "theta": self.theta},
                {"name": "gminus", "theta": self.theta},
                {"name": "qplus", "theta": self.theta, "ramp_width": self.ramp_width},
                {"name": "qminus", "theta": self.theta, "ramp_width": self.ramp_width},
            ],
            "theta": self.theta,
            "ramp_width": self.ramp_width,
            "epsilon": self.epsilon,
            "success": self.success,
        }


RESIDUAL_SUCCESS_TOL = 1e-10


def smooth_representation(
    triple: QcTriple, params: SmoothingParams
) -> tuple[QcTriple, SmoothingReport]:
    """Run the cutoff-and-threshold pipeline on an approximate representation.

    Raises :class:`ResidualTooLarge` when the input misses the residual or
    norm preconditions, :class:`SpectralGapFailure` when the blocked matrix
    cannot be thresholded.  Success in the report means output residuals at
    most 1e-10 and distances at most epsilon.
    """
    profile = params.profile
    n = triple.dim
    input_res = low_level_residuals(triple, profile)
    worst = max(input_res.values())
    if worst > params.delta:
        raise ResidualTooLarge(
            f"input residual {worst:.3e} exceeds the budget delta={params.delta:.3e}"
        )
    norms = triple.norms(profile)
    if max(norms.values()) > 2.0:
        raise ResidualTooLarge(
            f"component norms {norms} exceed the bound 2 the cutoffs assume"
        )

    h, x, k = triple.h, triple.x, triple.k
    s = hermitian_part(0.5 * (h + h.conj().T - k - k.conj().T))
    s_eigs = _eigh_raw(s, profile).eigenvalues
    gp = make_gplus(params.theta)
    gm = make_gminus(params.theta)
    qp = make_qplus(params.theta, params.ramp_width)
    qm = make_qminus(params.theta, params.ramp_width)

    h2 = func_calc(s, gp, profile)
    k2 = func_calc(s, gm, profile)
    x2 = func_calc(s, qm, profile) @ x @ func_calc(s, qp, profile)

    t2 = np.block(
        [[np.eye(n, dtype=complex) - h2, x2.conj().T], [x2, k2]]
    )
    t2_defect = op_norm(t2 @ t2 - t2, profile)
    if t2_defect >= 0.25:
        raise SpectralGapFailure(
            f"||T2^2 - T2|| = {t2_defect:.4f} >= 1/4; spectrum reaches 1/2"
        )
    try:
        p = nearest_projection(t2, profile)
    except GapTooSmall as exc:  # same condition measured inside
        raise SpectralGapFailure(str(exc)) from exc

    h_out = hermitian_part(np.eye(n, dtype=complex) - p[:n, :n])
    x_out = p[n:, :n]
    k_out = hermitian_part(p[n:, n:])
    out = QcTriple(h_out, x_out, k_out)
    out_res = low_level_residuals(out, profile)
    dist_h = op_norm(h_out - h, profile)
    dist_k = op_norm(k_out - k, profile)
    dist_x = op_norm(x_out - x, profile)
    success = max(out_res.values()) <= RESIDUAL_SUCCESS_TOL and max(
        dist_h, dist_k, dist_x
    ) <= params.epsilon
    report = SmoothingReport(
        input_residuals=input_res,
        s_min=float(s_eigs[0]) if s_eigs.size else 0.0,
        s_max=float(s_eigs[-1]) if s_eigs.size else 0.0,
        t2_defect=t2_defect,
        t2_within_half_epsilon=t2_defect <= params.epsilon / 2.0 + 1e-6,
        output_residuals=out_res,
        dist_h=dist_h,
        dist_k=dist_k,
        dist_x=dist_x,
        theta=params.theta,
        ramp_width=params.ramp_width,
        epsilon=params.epsilon,
        success=success,
    )
    return out, report


def auto_theta(
    triple: QcTriple,
    epsilon: float,
    profile: ToleranceProfile = DEFAULT_PROFILE,
    theta_floor: float = 1e-6,
) -> tuple[SmoothingParams, QcTriple, SmoothingReport]:
    """Search a workable cutoff width by halving theta downward from epsilon/2.

    Returns the successful parameters together with the run's output; raises
    :class:`NoWorkableTheta` when the floor is reached without success.
    """
    input_res = low_level_residuals(triple, profile)
    delta = max(max(input_res.values()) * 1.01, 1e-15)
    theta = epsilon / 2.0
    last_failure = "residual"
    while theta >= theta_floor:
        params = SmoothingParams(
            epsilon=epsilon, theta=theta, delta=delta, profile=profile
        )
        try:
            out, report = smooth_representation(triple, params)
        except SpectralGapFailure:
            last_failure = "gap"
        except ResidualTooLarge:
            last_failure = "residual"
        else:
            if report.success:
                return params, out, report
            last_failure = "distance" if report.t2_defect < 0.25 else "gap"
        theta *= 0.5
    raise NoWorkableTheta(
        f"no cutoff width above {theta_floor:.1e} smooths this triple "
        f"(last failure: {last_failure})",
        last_failure=last_failure,
    )
