"""Closed-form hit and outage expressions, feasibility bounds, density planning.

All functions are pure and operate on validated :class:`~cachegeo.model.SystemParams`.
Probabilities are computed through ``expm1``/``log1p`` so that the small-exponent
regimes that sweeps visit do not lose precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .model import ParameterError, SystemParams

__all__ = [
    "FeasibilityBound",
    "QuadratureError",
    "kappa",
    "outage_at_distance",
    "cache_hit_prob",
    "hit_target_feasible",
    "min_density_area_for_target",
    "replication_ratio_bounds",
    "serving_distance_pdf",
    "content_outage",
    "content_outage_quadrature",
    "optimal_density",
]


class QuadratureError(RuntimeError):
    """Adaptive integration failed to reach the requested tolerance."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class FeasibilityBound:
    """Admissible replication-ratio interval for a cache hit target.

    ``pc_required`` is the unclamped lower bound; ``feasible`` is False when
    it exceeds 1, meaning no replication ratio can reach the target at the
    given density and distance. ``min_density_area_product`` is the
    density-area product lambda_s*pi*r_th**2 a system needs at full
    replication (pc_upper).
    """

    pc_lower: float
    pc_upper: float
    pc_required: float
    min_density_area_product: float
    feasible: bool


def _check_epsilon(epsilon: float) -> float:
    if not (math.isfinite(epsilon) and 0.0 <= epsilon < 1.0):
        raise ParameterError(
            "epsilon",
            f"target hit probability must lie in [0, 1), got {epsilon}; "
            "the hit probability is strictly below 1 at any finite density",
        )
    return epsilon


def kappa(alpha: float) -> float:
    """Interference geometry constant Gamma(1 + 2/alpha) * Gamma(1 - 2/alpha).

    Scales the effective interferer density seen by a Rayleigh-faded link.
    Finite and positive for alpha > 2, tending to 1 as alpha grows; the
    second gamma factor has a pole at alpha = 2.
    """
    if not (math.isfinite(alpha) and alpha > 2):
        raise ParameterError("alpha", f"alpha must exceed 2, got {alpha}")
    return math.gamma(1.0 + 2.0 / alpha) * math.gamma(1.0 - 2.0 / alpha)


def outage_at_distance(params: SystemParams, r: float) -> float:
    """Outage probability of a Rayleigh-faded link at fixed distance ``r``.

    Probability that the SIR of a transmitter at distance ``r``, against
    the aggregate interference of the whole field, falls below the
    threshold: 1 - exp(-lambda_s * kappa * pi * r**2 * gamma**(2/alpha)).
    """
    if not (math.isfinite(r) and r >= 0.0):
        raise ParameterError("r", f"distance must be nonnegative, got {r}")
    exponent = (
        params.lambda_s
        * kappa(params.alpha)
        * math.pi
        * r
        * r
        * params.gamma ** (2.0 / params.alpha)
    )
    return -math.expm1(-exponent)


def cache_hit_prob(params: SystemParams) -> float:
    """Probability that at least one SBS within r_th holds a given content.

    Equals 1 - exp(-lambda_s * pc * pi * r_th**2): the caching SBSs form a
    thinned Poisson field of intensity lambda_s * pc, and a hit is the
    event that the disc of radius r_th is not empty of them.
    """
    exponent = params.lambda_s * params.pc * math.pi * params.r_th**2
    return -math.expm1(-exponent)


def hit_target_feasible(params: SystemParams, epsilon: float) -> bool:
    """True iff the density, replication ratio and distance can reach hit target ``epsilon``.

    The condition is pc * lambda_s * pi * r_th**2 >= -ln(1 - epsilon).
    """
    _check_epsilon(epsilon)
    product = params.pc * params.lambda_s * math.pi * params.r_th**2
    return product >= -math.log1p(-epsilon)


def min_density_area_for_target(pc: float, epsilon: float) -> float:
    """Minimum admissible density-area product lambda_s*pi*r_th**2 at fixed ``pc``.

    Returns -ln(1 - epsilon) / pc; zero when the target is zero.
    """
    _check_epsilon(epsilon)
    pc = float(pc)
    if epsilon == 0.0:
        return 0.0
    if not (0.0 < pc <= 1.0):
        raise ParameterError(
            "pc", f"replication ratio must be positive to reach a nonzero target, got {pc}"
        )
    return -math.log1p(-epsilon) / pc


def replication_ratio_bounds(lambda_s: float, r_th: float, epsilon: float) -> FeasibilityBound:
    """Replication-ratio bounds reaching hit target ``epsilon`` at fixed density and distance.

    The lower bound is -ln(1 - epsilon) / (lambda_s * pi * r_th**2) and the
    upper bound is 1. Infeasibility (lower bound above 1) is flagged, not
    silently clamped: ``pc_required`` keeps the raw requirement.
    """
    if not (math.isfinite(lambda_s) and lambda_s > 0):
        raise ParameterError("lambda_s", f"lambda_s must be positive, got {lambda_s}")
    if not (math.isfinite(r_th) and r_th > 0):
        raise ParameterError("r_th", f"r_th must be positive, got {r_th}")
    _check_epsilon(epsilon)
    product = lambda_s * math.pi * r_th**2
    required = -math.log1p(-epsilon) / product
    # exact-boundary constructions land within a rounding error of 1
    feasible = required <= 1.0 or math.isclose(required, 1.0, rel_tol=1e-12)
    return FeasibilityBound(
        pc_lower=min(required, 1.0),
        pc_upper=1.0,
        pc_required=required,
        min_density_area_product=-math.log1p(-epsilon),
        feasible=feasible,
    )


def serving_distance_pdf(params: SystemParams, r: float) -> float:
    """Density of the distance to the nearest caching SBS, given a hit within r_th.

    f(r) = 2*pi*lambda_s*pc*r * exp(-lambda_s*pc*pi*r**2)
           / (1 - exp(-lambda_s*pc*pi*r_th**2))       for 0 <= r <= r_th.

    Undefined when pc = 0: the conditioning hit event then has probability
    zero.
    """
    pc = params.pc
    if pc <= 0.0:
        raise ParameterError(
            "cache_size_d",
            "serving distance is conditioned on a cache hit, impossible at pc = 0",
        )
    if not (math.isfinite(r) and 0.0 <= r <= params.r_th):
        raise ParameterError("r", f"distance must lie in [0, r_th={params.r_th}], got {r}")
    rate = params.lambda_s * pc * math.pi
    norm = -math.expm1(-rate * params.r_th**2)
    return 2.0 * rate * r * math.exp(-rate * r * r) / norm


def content_outage(params: SystemParams) -> float:
    """Probability of missing the SIR threshold for a requested content.

    Conditions the fixed-distance outage on the serving distance drawn
    from :func:`serving_distance_pdf` and integrates it in closed form:

        1 - pc * (1 - exp(-lambda_s*(pc + kappa*gamma**(2/alpha))*pi*r_th**2))
            / ((1 - exp(-lambda_s*pc*pi*r_th**2)) * (pc + kappa*gamma**(2/alpha)))

    Requires pc > 0 (the conditioning hit event must have positive
    probability).
    """
    pc = params.pc
    if pc <= 0.0:
        raise ParameterError(
            "cache_size_d",
            "content outage is conditioned on a cache hit, impossible at pc = 0",
        )
    a = pc + kappa(params.alpha) * params.gamma ** (2.0 / params.alpha)
    area = params.lambda_s * math.pi * params.r_th**2
    ratio = (pc * math.expm1(-a * area)) / (a * math.expm1(-pc * area))
    return 1.0 - ratio


def content_outage_quadrature(params: SystemParams, rel_tol: float = 1e-10) -> float:
    """Content outage by adaptive quadrature, the independent route to the closed form.

    Integrates outage_at_distance(r) * serving_distance_pdf(r) over
    [0, r_th] with both absolute and relative tolerance ``rel_tol``.

    Raises :class:`QuadratureError` when the integrator's error estimate
    exceeds the tolerance, reporting the achieved estimate.
    """
    if not (math.isfinite(rel_tol) and rel_tol > 0):
        raise ParameterError("rel_tol", f"tolerance must be positive, got {rel_tol}")
    pc = params.pc
    if pc <= 0.0:
        raise ParameterError(
            "cache_size_d",
            "content outage is conditioned on a cache hit, impossible at pc = 0",
        )
    rate = params.lambda_s * pc * math.pi
    scale = (
        params.lambda_s
        * kappa(params.alpha)
        * math.pi
        * params.gamma ** (2.0 / params.alpha)
    )
    norm = -math.expm1(-rate * params.r_th**2)

    def integrand(r: float) -> float:
        outage = -math.expm1(-scale * r * r)
        pdf = 2.0 * rate * r * math.exp(-rate * r * r) / norm
        return outage * pdf

    # hint the pdf's mode and effective support edge so a sharply peaked
    # integrand on a wide interval is not missed by the first panels
    mode = 1.0 / math.sqrt(2.0 * rate)
    cutoff = math.sqrt(40.0 / rate)
    breakpoints = sorted(p for p in (mode, cutoff) if 0.0 < p < params.r_th)
    value, abserr = quad(
        integrand,
        0.0,
        params.r_th,
        points=breakpoints or None,
        epsabs=rel_tol,
        epsrel=rel_tol,
        limit=200,
    )
    if abserr > max(rel_tol, rel_tol * abs(value)):
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3e} exceeds tolerance {rel_tol:.3e}",
            value=value,
            error_estimate=abserr,
        )
    return value


def optimal_density(epsilon: float, pc: float, r_th: float) -> float:
    """Smallest SBS density reaching hit target ``epsilon`` at fixed ``pc`` and ``r_th``.

    Returns -ln(1 - epsilon) / (pc * pi * r_th**2), the exact inverse of
    :func:`cache_hit_prob` in the density argument.
    """
    _check_epsilon(epsilon)
    if not (math.isfinite(r_th) and r_th > 0):
        raise ParameterError("r_th", f"r_th must be positive, got {r_th}")
    if epsilon == 0.0:
        return 0.0
    pc = float(pc)
    if not (0.0 < pc <= 1.0):
        raise ParameterError(
            "pc", f"replication ratio must be positive to reach a nonzero target, got {pc}"
        )
    return -math.log1p(-epsilon) / (pc * math.pi * r_th**2)
