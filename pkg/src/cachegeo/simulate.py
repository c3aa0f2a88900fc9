"""Monte Carlo engine: Poisson fields, conditional serving distances, SIR draws.

Every trial owns a counter-based RNG stream derived from the master seed
and the trial index, so estimates are bit-identical for a given
configuration no matter how many workers run the trials. The worker count
is capped by the ``CACHEGEO_THREADS`` environment variable (0 or unset
means auto) and never affects results.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from statistics import NormalDist

import numpy as np

from .model import ParameterError, SystemParams

__all__ = [
    "Mode",
    "SimConfig",
    "Estimate",
    "PointSet",
    "TruncationWindowWarning",
    "DegenerateSampleError",
    "trial_stream",
    "sample_ppp",
    "draw_serving_distance",
    "sir_sample",
    "interference_tail_mean",
    "recommended_window_radius",
    "content_outage_trials",
    "estimate_content_outage",
    "estimate_cache_hit",
    "estimate_physical",
    "binomial_ci",
    "worker_count",
]

_SEED_SPACE = 2**64


class Mode(str, Enum):
    """Association mode for outage estimation.

    EMULATED draws the serving distance from the conditional
    nearest-caching-SBS law while the whole sampled field interferes (the
    serving link is an extra point, not excluded from the interference).
    PHYSICAL serves from the actual nearest caching SBS in the realization
    and lets every other SBS interfere.
    """

    EMULATED = "emulated"
    PHYSICAL = "physical"


class TruncationWindowWarning(UserWarning):
    """Interference window smaller than the recommended truncation radius."""


class DegenerateSampleError(RuntimeError):
    """No trial survived the conditioning event (effective sample size 0)."""


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo controls.

    ``window_radius`` is the radius of the disc on which interferers are
    sampled; None resolves to :func:`recommended_window_radius` for the
    parameters of the run.
    """

    trials: int = 5000
    master_seed: int = 0
    window_radius: float | None = None
    mode: Mode = Mode.EMULATED

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ParameterError("trials", f"trials must be a positive integer, got {self.trials}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < _SEED_SPACE:
            raise ParameterError(
                "master_seed", f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}"
            )
        if self.window_radius is not None and not (
            math.isfinite(self.window_radius) and self.window_radius > 0
        ):
            raise ParameterError(
                "window_radius", f"window_radius must be positive, got {self.window_radius}"
            )


@dataclass(frozen=True)
class Estimate:
    """Binomial Monte Carlo estimate with a Wilson confidence interval.

    ``n`` is the effective sample size; ``n_discarded`` counts trials
    dropped by a conditioning event (physical mode only).
    """

    mean: float
    ci_low: float
    ci_high: float
    confidence: float
    n: int
    n_discarded: int = 0

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


@dataclass(frozen=True)
class PointSet:
    """Planar points on an origin-centered disc of radius ``window_radius``."""

    xy: np.ndarray  # shape (n, 2), meters
    window_radius: float

    @property
    def n(self) -> int:
        return self.xy.shape[0]

    def radii(self) -> np.ndarray:
        """Distances of all points from the origin."""
        return np.hypot(self.xy[:, 0], self.xy[:, 1])


def trial_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent counter-based RNG stream for one trial.

    All streams share the Philox key ``master_seed`` and are separated by
    the 128-bit counter block ``trial_index``, so any subset of trials can
    run in any order, serially or in parallel, with identical draws.
    """
    bitgen = np.random.Philox(key=master_seed, counter=trial_index << 128)
    return np.random.Generator(bitgen)


def sample_ppp(lambda_s: float, window_radius: float, rng: np.random.Generator) -> PointSet:
    """One realization of a homogeneous Poisson field on the disc.

    The count is Poisson with mean lambda_s * pi * window_radius**2 and
    positions are i.i.d. uniform on the disc (radius via sqrt of a
    uniform draw).
    """
    if lambda_s <= 0:
        raise ParameterError("lambda_s", f"lambda_s must be positive, got {lambda_s}")
    if window_radius <= 0:
        raise ParameterError("window_radius", f"window_radius must be positive, got {window_radius}")
    n = int(rng.poisson(lambda_s * math.pi * window_radius**2))
    r = window_radius * np.sqrt(rng.random(n))
    theta = rng.random(n) * (2.0 * math.pi)
    xy = np.column_stack((r * np.cos(theta), r * np.sin(theta)))
    return PointSet(xy=xy, window_radius=float(window_radius))


def draw_serving_distance(
    params: SystemParams, rng: np.random.Generator, size: int | None = None
):
    """Sample the distance to the serving SBS, conditioned on a hit within r_th.

    Inverse-CDF sampling of the conditional nearest-caching-SBS law:
    r = sqrt(-ln(1 - u*(1 - exp(-lambda_s*pc*pi*r_th**2))) / (lambda_s*pc*pi))
    for u uniform on [0, 1). Returns a float, or an array when ``size``
    is given.
    """
    pc = params.pc
    if pc <= 0.0:
        raise ParameterError(
            "cache_size_d",
            "serving distance is conditioned on a cache hit, impossible at pc = 0",
        )
    rate = params.lambda_s * pc * math.pi
    tail = math.expm1(-rate * params.r_th**2)  # exp(-c) - 1, in (-1, 0)
    u = rng.random(size)
    r = np.sqrt(np.log1p(u * tail) / -rate)
    return float(r) if size is None else r


def sir_sample(
    serving_r: float,
    interferers: PointSet,
    alpha: float,
    rng: np.random.Generator,
) -> float:
    """One SIR draw for a serving link at ``serving_r`` against a faded field.

    The serving link is an extra point: every member of ``interferers``
    contributes to the denominator, the serving SBS is not excluded. All
    fading gains are exponential with mean 1. Returns inf when the
    interference sum is zero (empty field), which callers count as
    coverage.
    """
    h0 = float(rng.exponential())
    if interferers.n == 0:
        return math.inf
    radii = interferers.radii()
    h = rng.exponential(size=interferers.n)
    with np.errstate(divide="ignore"):
        interference = float(np.sum(h * radii**-alpha))
    if serving_r <= 0.0:
        return math.inf  # zero-distance serving link dominates any finite interference
    if interference == 0.0:
        return math.inf
    return h0 * serving_r**-alpha / interference


def interference_tail_mean(lambda_s: float, alpha: float, radius: float) -> float:
    """Mean faded interference power arriving from beyond ``radius``.

    2*pi*lambda_s * radius**(2-alpha) / (alpha - 2) with unit-mean fading;
    what a finite sampling window discards relative to the infinite plane.
    """
    if alpha <= 2:
        raise ParameterError("alpha", f"alpha must exceed 2, got {alpha}")
    if radius <= 0:
        raise ParameterError("window_radius", f"radius must be positive, got {radius}")
    return 2.0 * math.pi * lambda_s * radius ** (2.0 - alpha) / (alpha - 2.0)


def recommended_window_radius(params: SystemParams, tail_fraction: float = 1e-3) -> float:
    """Window radius keeping the discarded interference tail small.

    Chooses the radius at which the mean interference from beyond the
    window is below ``tail_fraction`` of the in-window mean. The in-window
    mean needs a near-field scale to be finite; it is cut at the mean
    nearest-interferer distance 1/(2*sqrt(lambda_s)). Never below ten
    threshold distances.
    """
    if tail_fraction <= 0:
        raise ParameterError("tail_fraction", f"tail_fraction must be positive, got {tail_fraction}")
    near = 1.0 / (2.0 * math.sqrt(params.lambda_s))
    growth = ((1.0 + tail_fraction) / tail_fraction) ** (1.0 / (params.alpha - 2.0))
    return max(10.0 * params.r_th, near * growth)


def worker_count() -> int:
    """Worker cap from ``CACHEGEO_THREADS`` (0 or unset means auto)."""
    raw = os.environ.get("CACHEGEO_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(
            "CACHEGEO_THREADS", f"CACHEGEO_THREADS must be an integer, got {raw!r}"
        ) from None
    if value < 0:
        raise ParameterError(
            "CACHEGEO_THREADS", f"CACHEGEO_THREADS must be nonnegative, got {value}"
        )
    if value == 0:
        return min(os.cpu_count() or 1, 8)
    return value


def _map_trials(n_trials: int, fn):
    """Apply ``fn`` to every trial index, combining in index order.

    The per-trial RNG streams make results independent of the partition,
    so any worker count returns the same list.
    """
    workers = worker_count()
    if workers <= 1 or n_trials < 64:
        return [fn(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, n_trials // (workers * 4))
        return list(pool.map(fn, range(n_trials), chunksize=chunk))


def _resolve_window(params: SystemParams, cfg: SimConfig) -> float:
    recommended = recommended_window_radius(params)
    window = cfg.window_radius if cfg.window_radius is not None else recommended
    if window < params.r_th:
        raise ParameterError(
            "window_radius",
            f"window_radius {window} must cover the threshold distance {params.r_th}",
        )
    if window < recommended:
        tail = interference_tail_mean(params.lambda_s, params.alpha, window)
        warnings.warn(
            f"window_radius {window:g} m is below the recommended truncation radius "
            f"{recommended:g} m; mean interference of {tail:.3g} from beyond the window "
            "is being discarded",
            TruncationWindowWarning,
            stacklevel=3,
        )
    return window


def content_outage_trials(params: SystemParams, cfg: SimConfig):
    """Per-trial serving distances and outage indicators, emulated association.

    Each trial samples a fresh interference field, draws an independent
    serving distance from the conditional law, draws fadings and records
    the event SIR < gamma. Returned arrays are ordered by trial index;
    :func:`estimate_content_outage` aggregates them, and callers can bin
    them by distance for conditional checks.
    """
    if cfg.mode is not Mode.EMULATED:
        raise ParameterError("mode", f"emulated association required, got mode={cfg.mode.value}")
    if params.pc <= 0.0:
        raise ParameterError(
            "cache_size_d",
            "content outage is conditioned on a cache hit, impossible at pc = 0",
        )
    window = _resolve_window(params, cfg)

    def one(i: int):
        rng = trial_stream(cfg.master_seed, i)
        field = sample_ppp(params.lambda_s, window, rng)
        r0 = draw_serving_distance(params, rng)
        return r0, sir_sample(r0, field, params.alpha, rng) < params.gamma

    results = _map_trials(cfg.trials, one)
    distances = np.array([r for r, _ in results])
    outages = np.array([o for _, o in results], dtype=bool)
    return distances, outages


def estimate_content_outage(params: SystemParams, cfg: SimConfig) -> Estimate:
    """Binomial estimate of the content outage fraction over ``cfg.trials`` realizations."""
    _, outages = content_outage_trials(params, cfg)
    return _binomial_estimate(int(outages.sum()), cfg.trials)


def estimate_cache_hit(params: SystemParams, cfg: SimConfig) -> Estimate:
    """Binomial estimate of the probability that some SBS within r_th caches the content.

    Each trial samples the field on the disc of radius r_th and marks each
    SBS as holding the requested content independently with probability
    pc; under uniform popularity this is exactly drawing d of |C| contents
    without replacement and checking membership. A hit is at least one
    marked SBS.
    """
    def one(i: int) -> bool:
        rng = trial_stream(cfg.master_seed, i)
        field = sample_ppp(params.lambda_s, params.r_th, rng)
        return bool((rng.random(field.n) < params.pc).any())

    hits = _map_trials(cfg.trials, one)
    return _binomial_estimate(sum(hits), cfg.trials)


def _cache_holds_requested(
    n_sbs: int, cache_size: int, library_size: int, rng: np.random.Generator
) -> np.ndarray:
    """Whether each SBS's uniformly drawn cache includes the requested content.

    Each SBS caches ``cache_size`` distinct contents drawn uniformly from
    the library, materialized as the smallest keys of an i.i.d. draw; the
    request targets content index 0 (uniform popularity makes the index
    irrelevant).
    """
    if cache_size == 0 or n_sbs == 0:
        return np.zeros(n_sbs, dtype=bool)
    if cache_size == library_size:
        return np.ones(n_sbs, dtype=bool)
    holds = np.empty(n_sbs, dtype=bool)
    rows = max(1, int(2_000_000 // library_size))  # bound the key matrix to ~16 MB
    for lo in range(0, n_sbs, rows):
        keys = rng.random((min(rows, n_sbs - lo), library_size))
        subset = np.argpartition(keys, cache_size - 1, axis=1)[:, :cache_size]
        holds[lo : lo + keys.shape[0]] = (subset == 0).any(axis=1)
    return holds


def estimate_physical(params: SystemParams, cfg: SimConfig) -> Estimate:
    """Outage under physical association: nearest caching SBS in range serves.

    Cross-check mode, expected to deviate from the emulated estimate: the
    serving SBS is excluded from the interference here (pushing outage
    down, dominant when the hit event is near-certain, e.g. pc = 1 at high
    density), while conditioning on a hit size-biases the field upward
    (pushing outage up, dominant at small pc). Trials with no caching SBS
    within r_th are discarded and counted in ``n_discarded``.

    Raises :class:`DegenerateSampleError` when no trial survives the
    conditioning.
    """
    if cfg.mode is not Mode.PHYSICAL:
        raise ParameterError("mode", f"physical association required, got mode={cfg.mode.value}")
    window = _resolve_window(params, cfg)

    def one(i: int):
        rng = trial_stream(cfg.master_seed, i)
        field = sample_ppp(params.lambda_s, window, rng)
        holds = _cache_holds_requested(
            field.n, params.cache_size_d, params.library_size, rng
        )
        radii = field.radii()
        h = rng.exponential(size=field.n)
        candidates = holds & (radii <= params.r_th)
        if not candidates.any():
            return None
        serving = int(np.argmin(np.where(candidates, radii, np.inf)))
        with np.errstate(divide="ignore"):
            power = h * radii**-params.alpha
        signal = float(power[serving])
        interference = float(power.sum() - power[serving])
        if interference == 0.0:
            return False  # lone SBS in the window: infinite SIR, coverage
        return bool(signal / interference < params.gamma)

    results = _map_trials(cfg.trials, one)
    effective = [r for r in results if r is not None]
    n_discarded = cfg.trials - len(effective)
    if not effective:
        raise DegenerateSampleError(
            f"no caching SBS within r_th={params.r_th} in any of {cfg.trials} trials "
            "(effective sample size 0)"
        )
    return _binomial_estimate(sum(effective), len(effective), n_discarded=n_discarded)


def binomial_ci(successes: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Stays inside [0, 1] and always contains the point estimate, also at
    proportions of exactly 0 or 1, which the sweep tails produce.
    """
    if n <= 0:
        raise ParameterError("n", f"need at least one trial, got n={n}")
    if not 0 <= successes <= n:
        raise ParameterError("successes", f"successes must lie in [0, {n}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise ParameterError("confidence", f"confidence must lie in (0, 1), got {confidence}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    p_hat = successes / n
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2.0 * n)) / denom
    margin = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n))
    # the bounds at proportions 0 and 1 are exact; keep them free of roundoff
    low = 0.0 if successes == 0 else max(0.0, center - margin)
    high = 1.0 if successes == n else min(1.0, center + margin)
    return low, high


def _binomial_estimate(
    successes: int, n: int, confidence: float = 0.99, n_discarded: int = 0
) -> Estimate:
    low, high = binomial_ci(successes, n, confidence)
    return Estimate(
        mean=successes / n,
        ci_low=low,
        ci_high=high,
        confidence=confidence,
        n=n,
        n_discarded=n_discarded,
    )
