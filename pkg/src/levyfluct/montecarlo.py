"""Path simulation and Monte Carlo estimation: the independent oracle.

Paths are built step by step: drift + Gaussian increment + compound Poisson
jumps above the truncation threshold; small jumps are replaced by their
compensator drift alone or by a moment-matched Gaussian.  Boundary crossings
within a step are resolved with Brownian-bridge corrections (crossing
probability for the barriers, exact bridge-supremum sampling at a reflecting
barrier), which removes the dominant discretisation bias of first-passage
estimates.

Determinism: paths are processed in fixed-size batches; batch j draws from a
counter-based Philox stream keyed by (seed, j).  Batch outputs are combined
in batch order, so results are bit-identical for a fixed scheme regardless of
the worker count (LEVYFLUCT_THREADS only changes scheduling).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import models as _models
from .errors import ModelError

CAPPED_FLAG_LEVEL = 1e-3


def thread_count():
    """Worker cap from LEVYFLUCT_THREADS (default 1)."""
    raw = os.environ.get("LEVYFLUCT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SimScheme:
    """Euler scheme parameters.

    ``small_jump_mode``: 'auto' picks gaussian_approx for infinite-activity
    measures and drift_only otherwise.  ``horizon`` defaults to 50/q for
    q > 0 and must be given explicitly for q = 0.  ``batch_size`` is part of
    the scheme: it fixes the stream-to-path assignment.
    """

    dt: float = 1e-3
    eps: float = 1e-3
    small_jump_mode: str = "auto"
    horizon: Optional[float] = None
    seed: int = 0
    batch_size: int = 10_000
    bridge: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.eps <= 0:
            raise ModelError("dt and eps must be positive")
        if self.horizon is not None and self.horizon <= 0:
            raise ModelError("horizon must be positive")
        if self.small_jump_mode not in ("auto", "gaussian_approx", "drift_only"):
            raise ModelError(f"unknown small_jump_mode {self.small_jump_mode!r}")

    def resolve_horizon(self, q):
        if self.horizon is not None:
            return self.horizon
        if q > 0:
            return 50.0 / q
        raise ModelError("horizon is required when q = 0 (first passage can be heavy-tailed)")


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    n_paths: int
    scheme: SimScheme
    capped_fraction: float

    @property
    def flagged(self):
        return self.capped_fraction > CAPPED_FLAG_LEVEL


UP, DOWN, CAPPED = 1, -1, 0


@dataclass
class ExitSamples:
    """Per-path first-passage data; reusable across penalties and rates."""

    times: np.ndarray
    sides: np.ndarray          # +1 up, -1 down, 0 capped at the horizon
    positions: np.ndarray      # b for up exits, <= a for down exits, nan capped
    creep: np.ndarray          # down exit that hit the level exactly (continuous part)
    xi_discounted: Optional[np.ndarray] = None   # reflected runs: int e^{-qs} dxi
    horizon: float = math.inf

    @property
    def n_paths(self):
        return self.times.size

    @property
    def capped_fraction(self):
        return float(np.mean(self.sides == CAPPED))


@dataclass
class ResolventEstimate:
    edges: np.ndarray
    density: np.ndarray        # per-bin occupation density estimate
    stderr: np.ndarray
    samples: ExitSamples
    scheme: SimScheme

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self):
        return np.diff(self.edges)


class _JumpKit:
    """Per-(measure, scheme) sampling machinery for jumps above the threshold."""

    def __init__(self, measure, scheme):
        self.measure = measure
        fam = measure.family
        mode = scheme.small_jump_mode
        if mode == "auto":
            mode = ("gaussian_approx" if measure.activity == _models.INFINITE_ACTIVITY
                    else "drift_only")
        self.mode = mode
        if fam == "none":
            self.lam = 0.0
            self.eps_eff = 0.0
        elif fam == "exponential":
            # finite activity: simulate every jump, no truncation
            self.lam = measure.params["intensity"]
            self.rho = measure.params["decay"]
            self.eps_eff = 0.0
        elif fam == "tempered_stable":
            self.eps_eff = scheme.eps
            self.lam = float(measure.tail(self.eps_eff))
            self.alpha = measure.params["alpha"]
            self.rho = measure.params["rho"]
        elif fam == "table":
            lo = measure.params["theta"][0]
            self.eps_eff = max(scheme.eps, lo) if scheme.eps > lo else lo
            self.lam = float(measure.tail(self.eps_eff))
            grid = np.geomspace(self.eps_eff, measure.params["theta"][-1], 4097)
            tails = np.array([float(measure.tail(t)) for t in grid])
            cdf = 1.0 - tails / tails[0]
            cdf[-1] = 1.0
            keep = np.concatenate([[True], np.diff(cdf) > 0])
            self._cdf_grid = cdf[keep]
            self._theta_grid = grid[keep]
        else:
            raise ModelError(f"no jump sampler for measure family {fam!r}")
        # compensator drift for dropped/represented jumps, and matched variance
        self.drift_comp = measure.small_mass_between(self.eps_eff, 1.0)
        if self.mode == "gaussian_approx" and self.eps_eff > 0:
            self.sigma2_small = measure.squared_mass_below(self.eps_eff)
        else:
            self.sigma2_small = 0.0

    def path_totals(self, rng, counts):
        """Sum of jump sizes per path, given per-path Poisson counts."""
        fam = self.measure.family
        if fam == "exponential":
            return rng.gamma(counts.astype(float), 1.0 / self.rho)
        total = int(counts.sum())
        if total == 0:
            return np.zeros(counts.size)
        if fam == "tempered_stable":
            sizes = self._sample_tempered(rng, total)
        else:
            u = rng.random(total)
            sizes = np.interp(u, self._cdf_grid, self._theta_grid)
        owner = np.repeat(np.arange(counts.size), counts)
        return np.bincount(owner, weights=sizes, minlength=counts.size)

    def _sample_tempered(self, rng, n):
        # Pareto proposal above eps, tempering acceptance e^{-rho (t - eps)}
        out = np.empty(n)
        todo = n
        filled = 0
        while todo > 0:
            m = int(todo * 1.2) + 16
            prop = self.eps_eff * rng.random(m) ** (-1.0 / self.alpha)
            acc = rng.random(m) < np.exp(-self.rho * (prop - self.eps_eff))
            got = prop[acc][:todo]
            out[filled:filled + got.size] = got
            filled += got.size
            todo -= got.size
        return out


def _batch_plan(n_paths, batch_size):
    edges = list(range(0, n_paths, batch_size)) + [n_paths]
    return [(i, lo, hi) for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:]))]


def _run_batches(n_paths, scheme, runner):
    """Deterministic fan-out over batches; results concatenated in batch order."""
    plan = _batch_plan(n_paths, scheme.batch_size)
    results = [None] * len(plan)

    def work(item):
        bi, lo, hi = item
        rng = np.random.Generator(np.random.Philox(key=scheme.seed, counter=[0, 0, 0, bi]))
        return bi, runner(rng, hi - lo)

    workers = thread_count()
    if workers == 1 or len(plan) == 1:
        for item in plan:
            bi, res = work(item)
            results[bi] = res
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for bi, res in pool.map(work, plan):
                results[bi] = res
    return results


def _simulate_kernel(model, a, b, x0, scheme, n_paths, q=0.0, *, delta=0.0,
                     refract_level=None, reflect_level=None, n_bins=0):
    """Shared Euler kernel for plain, refracted and reflected passage.

    Returns (ExitSamples, histogram accumulators or None).  For reflected
    runs there is no upper exit; ``xi_discounted`` carries int e^{-qs} dxi.
    """
    kit = _JumpKit(model.measure, scheme)
    dt = scheme.dt
    sqdt = math.sqrt(dt)
    horizon = scheme.resolve_horizon(q)
    n_steps = int(math.ceil(horizon / dt))
    drift0 = model.gamma + kit.drift_comp
    sig_eff = math.sqrt(model.sigma ** 2 + kit.sigma2_small)
    sig2dt = sig_eff ** 2 * dt
    lam_dt = kit.lam * dt
    use_bridge = scheme.bridge and sig_eff > 0.0
    reflect = reflect_level is not None
    if reflect and x0 > reflect_level:
        raise ModelError("reflected start must satisfy x0 <= barrier")
    if n_bins:
        bin_w = (b - a) / n_bins

    def runner(rng, nb):
        x = np.full(nb, float(x0))
        idx = np.arange(nb)
        times = np.full(nb, horizon)
        sides = np.full(nb, CAPPED, dtype=np.int8)
        pos = np.full(nb, np.nan)
        creep = np.zeros(nb, dtype=bool)
        xi_acc = np.zeros(nb) if reflect else None
        hist = np.zeros((nb, n_bins)) if n_bins else None
        for step in range(n_steps):
            m = idx.size
            if m == 0:
                break
            t_now = step * dt
            if n_bins:
                w = math.exp(-q * t_now) * dt
                bins = np.clip(((x - a) / bin_w).astype(np.int64), 0, n_bins - 1)
                np.add.at(hist, (idx, bins), w)
            if refract_level is not None:
                drift = drift0 - delta * (x > refract_level)
            else:
                drift = drift0
            if sig_eff > 0.0:
                z = rng.standard_normal(m)
                x_pre = x + drift * dt + sig_eff * sqdt * z
            else:
                x_pre = x + drift * dt
            if reflect:
                if use_bridge:
                    # exact bridge-supremum sample: no O(sqrt(dt)) regulator bias
                    u_sup = rng.random(m)
                    gap = x_pre - x
                    sup = 0.5 * (x + x_pre + np.sqrt(gap * gap - 2.0 * sig2dt * np.log(u_sup)))
                else:
                    sup = np.maximum(x, x_pre)
                xi_inc = np.maximum(sup - reflect_level, 0.0)
                x_pre = x_pre - xi_inc
                xi_acc[idx] += math.exp(-q * (t_now + 0.5 * dt)) * xi_inc
                hit_up = np.zeros(m, dtype=bool)
            elif use_bridge:
                p_up = np.where(x_pre >= b, 1.0,
                                np.exp(-2.0 * np.maximum(b - x, 0.0)
                                       * np.maximum(b - x_pre, 0.0) / sig2dt))
                u = rng.random(m)
                hit_up = u < p_up
            else:
                hit_up = x_pre >= b

            if use_bridge:
                if not reflect:
                    # conditional uniform given no up-crossing
                    with np.errstate(divide="ignore", invalid="ignore"):
                        u2 = np.where(hit_up, 2.0, (u - p_up) / (1.0 - p_up))
                else:
                    u2 = rng.random(m)
                p_dn = np.where(x_pre <= a, 1.0,
                                np.exp(-2.0 * np.maximum(x - a, 0.0)
                                       * np.maximum(x_pre - a, 0.0) / sig2dt))
                hit_creep = (~hit_up) & (u2 < p_dn)
            else:
                hit_creep = (~hit_up) & (x_pre <= a)

            if lam_dt > 0.0:
                counts = rng.poisson(lam_dt, m)
                totals = kit.path_totals(rng, counts)
                x_post = x_pre - totals
            else:
                x_post = x_pre
            hit_jump = (~hit_up) & (~hit_creep) & (x_post < a)

            if np.any(hit_up):
                rows = idx[hit_up]
                if sig_eff > 0.0:
                    times[rows] = t_now + dt
                else:
                    # drift-only crossing time is exact within the step
                    d = drift[hit_up] if np.ndim(drift) else drift
                    times[rows] = t_now + (b - x[hit_up]) / d
                sides[rows] = UP
                pos[rows] = b
            if np.any(hit_creep):
                rows = idx[hit_creep]
                times[rows] = t_now + dt
                sides[rows] = DOWN
                pos[rows] = a
                creep[rows] = True
            if np.any(hit_jump):
                rows = idx[hit_jump]
                times[rows] = t_now + dt
                sides[rows] = DOWN
                pos[rows] = x_post[hit_jump]
            keep = (~hit_up) & (~hit_creep) & (~hit_jump)
            x = x_post[keep]
            idx = idx[keep]
        out = dict(times=times, sides=sides, pos=pos, creep=creep)
        if reflect:
            out["xi"] = xi_acc
        if n_bins:
            out["hist"] = hist.sum(axis=0)
            out["hist_sq"] = (hist ** 2).sum(axis=0)
        return out

    batches = _run_batches(n_paths, scheme, runner)
    samples = ExitSamples(
        times=np.concatenate([r["times"] for r in batches]),
        sides=np.concatenate([r["sides"] for r in batches]),
        positions=np.concatenate([r["pos"] for r in batches]),
        creep=np.concatenate([r["creep"] for r in batches]),
        xi_discounted=(np.concatenate([r["xi"] for r in batches]) if reflect else None),
        horizon=horizon)
    hist_data = None
    if n_bins:
        total = np.sum([r["hist"] for r in batches], axis=0)
        total_sq = np.sum([r["hist_sq"] for r in batches], axis=0)
        hist_data = (total, total_sq)
    return samples, hist_data


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def simulate_first_passage(model, a, b, x0, scheme, n_paths, q=0.0):
    """First-passage samples from [a, b] started at x0.

    Upper exits happen by continuous crossing (no positive jumps), so the
    recorded position is exactly b; lower exits record the post-jump
    overshoot position, or a itself for crossings by the continuous part.
    Paths reaching the horizon are capped, not dropped.
    """
    if not a <= x0 <= b:
        raise ModelError("need a <= x0 <= b")
    samples, _ = _simulate_kernel(model, a, b, x0, scheme, n_paths, q=q)
    return samples


def estimate_overshoot_functional(model, f, a, b, q, x0, scheme, n_paths,
                                  samples=None):
    """MC estimate of E_x[e^{-q tau_a^-} f(X at tau_a^-) 1{down exit first}].

    ``samples`` allows reusing one simulation for several penalties; capped
    paths contribute zero (bias at most e^{-q*horizon} * sup|f|, visible via
    ``capped_fraction``).
    """
    if samples is None:
        samples = simulate_first_passage(model, a, b, x0, scheme, n_paths, q=q)
    vals = np.zeros(samples.n_paths)
    down = samples.sides == DOWN
    if np.any(down):
        posd = samples.positions[down]
        try:
            fv = np.asarray(f(posd), dtype=float)
            if fv.shape != posd.shape:
                raise TypeError
        except Exception:
            fv = np.array([float(f(p)) for p in posd])
        vals[down] = np.exp(-q * samples.times[down]) * fv
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return MCEstimate(mean=mean, stderr=stderr, n_paths=samples.n_paths,
                      scheme=scheme, capped_fraction=samples.capped_fraction)


def estimate_exit_transform(samples, q, side=UP):
    """MC estimate of E[e^{-q tau} 1{exit on the given side}] from samples."""
    vals = np.zeros(samples.n_paths)
    mask = samples.sides == side
    vals[mask] = np.exp(-q * samples.times[mask])
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(vals.size))
    return mean, stderr


def estimate_creeping(samples, q):
    """MC estimate of E[e^{-q tau} 1{hit the lower level exactly}]."""
    vals = np.zeros(samples.n_paths)
    mask = samples.creep
    vals[mask] = np.exp(-q * samples.times[mask])
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(vals.size))
    return mean, stderr


def simulate_reflected(model, b, a, x0, scheme, n_paths, q=0.0, n_bins=0):
    """Paths reflected at the upper barrier b until first passage below a.

    Reflection uses exact Brownian-bridge supremum sampling per step, so the
    regulator xi (and its discounted integral) carries no O(sqrt(dt))
    boundary bias.  Returns ExitSamples (no up exits) and, if requested, a
    ResolventEstimate of the occupation density on [a, b].
    """
    samples, hist = _simulate_kernel(model, a, b, x0, scheme, n_paths, q=q,
                                     reflect_level=b, n_bins=n_bins)
    if n_bins:
        return samples, _histogram_to_resolvent(hist, samples, scheme, a, b, n_bins)
    return samples


def simulate_refracted(model, delta, c, a, b, x0, scheme, n_paths, q=0.0, n_bins=0):
    """Refracted paths: drift reduced by delta while above c.

    delta = 0 degenerates to the plain process path-for-path (same streams).
    """
    if delta < 0:
        raise ModelError("delta must be nonnegative")
    if delta > 0 and model.measure.variation_part == _models.INTEGRABLE \
            and delta >= model.natural_drift:
        raise ModelError("need delta < gamma + int_0^1 th Pi(dth) for a well-posed"
                         " refracted process")
    if not (a < c < b):
        raise ModelError("need a < c < b")
    samples, hist = _simulate_kernel(model, a, b, x0, scheme, n_paths, q=q,
                                     delta=delta, refract_level=c, n_bins=n_bins)
    if n_bins:
        return samples, _histogram_to_resolvent(hist, samples, scheme, a, b, n_bins)
    return samples


def _histogram_to_resolvent(hist, samples, scheme, a, b, n_bins):
    total, total_sq = hist
    n = samples.n_paths
    bin_w = (b - a) / n_bins
    mean = total / n
    var = np.maximum(total_sq / n - mean ** 2, 0.0)
    stderr = np.sqrt(var / n) / bin_w
    edges = np.linspace(a, b, n_bins + 1)
    return ResolventEstimate(edges=edges, density=mean / bin_w, stderr=stderr,
                             samples=samples, scheme=scheme)


def estimate_resolvent(model, a, b, q, x0, scheme, n_paths, n_bins=50):
    """Histogram estimate of the killed q-resolvent density on [a, b].

    Accumulates e^{-qs} dt over path positions per bin; per-bin standard
    errors come from across-path variation.  The exit samples ride along for
    mass-balance checks.
    """
    if not a <= x0 <= b:
        raise ModelError("need a <= x0 <= b")
    samples, hist = _simulate_kernel(model, a, b, x0, scheme, n_paths, q=q,
                                     n_bins=n_bins)
    return _histogram_to_resolvent(hist, samples, scheme, a, b, n_bins)
