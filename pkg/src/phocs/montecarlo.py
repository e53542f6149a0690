"""Trial orchestration, failure statistics and threshold estimation.

Every trial draws its random stream from a counter-based generator keyed by
(point_seed, trial_index), where point_seed is itself a stable hash of the
master seed and the point's physical parameters. Results are therefore
independent of worker count and of how points are grouped into runs.
"""

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtri

from . import channel, decode
from .channel import PhysicalParams
from .lattice import Lattice

DEFAULT_MAX_D = 15
RNG_ALGORITHM = "numpy.random.Philox(key=[point_seed, trial_index])"


@dataclass(frozen=True)
class PointSpec:
    """One Monte Carlo point: lattice size, error model, decoding policy."""

    d: int
    mode: str = "photonic"  # photonic | phenomenological
    params: Optional[PhysicalParams] = None
    p_flip: Optional[float] = None
    p_lost: Optional[float] = None
    loss_policy: str = "blind"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"code distance must be at least 2, got {self.d}")
        if self.mode == "photonic":
            if self.params is None:
                raise ValueError("photonic mode needs PhysicalParams")
        elif self.mode == "phenomenological":
            if self.p_flip is None or self.p_lost is None:
                raise ValueError(
                    "phenomenological mode needs p_flip and p_lost")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.loss_policy not in decode.LOSS_POLICIES:
            raise ValueError(f"unknown loss policy {self.loss_policy!r}")

    def axis_values(self):
        """(p_C, p_L) columns for reporting."""
        if self.mode == "photonic":
            return self.params.p_C, self.params.p_L
        return self.p_flip, self.p_lost

    @property
    def R(self):
        return self.params.R if self.mode == "photonic" else 0


@dataclass
class PointEstimate:
    d: int
    p_C: float
    p_L: float
    R: int
    mode: str
    loss_policy: str
    trials: int
    failures: int
    failure_rate: float
    ci_low: float
    ci_high: float
    master_seed: int


def wilson_interval(failures, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= failures <= trials:
        raise ValueError("failures must lie in [0, trials]")
    z = float(ndtri(1.0 - (1.0 - confidence) / 2.0))
    n = float(trials)
    p = failures / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if failures == 0 else max(0.0, float(center - half))
    hi = 1.0 if failures == trials else min(1.0, float(center + half))
    return lo, hi


def point_seed(master_seed, spec):
    """Stable 64-bit seed for one point, independent of grid composition."""
    if spec.mode == "photonic":
        p = spec.params
        tag = (f"photonic|{p.p1!r}|{p.p2!r}|{p.p2_prime!r}|{p.p_dot!r}|"
               f"{p.p_det!r}|{p.R}")
    else:
        tag = f"phenomenological|{spec.p_flip!r}|{spec.p_lost!r}"
    text = f"{master_seed}|{spec.d}|{spec.loss_policy}|{tag}"
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _trial_rng(seed, index):
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_trials(spec, trials, master_seed, start=0):
    """Decode `trials` trials serially; returns a failure bitmap."""
    lat = Lattice(spec.d)
    tables = None
    if spec.mode == "photonic":
        tables = channel.face_tables(lat, spec.params)
    seed = point_seed(master_seed, spec)
    failed = np.zeros(trials, dtype=bool)
    for i in range(trials):
        rng = _trial_rng(seed, start + i)
        if spec.mode == "photonic":
            cfg = channel.sample_error_config(lat, spec.params, rng, tables)
        else:
            cfg = channel.phenomenological_config(
                lat, spec.p_flip, spec.p_lost, rng)
        failed[i] = decode.decode_trial(cfg, lat, spec.loss_policy).failed
    return failed


def _chunk_worker(args):
    spec, trials, master_seed, start = args
    return start, run_trials(spec, trials, master_seed, start)


def run_point(spec, trials, master_seed, workers=1, max_d=DEFAULT_MAX_D,
              confidence=0.95):
    """Estimate the failure rate of one point.

    workers=0 uses every core; any worker count gives bit-identical results
    because each trial's generator is keyed by (point, trial index).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if spec.d > max_d:
        raise ValueError(
            f"d={spec.d} exceeds the configured maximum {max_d}; large "
            "lattices are refused to keep runs tractable")
    bitmap = failure_bitmap(spec, trials, master_seed, workers)
    failures = int(bitmap.sum())
    lo, hi = wilson_interval(failures, trials, confidence)
    p_c, p_l = spec.axis_values()
    return PointEstimate(
        d=spec.d, p_C=p_c, p_L=p_l, R=spec.R, mode=spec.mode,
        loss_policy=spec.loss_policy, trials=trials, failures=failures,
        failure_rate=failures / trials, ci_low=lo, ci_high=hi,
        master_seed=master_seed)


def failure_bitmap(spec, trials, master_seed, workers=1):
    """Per-trial failure flags, reproducible for any worker count."""
    import os
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers == 1 or trials < 4 * workers:
        return run_trials(spec, trials, master_seed)
    n_chunks = min(4 * workers, trials)
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    jobs = [(spec, int(b - a), master_seed, int(a))
            for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    out = np.zeros(trials, dtype=bool)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for start, bits in pool.map(_chunk_worker, jobs):
            out[start:start + len(bits)] = bits
    return out


def sweep(specs, trials, master_seed, workers=1, max_d=DEFAULT_MAX_D):
    """Evaluate every point; output sorted by (d, p_C, p_L)."""
    if not specs:
        raise ValueError("empty grid")
    estimates = [run_point(s, trials, master_seed, workers, max_d)
                 for s in specs]
    estimates.sort(key=lambda e: (e.d, e.p_C, e.p_L))
    return estimates


# ---------------------------------------------------------------------------
# threshold estimation
# ---------------------------------------------------------------------------


@dataclass
class ThresholdEstimate:
    axis: str                 # which rate was scanned: "p_C" or "p_L"
    fixed_value: float        # the other rate, held constant
    found: bool
    p_th: Optional[float]
    uncertainty: Optional[float]
    d_values: list
    pair_crossings: dict      # (d1, d2) -> crossing
    reason: str = ""
    n_bootstrap: int = 0


def _fit_crossing(ps, rates_by_d, d_pair):
    """Local-fit crossing of two failure-rate curves.

    A genuine threshold crossing has the larger size below the smaller one
    at low rates and above it at high rates. The rate difference is scanned
    for its first negative-to-positive sign change; a quadratic is fitted
    to the difference over the nearest few grid points (local fit, so the
    saturated top of the curve cannot bias the estimate) and its root
    inside the bracketing segment is the crossing. Without a sign change
    the pair contributes nothing.
    """
    d1, d2 = d_pair
    g = np.asarray(rates_by_d[d2]) - np.asarray(rates_by_d[d1])
    seg = None
    for i in range(len(ps) - 1):
        if g[i] < 0 and g[i + 1] >= 0:
            seg = i
            break
    if seg is None:
        return None
    lo_i = max(0, seg - 1)
    hi_i = min(len(ps), seg + 3)
    window = slice(lo_i, hi_i)
    deg = 2 if hi_i - lo_i >= 3 else 1
    coeffs = np.polyfit(ps[window], g[window], deg)
    roots = [r.real for r in np.roots(coeffs)
             if abs(r.imag) < 1e-12 and ps[seg] <= r.real <= ps[seg + 1]]
    if roots:
        return float(min(roots, key=lambda r: abs(np.polyval(coeffs, r))))
    # quadratic missed the bracket (noisy wiggle): linear interpolation of
    # the bracketing segment still realizes the observed sign change
    p0, p1 = ps[seg], ps[seg + 1]
    g0, g1 = g[seg], g[seg + 1]
    return float(p0 + (p1 - p0) * (-g0) / (g1 - g0))


def find_threshold(points, axis="p_C", min_d=9, n_bootstrap=200,
                   bootstrap_seed=0):
    """Locate the failure-rate crossing of at least two code distances.

    For every pair of distances the crossing of locally fitted quadratics
    is computed (see _fit_crossing) and the pair crossings are averaged;
    the uncertainty is the spread of that average under binomial
    resampling of every point. Points below `min_d` are dropped first
    (small sizes suffer the worst finite-size bending).
    """
    pts = [p for p in points if p.d >= min_d]
    by_d = {}
    for p in pts:
        by_d.setdefault(p.d, []).append(p)
    d_values = sorted(by_d)
    if len(d_values) < 2:
        raise ValueError(
            f"need at least two code distances >= min_d={min_d}")
    ps = None
    for d in d_values:
        by_d[d].sort(key=lambda e: getattr(e, axis))
        d_ps = [getattr(e, axis) for e in by_d[d]]
        if len(d_ps) < 3:
            raise ValueError("need at least three grid points per distance")
        if ps is None:
            ps = d_ps
        elif d_ps != ps:
            raise ValueError("all distances must share the same grid")
    ps = np.asarray(ps, dtype=float)

    def crossings(rates_by_d):
        out = {}
        for i, d1 in enumerate(d_values):
            for d2 in d_values[i + 1:]:
                c = _fit_crossing(ps, rates_by_d, (d1, d2))
                if c is not None:
                    out[(d1, d2)] = c
        return out

    rates = {d: np.array([e.failure_rate for e in by_d[d]])
             for d in d_values}
    base = crossings(rates)
    if not base:
        return ThresholdEstimate(
            axis=axis, fixed_value=_fixed_value(pts, axis), found=False,
            p_th=None, uncertainty=None, d_values=d_values,
            pair_crossings={}, reason="no crossing found inside the grid")
    p_th = float(np.mean(list(base.values())))

    rng = np.random.default_rng(bootstrap_seed)
    boot = []
    for _ in range(n_bootstrap):
        resampled = {}
        for d in d_values:
            es = by_d[d]
            resampled[d] = np.array([
                rng.binomial(e.trials, e.failure_rate) / e.trials
                for e in es])
        cs = crossings(resampled)
        if cs:
            boot.append(np.mean(list(cs.values())))
    unc = float(np.std(boot)) if len(boot) >= 2 else None
    return ThresholdEstimate(
        axis=axis, fixed_value=_fixed_value(pts, axis), found=True,
        p_th=p_th, uncertainty=unc, d_values=d_values, pair_crossings=base,
        n_bootstrap=len(boot))


def _fixed_value(points, axis):
    other = "p_L" if axis == "p_C" else "p_C"
    vals = {getattr(p, other) for p in points}
    return vals.pop() if len(vals) == 1 else float("nan")


# ---------------------------------------------------------------------------
# loss/error tradeoff
# ---------------------------------------------------------------------------


@dataclass
class TradeoffCurve:
    """Quadratic fit of the computational threshold against the loss rate."""

    coefficients: tuple       # (a, b, c) of a*p_L^2 + b*p_L + c
    residuals: np.ndarray
    p_L_values: np.ndarray
    p_C_thresholds: np.ndarray
    uncertainties: Optional[np.ndarray] = None

    def threshold_at(self, p_L):
        lo, hi = self.p_L_values.min(), self.p_L_values.max()
        if not lo <= p_L <= hi:
            raise ValueError(
                f"p_L={p_L} outside the sampled range [{lo}, {hi}]")
        a, b, c = self.coefficients
        return a * p_L ** 2 + b * p_L + c

    def fault_tolerant(self, p_L, p_C):
        """True when the pair lies strictly below the fitted curve."""
        return p_C < self.threshold_at(p_L)


def tradeoff(points):
    """Fit the tradeoff curve through (p_L, p_C threshold) samples.

    Needs at least three points; the two single-axis thresholds are the
    natural endpoints.
    """
    if len(points) < 3:
        raise ValueError("tradeoff fit needs at least three points")
    pls = np.array([p[0] for p in points], dtype=float)
    ths = np.array([p[1] for p in points], dtype=float)
    uncs = None
    if all(len(p) > 2 and p[2] is not None for p in points):
        uncs = np.array([p[2] for p in points], dtype=float)
    order = np.argsort(pls)
    pls, ths = pls[order], ths[order]
    if uncs is not None:
        uncs = uncs[order]
    coeffs = np.polyfit(pls, ths, 2)
    resid = ths - np.polyval(coeffs, pls)
    return TradeoffCurve(
        coefficients=tuple(float(c) for c in coeffs),
        residuals=resid, p_L_values=pls, p_C_thresholds=ths,
        uncertainties=uncs)
