"""Scaling models and fits that turn raw statistics into headline numbers.

Schemes are identified by the pre-decoder radius: ``None`` is MWPM only,
an integer ``r`` is the radius-``r`` pre-decoder followed by MWPM. Failure
probabilities follow ``f(d) = A(d) * p**lw(d)`` with ``lw`` the weight of the
least-weight failing error and ``A`` its multiplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .predecoder import PredecoderParams, isolation_volume

ROUGH = "rough"
REFINED = "refined"
DEFAULT_D_MAX = 400


# -- least weight and multiplicity ------------------------------------------

def _check_d(d: int) -> None:
    if d < 4 or d % 2:
        raise ValueError(f"code distance must be even and >= 4, got {d}")


def lw(d: int, scheme=None) -> int:
    """Least failing weight: ``d/2`` for MWPM only, thinned strings otherwise.

    With pre-decoding, a half-cycle string survives with every
    ``(r~+2)``-th fault removed, which gives
    ``ceil((r~+1)/(r~+2) * (d/2 + 1))`` capped at ``d/2``.
    """
    _check_d(d)
    params = PredecoderParams.parse(scheme)
    half = d // 2
    if not params.enabled:
        return half
    rt = params.r_tilde
    # exact integer ceil of (rt+1)(half+1)/(rt+2)
    return min(half, -(-(rt + 1) * (half + 1) // (rt + 2)))


@dataclass(frozen=True)
class AnsatzParams:
    """Failure model ``A(d) p^lw(d)`` for one scheme.

    ``rough``: ``A = 4**d`` (MWPM only) or ``2**d`` (pre-decoding).
    ``refined`` (pre-decoding only): ``A = 2**(P*a - 2 + alpha*b)`` with
    ``d = P*a + b - 2``, ``0 <= b < P`` and period ``P = 2*(r~+2)``, the
    stride in ``d`` at which ``lw`` grows.
    """

    scheme: int | None = 0
    model: str = ROUGH
    alpha: float = 4.0

    def __post_init__(self):
        if self.model not in (ROUGH, REFINED):
            raise ValueError(f"unknown multiplicity model {self.model!r}")
        PredecoderParams.parse(self.scheme)

    @property
    def params(self) -> PredecoderParams:
        return PredecoderParams.parse(self.scheme)

    def lw(self, d: int) -> int:
        return lw(d, self.scheme)

    def period(self) -> int:
        return 2 * (self.params.r_tilde + 2)

    def split(self, d: int) -> tuple[int, int]:
        """``(a, b)`` with ``d = period*a + b - 2``."""
        P = self.period()
        return divmod(d + 2, P)

    def log2_multiplicity(self, d: int) -> float:
        _check_d(d)
        if not self.params.enabled:
            return 2.0 * d
        if self.model == ROUGH:
            return float(d)
        a, b = self.split(d)
        return self.period() * a - 2 + self.alpha * b

    def log_failure(self, d: int, p: float) -> float:
        return self.log2_multiplicity(d) * math.log(2.0) + self.lw(d) * math.log(p)

    def failure(self, d: int, p: float) -> float:
        return math.exp(self.log_failure(d, p))


def ansatz_failure(d: int, p: float, scheme=0, model: str = ROUGH, alpha: float = 4.0) -> float:
    return AnsatzParams(scheme, model, alpha).failure(d, p)


def required_distance(p: float, f_target: float, scheme=0, model: str = ROUGH,
                      alpha: float = 4.0, d_max: int = DEFAULT_D_MAX) -> int:
    """Smallest even ``d`` whose model failure probability is at most ``f_target``."""
    if not 0.0 < f_target < 1.0:
        raise ValueError("target failure probability must lie in (0, 1)")
    model_ = AnsatzParams(scheme, model, alpha)
    log_target = math.log(f_target)
    for d in range(4, d_max + 1, 2):
        if model_.log_failure(d, p) <= log_target:
            return d
    raise ValueError(f"no distance up to {d_max} reaches f={f_target} at p={p}")


def qubit_ratio(p: float, f_target: float, r=0, model: str = ROUGH, alpha: float = 4.0) -> float:
    """``(d_pre / d_mwpm)**2``: relative qubit cost of pre-decoding."""
    d_pre = required_distance(p, f_target, r, model, alpha)
    d_mw = required_distance(p, f_target, None)
    return (d_pre / d_mw) ** 2


def effective_mwpm_distance(d: int, p: float, r=0, model: str = ROUGH, alpha: float = 4.0) -> float:
    """Real ``d'`` at which MWPM alone matches the pre-decoded failure rate at ``d``."""
    if not 0.0 < p < 1.0 / 16.0:
        raise ValueError("effective distance needs 0 < p < 1/16")
    log_f = AnsatzParams(r, model, alpha).log_failure(d, p)
    # MWPM only: log f = d' * (log 4 + log(p) / 2)
    return log_f / (math.log(4.0) + 0.5 * math.log(p))


def fit_alpha(points, r=0) -> float:
    """Least-squares ``alpha`` of the refined model from ``(d, p, f)`` points."""
    model = AnsatzParams(r, REFINED)
    num = den = 0.0
    for d, p, f in points:
        a, b = model.split(d)
        if b == 0 or f <= 0:
            continue
        y = math.log2(f) - model.lw(d) * math.log2(p) - (model.period() * a - 2)
        num += y * b
        den += b * b
    if den == 0:
        raise ValueError("alpha is not identifiable: every point has b = 0")
    return num / den


# -- densities, speedups, percentiles ---------------------------------------

@dataclass(frozen=True)
class DensityModel:
    p: float
    r: int | None
    rho: float
    valid: bool  # False when extrapolated beyond p < 1/V_r

    @property
    def reduction_vs_uncompressed(self) -> float:
        """Raw readout in 16-bit address units (1/16) over the model density."""
        return (1.0 / 16.0) / self.rho


def density_model(p: float, scheme=None) -> DensityModel:
    """Mean defects per fault location: ``2p``, ``p^2 V_0`` or ``2 p^2 V_r``."""
    params = PredecoderParams.parse(scheme)
    if not params.enabled:
        return DensityModel(p, None, 2.0 * p, True)
    vr = isolation_volume(params.r)
    rho = p * p * vr if params.r == 0 else 2.0 * p * p * vr
    return DensityModel(p, params.r, rho, p < 1.0 / vr)


def runtime_ratio_model(p: float, scheme=0) -> float:
    """Model ``RT_pre / RT_mwpm``: squared density ratio (runtime ~ |W|^2)."""
    params = PredecoderParams.parse(scheme)
    if not params.enabled:
        return 1.0
    return (density_model(p, params).rho / density_model(p, None).rho) ** 2


def speedup_model(p: float, scheme=0) -> float:
    return 1.0 / runtime_ratio_model(p, scheme)


def poisson_log_sf(lam: float, k: int) -> float:
    """``log P(X > k)`` for ``X ~ Poisson(lam)`` by direct tail summation."""
    if k < 0:
        return 0.0
    hi = int(k + 1 + 40 * math.sqrt(lam + 1) + 200)
    j = np.arange(k + 1, hi + 1, dtype=float)
    logpmf = j * math.log(lam) - lam - special.gammaln(j + 1)
    return float(special.logsumexp(logpmf))


def poisson_mmax(rho: float, volume: float, f: float, rounds: int | None = None) -> int:
    """Smallest even ``M`` with ``P(M/2 > M_max/2) <= f`` for ``M/2 ~ Poisson(rho V / 2)``.

    ``rounds`` gives the per-round variant (volume divided by the round count).
    """
    if rho <= 0 or volume <= 0:
        raise ValueError("need rho * V > 0")
    if not 0.0 < f < 1.0:
        raise ValueError("tail probability must lie in (0, 1)")
    vol = volume / rounds if rounds else volume
    lam = rho * vol / 2.0
    log_f = math.log(f)
    # bracket, then bisect on k (the log tail is decreasing in k)
    lo = -1
    hi = max(1, int(lam))
    while poisson_log_sf(lam, hi) > log_f:
        hi = 2 * hi + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if poisson_log_sf(lam, mid) <= log_f:
            hi = mid
        else:
            lo = mid
    return 2 * hi


@dataclass
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    lam: float
    bins: list[tuple[int, int]] = field(repr=False)
    observed: np.ndarray = field(repr=False)
    expected: np.ndarray = field(repr=False)

    def passes(self, alpha: float = 1e-3) -> bool:
        return self.p_value > alpha


def poisson_expected(counts, lam: float | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """Histogram of ``M`` with Poisson(``lam``) expectations for ``M/2``."""
    counts = np.asarray(counts, dtype=np.int64)
    half = counts // 2
    lam = float(half.mean()) if lam is None else lam
    values = np.arange(half.max() + 1)
    exp = len(half) * stats.poisson.pmf(values, lam)
    return 2 * values, exp, lam


def poisson_chi_square(counts, min_expected: float = 5.0) -> ChiSquareResult:
    """Goodness of fit of ``M/2`` to a Poisson with the sample mean (one fitted dof)."""
    counts = np.asarray(counts, dtype=np.int64)
    if np.any(counts % 2):
        raise ValueError("defect counts must be even")
    half = counts // 2
    n = len(half)
    lam = float(half.mean())
    top = int(half.max())
    pmf = stats.poisson.pmf(np.arange(top + 1), lam)
    pmf[-1] += stats.poisson.sf(top, lam)  # last value absorbs the upper tail
    obs_k = np.bincount(half, minlength=top + 1).astype(float)
    exp_k = n * pmf
    edges, obs, exp = [], [], []
    start, acc_o, acc_e = 0, 0.0, 0.0
    for k in range(top + 1):
        acc_o += obs_k[k]
        acc_e += exp_k[k]
        if acc_e >= min_expected:
            edges.append((start, k))
            obs.append(acc_o)
            exp.append(acc_e)
            start, acc_o, acc_e = k + 1, 0.0, 0.0
    if start <= top:
        if edges:
            edges[-1] = (edges[-1][0], top)
            obs[-1] += acc_o
            exp[-1] += acc_e
        else:
            edges.append((start, top))
            obs.append(acc_o)
            exp.append(acc_e)
    obs = np.asarray(obs)
    exp = np.asarray(exp)
    dof = len(edges) - 2
    if dof < 1:
        raise ValueError("too few populated bins for a chi-square test")
    stat = float(((obs - exp) ** 2 / exp).sum())
    return ChiSquareResult(stat, dof, float(stats.chi2.sf(stat, dof)), lam, edges, obs, exp)


# -- runtime ------------------------------------------------------------------

@dataclass
class RuntimeFit:
    p: float
    A: float  # ns per volume^2
    exponent: float  # slope of log RT against log V
    exponent_w: float  # slope of log RT against log |W|
    volumes: np.ndarray
    mean_w: np.ndarray
    mean_rt: np.ndarray
    flagged: bool  # fewer than 3 volumes or under-populated instances


def runtime_fit(records, min_defects: int = 50) -> dict[float, RuntimeFit]:
    """Fit ``RT = A(p) V^2`` per rate from ``(p, V, W, rt_ns)`` records."""
    rows = np.asarray([(r[0], r[1], r[2], r[3]) for r in records], dtype=float)
    out = {}
    for p in sorted(set(rows[:, 0])):
        sub = rows[rows[:, 0] == p]
        vols = np.unique(sub[:, 1])
        mw = np.array([sub[sub[:, 1] == v, 2].mean() for v in vols])
        mrt = np.array([sub[sub[:, 1] == v, 3].mean() for v in vols])
        A = float((mrt * vols**2).sum() / (vols**4).sum())
        ok = mrt > 0
        if ok.sum() >= 2:
            expo = float(np.polyfit(np.log(vols[ok]), np.log(mrt[ok]), 1)[0])
        else:
            expo = float("nan")
        okw = ok & (mw > 0)
        if okw.sum() >= 2:
            expo_w = float(np.polyfit(np.log(mw[okw]), np.log(mrt[okw]), 1)[0])
        else:
            expo_w = float("nan")
        flagged = len(vols) < 3 or bool(np.any(mw < min_defects))
        out[float(p)] = RuntimeFit(float(p), A, expo, expo_w, vols, mw, mrt, flagged)
    return out


# -- threshold and sub-threshold scaling -------------------------------------

@dataclass
class ScalingFit:
    slopes: dict[float, float]  # p -> m, from log f = m d + c
    intercepts: dict[float, float]
    k: float
    c0: float  # m = k log p + c0
    p_th: float
    C: float
    residuals: np.ndarray = field(repr=False)


def fit_scaling(points, p_window: tuple[float, float] | None = None) -> ScalingFit:
    """Fit ``f = C (p/p_th)^(k d)`` from ``(d, p, f)`` points.

    For each rate, ``m`` is the least-squares slope of ``log f`` against ``d``;
    ``k`` and ``p_th`` come from a line of ``m`` against ``log p`` over rates
    in ``p_window`` (inclusive; all rates by default).
    """
    by_p: dict[float, list[tuple[int, float]]] = {}
    for d, p, f in points:
        if f > 0:
            by_p.setdefault(float(p), []).append((int(d), float(f)))
    slopes, inters = {}, {}
    for p, rows in by_p.items():
        if len({d for d, _ in rows}) < 2:
            continue
        ds = np.array([d for d, _ in rows], dtype=float)
        lf = np.log([f for _, f in rows])
        m, c = np.polyfit(ds, lf, 1)
        slopes[p], inters[p] = float(m), float(c)
    ps = sorted(p for p in slopes if p_window is None or p_window[0] <= p <= p_window[1])
    if len(ps) < 2:
        raise ValueError("need at least two rates with two or more distances each")
    x = np.log(ps)
    y = np.array([slopes[p] for p in ps])
    k, c0 = np.polyfit(x, y, 1)
    resid = y - (k * x + c0)
    C = math.exp(float(np.mean([inters[p] for p in ps])))
    p_th = math.exp(-c0 / k) if k != 0 else float("nan")
    return ScalingFit(slopes, inters, float(k), float(c0), p_th, C, resid)


def curve_crossings(curves) -> list[float]:
    """Rates where ``f`` curves of adjacent distances intersect.

    ``curves`` maps ``d`` to a sequence of ``(p, f)``; intersections are
    located by linear interpolation of ``log f`` in ``log p`` on the common
    rate grid.
    """
    ds = sorted(curves)
    out = []
    for d1, d2 in zip(ds, ds[1:]):
        a = {float(p): f for p, f in curves[d1] if f > 0}
        b = {float(p): f for p, f in curves[d2] if f > 0}
        grid = sorted(set(a) & set(b))
        diff = [math.log(b[p]) - math.log(a[p]) for p in grid]
        for i in range(len(grid) - 1):
            if diff[i] == 0:
                out.append(grid[i])
            elif diff[i] * diff[i + 1] < 0:
                x0, x1 = math.log(grid[i]), math.log(grid[i + 1])
                t = diff[i] / (diff[i] - diff[i + 1])
                out.append(math.exp(x0 + t * (x1 - x0)))
        if grid and diff[-1] == 0:
            out.append(grid[-1])
    return out


def threshold_estimate(curves) -> float | None:
    """Median of adjacent-distance crossings, or None if curves never cross."""
    xs = curve_crossings(curves)
    return float(np.median(xs)) if xs else None
