"""Numerical verification layer: exponent estimates, coarse spectra,
restricted maximal function, the nested-ball singularity locator and the
no-gap check for homogeneous spectra.

Oscillations are measured through symmetric increments |F(x+r) - F(x-r)|,
which identifies the pointwise exponent for monotone functions as long as
the exponent is at most 1; larger estimates are flagged unresolved.  All
mass evaluations stay exact rationals; logarithms are taken only at the
very end, with a helper that survives masses far below float range.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .exact import cmp_frac_pow2, cmp_frac_vs_pow, flog2
from .funcs import MonotoneFunction


class AnalysisError(ValueError):
    pass


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("MF_THREADS", "1")))
    except ValueError:
        return 1


def _chunked_map(fn: Callable, items: Sequence) -> list:
    workers = _worker_count()
    if workers == 1 or len(items) < 1024:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (8 * workers))))


# ---------------------------------------------------------------------------
# pointwise exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    window_slopes: tuple[float, ...]
    oscillations_log2: tuple[float, ...]
    unresolved_above_one: bool

    def __float__(self):
        return self.value


def _window_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    den = sum((x - mx) ** 2 for x in xs)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return num / den


def local_exponent(F: MonotoneFunction, x: Fraction, j_min: int, j_max: int,
                   window: int = 4) -> ExponentEstimate:
    """liminf surrogate: minimum over sliding windows of the local
    least-squares slope of log2(oscillation) against log2(2r), r = 2**-j."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise AnalysisError("x must lie in [0, 1]")
    if not j_min < j_max:
        raise AnalysisError("need j_min < j_max")
    js = list(range(j_min, j_max + 1))
    oscs = [F.oscillation(x, Fraction(1, 1 << j)) for j in js]
    # monotone input: once the oscillation hits zero it stays zero deeper
    nz = [i for i, w in enumerate(oscs) if w > 0]
    if len(nz) < window:
        return ExponentEstimate(math.inf, (), (), False)
    keep = nz[-1] + 1
    js, oscs = js[:keep], oscs[:keep]
    if len(js) < window:
        return ExponentEstimate(math.inf, (), (), False)
    logr = [1.0 - j for j in js]           # log2(2r)
    logw = [flog2(w) for w in oscs]
    slopes = []
    for i in range(len(js) - window + 1):
        slopes.append(_window_slope(logr[i:i + window], logw[i:i + window]))
    value = min(slopes)
    return ExponentEstimate(value, tuple(slopes), tuple(logw), value > 1.0)


# ---------------------------------------------------------------------------
# coarse-grained spectrum
# ---------------------------------------------------------------------------

@dataclass
class SpectrumEstimate:
    generation: int
    h_max: float
    bin_edges: np.ndarray
    counts: np.ndarray
    flat_cells: int
    overflow_cells: int
    lo: Fraction
    hi: Fraction

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def bin_centers(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2

    @property
    def estimates(self) -> np.ndarray:
        out = np.full(len(self.counts), -np.inf)
        occ = self.counts > 0
        out[occ] = np.log2(self.counts[occ]) / self.generation
        return out

    def occupied(self) -> np.ndarray:
        return np.nonzero(self.counts > 0)[0]


def coarse_spectrum(F: MonotoneFunction, j: int, bins: int,
                    h_max: float = 2.0,
                    lo: Fraction = Fraction(0), hi: Fraction = Fraction(1)) -> SpectrumEstimate:
    """Box-oscillation estimator: bin generation-j cells by
    h = log2(oscillation)/(-j) and estimate log2(count)/j per bin."""
    if j < 4:
        raise AnalysisError("generation must be at least 4")
    if bins < 1:
        raise AnalysisError("need at least one bin")
    lo, hi = Fraction(lo), Fraction(hi)
    k_lo = (lo * (1 << j)).__ceil__()
    k_hi = (hi * (1 << j)).__floor__()
    if k_hi <= k_lo:
        raise AnalysisError("window contains no generation-j cell")
    values = _chunked_map(
        lambda k: F.increment(Fraction(k, 1 << j), Fraction(k + 1, 1 << j)),
        range(k_lo, k_hi))
    edges = np.linspace(0.0, h_max, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    flat = overflow = 0
    slack = 2.0 / j + 1e-12
    for w in values:
        if w == 0:
            flat += 1
            continue
        h = -flog2(w) / j
        if h > h_max:
            overflow += 1
            continue
        if h < -slack:
            raise AnalysisError(f"cell oscillation exceeds unit mass beyond slack (h={h})")
        h = max(h, 0.0)
        idx = min(int(h / (h_max / bins)), bins - 1)
        counts[idx] += 1
    return SpectrumEstimate(j, h_max, edges, counts, flat, overflow, lo, hi)


def spectrum_sup_distance(a: SpectrumEstimate, b: SpectrumEstimate) -> float:
    """Sup distance over occupied bins; a bin occupied on one side only
    contributes its full estimate."""
    if a.generation != b.generation or len(a.counts) != len(b.counts):
        raise AnalysisError("estimates are not comparable")
    ea, eb = a.estimates, b.estimates
    best = 0.0
    for i in range(len(a.counts)):
        oa, ob = a.counts[i] > 0, b.counts[i] > 0
        if oa and ob:
            best = max(best, abs(float(ea[i] - eb[i])))
        elif oa:
            best = max(best, float(ea[i]))
        elif ob:
            best = max(best, float(eb[i]))
    return best


@dataclass(frozen=True)
class GapCheckReport:
    ok: bool
    lowest_bin: int | None
    one_bin: int
    empty_runs: tuple[tuple[int, int], ...]
    slack: int


def darboux_gap_check(est: SpectrumEstimate, slack_bins: int = 1) -> GapCheckReport:
    """No-gap property of a homogeneous spectrum: between the lowest
    occupied bin and the bin holding h = 1 every empty run must be short."""
    width = est.h_max / len(est.counts)
    one_bin = min(int(1.0 / width), len(est.counts) - 1)
    occ = [i for i in est.occupied() if i <= one_bin]
    if not occ:
        return GapCheckReport(True, None, one_bin, (), slack_bins)
    lowest = occ[0]
    runs = []
    run_start = None
    for i in range(lowest, one_bin + 1):
        if est.counts[i] == 0:
            if run_start is None:
                run_start = i
        else:
            if run_start is not None:
                runs.append((run_start, i - 1))
                run_start = None
    if run_start is not None:
        runs.append((run_start, one_bin))
    ok = all(b - a + 1 <= slack_bins for a, b in runs)
    return GapCheckReport(ok, lowest, one_bin, tuple(runs), slack_bins)


# ---------------------------------------------------------------------------
# restricted maximal function
# ---------------------------------------------------------------------------

class _Pow2Scaled:
    """m * 2**q with rational m >= 0 and rational q; exact order."""

    __slots__ = ("m", "q")

    def __init__(self, m: Fraction, q: Fraction):
        self.m = Fraction(m)
        self.q = Fraction(q)

    def __lt__(self, other):
        if isinstance(other, _Pow2Scaled):
            if self.m == 0:
                return other.m > 0
            if other.m == 0:
                return False
            return cmp_frac_pow2(self.m / other.m, other.q - self.q) < 0
        return NotImplemented

    def gt_fraction(self, t: Fraction) -> bool:
        if self.m == 0:
            return False
        return cmp_frac_pow2(Fraction(t) / self.m, self.q) < 0

    def as_float(self) -> float:
        if self.m == 0:
            return 0.0
        return 2.0 ** (flog2(self.m) + float(self.q))


@dataclass
class MaximalProfile:
    beta: Fraction
    grid_generation: int
    interval: tuple[Fraction, Fraction]
    xs: list[Fraction]
    mstar: list[_Pow2Scaled]
    thresholds: list[Fraction]
    lambdas: list[Fraction]
    margins: list[float]
    bound_ok: list[bool]

    def mstar_floats(self) -> list[float]:
        return [v.as_float() for v in self.mstar]


def maximal_function(F: MonotoneFunction, interval: tuple[Fraction, Fraction],
                     beta: Fraction, grid_generation: int,
                     thresholds: Sequence[Fraction],
                     extra_depth: int = 6,
                     weak_type_constant: int = 5) -> MaximalProfile:
    """Restricted maximal function sup mu(B(x,r))/(2r)**beta over dyadic
    radii with B(x,r) inside the open interval, plus the weak-type table."""
    beta = Fraction(beta)
    if not 0 < beta <= 1:
        raise AnalysisError("beta must lie in (0, 1]")
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    if not 0 <= lo < hi <= 1:
        raise AnalysisError("interval must be a nondegenerate subinterval of [0, 1]")
    g = grid_generation
    t_max = g + extra_depth
    xs: list[Fraction] = []
    mstar: list[_Pow2Scaled] = []
    k_lo = (lo * (1 << g)).__floor__() + 1
    k_hi = (hi * (1 << g)).__ceil__() - 1
    for k in range(k_lo, k_hi + 1):
        x = Fraction(k, 1 << g)
        if not lo < x < hi:
            continue
        room = min(x - lo, hi - x)
        best = _Pow2Scaled(Fraction(0), Fraction(0))
        for t in range(1, t_max + 1):
            r = Fraction(1, 1 << t)
            if r > room:
                continue
            mu = F.increment(x - r, x + r)
            cand = _Pow2Scaled(mu, (t - 1) * beta)  # mu / (2r)^beta, 2r = 2^(1-t)
            if best < cand:
                best = cand
        xs.append(x)
        mstar.append(best)
    if not xs:
        raise AnalysisError("grid too coarse for the interval")
    mass = F.increment(lo, hi)
    width = hi - lo
    lambdas, margins, ok = [], [], []
    for thr in thresholds:
        thr = Fraction(thr)
        count = sum(1 for v in mstar if v.gt_fraction(thr))
        lam = Fraction(count, len(xs)) * width
        lambdas.append(lam)
        # weak-type: lam * t <= Q * mass * width^(1-beta), Q = 5
        lhs = lam * thr
        rhs_scalar = weak_type_constant * mass
        if mass == 0:
            good = lhs == 0
            margin = 0.0 if good else math.inf
        elif beta == 1:
            good = lhs <= rhs_scalar
            margin = float(lhs / rhs_scalar) * weak_type_constant
        else:
            good = cmp_frac_vs_pow(lhs / rhs_scalar, width, 1 - beta) <= 0
            margin = (
                0.0 if lhs == 0 else
                2.0 ** (flog2(lhs / (mass)) - float(1 - beta) * flog2(width)))
        ok.append(bool(good))
        margins.append(margin)
    return MaximalProfile(beta, g, (lo, hi), xs, mstar,
                          [Fraction(t) for t in thresholds], lambdas, margins, ok)


# ---------------------------------------------------------------------------
# nested-ball singularity locator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocateRound:
    x: Fraction
    r: Fraction
    x_tilde: Fraction
    r_tilde: Fraction
    root_low_ok: bool     # mu(B(x~, r~)) >= r~^beta, exact
    root_high_ok: bool    # mu(B(x~, r~+)) < (r~+)^beta at the bisection upper end
    mass_cap_ok: bool     # 50*(2r)^beta cap at the probed radii around the next center


@dataclass(frozen=True)
class LocateResult:
    x_hat: Fraction
    rounds: tuple[LocateRound, ...]
    radii: tuple[Fraction, ...]   # r0 > r~0 > r1 > r~1 > ...

    def radii_strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.radii, self.radii[1:]))

    def scale_window(self) -> tuple[int, int]:
        """Dyadic exponent range spanned by the trace radii."""
        return (math.ceil(-flog2(self.radii[0])),
                math.floor(-flog2(self.radii[-1])))


def _candidates(F: MonotoneFunction, lo: Fraction, hi: Fraction,
                base_points: int = 256, cap: int = 2048) -> list[Fraction]:
    width = hi - lo
    t = max(1, math.ceil(-flog2(width / base_points)))
    step = Fraction(1, 1 << t)
    first = (lo / step).__floor__() + 1
    out = []
    k = first
    while k * step < hi and len(out) < cap:
        x = k * step
        if lo < x < hi:
            out.append(x)
        k += 1
    bp = getattr(F, "breakpoints_in", None)
    if bp is not None:
        out.extend(x for x in bp(lo, hi, cap) if lo < x < hi)
    return sorted(set(out))


def _min_probe_exponent(F: MonotoneFunction, x: Fraction, r_top: Fraction,
                        probe_octaves: int, stop_below: float | None = None) -> float:
    """Smallest mass ratio log mu(B)/log 2r over dyadic probe radii below r_top."""
    best = math.inf
    r = r_top
    for _ in range(probe_octaves):
        mu = F.increment(x - r, x + r)
        if mu > 0:
            best = min(best, flog2(mu) / flog2(2 * r))
            if stop_below is not None and best < stop_below:
                return best
        r /= 2
    return best


def locate_exponent_point(F: MonotoneFunction, beta: Fraction, depth: int,
                          grid_generation: int = 12,
                          probe_octaves: int = 64,
                          bisect_steps: int = 48,
                          backtrack: int = 24) -> LocateResult:
    """Finite-depth run of the nested-ball singularity hunt.

    Round i: pick a witness x~ inside B(x_i, r_i/6) whose measured mass
    ratio drops below beta at some probed dyadic radius, solve
    mu(B(x~, r)) = r**beta for the largest root below r_i by exact monotone
    bisection, then re-center on a small-local-mass point x_{i+1} with
    closure(B(x_{i+1}, r_{i+1})) inside B(x~, r~/3).  The initial ball
    satisfies the mass bound mu(B(x_0, r_0)) <= r_0**beta' with
    beta' = (1+beta)/2; re-centered balls keep only the containment chain
    (a finite-depth construction cannot satisfy the full mass bound at
    every round because sub-beta witnesses live on the singular cover),
    with the weak-type style cap recorded per round instead.
    """
    beta = Fraction(beta)
    if not 0 < beta < 1:
        raise AnalysisError("beta must lie in (0, 1)")
    beta_p = (1 + beta) / 2
    # r0: largest dyadic with r0^(beta'-beta) < 1/10
    t0 = math.floor(math.log2(10) / float(beta_p - beta)) + 1
    r0 = Fraction(1, 1 << t0)
    # initial center: small mass at scale r0 among grid points whose witness
    # ball can reach the singular cover (sub-beta points are not dense at
    # finite truncation, so the pool is steered toward breakpoints)
    pool: set[Fraction] = set()
    snap = Fraction(1, 1 << (t0 + 4))
    anchors = list(F.breakpoints_in(Fraction(0), Fraction(1), 2048))
    if not anchors:
        anchors = [Fraction(k, 1 << grid_generation)
                   for k in range(1, 1 << grid_generation)]
    for a in anchors:
        base = (a / snap).__floor__()
        for off in (-1, 0, 1, 2):
            x = (base + off) * snap
            if r0 <= x <= 1 - r0:
                pool.add(x)
    seeds = []
    for x in sorted(pool):
        h = _min_probe_exponent(F, x, r0 / 6, probe_octaves, stop_below=float(beta))
        if h < float(beta):
            seeds.append(x)
    if not seeds:
        raise AnalysisError(
            "no grid point with measured exponent below beta; beta sits below "
            "the measured spectrum support")
    x0 = min(seeds, key=lambda x: (F.increment(x - r0, x + r0), x))
    for _ in range(64):
        if cmp_frac_vs_pow(F.increment(x0 - r0, x0 + r0), r0, beta_p) <= 0:
            break
        r0 /= 2
    else:
        raise AnalysisError("could not satisfy the initial mass bound")

    rounds: list[LocateRound] = []
    radii: list[Fraction] = [r0]
    x_i, r_i = x0, r0
    for i in range(depth):
        cands = _candidates(F, x_i - r_i / 6, x_i + r_i / 6)
        scored = []
        for c in cands:
            h = _min_probe_exponent(F, c, r_i / 2, probe_octaves, stop_below=float(beta))
            if h < float(beta):
                scored.append((h, c))
        if not scored:
            raise AnalysisError(
                f"round {i}: no candidate with measured exponent below {beta} "
                f"inside B({float(x_i):.6g}, {float(r_i):.3g}/6)")
        scored.sort()

        done = False
        last_err = ""
        for h_w, x_t in scored[:backtrack]:
            try:
                r_t, root_low, root_high = _largest_mass_root(F, x_t, r_i, beta, bisect_steps)
                x_next, r_next, cap_ok = _recenter(
                    F, x_t, r_t, beta, beta_p, probe_octaves,
                    need_witness=(i + 1 < depth))
                done = True
                break
            except AnalysisError as e:
                last_err = str(e)
        if not done:
            raise AnalysisError(f"round {i}: all witness candidates failed ({last_err})")
        rounds.append(LocateRound(x_i, r_i, x_t, r_t, root_low, root_high, cap_ok))
        radii.append(r_t)
        radii.append(r_next)
        x_i, r_i = x_next, r_next

    return LocateResult(x_i, tuple(rounds), tuple(radii))


def _largest_mass_root(F: MonotoneFunction, x_t: Fraction, r_i: Fraction,
                       beta: Fraction, bisect_steps: int) -> tuple[Fraction, bool, bool]:
    def above(r: Fraction) -> bool:
        return cmp_frac_vs_pow(F.increment(x_t - r, x_t + r), r, beta) >= 0

    # walk down until the mass drops below the power law, then further until
    # it climbs back above: that brackets the largest root below r_i
    hi_r = r_i / 2
    for _ in range(2000):
        if not above(hi_r):
            break
        hi_r /= 2
    else:
        raise AnalysisError("mass never drops below r^beta at this witness")
    lo_r = hi_r / 2
    for _ in range(2000):
        if above(lo_r):
            break
        lo_r /= 2
        if lo_r == 0:
            break
    if lo_r == 0 or not above(lo_r):
        raise AnalysisError("no root of mu(B(x,r)) = r^beta below the current radius")
    for _ in range(bisect_steps):
        mid = (lo_r + hi_r) / 2
        if above(mid):
            lo_r = mid
        else:
            hi_r = mid
    return lo_r, above(lo_r), not above(hi_r)


def _recenter(F: MonotoneFunction, x_t: Fraction, r_t: Fraction,
              beta: Fraction, beta_p: Fraction, probe_octaves: int,
              need_witness: bool) -> tuple[Fraction, Fraction, bool]:
    cands2 = _candidates(F, x_t - r_t / 3, x_t + r_t / 3)
    if not cands2:
        raise AnalysisError("no candidates inside the root ball")
    probe2 = r_t / 64

    def local_mass(c: Fraction) -> Fraction:
        return F.increment(c - probe2, c + probe2)

    pool = sorted(cands2, key=lambda c: (local_mass(c), c))
    for x_next in pool:
        # largest dyadic radius keeping the closed ball inside B(x~, r~/3)
        room = min(x_next - (x_t - r_t / 3), (x_t + r_t / 3) - x_next)
        if room <= 0:
            continue
        r_next = Fraction(1, 1 << max(1, math.ceil(-flog2(room))))
        while r_next >= room:
            r_next /= 2
        if need_witness:
            wits = F.breakpoints_in(x_next - r_next / 6, x_next + r_next / 6, 8)
            if not any(
                    _min_probe_exponent(F, w, r_next / 2, probe_octaves,
                                        stop_below=float(beta)) < float(beta)
                    for w in wits):
                continue
        cap_ok = True
        for q in range(10):
            rq = (r_t / 3) / (1 << q)
            mu = F.increment(x_next - rq, x_next + rq)
            if cmp_frac_vs_pow(mu / 50, 2 * rq, beta) > 0:
                cap_ok = False
                break
        return x_next, r_next, cap_ok
    raise AnalysisError("no viable re-centering candidate")
