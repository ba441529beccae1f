"""Empirical checks of decay, growth and lower bounds of the interpolation basis.

All fits are deterministic (grid searches and least squares, no random
starts) so rerunning a configuration reproduces the constants exactly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .interpolate import Gaussian, ZeroFunction, derivative, sample
from .nodes import NodePlan
from .perturb_op import (
    WeightScheme,
    build_truncation,
    hs_defect,
    invert_direct,
    invert_neumann,
    synthesis_matrix,
    unweighted_inverse,
)
from .rv_basis import DOUBLE_NMAX, basis_values, eval_bn_tail, get_evaluator, _evaluator_for


def _precision_for(nmax: int) -> str:
    return "double" if nmax <= DOUBLE_NMAX else "extended"


@dataclass
class EnvelopeFit:
    """Constants of a fitted envelope and how well it holds.

    ``violation`` is ``max (observed - envelope) / envelope`` over the full
    sample set for upper envelopes, and ``max (envelope - observed) / envelope``
    for lower ones.  Negative means the bound holds with room to spare.
    """

    claim: str
    constants: dict
    violation: float
    n_range: tuple
    x_range: tuple
    method: str
    degenerate: bool = False
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        d["x_range"] = list(self.x_range)
        return d


# ---------------------------------------------------------------------------
# decay envelope
# ---------------------------------------------------------------------------


def _local_peaks(v: np.ndarray) -> np.ndarray:
    """Indices where ``v`` is at least as large as both neighbours (ends included)."""
    if v.size < 3:
        return np.arange(v.size)
    left = np.concatenate([[True], v[1:] >= v[:-1]])
    right = np.concatenate([v[:-1] >= v[1:], [True]])
    return np.nonzero(left & right)[0]


def _decay_shape(x, n, c, C):
    """Log of ``exp(-c x^2/n) 1{x <= C n} + exp(-c x) 1{x > C n}``."""
    return np.where(x <= C * n, -c * x * x / n, -c * x)


def _prefactor(n):
    n = np.asarray(n, dtype=float)
    return 0.75 * np.log(n) + 3 * np.log(np.log1p(n))


C_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0)
c_GRID = np.geomspace(1e-3, 10.0, 241)


def decay_fit(n_range=range(1, 13), x_grid=None, target: str = "value", min_peaks: int = 8) -> EnvelopeFit:
    """Fit ``A n^{3/4} log^3(1+n) (e^{-c x^2/n} 1{x<=Cn} + e^{-c x} 1{x>Cn})``.

    ``target`` is ``"value"`` (``|a_n|``) or ``"derivative"`` (``|a_n'|``, by
    finite differences).  The constants are fitted on the local peaks of the
    even-indexed grid points: for each ``(c, C)`` the amplitude ``A`` is the
    smallest one covering those peaks, and ``(c, C)`` minimise the mean squared
    log gap.  The violation is then measured on every grid point.
    """
    ns = np.asarray(list(n_range), dtype=int)
    if x_grid is None:
        x_grid = np.arange(0.0, 20.0 + 1e-9, 0.01)
    x = np.asarray(x_grid, dtype=float)
    claim = "decay-envelope/" + target
    xr = (float(x.min()), float(x.max())) if x.size else (math.nan, math.nan)
    nr = (int(ns.min()), int(ns.max())) if ns.size else (0, -1)
    if ns.size == 0 or np.any(ns < 1):
        raise ValueError("n_range must be a nonempty set of positive integers")
    nmax = int(ns.max())
    if x.size >= 7:
        a, _ = basis_values(nmax, x, _precision_for(nmax))
    else:
        a = np.zeros((nmax + 1, x.size))
    rows = []
    for n in ns:
        if target == "value":
            v, g = np.abs(a[n]), x
        elif target == "derivative":
            if x.size < 7:
                v, g = np.zeros(0), np.zeros(0)
            else:
                d, g = derivative(a[n], x, 1)
                v = np.abs(d)
        else:
            raise ValueError(f"unknown target {target!r}")
        rows.append((n, g, v))

    train = []
    full = []
    for n, g, v in rows:
        even = np.arange(0, v.size, 2)
        pk = even[_local_peaks(v[even])] if even.size else even
        pk = pk[v[pk] > 0]
        train.append((n, g[pk], np.log(v[pk])))
        full.append((n, g, v))
    n_peaks = sum(t[1].size for t in train)
    if n_peaks < min_peaks:
        return EnvelopeFit(claim, {"A": math.nan, "c": math.nan, "C": math.nan}, math.nan, nr, xr,
                           "grid search, log least squares", degenerate=True,
                           notes=[f"only {n_peaks} peaks available; fit not attempted"])

    tn = np.concatenate([np.full(t[1].size, t[0]) for t in train])
    tx = np.concatenate([t[1] for t in train])
    ty = np.concatenate([t[2] for t in train]) - _prefactor(tn)
    best = None
    for C in C_GRID:
        for c in c_GRID:
            r = ty - _decay_shape(tx, tn, c, C)
            logA = r.max()
            score = float(np.mean((logA - r) ** 2))
            if best is None or score < best[0]:
                best = (score, c, C, logA)
    score, c, C, logA = best

    viol = -math.inf
    for n, g, v in full:
        env = np.exp(logA + _prefactor(n) + _decay_shape(g, n, c, C))
        ok = env > 0
        if ok.any():
            viol = max(viol, float(np.max((v[ok] - env[ok]) / env[ok])))
    notes = []
    if c <= 0:
        notes.append("non-positive decay constant")
    return EnvelopeFit(
        claim,
        {"A": float(math.exp(logA)), "c": float(c), "C": float(C), "mean_sq_log_gap": score},
        viol,
        nr,
        xr,
        "grid search over (c, C), tight amplitude on even-index peaks, log least squares",
        notes=notes,
    )


def exponential_rate(n: int = 0, x_range=(3.0, 20.0), step: float = 0.01) -> EnvelopeFit:
    """Pure exponential fit ``|a_n(x)| <= A e^{-r x}`` on the local peaks in ``x_range``."""
    x = np.arange(x_range[0], x_range[1] + 1e-9, step)
    a, _ = basis_values(max(n, 1), x, _precision_for(n))
    v = np.abs(a[n])
    pk = _local_peaks(v)
    pk = pk[v[pk] > 0]
    if pk.size < 3:
        return EnvelopeFit(f"exp-rate/a_{n}", {"rate": math.nan, "A": math.nan}, math.nan, (n, n),
                           tuple(x_range), "log-linear regression on peaks", degenerate=True)
    slope, icpt = np.polyfit(x[pk], np.log(v[pk]), 1)
    rate = -float(slope)
    logA = float(np.max(np.log(v[pk]) + rate * x[pk]))
    env = np.exp(logA - rate * x)
    viol = float(np.max((v - env) / env))
    return EnvelopeFit(f"exp-rate/a_{n}", {"rate": rate, "A": math.exp(logA)}, viol, (n, n),
                       (float(x[0]), float(x[-1])), "log-linear regression on peaks")


# ---------------------------------------------------------------------------
# growth on disks
# ---------------------------------------------------------------------------


@dataclass
class GrowthReport:
    radii: list
    log_max: list
    order: float
    type_last: float
    type_fit: float
    degenerate: bool = False
    reduced: bool = False
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def basis_function(n: int, sign: int = 1):
    """``z -> b_n^{sign}(z)`` for complex arrays, with a precision check."""

    def f(z):
        z = np.asarray(z, dtype=complex)
        ev = _evaluator_for(max(n, 1))
        bp, bm, rad = ev.values(z * z, return_radius=True)
        v = (bp if sign > 0 else bm)[n]
        scale = float(np.max(np.abs(v))) if v.size else 0.0
        if rad > 1e-10 * max(scale, 1.0):
            raise OverflowError(f"evaluation lost precision (radius {rad:.2g})")
        return v

    return f


def _circle(r: float, n_angles: int, even_real: bool):
    if even_real:
        th = np.linspace(0.0, math.pi / 2, n_angles)
    else:
        th = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    return r * np.exp(1j * th)


def growth_on_disks(fn, radii, n_angles: int = 33, even_real: bool = True) -> GrowthReport:
    """Order and type estimates from ``M(r) = max_{|z|=r} |fn(z)|``.

    ``order`` is the slope of ``log log M`` against ``log r``; ``type_last`` is
    ``log M(r) / r^2`` at the largest radius and ``type_fit`` the leading
    coefficient of a quadratic fit of ``log M`` in ``r``, which removes the
    ``O(r)`` correction that makes ``type_last`` undershoot at small radii.
    ``even_real`` samples only the first quadrant, which suffices for even
    functions with real Taylor coefficients.
    """
    radii = [float(r) for r in radii]
    logM = []
    used = []
    notes = []
    reduced = False
    for r in radii:
        try:
            v = np.asarray(fn(_circle(r, n_angles, even_real)))
            m = float(np.max(np.abs(v)))
            if not math.isfinite(m):
                raise OverflowError("non-finite maximum")
        except OverflowError as exc:
            notes.append(f"stopped at r = {r}: {exc}")
            reduced = True
            break
        used.append(r)
        logM.append(math.log(m) if m > 0 else -math.inf)
    return _growth_summary(used, logM, reduced, notes)


def _growth_summary(radii, logM, reduced=False, notes=None) -> GrowthReport:
    notes = list(notes or [])
    lm = np.asarray(logM, dtype=float)
    rr = np.asarray(radii, dtype=float)
    if rr.size == 0 or not np.all(np.isfinite(lm)):
        notes.append("function vanishes on the sampled circles")
        return GrowthReport(list(radii), list(logM), math.nan, 0.0, 0.0, degenerate=True, reduced=reduced, notes=notes)
    type_last = float(lm[-1] / rr[-1] ** 2)
    order = math.nan
    pos = lm > 0
    if pos.sum() >= 2:
        order = float(np.polyfit(np.log(rr[pos]), np.log(lm[pos]), 1)[0])
    else:
        notes.append("log M(r) <= 0 on too many radii for an order estimate")
    type_fit = float(np.polyfit(rr, lm, 2)[0]) if rr.size >= 3 else math.nan
    return GrowthReport(list(radii), list(logM), order, type_last, type_fit, reduced=reduced, notes=notes)


@dataclass
class IndexGrowth:
    radius: float
    n: list
    log_max: list
    slope: float
    intercept: float
    r_squared: float

    def to_json(self) -> dict:
        return asdict(self)


def growth_in_n(radius: float = 3.0, n_max: int = 10, sign: int = 1, n_angles: int = 33) -> IndexGrowth:
    """Linear regression of ``log max_{|z|=r} |b_n^{sign}|`` on ``n``."""
    ns = np.arange(0 if sign > 0 else 1, n_max + 1)
    z = _circle(radius, n_angles, True)
    bp, bm, _ = _evaluator_for(max(n_max, 1)).values(z * z, return_radius=True)
    b = bp if sign > 0 else bm
    lm = np.log(np.abs(b[ns]).max(axis=1))
    slope, icpt = np.polyfit(ns, lm, 1)
    res = lm - (slope * ns + icpt)
    r2 = 1.0 - float(res.var() / lm.var()) if lm.var() > 0 else 1.0
    return IndexGrowth(radius, ns.tolist(), lm.tolist(), float(slope), float(icpt), r2)


def gaussian_calibration(N: int = 32, radii=(1.0, 1.2, 1.4, 1.6, 1.8, 2.0), n_angles: int = 33) -> GrowthReport:
    """Growth of ``exp(-pi z^2)`` resynthesized from its own unperturbed samples."""
    ev = get_evaluator(max(N, 4))
    coef = np.exp(-np.pi * np.arange(N + 1))

    def F(z):
        bp, _ = ev.values(np.asarray(z) ** 2)
        # f(sqrt n) = fhat(sqrt n) = e^{-pi n}; a_n + ahat_n = 2 b_n^+
        return 2 * (coef[:, None] * bp[: N + 1]).sum(axis=0)

    return growth_on_disks(F, radii, n_angles)


# ---------------------------------------------------------------------------
# lower bound
# ---------------------------------------------------------------------------


def lower_bound_check(n: int, sign: int = 1, x_range=None, step: float = 0.01, exclusion: float = 1e-3) -> EnvelopeFit:
    """Fit ``|b_n(x)| >= c_n dist(x, sqrt N) e^{-c x}`` on ``x_range``.

    Points within ``exclusion`` of some ``sqrt m`` are skipped.  The line
    ``log c_n - c x`` is a least-squares fit of ``log(|b_n| / dist)`` on the
    even-indexed points, shifted down to lie below all of them; the violation
    is measured on every point.
    """
    claim = f"lower-bound/b_{n}^{'+' if sign > 0 else '-'}"
    if x_range is None:
        x_range = (math.sqrt(n) + 1.0, 12.0)
    lo, hi = x_range
    if n == 0 and sign < 0:
        return EnvelopeFit(claim, {"c_n": math.nan, "c": math.nan}, math.nan, (n, n), (lo, hi),
                           "excluded", degenerate=True, notes=["b_0^- vanishes identically"])
    if lo < math.sqrt(n) or hi > 12.0 + 1e-12:
        raise ValueError(f"x_range must lie in [sqrt({n}), 12]")
    x = np.arange(lo, hi + 1e-12, step)
    # the nearest sqrt m to x is one of sqrt(floor(x^2)), sqrt(ceil(x^2))
    d = np.minimum(np.abs(x - np.sqrt(np.floor(x * x))), np.abs(np.sqrt(np.ceil(x * x)) - x))
    keep = d >= exclusion
    x, d = x[keep], d[keep]
    b = np.abs(eval_bn_tail(n, sign, x, _precision_for(n)))
    y = np.log(b) - np.log(d)
    tr = np.arange(0, x.size, 2)
    slope, _ = np.polyfit(x[tr], y[tr], 1)
    c = -float(slope)
    log_cn = float(np.min(y[tr] + c * x[tr]))
    env = np.exp(log_cn - c * x) * d
    viol = float(np.max((env - b) / env))
    notes = []
    if c <= 0:
        notes.append("fitted exponent is not positive")
    return EnvelopeFit(claim, {"c_n": math.exp(log_cn), "c": c}, viol, (n, n), (float(lo), float(hi)),
                       "log-linear least squares, shifted to a lower envelope", notes=notes)


# ---------------------------------------------------------------------------
# complex extension from decaying samples
# ---------------------------------------------------------------------------


@dataclass
class AnalyticityReport:
    alpha: float
    sample_decay: float
    basis_growth: float
    margin_partial: float
    margin_tail: float
    max_rel_error: float
    radius: float
    growth: GrowthReport | None
    inverse_method: str
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        return d


def _disk(radius: float, n_r: int = 7, n_angles: int = 17):
    rs = np.linspace(0.0, radius, n_r)[1:]
    th = np.linspace(0.0, math.pi / 2, n_angles)
    return np.concatenate([[0j], (rs[:, None] * np.exp(1j * th)[None, :]).ravel()])


def analyticity_demo(plan: NodePlan, alpha: float = math.pi, radius: float = 1.5,
                     weight: WeightScheme | None = None, zero: bool = False) -> AnalyticityReport:
    """Complex extension of ``exp(-alpha x^2)`` from samples at perturbed nodes.

    The perturbation must be exponentially small.  Samples decay like
    ``exp(-a n)`` with ``a = min(alpha, pi^2/alpha)``; the perturbed basis
    grows like ``exp(c n)`` on the disk, with ``c`` fitted from the
    synthesized ``h_n``.  The extension converges absolutely when ``c < a``,
    otherwise a ``ValueError`` names the threshold.
    """
    if plan.eps.kind not in ("exp", "zero") or plan.freq.kind not in ("exp", "zero"):
        raise ValueError("the analyticity demo needs exponentially small perturbations")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    N = plan.N
    if weight is None:
        # exponential weights below the perturbation's own rate keep the defect small
        rates = [p.params[1] for p in (plan.eps, plan.freq) if p.kind == "exp"]
        weight = WeightScheme("exponential", 0.5 * min(rates) if rates else 0.25)
    op = build_truncation(plan, weight)
    if hs_defect(op) < 1:
        inv = invert_neumann(op)
    else:
        inv = invert_direct(op)
    Tinv = unweighted_inverse(op, inv.inverse)
    z = _disk(radius)
    Phi = synthesis_matrix(N, z, _precision_for(N))
    H = Tinv.T @ Phi  # row r: perturbed basis function attached to sample r
    outer = np.abs(z) >= radius * (1 - 1e-12)
    # growth rate of the perturbed basis in its index (space and frequency halves alike)
    idx = np.arange(1, N + 1)
    lm = np.log(np.maximum(np.abs(H[1 : N + 1][:, outer]).max(axis=1), np.abs(H[N + 1 :][:, outer]).max(axis=1)))
    c = float(np.polyfit(idx, lm, 1)[0]) if N >= 2 else 0.0
    a = min(alpha, math.pi**2 / alpha)
    if c >= a:
        raise ValueError(
            f"majorant sum e^((c - a) n) diverges: sample decay a = {a:.4g} does not exceed the "
            f"basis growth c = {c:.4g}; need alpha >= alpha0 = {c:.4g}"
        )
    f = ZeroFunction() if zero else Gaussian(alpha / math.pi)
    s = sample(f, plan)
    F = s @ H
    truth = np.zeros_like(z) if zero else np.exp(-alpha * z * z)
    scale = float(np.max(np.abs(truth))) if not zero else 1.0
    err = float(np.max(np.abs(F - truth))) / scale
    k = np.arange(N + 1)
    q = math.exp(c - a)
    margin = float(np.sum(q**k))
    tail = q ** (N + 1) / (1 - q)

    growth = None
    if not zero:
        # the disk grid is the origin followed by circles of n_angles points
        n_angles = 17
        rs = np.linspace(0.0, radius, 7)[1:]
        mags = np.abs(F[1:]).reshape(rs.size, n_angles).max(axis=1)
        sel = rs >= radius / 2
        growth = _growth_summary(rs[sel].tolist(), np.log(mags[sel]).tolist())
    return AnalyticityReport(alpha, a, c, margin, tail, err, radius, growth, inv.method)
