"""Weakly holomorphic forms g_n and the interpolation basis built from them.

``g_n^+ = theta^3 P_n^+(1/J)`` and ``g_n^- = theta^3 (1 - 2 lambda) P_n^-(1/J)``
are weight-3/2 forms for the theta group whose ``w``-expansion starts
``w^{-n} + O(w)`` (the minus family also carries a forced constant term,
``-2`` when ``n`` is a square).  The basis functions are

    b_n^{pm}(x) = 1/4 * int_{-1}^{1} g_n^{pm}(z) exp(i pi x^2 z) dz

over the upper unit semicircle, ``a_n = b_n^+ + b_n^-`` and
``ahat_n = b_n^+ - b_n^-``.  With this scaling ``a_n(sqrt(m)) = delta_{nm}``
and ``a_0(0) = 1/2``.

Evaluating ``b_n`` means cancelling contributions of size ``exp(pi n)``, so
values are computed with arb ball arithmetic (python-flint).  The main
evaluator moves the contour onto the line ``Re z = 1`` and treats the
principal part of ``g_n`` in closed form:

    b(s) = 1/2 [ sin(pi s) Q(s)
                 + sum_{k >= 1} c_k sinc(s + k) exp(-pi (k + s) t_q)
                 + sum_{k <= n} c_{-k} sinc(s - k) exp(pi (k - s) t_c) ]

with ``s = x^2``, ``Q(s) = int_0^{t_c} g e^{-pi s t} + int_{t_c}^{t_q} R e^{-pi s t}``,
``R = g - (principal part)`` sampled at ``z = 1 + i t`` and ``c_k`` the exact
``w``-coefficients.  Every piece is entire in ``s``, so the formula is valid
for complex ``x`` as well.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .modular import modular_pieces, modular_pieces_arb
from .qseries import (
    HalfQSeries,
    RationalPolynomial,
    j_series,
    lambda_series,
    series_invert,
    series_mul,
    series_pow,
    theta_series,
)

DOUBLE_NMAX = 20
DEFAULT_T_SPLIT = 1.25


class PrecisionError(ValueError):
    """Requested degree needs ``precision='extended'``."""


def _check_precision(nmax: int, precision: str):
    if precision not in ("double", "extended"):
        raise ValueError(f"precision must be 'double' or 'extended', got {precision!r}")
    if precision == "double" and nmax > DOUBLE_NMAX:
        raise PrecisionError(
            f"n = {nmax} exceeds {DOUBLE_NMAX}; pass precision='extended' to allow it"
        )


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


# ---------------------------------------------------------------------------
# exact construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GnForm:
    """``g_n^{sign}`` as a polynomial in ``1/J`` and as a ``w``-series."""

    n: int
    sign: int
    poly: RationalPolynomial
    series: HalfQSeries

    @property
    def principal_part(self) -> dict:
        return self.series.principal_part()

    def coefficient(self, k: int) -> Fraction:
        return self.series[k]


def _int_list(s: HalfQSeries, lo: int, hi: int) -> list:
    """Coefficients of ``w^lo .. w^(hi-1)`` as Python ints."""
    out = []
    for k in range(lo, hi):
        c = s[k]
        assert c.denominator == 1
        out.append(c.numerator)
    return out


@lru_cache(maxsize=4)
def _power_basis(kmax: int, order: int):
    """Integer coefficient lists of ``theta^3 X^k`` and ``theta^3 (1-2 lambda) X^k``.

    ``X = 1/J``.  Entry ``k`` lists the coefficients of ``w^-k .. w^(order-1)``.
    """
    jorder = order + kmax + 2
    X = series_invert(j_series(jorder))
    t3 = series_pow(theta_series(3, order + kmax + 1), 3)
    lam = lambda_series(order + kmax + 1)
    A = series_mul(t3, 1 - 2 * lam)
    plus, minus = [], []
    bp, bm = t3, A
    for k in range(kmax + 1):
        if k:
            bp = series_mul(bp, X)
            bm = series_mul(bm, X)
        plus.append(_int_list(bp, -k, order))
        minus.append(_int_list(bm, -k, order))
    return plus, minus


def _solve_family(n: int, sign: int, order: int, kmax: int | None = None):
    """Polynomial coefficients and integer series of ``g_n^{sign}``."""
    plus, minus = _power_basis(max(n, 1, kmax or 0), order)
    basis = plus if sign > 0 else minus
    length = n + order  # exponents -n .. order-1

    def aligned(k):
        # pad basis[k] (starting at w^-k) to start at w^-n
        return [0] * (n - k) + basis[k]

    p = [0] * (n + 1)
    acc = [0] * length
    if sign < 0 and n == 0:
        return p, acc
    p[n] = 1
    acc = aligned(n)
    lowest = 0 if sign > 0 else 1
    for j in range(n - 1, lowest - 1, -1):
        c = acc[n - j]  # coefficient of w^-j
        if c:
            p[j] = -c
            bj = aligned(j)
            acc = [a - c * b for a, b in zip(acc, bj)]
    return p, acc


def build_gn(n: int, sign: int, order: int = 64) -> GnForm:
    """Exact ``g_n^{sign}`` known to ``O(w^order)``.

    The plus family is normalized to ``w^-n + O(w)``.  The minus family has
    ``P_n^-(0) = 0`` and therefore only ``n - 1`` free coefficients; they kill
    ``w^-(n-1) .. w^-1`` and the constant term is whatever remains.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if order < 1:
        raise ValueError("order must be >= 1")
    p, acc = _solve_family(n, sign, order)
    poly = RationalPolynomial.from_coeffs(p)
    series = HalfQSeries.from_coeffs(acc, valuation=-n, order=order)
    return GnForm(n, sign, poly, series)


def build_family(nmax: int, order: int) -> dict:
    """``{(n, sign): GnForm}`` for ``n <= nmax``, sharing one table of powers of ``1/J``."""
    out = {}
    for n in range(nmax + 1):
        for sign in (1, -1):
            p, acc = _solve_family(n, sign, order, kmax=nmax)
            out[(n, sign)] = GnForm(
                n, sign, RationalPolynomial.from_coeffs(p), HalfQSeries.from_coeffs(acc, -n, order)
            )
    return out


def generating_coefficients(n: int, sign: int) -> RationalPolynomial:
    """Coefficients of ``P_n`` read off the two-variable generating function.

    ``[X^m] P_n^+ = [w^n] theta (1 - 2 lambda) J^m`` and
    ``[X^m] P_n^- = [w^n] theta J^m`` (``m >= 1``).
    """
    order = n + 2
    th = theta_series(3, order)
    lam = lambda_series(order)
    J = j_series(order)
    base = th if sign < 0 else series_mul(th, 1 - 2 * lam)
    coeffs = []
    for m in range(n + 1):
        if sign < 0 and m == 0:
            coeffs.append(0)
            continue
        s = series_mul(base, series_pow(J, m)) if m else base
        coeffs.append(s[n] if n < s.order else Fraction(0))
    return RationalPolynomial.from_coeffs(coeffs)


# ---------------------------------------------------------------------------
# direct evaluation of g_n
# ---------------------------------------------------------------------------


def eval_gn(n: int, sign: int, z, precision: str = "double"):
    """``g_n^{sign}(z)`` on the upper half-plane (numpy or arb)."""
    _check_precision(n, precision)
    form = build_gn(n, sign, order=1)
    coeffs = form.poly.coeffs
    if precision == "double":
        z = np.asarray(z, dtype=complex)
        pc = modular_pieces(z)
        X = pc["Jinv"]
        acc = np.zeros_like(X)
        for c in reversed(coeffs):
            acc = acc * X + float(c)
        pref = pc["theta3"] if sign > 0 else pc["theta3"] * pc["one_minus_2lambda"]
        return pref * acc
    import flint

    out = []
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    bits = _bits_for(n, 0.0, 1.0)
    with _precision(bits):
        for zz in zs.ravel():
            pc = modular_pieces_arb(complex(zz))
            X = pc["Jinv"]
            acc = flint.acb(0)
            for c in reversed(coeffs):
                acc = acc * X + flint.acb(flint.fmpq(c.numerator, c.denominator))
            pref = pc["theta3"] if sign > 0 else pc["theta3"] * pc["one_minus_2lambda"]
            v = pref * acc
            out.append(complex(v.real.mid()) + 1j * float(v.imag.mid()))
    res = np.array(out).reshape(zs.shape)
    return res if np.ndim(z) else res[0]


def generating_kernel(sign: int, tau, z, kernel: str = "corrected"):
    """Two-variable kernel whose ``exp(i pi n tau)`` coefficient is ``g_n(z)``.

    ``kernel='printed'`` selects the variant with the weights of ``z`` and
    ``tau`` swapped in the minus family; it is not weight 3/2 in ``z``.
    """
    pt = modular_pieces(tau)
    pz = modular_pieces(z)
    denom = pz["J"] - pt["J"]
    if sign > 0:
        return pt["theta"] * pt["one_minus_2lambda"] * pz["theta3"] * pz["J"] / denom
    if kernel == "corrected":
        return pz["theta3"] * pz["one_minus_2lambda"] * pt["theta"] * pt["J"] / denom
    if kernel == "printed":
        return pz["theta"] * pz["one_minus_2lambda"] * pt["theta3"] * pt["J"] / denom
    raise ValueError(f"unknown kernel {kernel!r}")


def _line_J_max(T: float, M: int) -> float:
    tau = -1 + 2 * np.arange(M) / M + 1j * T
    return float(np.abs(modular_pieces(tau)["J"]).max())


def _auto_height(Jz: float, M: int, ratio: float = 0.5) -> float:
    """Lowest ``T`` (on a 1/64 grid) with ``max |J(tau)| <= ratio |J(z)|`` on ``Im tau = T``.

    Extracting the ``n``-th coefficient multiplies rounding errors by
    ``exp(pi n T)``, so the line is kept as low as convergence allows.
    """
    T = 0.5
    while _line_J_max(T, M) > ratio * Jz:
        T += 1.0 / 64
        if T > 40:
            raise ValueError("no admissible height for the generating expansion")
    return T


def eval_gn_generating(n: int, sign: int, z, kernel: str = "corrected", M: int = 256, T: float | None = None):
    """``g_n(z)`` by discrete Fourier extraction from the generating kernel.

    The kernel is sampled at ``tau_j = -1 + 2 j / M + i T``; it has period 2 in
    ``Re tau``.  The expansion in ``J(tau)/J(z)`` needs ``|J(tau)| < |J(z)|``.
    With ``T=None`` the height is chosen per point (see :func:`_auto_height`).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    Jz = np.abs(modular_pieces(z)["J"])
    out = np.empty(z.shape, dtype=complex)
    for i, (zz, jz) in enumerate(zip(z, Jz)):
        h = _auto_height(jz, M) if T is None else T
        if T is not None and _line_J_max(h, M) >= jz:
            raise ValueError("generating expansion diverges: need |J(tau)| < |J(z)|; raise T")
        tau = -1 + 2 * np.arange(M) / M + 1j * h
        K = generating_kernel(sign, tau, zz, kernel)
        out[i] = (K * np.exp(-1j * np.pi * n * tau)).sum() / M
    return out


# ---------------------------------------------------------------------------
# arb helpers
# ---------------------------------------------------------------------------


class _precision:
    def __init__(self, bits: int):
        self.bits = int(bits)

    def __enter__(self):
        import flint

        self.old = flint.ctx.prec
        flint.ctx.prec = self.bits
        return self

    def __exit__(self, *exc):
        import flint

        flint.ctx.prec = self.old
        return False


def _bits_for(n: int, s_mag: float, scale: float) -> int:
    # cancellation ~ exp(pi * n * scale) plus headroom for P_n(1/J)
    return int(80 + (math.pi * (n * scale + s_mag)) / math.log(2) + n)


@lru_cache(maxsize=64)
@lru_cache(maxsize=None)
def _gl_rule(p: int, bits: int):
    import flint

    with _precision(bits + 16):
        xs, ws = [], []
        for k in range(p):
            x, w = flint.arb.legendre_p_root(p, k, weight=True)
            xs.append(x)
            ws.append(w)
    return xs, ws


def _panel_nodes(breaks, p: int, bits: int):
    import flint

    xs, ws = _gl_rule(p, bits)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        a, b = flint.arb(a), flint.arb(b)
        h = (b - a) / 2
        c = (b + a) / 2
        for x, w in zip(xs, ws):
            nodes.append(c + h * x)
            weights.append(h * w)
    return nodes, weights


def _acb_to_complex(v) -> complex:
    return complex(float(v.real.mid()), float(v.imag.mid()))


def _fmpq(c):
    import flint

    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------


def _tail_order(n: int, t_q: float, digits: float = 40.0) -> int:
    """Number of positive ``w``-coefficients needed beyond ``Im z = t_q``.

    ``|c_k| ~ exp(2 pi sqrt(n k))`` so ``c_k w^k`` at ``|w| = exp(-pi t_q)``
    drops below ``10^-digits`` once ``pi t_q k - 2 pi sqrt(n k) > digits ln 10``.
    """
    D = digits * math.log(10)
    a = math.pi * t_q
    b = 2 * math.pi * math.sqrt(max(n, 1))
    r = (b + math.sqrt(b * b + 4 * a * D)) / (2 * a)
    return int(r * r) + 8


@dataclass
class LaplaceEvaluator:
    """Evaluate ``b_n^{pm}(x)`` for all ``n <= nmax`` at many points.

    Attributes are fixed at construction: panel layout on ``[0, t_split]``,
    Gauss-Legendre order and working precision (bits).  ``values`` returns
    midpoints as complex numpy arrays together with the largest ball radius.
    """

    nmax: int
    t_split: float = DEFAULT_T_SPLIT
    panel_order: int = 32
    prec_bits: int | None = None
    forms: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.prec_bits is None:
            self.prec_bits = _bits_for(self.nmax, 0.0, self.t_split)
        self.order = _tail_order(self.nmax, self.t_split)
        self.forms.update(build_family(self.nmax, self.order))
        self._setup()

    def _breaks(self):
        # the integrand varies on the scale 1/(pi n) in t; panels are kept
        # uniform at that scale and refined geometrically towards t = 0
        tq = self.t_split
        h = min(0.125, 8.0 / (math.pi * (self.nmax + 8)))
        # a dyadic width keeps every break exact in binary, so the panel
        # exponentials can be factored without moving the nodes
        h = 2.0 ** -math.ceil(-math.log2(h))
        m = int(math.ceil(tq / h))
        if m * h != tq:
            raise ValueError(f"t_split = {tq} is not a multiple of the panel width {h}")
        uni = [k * h for k in range(m + 1)]
        first = uni[1]
        geo = [first * 2.0 ** (-k) for k in range(10, 0, -1)]
        return [0.0] + geo + uni[1:]

    def _setup(self):
        import flint
        from flint import acb, acb_mat, arb

        N = self.nmax
        with _precision(self.prec_bits):
            breaks = self._breaks()
            nodes, weights = _panel_nodes(breaks, self.panel_order, self.prec_bits)
            self._panel_breaks = breaks
            self.t_nodes = nodes
            self.t_weights = weights
            rows_p, rows_m, rows_pp = [], [], []
            for t in nodes:
                z = acb(1, t)
                pc = modular_pieces_arb(z)
                X = pc["Jinv"]
                a = pc["theta3"]
                b = a * pc["one_minus_2lambda"]
                pw = [acb(1)]
                for _ in range(N):
                    pw.append(pw[-1] * X)
                rows_p.extend(a * v for v in pw)
                rows_m.extend(b * v for v in pw)
                winv = -(arb.pi() * t).exp()  # 1/w on Re z = 1
                pp = [acb(1)]
                for _ in range(N):
                    pp.append(pp[-1] * winv)
                rows_pp.extend(pp)
            nn = len(nodes)
            Vp = acb_mat(nn, N + 1, rows_p)
            Vm = acb_mat(nn, N + 1, rows_m)
            W = acb_mat(nn, N + 1, rows_pp)
            Cp = [[0] * (N + 1) for _ in range(N + 1)]
            Cm = [[0] * (N + 1) for _ in range(N + 1)]
            PPp = [[0] * (N + 1) for _ in range(N + 1)]
            PPm = [[0] * (N + 1) for _ in range(N + 1)]
            for n in range(N + 1):
                for sign, C, PP in ((1, Cp, PPp), (-1, Cm, PPm)):
                    f = self.forms[(n, sign)]
                    for k, c in enumerate(f.poly.coeffs):
                        C[k][n] = _fmpq(c)
                    for k, c in f.principal_part.items():
                        PP[-k][n] = _fmpq(c)
            Cp, Cm = acb_mat(Cp), acb_mat(Cm)
            PPp, PPm = acb_mat(PPp), acb_mat(PPm)
            Gp = Vp * Cp
            Gm = Vm * Cm
            self._G = {1: Gp.transpose(), -1: Gm.transpose()}
            self._R = {1: (Gp - W * PPp).transpose(), -1: (Gm - W * PPm).transpose()}
            # tail coefficients c_1 .. c_K
            K = self.order - 1
            self._K = K
            tails = {}
            for sign in (1, -1):
                rows = []
                for n in range(N + 1):
                    f = self.forms[(n, sign)]
                    rows.append([_fmpq(f.series[k]) for k in range(1, K + 1)])
                tails[sign] = acb_mat(rows)
            self._tail = tails

    def tail_truncation(self) -> float:
        """Size of the first neglected tail term, ``max_n |c_K| exp(-pi K t_q)``."""
        K = self._K
        worst = 0.0
        for f in self.forms.values():
            if f.series.order > K:
                c = f.series[K]
                if c:
                    logv = math.log(abs(c.numerator)) - math.pi * K * self.t_split
                    worst = max(worst, math.exp(min(logv, 700.0)))
        return worst

    def _rows(self, mat, k: int):
        """First ``k`` rows of an ``acb_mat`` or ``arb_mat`` (cached)."""
        key = (id(mat), k)
        cache = self.__dict__.setdefault("_row_cache", {})
        if key not in cache:
            cols = mat.ncols()
            cache[key] = type(mat)(k, cols, [mat[i, j] for i in range(k) for j in range(cols)])
        return cache[key]

    def _real_parts(self):
        cache = self.__dict__.setdefault("_real_cache", {})
        if not cache:
            for sign in (1, -1):
                cache[("G", sign)] = self._G[sign].real
                cache[("R", sign)] = self._R[sign].real
                cache[("tail", sign)] = self._tail[sign].real
        return cache

    def _exp_nodes(self, s):
        """``exp(-pi s t_j)`` at every quadrature node for a real ``arb`` ``s``.

        On the equal-width panels the exponential factors into a per-panel
        power times a shared in-panel factor, which saves most of the exps.
        """
        from flint import arb

        pi = arb.pi()
        p = self.panel_order
        xs, _ = _gl_rule(p, self.prec_bits)
        br = self._panel_breaks
        n_geo = 11
        out = []
        for t in self.t_nodes[: n_geo * p]:
            out.append((-pi * s * t).exp())
        a0, b0 = arb(br[n_geo]), arb(br[n_geo + 1])
        hh = (b0 - a0) / 2
        inner = [(-pi * s * hh * x).exp() for x in xs]
        step = (-pi * s * 2 * hh).exp()
        lead = (-pi * s * (a0 + hh)).exp()
        for _ in range(len(br) - 1 - n_geo):
            out.extend(lead * f for f in inner)
            lead = lead * step
        return out

    def _values_real(self, s_arr: np.ndarray):
        """Real-argument path: everything but the sums is real, so only real
        parts of the node matrices are needed."""
        from flint import arb, arb_mat

        N, S, tq = self.nmax, s_arr.size, self.t_split
        rp = self._real_parts()
        with _precision(self.prec_bits):
            pi = arb.pi()
            svals = [arb(float(v)) for v in s_arr]
            nn = len(self.t_nodes)
            weights = self.t_weights
            cols_r = [i for i in range(S) if s_arr[i] < N]
            n_g = int(min(N, np.floor(s_arr.max()))) + 1 if S and s_arr.max() >= 0 else 0
            cols_g = [i for i in range(S) if s_arr[i] >= 0]
            ecols = {}
            for i in set(cols_r) | set(cols_g):
                s = svals[i]
                ecols[i] = [w * e for w, e in zip(weights, self._exp_nodes(s))]

            def emat(cols):
                return arb_mat(nn, len(cols), [ecols[i][j] for j in range(nn) for i in cols])

            sinps = [s.sin_pi() for s in svals]
            tq_a = arb(tq)
            T = arb_mat(
                self._K,
                S,
                [
                    (s + k).sinc_pi() * (-pi * (s + k) * tq_a).exp()
                    for k in range(1, self._K + 1)
                    for s in svals
                ],
            )
            ER = emat(cols_r) if cols_r else None
            EG = emat(cols_g) if cols_g and n_g else None
            pos_r = {i: c for c, i in enumerate(cols_r)}
            pos_g = {i: c for c, i in enumerate(cols_g)}
            # principal-part factors depend only on (m, s, cut)
            ppf = {}

            def pp_factor(m, i, cut):
                key = (m, i, cut)
                if key not in ppf:
                    s = svals[i]
                    v = (s - m).sinc_pi()
                    if cut:
                        v *= (pi * (m - s) * tq_a).exp()
                    ppf[key] = v
                return ppf[key]

            out = {}
            radius = 0.0
            for sign in (1, -1):
                QR = rp[("R", sign)] * ER if ER is not None else None
                QG = self._rows(rp[("G", sign)], n_g) * EG if EG is not None else None
                TL = rp[("tail", sign)] * T
                res = np.zeros((N + 1, S), dtype=complex)
                for n in range(N + 1):
                    pp = [(-k, _fmpq(c)) for k, c in self.forms[(n, sign)].principal_part.items()]
                    for i in range(S):
                        cut = bool(s_arr[i] >= n)
                        q = QG[n, pos_g[i]] if cut else QR[n, pos_r[i]]
                        v = sinps[i] * q + TL[n, i]
                        for m, c in pp:
                            v += c * pp_factor(m, i, cut)
                        v = v / 2
                        res[n, i] = float(v.mid())
                        radius = max(radius, float(v.rad()))
                out[sign] = res
        return out[1], out[-1], radius

    def values(self, s_values, return_radius: bool = False):
        """``b_n^+(s)`` and ``b_n^-(s)`` for ``s = x^2``; arrays of shape ``(nmax+1, len(s))``."""
        import flint
        from flint import acb, acb_mat, arb

        s_arr = np.atleast_1d(np.asarray(s_values, dtype=complex))
        S = s_arr.size
        N = self.nmax
        tq = self.t_split
        if S and not np.any(s_arr.imag):
            key = s_arr.real.tobytes()
            cache = self.__dict__.setdefault("_value_cache", {})
            if key not in cache:
                if len(cache) >= 32:
                    cache.pop(next(iter(cache)))
                cache[key] = self._values_real(s_arr.real.copy())
            bp, bm, radius = cache[key]
            bp, bm = bp.copy(), bm.copy()
            if return_radius:
                return bp, bm, radius
            return bp, bm
        with _precision(self.prec_bits):
            pi = arb.pi()
            svals = [acb(float(s.real), float(s.imag)) for s in s_arr]
            nn = len(self.t_nodes)
            ecols = [
                [w * (-pi * s * t).exp() for t, w in zip(self.t_nodes, self.t_weights)] for s in svals
            ]
            # columns integrated against g (s >= n) and against R (s < n)
            re_s = s_arr.real
            cols_r = [i for i in range(S) if re_s[i] < N]
            n_g = int(min(N, np.floor(re_s.max()))) + 1 if S and re_s.max() >= 0 else 0
            cols_g = [i for i in range(S) if re_s[i] >= 0]

            def emat(cols):
                return acb_mat(nn, len(cols), [ecols[i][j] for j in range(nn) for i in cols])

            sinps = [s.sin_pi() for s in svals]
            tq_a = arb(tq)
            # tail matrix: sinc(s + k) exp(-pi (k + s) t_q)
            T = acb_mat(
                self._K,
                S,
                [
                    (s + k).sinc_pi() * (-pi * (s + k) * tq_a).exp()
                    for k in range(1, self._K + 1)
                    for s in svals
                ],
            )
            ER = emat(cols_r) if cols_r else None
            EG = emat(cols_g) if cols_g and n_g else None
            pos_r = {i: c for c, i in enumerate(cols_r)}
            pos_g = {i: c for c, i in enumerate(cols_g)}
            out = {}
            radius = 0.0
            for sign in (1, -1):
                QR = self._R[sign] * ER if ER is not None else None
                QG = self._rows(self._G[sign], n_g) * EG if EG is not None else None
                TL = self._tail[sign] * T
                res = np.zeros((N + 1, S), dtype=complex)
                for n in range(N + 1):
                    pp = [(-k, _fmpq(c)) for k, c in self.forms[(n, sign)].principal_part.items()]
                    for i, s in enumerate(svals):
                        use_g = re_s[i] >= n
                        if use_g:
                            q = QG[n, pos_g[i]]
                            tc = tq_a
                        else:
                            q = QR[n, pos_r[i]]
                            tc = None
                        v = sinps[i] * q + TL[n, i]
                        for m, c in pp:
                            term = c * (s - m).sinc_pi()
                            if tc is not None:
                                term *= (pi * (m - s) * tc).exp()
                            v += term
                        v = v / 2
                        res[n, i] = _acb_to_complex(v)
                        radius = max(radius, float(v.real.rad()) + float(v.imag.rad()))
                out[sign] = res
        if return_radius:
            return out[1], out[-1], radius
        return out[1], out[-1]


@lru_cache(maxsize=8)
def get_evaluator(nmax: int, t_split: float = DEFAULT_T_SPLIT, panel_order: int = 32) -> LaplaceEvaluator:
    return LaplaceEvaluator(nmax, t_split=t_split, panel_order=panel_order)


def _evaluator_for(n: int) -> LaplaceEvaluator:
    # round the degree up so that nearby requests share one evaluator
    nmax = max(4, 1 << max(0, int(n) - 1).bit_length())
    return get_evaluator(nmax)


def basis_values(nmax: int, x, precision: str = "double"):
    """``(a, ahat)`` for ``n = 0..nmax`` at points ``x``; shape ``(nmax+1, len(x))``."""
    _check_precision(nmax, precision)
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    ev = _evaluator_for(nmax)
    bp, bm = ev.values(x * x)
    bp, bm = bp[: nmax + 1], bm[: nmax + 1]
    a, ah = bp + bm, bp - bm
    if np.all(x.imag == 0):
        a, ah = a.real, ah.real
    return a, ah


def basis_values_s(nmax: int, s, precision: str = "double"):
    """Like :func:`basis_values` but takes ``s = x^2`` directly (exact at integers)."""
    _check_precision(nmax, precision)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    ev = _evaluator_for(nmax)
    bp, bm = ev.values(s)
    bp, bm = bp[: nmax + 1].real, bm[: nmax + 1].real
    return bp + bm, bp - bm


def eval_bn_laplace(n: int, sign: int, x, precision: str = "double"):
    _check_precision(n, precision)
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    bp, bm = _evaluator_for(n).values(x * x)
    return (bp if sign > 0 else bm)[n]


def eval_bn_tail(n: int, sign: int, x, precision: str = "double"):
    """``b_n(x) = sin(pi x^2)/2 int_0^inf g_n(1 + i t) exp(-pi x^2 t) dt`` for ``|x| >= sqrt(n)``.

    The integral is split at ``t_q``; beyond it the exact ``w``-coefficients
    are integrated term by term.
    """
    _check_precision(n, precision)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x * x < n * (1 - 1e-12)):
        raise ValueError(f"tail representation needs |x| >= sqrt({n})")
    bp, bm = _evaluator_for(n).values(x * x)
    return (bp if sign > 0 else bm)[n].real


# ---------------------------------------------------------------------------
# semicircle contour
# ---------------------------------------------------------------------------


def _contour_breaks(n: int):
    levels = 9
    left = [math.pi * 2.0 ** (-k) for k in range(levels, 1, -1)]
    mid = list(np.linspace(math.pi / 4, 3 * math.pi / 4, 4 + n // 2)[1:-1])
    right = [math.pi - v for v in reversed(left)]
    return [0.0] + left + [math.pi / 4] + mid + [3 * math.pi / 4] + right + [math.pi]


def eval_bn(n: int, sign: int, x, panel_order: int = 48, error_estimate: bool = False):
    """``b_n^{sign}(x)`` from the defining semicircle integral.

    Independent of :class:`LaplaceEvaluator`: the integrand is evaluated on
    ``z = exp(i phi)`` with dyadically refined Gauss-Legendre panels towards
    the cusps at ``phi = 0, pi``.  With ``error_estimate`` the rule is rerun
    with ``panel_order - 16`` nodes and the difference is returned too.
    """
    if error_estimate:
        v1 = eval_bn(n, sign, x, panel_order)
        v0 = eval_bn(n, sign, x, panel_order - 16)
        return v1, np.abs(v1 - v0)
    import flint
    from flint import acb, acb_mat, arb

    x = np.atleast_1d(np.asarray(x, dtype=complex))
    s_all = x * x
    smag = float(np.max(np.abs(s_all))) if s_all.size else 0.0
    bits = _bits_for(n, smag, 1.0)
    form = build_gn(n, sign, order=1)
    with _precision(bits):
        nodes, weights = _panel_nodes(_contour_breaks(n), panel_order, bits)
        pi = arb.pi()
        gvals = []
        for phi, w in zip(nodes, weights):
            z = acb(phi.cos(), phi.sin())
            pc = modular_pieces_arb(z)
            X = pc["Jinv"]
            acc = acb(0)
            for c in reversed(form.poly.coeffs):
                acc = acc * X + _fmpq(c)
            pref = pc["theta3"] if sign > 0 else pc["theta3"] * pc["one_minus_2lambda"]
            # dz = i z dphi, and phi runs from pi down to 0
            gvals.append((z, -pref * acc * acb(0, 1) * z * w))
        out = []
        for s in s_all:
            sa = acb(float(s.real), float(s.imag))
            tot = acb(0)
            for z, gw in gvals:
                tot += gw * (acb(0, 1) * pi * sa * z).exp()
            out.append(_acb_to_complex(tot / 4))
    return np.array(out)


# ---------------------------------------------------------------------------
# tabulation and on-disk cache
# ---------------------------------------------------------------------------


TABLE_FORMAT = "rvbasis-table-v1"


@dataclass
class BasisTable:
    """``b_n^{pm}`` for ``n = 0..nmax`` on a set of real points.

    ``values`` has shape ``(nmax+1, 2, len(points))`` with sign index 0 for
    plus and 1 for minus.
    """

    nmax: int
    points: np.ndarray
    values: np.ndarray
    precision: str = "double"

    @property
    def a(self):
        return self.values[:, 0] + self.values[:, 1]

    @property
    def ahat(self):
        return self.values[:, 0] - self.values[:, 1]

    def key(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps({"nmax": self.nmax, "precision": self.precision}).encode())
        h.update(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
        return h.hexdigest()[:16]

    def store(self, path) -> Path:
        """JSON header line followed by little-endian float64 (n, sign, point, re/im)."""
        path = Path(path)
        header = {
            "format": TABLE_FORMAT,
            "nmax": self.nmax,
            "npoints": int(self.points.size),
            "precision": self.precision,
            "key": self.key(),
        }
        data = np.empty(self.values.shape + (2,), dtype="<f8")
        data[..., 0] = self.values.real
        data[..., 1] = self.values.imag
        header["checksum"] = hashlib.sha256(data.tobytes()).hexdigest()
        with open(path, "wb") as fh:
            fh.write((json.dumps(header) + "\n").encode())
            fh.write(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
            fh.write(data.tobytes())
        return path

    @classmethod
    def load(cls, path) -> "BasisTable":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            if header.get("format") != TABLE_FORMAT:
                raise ValueError(f"not a basis table: {path}")
            npts = header["npoints"]
            pts = np.frombuffer(fh.read(8 * npts), dtype="<f8").copy()
            nmax = header["nmax"]
            body = fh.read()
        if hashlib.sha256(body).hexdigest() != header.get("checksum"):
            raise ValueError(f"corrupt basis table: {path}")
        raw = np.frombuffer(body, dtype="<f8").reshape(nmax + 1, 2, npts, 2)
        table = cls(nmax, pts, raw[..., 0] + 1j * raw[..., 1], header["precision"])
        if table.key() != header["key"]:
            raise ValueError(f"corrupt basis table: {path}")
        return table


def tabulate(nmax: int, points, precision: str = "double", cache_dir=None) -> BasisTable:
    """Tabulate ``b_n^{pm}`` at real ``points``, reusing ``cache_dir`` when given."""
    _check_precision(nmax, precision)
    points = np.asarray(points, dtype=float).ravel()
    stub = BasisTable(nmax, points, np.empty(0), precision)
    if cache_dir is not None:
        path = Path(cache_dir) / f"basis-{stub.key()}.bin"
        if path.exists():
            try:
                return BasisTable.load(path)
            except (ValueError, KeyError, OSError):
                # unreadable or corrupt cache: rebuild it below
                pass
    ev = _evaluator_for(nmax)
    bp, bm = ev.values(points * points)
    vals = np.stack([bp[: nmax + 1], bm[: nmax + 1]], axis=1)
    table = BasisTable(nmax, points, vals, precision)
    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        table.store(path)
    return table
