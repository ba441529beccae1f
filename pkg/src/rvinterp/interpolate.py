"""Sampling at perturbed nodes, reconstruction and error norms.

Fourier convention: ``fhat(xi) = int f(x) exp(-2 pi i x xi) dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite

from .nodes import NodePlan
from .perturb_op import synthesis_matrix


# ---------------------------------------------------------------------------
# test functions with closed-form transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    """``scale * exp(-pi a x^2)``; transform ``scale * a^(-1/2) exp(-pi xi^2 / a)``."""

    a: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("Gaussian parameter must be positive")

    def __call__(self, x):
        x = np.asarray(x)
        return self.scale * np.exp(-np.pi * self.a * x * x)

    def fourier(self, xi):
        xi = np.asarray(xi)
        return self.scale / math.sqrt(self.a) * np.exp(-np.pi * xi * xi / self.a)

    def describe(self) -> dict:
        return {"kind": "gaussian", "a": self.a, "scale": self.scale}


@dataclass(frozen=True)
class HermiteGaussian:
    """``sum_k c_k H_{2k}(sqrt(2 pi) x) exp(-pi x^2)``.

    These are eigenfunctions of the transform with eigenvalue ``(-1)^k``.
    """

    coeffs: tuple = (1.0,)

    def _series(self, x, signs: bool):
        x = np.asarray(x)
        c = np.zeros(2 * len(self.coeffs) - 1 if self.coeffs else 1)
        for k, ck in enumerate(self.coeffs):
            c[2 * k] = ck * ((-1) ** k if signs else 1)
        return hermite.hermval(math.sqrt(2 * math.pi) * x, c) * np.exp(-np.pi * x * x)

    def __call__(self, x):
        return self._series(x, False)

    def fourier(self, xi):
        return self._series(xi, True)

    def describe(self) -> dict:
        return {"kind": "hermite_gaussian", "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class ZeroFunction:
    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def fourier(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=float))

    def describe(self) -> dict:
        return {"kind": "zero"}


def function_from_spec(spec: str):
    """``"gaussian"``, ``"gaussian:a"``, ``"hermite:c0,c1,..."`` or ``"zero"``."""
    kind, _, rest = spec.partition(":")
    if kind == "gaussian":
        return Gaussian(float(rest) if rest else 1.0)
    if kind == "hermite":
        return HermiteGaussian(tuple(float(v) for v in rest.split(",")))
    if kind == "zero":
        return ZeroFunction()
    raise ValueError(f"unknown test function {spec!r}")


# ---------------------------------------------------------------------------
# sampling and reconstruction
# ---------------------------------------------------------------------------


def sample(f, plan: NodePlan) -> np.ndarray:
    """``(f(x_0) + fhat(y_0), f(x_1..N), fhat(y_1..N))``."""
    x, y = plan.x, plan.y
    fx = np.asarray(f(x), dtype=float)
    fy = np.asarray(f.fourier(y), dtype=float)
    return np.concatenate([[fx[0] + fy[0]], fx[1:], fy[1:]])


@dataclass
class ReconstructionReport:
    grid: np.ndarray
    values: np.ndarray
    truth: np.ndarray | None
    coefficients: np.ndarray
    N: int
    sup_error: float = float("nan")
    seminorm_errors: dict = field(default_factory=dict)
    node_residual: float = float("nan")
    provenance: dict = field(default_factory=dict)

    def rows(self):
        truth = self.truth if self.truth is not None else np.full(self.grid.shape, np.nan)
        for x, t, v in zip(self.grid, truth, self.values):
            yield x, t, v, abs(v - t)


def synthesize(coefficients: np.ndarray, grid, precision: str = "extended", Phi: np.ndarray | None = None) -> np.ndarray:
    """``z a_0 + sum x_j a_j + sum y_j ahat_j`` on ``grid`` (fixed summation order)."""
    c = np.asarray(coefficients)
    N = (c.size - 1) // 2
    if Phi is None:
        Phi = synthesis_matrix(N, grid, precision)
    if Phi.shape[0] != c.size:
        raise ValueError(f"{c.size} coefficients but {Phi.shape[0]} basis rows")
    # explicit loop: BLAS may reorder the sum, and we want reproducible bits
    out = np.zeros(Phi.shape[1], dtype=np.result_type(c, Phi))
    for k in range(c.size):
        out = out + c[k] * Phi[k]
    return out


def rv_synthesis(f, N: int, grid, precision: str = "extended", Phi: np.ndarray | None = None) -> np.ndarray:
    """``(f(0) + fhat(0)) a_0 + sum_{n<=N} f(sqrt n) a_n + fhat(sqrt n) ahat_n`` on ``grid``."""
    r = np.sqrt(np.arange(1, N + 1, dtype=float))
    c = np.concatenate([[float(f(0.0)) + float(f.fourier(0.0))], f(r), f.fourier(r)])
    return synthesize(c, grid, precision, Phi)


def reconstruct(
    samples,
    grid,
    inverse: np.ndarray | None = None,
    truth=None,
    op=None,
    seminorms=(),
    precision: str = "extended",
    Phi: np.ndarray | None = None,
) -> ReconstructionReport:
    """Apply the unweighted inverse to the samples and synthesize on ``grid``.

    ``inverse=None`` is the unperturbed path: the samples are used as
    coefficients unchanged.  ``truth`` is a test function used for errors.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size % 2 != 1:
        raise ValueError("samples must have length 2N+1")
    N = (samples.size - 1) // 2
    if inverse is None:
        coeffs = samples.copy()
    else:
        inverse = np.asarray(inverse)
        if inverse.shape != (samples.size, samples.size):
            raise ValueError(f"inverse has shape {inverse.shape}, expected {(samples.size,) * 2}")
        coeffs = inverse @ samples
    grid = np.asarray(grid, dtype=float)
    values = synthesize(coeffs, grid, precision, Phi)
    rep = ReconstructionReport(grid, values, None, coeffs, N)
    rep.provenance = {"inverse": "identity" if inverse is None else "supplied", "N": N}
    if truth is not None:
        tv = np.asarray(truth(grid), dtype=float)
        rep.truth = tv
        rep.sup_error = float(np.max(np.abs(values - tv))) if grid.size else 0.0
        for a, b in seminorms:
            rep.seminorm_errors[(a, b)] = seminorm(values - tv, grid, a, b)
    if op is not None:
        rep.node_residual = float(np.max(np.abs(op.raw @ coeffs - samples)))
    return rep


# ---------------------------------------------------------------------------
# seminorms
# ---------------------------------------------------------------------------


_STENCILS = {
    1: {1: 0.5, -1: -0.5},
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    3: {2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5},
    4: {2: 1.0, 1: -4.0, 0: 6.0, -1: -4.0, -2: 1.0},
}


def _centered(values: np.ndarray, h: float, beta: int, step: int):
    """Second-order centered difference with offsets scaled by ``step``."""
    st = _STENCILS[beta]
    r = max(abs(k) for k in st) * step
    n = values.size
    out = np.zeros(n - 2 * r)
    for k, w in st.items():
        out += w * values[r + k * step : n - r + k * step]
    return out / (h * step) ** beta, r


def derivative(values, grid, beta: int):
    """``f^(beta)`` on interior grid points; centered differences with one Richardson step."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if beta == 0:
        return values, grid
    if beta not in _STENCILS:
        raise ValueError(f"derivative order {beta} not supported (max 4)")
    h = np.diff(grid)
    if grid.size < 2 or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("derivatives need a uniform grid")
    h = float(h[0])
    reach = 2 * max(abs(k) for k in _STENCILS[beta])
    if grid.size < 2 * reach + 3:
        raise ValueError(f"grid too coarse for derivative order {beta}")
    d1, r1 = _centered(values, h, beta, 1)
    d2, r2 = _centered(values, h, beta, 2)
    d1 = d1[r2 - r1 : d1.size - (r2 - r1)]
    return (4 * d1 - d2) / 3, grid[r2 : grid.size - r2]


def seminorm(values, grid, alpha: int, beta: int) -> float:
    """``sup |x^alpha f^(beta)(x)|`` over the grid."""
    d, g = derivative(values, grid, beta)
    return float(np.max(np.abs(g**alpha * d))) if g.size else 0.0


def seminorm_of(f, alpha: int, beta: int, L: float = 8.0, h: float = 1e-3) -> float:
    grid = np.arange(-L, L + h / 2, h)
    return seminorm(f(grid), grid, alpha, beta)


@dataclass
class GSNorm:
    value: float
    divergent: bool
    h: float


def gelfand_shilov_norm(values, grid, h: float, fhat_values=None, fhat_grid=None) -> GSNorm:
    """``sup |f| e^{h|x|} + sup |fhat| e^{h|xi|}`` over the grids.

    Flags divergence when the weighted maximum sits on the edge of a grid,
    meaning the function has not decayed within the sampled range.
    """
    def part(v, g):
        v = np.abs(np.asarray(v, dtype=float)) * np.exp(h * np.abs(np.asarray(g, dtype=float)))
        i = int(np.argmax(v))
        edge = v.size > 1 and (i == 0 or i == v.size - 1) and h > 0
        return float(v[i]), edge

    val, div = part(values, grid)
    if fhat_values is not None:
        g2 = grid if fhat_grid is None else fhat_grid
        v2, d2 = part(fhat_values, g2)
        val += v2
        div = div or d2
    return GSNorm(val, bool(div), h)
