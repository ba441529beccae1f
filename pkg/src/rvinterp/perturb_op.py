"""Truncated sampling operator for perturbed nodes, its defect and inverse.

Coordinates of a truncated expansion ``F = z a_0 + sum x_j a_j + sum y_j ahat_j``
are ordered ``(z, x_1..x_N, y_1..y_N)``.  Row functionals are
``F(x_0) + Fhat(y_0)``, ``F(x_k)`` and ``Fhat(y_k)``.  The matrix is stored in
the orthonormal basis of the weighted space, ``M = W T W^-1`` with
``W = diag(weight(index))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nodes import NodePlan
from .rv_basis import _evaluator_for, basis_values


@dataclass(frozen=True)
class WeightScheme:
    """``weight(n) = (1+n)^s`` (polynomial) or ``exp(c n)`` (exponential)."""

    kind: str = "polynomial"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("polynomial", "exponential"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.param < 0:
            raise ValueError("weights must be nondecreasing")

    @classmethod
    def parse(cls, spec: str) -> "WeightScheme":
        """``"s=K"`` or ``"exp=C"``."""
        key, _, val = spec.partition("=")
        if key == "s":
            return cls("polynomial", float(val))
        if key == "exp":
            return cls("exponential", float(val))
        raise ValueError(f"cannot parse weight {spec!r}")

    def __call__(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.kind == "polynomial":
            return (1.0 + n) ** self.param
        return np.exp(self.param * n)

    def to_json(self) -> dict:
        return {"kind": self.kind, "param": self.param}


def slot_weights(w: WeightScheme, N: int) -> np.ndarray:
    """Weights of the ``2N+1`` coordinates (z-slot uses ``weight(0)``)."""
    k = np.arange(1, N + 1)
    return np.concatenate([[w(0)], w(k), w(k)])


@dataclass
class NodeSamples:
    """``a_n``, ``ahat_n`` (``n <= N``) at the space and frequency nodes of a plan."""

    a_x: np.ndarray
    ah_x: np.ndarray
    a_y: np.ndarray
    ah_y: np.ndarray


def sample_basis(plan: NodePlan, table=None) -> NodeSamples:
    """Basis values at the nodes, from ``table`` when given, else computed.

    A :class:`~rvinterp.rv_basis.BasisTable` must contain every node exactly.
    """
    N = plan.N
    if table is not None:
        if table.nmax < N:
            raise KeyError(f"table has nmax = {table.nmax} < N = {N}")
        pts = np.asarray(table.points)
        out = []
        for nodes in (plan.x, plan.y):
            idx = []
            for k, v in enumerate(nodes):
                hit = np.nonzero(pts == v)[0]
                if hit.size == 0:
                    raise KeyError(f"table lacks node k = {k} (x = {float(v)!r})")
                idx.append(hit[0])
            vals = table.values[: N + 1, :, idx].real
            out.append((vals[:, 0] + vals[:, 1], vals[:, 0] - vals[:, 1]))
        (ax, ahx), (ay, ahy) = out
        return NodeSamples(ax, ahx, ay, ahy)
    s = np.concatenate([plan.x_squared, plan.y_squared])
    bp, bm = _evaluator_for(max(N, 1)).values(s)
    bp, bm = bp[: N + 1].real, bm[: N + 1].real
    a, ah = bp + bm, bp - bm
    m = N + 1
    return NodeSamples(a[:, :m], ah[:, :m], a[:, m:], ah[:, m:])


@dataclass
class OperatorTruncation:
    N: int
    matrix: np.ndarray
    weights: np.ndarray
    scheme: WeightScheme
    plan: NodePlan | None = None

    @property
    def raw(self) -> np.ndarray:
        """The matrix in the unweighted coordinates."""
        w = self.weights
        return self.matrix * w[None, :] / w[:, None]

    def tail_estimate(self, n_fit: int = 8) -> float:
        """Estimated Frobenius mass of the columns beyond the truncation.

        Column norms of ``I - M`` decay roughly geometrically in the column
        index; the rate fitted on the last ``n_fit`` columns of each block is
        summed as a geometric tail.
        """
        D = np.eye(self.matrix.shape[0]) - self.matrix
        N = self.N
        total = 0.0
        for block in (slice(1, N + 1), slice(N + 1, 2 * N + 1)):
            norms = np.linalg.norm(D[:, block], axis=0)
            tail = norms[-n_fit:]
            ok = tail > 0
            if ok.sum() < 2:
                continue
            k = np.arange(tail.size)[ok]
            slope, icpt = np.polyfit(k, np.log(tail[ok]), 1)
            r = math.exp(min(slope, -1e-3) * 2)
            last = math.exp(2 * (icpt + slope * (tail.size - 1)))
            total += last * r / (1 - r)
        return math.sqrt(total)


def build_truncation(plan: NodePlan, w: WeightScheme, table=None, samples: NodeSamples | None = None) -> OperatorTruncation:
    N = plan.N
    if samples is None:
        samples = sample_basis(plan, table)
    S = samples
    T = np.zeros((2 * N + 1, 2 * N + 1))
    j = slice(1, N + 1)
    J = slice(N + 1, 2 * N + 1)
    # z-slot row: F(x_0) + Fhat(y_0)
    T[0, 0] = S.a_x[0, 0] + S.a_y[0, 0]
    T[0, j] = S.a_x[1:, 0] + S.ah_y[1:, 0]
    T[0, J] = S.ah_x[1:, 0] + S.a_y[1:, 0]
    # space rows F(x_k)
    T[j, 0] = S.a_x[0, 1:]
    T[j, j] = S.a_x[1:, 1:].T
    T[j, J] = S.ah_x[1:, 1:].T
    # frequency rows Fhat(y_k); ahat_0 = a_0 and the Fourier transform swaps a, ahat
    T[J, 0] = S.a_y[0, 1:]
    T[J, j] = S.ah_y[1:, 1:].T
    T[J, J] = S.a_y[1:, 1:].T
    wts = slot_weights(w, N)
    M = T * wts[:, None] / wts[None, :]
    return OperatorTruncation(N, M, wts, w, plan)


def hs_defect(op) -> float:
    M = op.matrix if isinstance(op, OperatorTruncation) else np.asarray(op)
    return float(np.linalg.norm(np.eye(M.shape[0]) - M, "fro"))


class NeumannError(ArithmeticError):
    pass


@dataclass
class InverseReport:
    inverse: np.ndarray
    method: str
    terms: int = 0
    last_increment: float = 0.0
    condition: float = float("nan")


def invert_neumann(op, tol: float = 1e-15, max_terms: int = 1000) -> InverseReport:
    """``sum_k (I - M)^k`` until the increment's Frobenius norm drops below ``tol``."""
    M = op.matrix if isinstance(op, OperatorTruncation) else np.asarray(op, dtype=float)
    d = hs_defect(M)
    if d >= 1:
        raise NeumannError(f"Neumann inapplicable: defect {d:.4g} >= 1")
    E = np.eye(M.shape[0]) - M
    total = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, max_terms + 1):
        term = term @ E
        total += term
        inc = float(np.linalg.norm(term, "fro"))
        if inc < tol:
            return InverseReport(total, "neumann", k, inc)
    raise NeumannError(f"no convergence in {max_terms} terms (last increment {inc:.3g})")


def invert_direct(op, rcond: float = 1e-13) -> InverseReport:
    """LU inverse with a 1-norm condition number."""
    M = op.matrix if isinstance(op, OperatorTruncation) else np.asarray(op, dtype=float)
    try:
        inv = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("matrix is singular to working precision") from exc
    cond = float(np.linalg.norm(M, 1) * np.linalg.norm(inv, 1))
    if not np.isfinite(cond) or cond * rcond > 1:
        raise np.linalg.LinAlgError(f"matrix is singular to working precision (cond ~ {cond:.3g})")
    return InverseReport(inv, "direct", condition=cond)


def unweighted_inverse(op: OperatorTruncation, inverse: np.ndarray) -> np.ndarray:
    w = op.weights
    return inverse * w[None, :] / w[:, None]


@dataclass
class PerturbedBasisCoeffs:
    """Expansion coefficients of the perturbed basis in ``(a_0, a_1..a_N, ahat_1..ahat_N)``.

    ``h[:, n]`` belongs to the sample ``f(x_n)`` (``n = 0`` is the combined
    slot ``f(x_0) + fhat(y_0)``) and ``g[:, n-1]`` to ``fhat(y_n)``.
    """

    N: int
    h: np.ndarray
    g: np.ndarray

    def gamma(self, n: int):
        """``(gamma_{n,k})_{k<=N}`` on ``a_k`` and ``(gammatilde_{n,k})_{k<=N}`` on ``ahat_k``."""
        col = self.h[:, n]
        gt = np.concatenate([[0.0], col[self.N + 1 :]])
        return col[: self.N + 1].copy(), gt

    def row_sums(self) -> np.ndarray:
        return np.abs(self.h).sum(axis=0)


def perturbed_coeffs(op: OperatorTruncation, inverse: np.ndarray) -> PerturbedBasisCoeffs:
    Tinv = unweighted_inverse(op, inverse)
    N = op.N
    return PerturbedBasisCoeffs(N, Tinv[:, : N + 1], Tinv[:, N + 1 :])


def coefficient_decay(coeffs: PerturbedBasisCoeffs, n: int, k_min: int | None = None) -> float:
    """Fitted exponential decay rate of ``|gamma_{n,k}|`` in ``k > n``."""
    g, _ = coeffs.gamma(n)
    k = np.arange(coeffs.N + 1)
    lo = n + 1 if k_min is None else k_min
    sel = (k >= lo) & (np.abs(g) > 0)
    if sel.sum() < 3:
        raise ValueError("not enough nonzero coefficients to fit a rate")
    slope = np.polyfit(k[sel], np.log(np.abs(g[sel])), 1)[0]
    return float(-slope)


def synthesis_matrix(N: int, x, precision: str = "extended") -> np.ndarray:
    """Rows ``a_0, a_1..a_N, ahat_1..ahat_N`` evaluated at ``x``."""
    a, ah = basis_values(N, x, precision)
    return np.concatenate([a[:1], a[1:], ah[1:]], axis=0)


def eval_perturbed_basis(coeffs: PerturbedBasisCoeffs, x, precision: str = "extended"):
    """``(h, g)`` at ``x``: ``h`` has shape ``(N+1, len(x))``, ``g`` ``(N, len(x))``."""
    Phi = synthesis_matrix(coeffs.N, x, precision)
    return coeffs.h.T @ Phi, coeffs.g.T @ Phi


def node_residual(coeffs: PerturbedBasisCoeffs, plan: NodePlan, n_max: int | None = None) -> float:
    """``max |h_n(x_m) - delta_nm|`` and the frequency analogue, ``1 <= n, m <= n_max``."""
    N = coeffs.N
    n_max = N if n_max is None else n_max
    s = np.concatenate([plan.x_squared[1 : n_max + 1], plan.y_squared[1 : n_max + 1]])
    bp, bm = _evaluator_for(max(N, 1)).values(s)
    a, ah = (bp + bm)[: N + 1].real, (bp - bm)[: N + 1].real
    m = n_max
    Phi_x = np.concatenate([a[:1, :m], a[1:, :m], ah[1:, :m]])
    # Fourier side: a_j -> ahat_j, ahat_j -> a_j, a_0 -> a_0
    Phi_yhat = np.concatenate([a[:1, m:], ah[1:, m:], a[1:, m:]])
    H = coeffs.h[:, 1 : n_max + 1]
    G = coeffs.g[:, :n_max]
    eye = np.eye(n_max)
    r = [
        np.abs(H.T @ Phi_x - eye).max(),
        np.abs(G.T @ Phi_yhat - eye).max(),
        np.abs(H.T @ Phi_yhat).max(),
        np.abs(G.T @ Phi_x).max(),
    ]
    return float(max(r))
