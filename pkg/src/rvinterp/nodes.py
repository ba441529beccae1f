"""Node sequences sqrt(n + eps_n), decay checks, pair classification and node matching."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Perturbation:
    """A sequence ``eps_n``, ``n >= 0``.

    ``kind`` is one of ``"zero"``, ``"power"`` (``c (1+n)^-alpha``), ``"exp"``
    (``c exp(-C n)``), ``"alternating"`` (``c (-1)^n (1+n)^-alpha``) or
    ``"list"`` (explicit values, zero beyond the list).
    """

    kind: str = "zero"
    params: tuple = ()
    values: tuple = ()

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def power(cls, c: float, alpha: float):
        return cls("power", (float(c), float(alpha)))

    @classmethod
    def exponential(cls, c: float, C: float):
        return cls("exp", (float(c), float(C)))

    @classmethod
    def alternating(cls, c: float, alpha: float):
        return cls("alternating", (float(c), float(alpha)))

    @classmethod
    def from_list(cls, values):
        return cls("list", (), tuple(float(v) for v in values))

    @classmethod
    def parse(cls, spec: str) -> "Perturbation":
        """Parse ``"power:c,alpha"``, ``"exp:c,C"``, ``"file:PATH"`` or ``"zero"``."""
        if spec in ("", "zero", "0"):
            return cls.zero()
        kind, _, rest = spec.partition(":")
        if kind == "file":
            with open(rest) as fh:
                text = fh.read()
            try:
                vals = json.loads(text)
            except json.JSONDecodeError:
                vals = [float(v) for v in text.replace(",", " ").split()]
            return cls.from_list(vals)
        nums = [float(v) for v in rest.split(",")] if rest else []
        if kind == "power" and len(nums) == 2:
            return cls.power(*nums)
        if kind == "exp" and len(nums) == 2:
            return cls.exponential(*nums)
        if kind == "alternating" and len(nums) == 2:
            return cls.alternating(*nums)
        raise ValueError(f"cannot parse perturbation {spec!r}")

    def __call__(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(n)
        if self.kind == "power":
            c, a = self.params
            return c * (1 + n) ** (-a)
        if self.kind == "exp":
            c, C = self.params
            return c * np.exp(-C * n)
        if self.kind == "alternating":
            c, a = self.params
            return c * np.where(n % 2 == 0, 1.0, -1.0) * (1 + n) ** (-a)
        if self.kind == "list":
            vals = np.asarray(self.values, dtype=float)
            idx = n.astype(int)
            out = np.zeros_like(n)
            ok = idx < vals.size
            out[ok] = vals[idx[ok]]
            return out
        raise ValueError(f"unknown perturbation kind {self.kind!r}")

    def is_zero(self, N: int) -> bool:
        return bool(np.all(self(np.arange(N + 1)) == 0))

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("power", "alternating"):
            d.update(c=self.params[0], alpha=self.params[1])
        elif self.kind == "exp":
            d.update(c=self.params[0], C=self.params[1])
        elif self.kind == "list":
            d["values"] = list(self.values)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Perturbation":
        kind = d["kind"]
        if kind == "zero":
            return cls.zero()
        if kind in ("power", "alternating"):
            return cls(kind, (float(d["c"]), float(d["alpha"])))
        if kind == "exp":
            return cls.exponential(d["c"], d["C"])
        if kind == "list":
            return cls.from_list(d["values"])
        raise ValueError(f"unknown perturbation kind {kind!r}")


@dataclass
class NodePlan:
    """Space nodes ``x_n = sqrt(n + eps_n)`` and frequency nodes ``y_n = sqrt(n + delta_n)``.

    ``delta`` defaults to ``eps``.  The squared nodes ``n + eps_n`` are kept
    because the basis is evaluated as a function of ``x^2``.
    """

    eps: Perturbation
    N: int
    delta: Perturbation | None = None

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("truncation N must be >= 0")
        for name, s in (("space", self.x_squared), ("frequency", self.y_squared)):
            if s[0] < 0 or np.any(s[1:] <= 0):
                raise ValueError(f"{name} nodes are not real: need eps_0 >= 0 and eps_n > -n")
            if np.any(np.diff(s) <= 0):
                raise ValueError(f"{name} nodes are not strictly increasing")

    @property
    def freq(self) -> Perturbation:
        return self.delta if self.delta is not None else self.eps

    @property
    def x_squared(self) -> np.ndarray:
        n = np.arange(self.N + 1)
        return n + self.eps(n)

    @property
    def y_squared(self) -> np.ndarray:
        n = np.arange(self.N + 1)
        return n + self.freq(n)

    @property
    def x(self) -> np.ndarray:
        return np.sqrt(self.x_squared)

    @property
    def y(self) -> np.ndarray:
        return np.sqrt(self.y_squared)

    @property
    def unperturbed(self) -> bool:
        return self.eps.is_zero(self.N) and self.freq.is_zero(self.N)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "eps": self.eps.to_json(),
            "delta": None if self.delta is None else self.delta.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "NodePlan":
        delta = d.get("delta")
        return cls(
            Perturbation.from_json(d["eps"]),
            int(d["N"]),
            None if delta is None else Perturbation.from_json(delta),
        )


@dataclass
class DecayReport:
    admissible: bool
    worst_index: int
    max_ratio: float
    c: float
    delta: float


def check_decay(eps, c: float, delta: float, n_max: int = 1000) -> DecayReport:
    """Check ``|eps_n| < c (1+n)^(-5/4-delta)`` for ``n <= n_max``.

    ``eps`` is a :class:`Perturbation` or an explicit array (then ``n_max`` is
    its length minus one).
    """
    if isinstance(eps, Perturbation):
        n = np.arange(n_max + 1)
        vals = eps(n)
    else:
        vals = np.asarray(eps, dtype=float)
        n = np.arange(vals.size)
    if vals.size == 0:
        return DecayReport(True, -1, 0.0, c, delta)
    ratio = np.abs(vals) * (1.0 + n) ** (1.25 + delta)
    worst = int(np.argmax(ratio))
    m = float(ratio[worst])
    return DecayReport(m < c, worst, m, c, delta)


# ---------------------------------------------------------------------------
# supercritical / subcritical classification
# ---------------------------------------------------------------------------


INDETERMINATE_TOL = 0.02


@dataclass
class PairClassification:
    verdict: str
    x_sup: float
    x_inf: float
    y_sup: float
    y_inf: float
    window: tuple


def gap_functional(xs, p: float) -> np.ndarray:
    """``|x_{n+1}|^(p-1) |x_{n+1} - x_n|`` for consecutive entries."""
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) < 0):
        raise ValueError("sequence must be non-decreasing")
    return np.abs(xs[1:]) ** (p - 1) * np.abs(np.diff(xs))


def classify_pair(xs, ys, p: float = 2.0, q: float | None = None, n_window: int | None = None) -> PairClassification:
    """Empirical tail sup/inf of the gap functionals and the resulting verdict.

    The tail is the upper half of the first ``n_window`` gaps.  The pair is
    supercritical when both sups are below 1/2, subcritical when both infs
    are above 1/2, and indeterminate when a relevant value is within
    ``INDETERMINATE_TOL`` of 1/2 or the two sequences disagree.
    """
    if q is None:
        q = p / (p - 1)
    if p <= 1 or q <= 1 or abs(1 / p + 1 / q - 1) > 1e-12:
        raise ValueError("need p, q > 1 with 1/p + 1/q = 1")
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 4 or ys.size < 4:
        raise ValueError("need at least four nodes per sequence")
    fx = gap_functional(xs, p)
    fy = gap_functional(ys, q)
    n = min(fx.size, fy.size) if n_window is None else min(n_window, fx.size, fy.size)
    lo = n // 2
    tx, ty = fx[lo:n], fy[lo:n]
    xsup, xinf, ysup, yinf = tx.max(), tx.min(), ty.max(), ty.min()
    half = 0.5
    if xsup < half - INDETERMINATE_TOL and ysup < half - INDETERMINATE_TOL:
        verdict = "supercritical"
    elif xinf > half + INDETERMINATE_TOL and yinf > half + INDETERMINATE_TOL:
        verdict = "subcritical"
    else:
        verdict = "indeterminate"
    return PairClassification(verdict, float(xsup), float(xinf), float(ysup), float(yinf), (lo, n))


# ---------------------------------------------------------------------------
# nearest-node matching
# ---------------------------------------------------------------------------


@dataclass
class NodeMatch:
    """``m[k]`` is the node index matched to ``sqrt(n[k])``."""

    n: np.ndarray
    m: np.ndarray
    eps: np.ndarray
    covered_up_to: int
    admissible: bool
    exponent: float
    decay: DecayReport | None = None
    notes: list = field(default_factory=list)


def match_nodes(xs, D: float | None = None, c_D: float = 1.0, n_max: int | None = None) -> NodeMatch:
    """Match each ``sqrt(n)`` to the nearer endpoint of its enclosing interval.

    Ties go to the lower index.
    Returns the induced perturbation ``eps_n = x_{m(n)}^2 - n``.  When the
    nodes come with a closeness exponent ``D`` (``|x_m - sqrt(n)| <= c_D n^(-D/2)``)
    the induced perturbation decays like ``n^((1-D)/2)``, which meets the
    ``5/4 + delta`` envelope exactly when ``D > 7/2``.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ValueError("empty node sequence")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("nodes must be strictly increasing")
    notes = []
    top = xs[-1] ** 2
    if n_max is None:
        n_max = int(math.floor(top))
        if math.sqrt(n_max + 1) <= xs[-1]:
            n_max += 1  # x_last^2 rounded just below an integer
    # sqrt(n) must lie in some [x_i, x_{i+1}); the last interval is open-ended
    # only up to x_last, so n is covered when sqrt(n) < x_last or equals it
    ns = np.arange(0, n_max + 1)
    roots = np.sqrt(ns)
    covered = (roots >= xs[0]) & (roots <= xs[-1])
    if not covered.all():
        first_bad = ns[~covered]
        notes.append(f"sqrt(n) outside node range for n in [{first_bad.min()}, {first_bad.max()}]")
    ns = ns[covered]
    roots = roots[covered]
    # locate the interval [x_i, x_{i+1}) and keep whichever endpoint is nearer
    i = np.searchsorted(xs, roots, side="right") - 1
    j = np.minimum(i + 1, xs.size - 1)
    m = np.where(np.abs(xs[j] - roots) < np.abs(roots - xs[i]), j, i)
    # factored form: exactly zero when the node is the rounded sqrt(n)
    eps = (xs[m] - roots) * (xs[m] + roots)
    covered_up_to = int(ns.max()) if ns.size else -1
    admissible = True
    exponent = float("nan")
    decay = None
    if D is not None:
        exponent = (D - 1) / 2
        admissible = exponent > 1.25
        if admissible:
            delta = exponent - 1.25
            # |eps_n| <= 2 c_D sqrt(n) n^(-D/2) + c_D^2 n^(-D); envelope constant
            c = 2 * c_D + c_D**2 + 1e-12
            # the closeness hypothesis says nothing about n = 0
            tail = np.where(ns >= 1, np.abs(eps), 0.0)
            full = np.zeros(int(ns.max()) + 1 if ns.size else 0)
            full[ns] = tail
            decay = check_decay(full, c * 2 ** (1.25 + delta), delta)
            admissible = decay.admissible
        else:
            notes.append(f"(D-1)/2 = {exponent:.3f} does not exceed 5/4")
    return NodeMatch(ns, m, eps, covered_up_to, admissible, exponent, decay, notes)
