"""Evaluate Theta_2, Theta_3, Theta_4, lambda and J on the upper half-plane.

Points are first moved to ``{|Re z| <= 1/2, |z| >= 1}`` with ``z -> z + m``
and ``z -> -1/z``; the theta triple transforms as a permutation times
automorphy factors, so values at the original point are recovered exactly
from the rapidly convergent ``w = exp(i pi z)`` series at the reduced point.

Two backends share the same reduction: numpy ``complex128`` arrays and
python-flint ``acb`` balls for arbitrary precision.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

MAX_WORD = 64
# reduced points satisfy Im z >= sqrt(3)/2, so |w| <= exp(-pi sqrt(3)/2) ~ 0.066
_N_TERMS_DOUBLE = 9

# index of Theta_2, Theta_3, Theta_4 inside a triple
T2, T3, T4 = 0, 1, 2
_INDEX = {2: T2, 3: T3, 4: T4}


class ReductionError(ArithmeticError):
    """Raised when a point cannot be reduced within ``MAX_WORD`` steps."""

    def __init__(self, msg, best_point):
        super().__init__(msg)
        self.best_point = best_point


@dataclass
class ReductionWord:
    """Steps taken from the input point to the reduced point.

    ``steps`` holds ``"S"`` (``z -> -1/z``) and ``("T", m)`` (``z -> z + m``).
    Theta values satisfy ``Theta[i](z0) = factors[i] * Theta[perm[i]](point)``
    with indices 0, 1, 2 standing for Theta_2, Theta_3, Theta_4.
    """

    original: complex
    point: complex
    steps: list = field(default_factory=list)
    perm: tuple = (T2, T3, T4)
    factors: tuple = (1 + 0j, 1 + 0j, 1 + 0j)

    def apply(self, z: complex) -> complex:
        for st in self.steps:
            if st == "S":
                z = -1 / z
            else:
                z = z + st[1]
        return z

    @property
    def weight_half_factor(self) -> complex:
        """Automorphy factor of Theta_3."""
        return self.factors[T3]


def _translate_map(m: int):
    """Theta_j(z_new + m) = f_j * Theta_{q_j}(z_new)."""
    odd = m % 2 != 0
    q = (T2, T4, T3) if odd else (T2, T3, T4)
    f2 = cmath.exp(1j * cmath.pi * m / 4)
    return q, (f2, 1.0, 1.0)


def _s_map(z_new: complex):
    """Theta_j(-1/z_new) = sqrt(-i z_new) * Theta_{q_j}(z_new)."""
    a = -1j * z_new
    assert a.real > 0, "branch cut of (-iz)^(1/2) must not be crossed"
    r = cmath.sqrt(a)
    return (T4, T3, T2), (r, r, r)


def reduce_theta_group(z: complex, max_len: int = MAX_WORD) -> ReductionWord:
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"point {z} is not in the upper half-plane")
    word = ReductionWord(original=z, point=z)
    perm = [T2, T3, T4]
    fac = [1 + 0j, 1 + 0j, 1 + 0j]

    def compose(q, f):
        for i in range(3):
            fac[i] *= f[perm[i]]
            perm[i] = q[perm[i]]

    cur = z
    best = z
    while True:
        m = int(np.floor(cur.real + 0.5))
        if m:
            cur = cur - m
            word.steps.append(("T", -m))
            compose(*_translate_map(m))
        if abs(cur) ** 2 < 1 - 1e-14:
            cur = -1 / cur
            word.steps.append("S")
            compose(*_s_map(cur))
        else:
            break
        if cur.imag > best.imag:
            best = cur
        if len(word.steps) > max_len:
            raise ReductionError(f"reduction of {z} exceeded {max_len} steps", best)
    word.point = cur
    word.perm = tuple(perm)
    word.factors = tuple(fac)
    return word


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _series_triple(z: np.ndarray, n_terms: int = _N_TERMS_DOUBLE) -> np.ndarray:
    w = np.exp(1j * np.pi * z)
    t3 = np.ones_like(w)
    t4 = np.ones_like(w)
    t2 = np.zeros_like(w)
    for k in range(1, n_terms):
        wk = w ** (k * k)
        t3 = t3 + 2 * wk
        t4 = t4 + 2 * (-1) ** k * wk
    for k in range(n_terms):
        t2 = t2 + w ** (k * (k + 1))
    t2 = 2 * np.exp(1j * np.pi * z / 4) * t2
    return np.stack([t2, t3, t4])


def _reduce_arrays(z: np.ndarray, max_len: int = MAX_WORD):
    z = np.asarray(z, dtype=complex).ravel().copy()
    if np.any(z.imag <= 0):
        raise ValueError("all points must lie in the upper half-plane")
    n = z.size
    perm = np.tile(np.arange(3), (n, 1))
    fac = np.ones((n, 3), dtype=complex)
    active = np.ones(n, dtype=bool)
    steps = 0
    while active.any():
        idx = np.nonzero(active)[0]
        m = np.floor(z[idx].real + 0.5).astype(np.int64)
        z[idx] -= m
        # translation: Theta_2 picks up exp(i pi m / 4); odd m swaps 3 <-> 4
        f2 = np.exp(1j * np.pi * m / 4)
        p = perm[idx]
        fac[idx] *= np.where(p == T2, f2[:, None], 1.0)
        odd = (m % 2 != 0)[:, None]
        swapped = np.where(p == T3, T4, np.where(p == T4, T3, p))
        perm[idx] = np.where(odd, swapped, p)

        inside = np.abs(z[idx]) ** 2 < 1 - 1e-14
        sidx = idx[inside]
        z[sidx] = -1 / z[sidx]
        r = np.sqrt(-1j * z[sidx])
        fac[sidx] *= r[:, None]
        p = perm[sidx]
        perm[sidx] = np.where(p == T2, T4, np.where(p == T4, T2, p))
        active[idx[~inside]] = False
        steps += 1
        if steps > max_len + 1 and active.any():
            bad = np.nonzero(active)[0][0]
            raise ReductionError(f"reduction exceeded {max_len} steps", complex(z[bad]))
    return z, perm, fac


def theta_triple(z) -> np.ndarray:
    """Array of shape ``(3, *z.shape)`` holding Theta_2, Theta_3, Theta_4 at ``z``."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zr, perm, fac = _reduce_arrays(z)
    vals = _series_triple(zr)  # (3, n)
    n = zr.size
    out = fac.T * vals[perm.T, np.arange(n)[None, :]]
    return out.reshape((3,) + shape)


def eval_theta(which: int, z):
    return theta_triple(z)[_INDEX[which]]


def eval_lambda(z):
    t2, t3, _ = theta_triple(z)
    return (t2 / t3) ** 4


def eval_J(z):
    t2, t3, t4 = theta_triple(z)
    return (t2 * t4 / (t3 * t3)) ** 4 / 16


def modular_pieces(z) -> dict:
    """theta^3, 1 - 2 lambda, 1/J and J at ``z`` (numpy).

    Each quantity is formed from ratios of the theta triple so that relative
    accuracy survives near the cusps.
    """
    t2, t3, t4 = theta_triple(z)
    a2 = (t2 / t3) ** 4  # lambda
    a4 = (t4 / t3) ** 4  # 1 - lambda
    J = a2 * a4 / 16
    return {
        "theta3": t3**3,
        "theta": t3,
        "one_minus_2lambda": a4 - a2,
        "J": J,
        "Jinv": 16 / (a2 * a4),
        "lambda": a2,
    }


# ---------------------------------------------------------------------------
# arb backend
# ---------------------------------------------------------------------------


def _acb():
    import flint

    return flint


def _series_triple_arb(z, prec_bits: int):
    flint = _acb()
    acb = flint.acb
    w = (acb(0, 1) * acb.pi() * z).exp()
    # |w| <= 0.0664 after reduction; k^2 * 3.91 bits per term
    kmax = 2 + int(np.sqrt(prec_bits / 3.9))
    t3 = acb(1)
    t4 = acb(1)
    for k in range(1, kmax + 1):
        wk = w ** (k * k)
        t3 += 2 * wk
        t4 += 2 * wk if k % 2 == 0 else -2 * wk
    t2 = acb(0)
    for k in range(kmax + 1):
        t2 += w ** (k * (k + 1))
    t2 = 2 * (acb(0, 1) * acb.pi() * z / 4).exp() * t2
    return [t2, t3, t4]


def theta_triple_arb(z, prec_bits: int | None = None):
    """Theta_2, Theta_3, Theta_4 at a single point as ``acb`` balls.

    ``z`` may be a Python complex or an ``acb``; the reduction word is chosen in
    double precision and then replayed exactly at the working precision.
    """
    flint = _acb()
    acb = flint.acb
    if prec_bits is None:
        prec_bits = flint.ctx.prec
    zc = acb(z)
    word = reduce_theta_group(complex(zc.real.mid()) + 1j * float(zc.imag.mid()))
    perm = [T2, T3, T4]
    fac = [acb(1), acb(1), acb(1)]
    cur = zc
    for st in word.steps:
        if st == "S":
            cur = -1 / cur
            r = (acb(0, -1) * cur).sqrt()
            q, f = (T4, T3, T2), (r, r, r)
        else:
            m = -st[1]
            cur = cur - m
            q = (T2, T4, T3) if m % 2 else (T2, T3, T4)
            f = ((acb(0, 1) * acb.pi() * m / 4).exp(), acb(1), acb(1))
        for i in range(3):
            fac[i] = fac[i] * f[perm[i]]
            perm[i] = q[perm[i]]
    vals = _series_triple_arb(cur, prec_bits)
    return [fac[i] * vals[perm[i]] for i in range(3)]


def modular_pieces_arb(z, prec_bits: int | None = None) -> dict:
    t2, t3, t4 = theta_triple_arb(z, prec_bits)
    a2 = (t2 / t3) ** 4
    a4 = (t4 / t3) ** 4
    return {
        "theta3": t3**3,
        "theta": t3,
        "one_minus_2lambda": a4 - a2,
        "J": a2 * a4 / 16,
        "Jinv": 16 / (a2 * a4),
        "lambda": a2,
    }
