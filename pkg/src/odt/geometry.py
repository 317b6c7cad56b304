"""Polynomial embedding, hypersurfaces through point combinations, side tests."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from math import comb
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, IndexSet, ODTError, to_mask

SIDE_TOL = 1e-9
RANK_TOL = 1e-9


class DegenerateCombinationError(ODTError):
    """The chosen points do not pin down a unique hypersurface."""


class NumericError(ODTError, ArithmeticError):
    pass


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials of degree <= ``degree`` in ``dim`` variables, graded lexicographic.

    ``exponents[j][i]`` is the power of x_i in the j-th monomial; the constant
    term comes first, then x_1..x_D, then x_1^2, x_1 x_2, ..., and so on.
    """

    dim: int
    degree: int
    exponents: tuple

    @property
    def size(self) -> int:
        return len(self.exponents)

    def names(self, var: str = "x") -> list:
        out = []
        for e in self.exponents:
            parts = []
            for i, p in enumerate(e):
                if p == 1:
                    parts.append(f"{var}{i + 1}")
                elif p > 1:
                    parts.append(f"{var}{i + 1}^{p}")
            out.append("*".join(parts) or "1")
        return out


def monomials(D: int, M: int) -> MonomialBasis:
    if D < 1 or M < 0:
        raise ValueError(f"need D >= 1 and M >= 0 (got D={D}, M={M})")
    exps = []
    for deg in range(M + 1):
        for vars_ in combinations_with_replacement(range(D), deg):
            e = [0] * D
            for v in vars_:
                e[v] += 1
            exps.append(tuple(e))
    return MonomialBasis(D, M, tuple(exps))


def surface_arity(D: int, M: int) -> int:
    """Points needed to fix a rule: 1 for axis rules (M = 0), else C(D+M, D) - 1."""
    return 1 if M == 0 else comb(D + M, D) - 1


def veronese_embed(x, basis: MonomialBasis) -> np.ndarray:
    """Evaluate every monomial of ``basis`` at one point (1-D input) or at each row."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != basis.dim:
        raise ValueError(f"point dimension {X.shape[1]} != basis dimension {basis.dim}")
    E = np.array(basis.exponents, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.prod(X[:, None, :] ** E[None, :, :], axis=2)
    if not np.all(np.isfinite(out)):
        raise NumericError("embedding overflowed to a non-finite value")
    return out[0] if single else out


@dataclass(frozen=True)
class Hypersurface:
    degree: int
    normal: tuple
    defining: tuple
    basis: MonomialBasis

    def value(self, x) -> float:
        return float(np.dot(self.normal, veronese_embed(x, self.basis)))

    def values(self, X) -> np.ndarray:
        return veronese_embed(X, self.basis) @ np.asarray(self.normal)


def canonical_sign(w: np.ndarray) -> np.ndarray:
    """Flip ``w`` so its last significant coefficient is positive.

    The last slot is the highest-degree monomial, so "x - 3" and "x^2 - 1"
    keep their textbook orientation.
    """
    scale = np.abs(w).max()
    sig = np.flatnonzero(np.abs(w) > 1e-12 * scale)
    if sig.size and w[sig[-1]] < 0:
        w = -w
    return w


def fit_hypersurface(indices: Sequence[int], ds: Dataset, basis: MonomialBasis) -> Hypersurface:
    """Unit normal of the unique degree-M surface through the given points."""
    idx = tuple(int(i) for i in indices)
    need = basis.size - 1
    if len(idx) != need:
        raise ValueError(f"need exactly {need} points for degree {basis.degree} in R^{basis.dim}")
    A = veronese_embed(ds.points[list(idx)], basis)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size else 0
    if rank < need:
        raise DegenerateCombinationError(f"points {idx} span rank {rank} < {need}")
    w = vt[-1]
    w = canonical_sign(w / np.linalg.norm(w))
    w = np.where(np.abs(w) < 1e-15, 0.0, w)
    return Hypersurface(basis.degree, tuple(float(v) for v in w), idx, basis)


def _tolerance(h: Hypersurface, emb: np.ndarray) -> np.ndarray:
    return SIDE_TOL * np.linalg.norm(h.normal) * np.linalg.norm(emb, axis=-1)


def side_of(h: Hypersurface, x) -> int:
    """+1 when the surface polynomial is >= 0 (on-surface counts as positive), else -1."""
    emb = veronese_embed(x, h.basis)
    v = float(np.dot(h.normal, emb))
    return 1 if v >= -_tolerance(h, emb) else -1


def assign_sides(h: Hypersurface, ds: Dataset) -> tuple:
    emb = veronese_embed(ds.points, h.basis)
    vals = emb @ np.asarray(h.normal)
    positive = vals >= -_tolerance(h, emb)
    # defining points lie on the surface by construction; pin them against rounding
    positive[list(h.defining)] = True
    pos = to_mask(np.flatnonzero(positive))
    return pos, ds.full & ~pos


def cover_count(N: int, D: int) -> int:
    """Number of linearly separable dichotomies of N points in general position in R^D."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return 2 * sum(comb(N - 1, d) for d in range(D + 1))


def general_position_check(ds: Dataset, basis: MonomialBasis, sample_budget: int = 2000,
                           rng: Optional[np.random.Generator] = None) -> bool:
    """True if no (G+1)-subset of embedded points is rank deficient.

    Exhaustive when there are at most ``sample_budget`` subsets, sampled otherwise.
    """
    G = basis.size - 1
    m = G + 1
    if ds.n < m:
        return True
    emb = veronese_embed(ds.points, basis)
    if comb(ds.n, m) <= sample_budget:
        subsets = combinations(range(ds.n), m)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        subsets = (tuple(sorted(rng.choice(ds.n, m, replace=False))) for _ in range(sample_budget))
    for sub in subsets:
        s = np.linalg.svd(emb[list(sub)], compute_uv=False)
        if s[0] == 0 or np.sum(s > RANK_TOL * s[0]) < m:
            return False
    return True
