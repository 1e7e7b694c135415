"""Basis-function families, design matrices, and deterministic subset enumeration.

Supported families are 1-D monomials, 1-D Legendre polynomials, and 2-D
products of either family. All functions are meant to be evaluated on
inputs rescaled to [-1, 1] per axis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "BasisFunction",
    "BasisSet",
    "DesignMatrix",
    "legendre_value",
    "eval_basis",
    "total_degree_set",
    "build_design_matrix",
    "enumerate_subsets",
    "subset_count",
    "subset_at",
]

_KINDS = ("monomial", "legendre", "product")
_FAMILIES = ("monomial", "legendre")


def legendre_value(n: int, x):
    """Evaluate the Legendre polynomial P_n at x (scalar or array).

    Uses the ascending three-term recurrence
    (k+1) P_{k+1}(x) = (2k+1) x P_k(x) - k P_{k-1}(x),
    which is numerically stable on [-1, 1].
    """
    if n < 0:
        raise ValueError("Legendre degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.ones_like(x)
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p


def _factor_value(family: str, degree: int, x):
    if family == "legendre":
        return legendre_value(degree, x)
    return np.asarray(x, dtype=float) ** degree


def _factor_label(family: str, degree: int, var: str) -> str:
    if degree == 0:
        return ""
    if family == "legendre":
        return f"P{degree}({var})"
    return var if degree == 1 else f"{var}^{degree}"


@dataclass(frozen=True)
class BasisFunction:
    """A single basis function.

    kind is "monomial" or "legendre" for 1-D terms, "product" for 2-D
    tensor products. degrees holds (r, s); s must be 0 for 1-D kinds.
    family selects the factor family of the product kind.
    """

    kind: str
    degrees: tuple[int, int]
    family: str = "monomial"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown factor family {self.family!r}")
        r, s = self.degrees
        if not (isinstance(r, int) and isinstance(s, int)) or r < 0 or s < 0:
            raise ValueError("degrees must be nonnegative integers")
        if self.kind != "product" and s != 0:
            raise ValueError("1-D basis functions must have s == 0")

    @property
    def dimension(self) -> int:
        return 2 if self.kind == "product" else 1

    @property
    def total_degree(self) -> int:
        return self.degrees[0] + self.degrees[1]

    def label(self) -> str:
        r, s = self.degrees
        if self.kind == "monomial":
            return _factor_label("monomial", r, "x") or "1"
        if self.kind == "legendre":
            return _factor_label("legendre", r, "x") or "1"
        fx = _factor_label(self.family, r, "x")
        fy = _factor_label(self.family, s, "y")
        if not fx and not fy:
            return "1"
        return f"{fx}*{fy}" if fx and fy else (fx or fy)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an (N, d) array of points; returns shape (N,)."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise ValueError(
                f"basis function {self.label()!r} expects points of dimension "
                f"{self.dimension}, got array of shape {points.shape}"
            )
        r, s = self.degrees
        if self.kind == "product":
            return _factor_value(self.family, r, points[:, 0]) * _factor_value(
                self.family, s, points[:, 1]
            )
        return _factor_value(self.kind, r, points[:, 0])


def eval_basis(f: BasisFunction, point: Sequence[float]) -> float:
    """Evaluate one basis function at a single d-dimensional point."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if pt.ndim != 1 or pt.shape[0] != f.dimension:
        raise ValueError(
            f"point has dimension {pt.shape[0] if pt.ndim == 1 else pt.shape}, "
            f"basis function {f.label()!r} expects {f.dimension}"
        )
    return float(f.evaluate(pt.reshape(1, -1))[0])


@dataclass(frozen=True, eq=False)
class BasisSet:
    """An ordered, duplicate-free collection of same-dimension basis functions."""

    functions: tuple[BasisFunction, ...]

    def __post_init__(self):
        if len(self.functions) < 1:
            raise ValueError("a basis set needs at least one function")
        dims = {f.dimension for f in self.functions}
        if len(dims) != 1:
            raise ValueError("all basis functions must share the same dimensionality")
        if len(set(self.functions)) != len(self.functions):
            raise ValueError("duplicate basis functions in set")

    @property
    def dimension(self) -> int:
        return self.functions[0].dimension

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def __getitem__(self, i: int) -> BasisFunction:
        return self.functions[i]

    def labels(self) -> list[str]:
        return [f.label() for f in self.functions]

    def describe(self) -> str:
        return ", ".join(self.labels())

    def subset(self, indices: Sequence[int]) -> "BasisSet":
        """Sub-basis keeping the given column indices, in the given order."""
        return BasisSet(tuple(self.functions[i] for i in indices))


def total_degree_set(q: int, d: int, family: str = "monomial") -> BasisSet:
    """All basis functions of total degree at most q in d variables.

    For d=1 the set is the degrees 0..q of the requested family (size q+1).
    For d=2 it is every product with r+s <= q, size (q+1)(q+2)/2, ordered by
    total degree and, within a degree, by descending x-degree, i.e.
    1, x, y, x^2, x*y, y^2, ...

    Args:
        q: maximum total degree, >= 0.
        d: dimensionality, 1 or 2.
        family: "monomial" or "legendre".
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if d not in (1, 2):
        raise ValueError("dimensionality must be 1 or 2")
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if d == 1:
        funcs = tuple(BasisFunction(family, (k, 0)) for k in range(q + 1))
    else:
        funcs = tuple(
            BasisFunction("product", (r, t - r), family)
            for t in range(q + 1)
            for r in range(t, -1, -1)
        )
    return BasisSet(funcs)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Evaluation of a basis set at N sample points: values[n, m] = w_m(x_n)."""

    values: np.ndarray
    basis: BasisSet

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def column_labels(self) -> list[str]:
        return self.basis.labels()

    @property
    def underdetermined(self) -> bool:
        """True when N <= l; fitting and evidence will refuse such a matrix."""
        return self.n_rows <= self.n_cols


def _as_points(points, dimension: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise ValueError(f"points must be an (N, d) array, got shape {pts.shape}")
    if pts.shape[1] != dimension:
        raise ValueError(
            f"points have dimension {pts.shape[1]}, basis expects {dimension}"
        )
    if pts.shape[0] < 1:
        raise ValueError("at least one sample point is required")
    if not np.isfinite(pts).all():
        raise ValueError("sample points must be finite")
    return pts


def build_design_matrix(points, basis: BasisSet) -> DesignMatrix:
    """Build the N x l design matrix of a basis set at the sample points.

    Column order follows the basis-set order; column m of a sub-basis built
    with BasisSet.subset equals the corresponding column of the full matrix.
    """
    pts = _as_points(points, basis.dimension)
    cols = [f.evaluate(pts) for f in basis]
    values = np.column_stack(cols)
    return DesignMatrix(values=values, basis=basis)


def subset_count(n_functions: int, sizes: Sequence[int]) -> int:
    """Number of subsets enumerate_subsets will yield."""
    return sum(math.comb(n_functions, k) for k in sorted(set(sizes)))


def _combination_at(n: int, k: int, rank: int) -> tuple[int, ...]:
    """The rank-th (0-based) k-combination of range(n) in lexicographic order."""
    if not 0 <= rank < math.comb(n, k):
        raise ValueError(f"rank {rank} out of range for C({n},{k})")
    out = []
    v = 0
    for slot in range(k, 0, -1):
        while True:
            block = math.comb(n - v - 1, slot - 1)
            if rank < block:
                break
            rank -= block
            v += 1
        out.append(v)
        v += 1
    return tuple(out)


def subset_at(n_functions: int, sizes: Sequence[int], index: int) -> tuple[int, tuple[int, ...]]:
    """Decode a global sequence index into (size, kept column indices).

    The sequence order matches enumerate_subsets: smaller sizes first, and
    within a size the kept-index tuples in lexicographic order (equivalently,
    subsets dropping later columns come first).
    """
    remaining = index
    for k in sorted(set(sizes)):
        block = math.comb(n_functions, k)
        if remaining < block:
            return k, _combination_at(n_functions, k, remaining)
        remaining -= block
    raise ValueError(f"index {index} out of range for sizes {sorted(set(sizes))}")


def iter_subset_indices(
    n_functions: int, sizes: Sequence[int], start: int = 0, stop: int | None = None
) -> Iterator[tuple[int, int, tuple[int, ...]]]:
    """Yield (sequence index, size, kept indices) over a global index range.

    Streaming: nothing is materialized, so arbitrarily large searches can be
    consumed in deterministic chunks (used for parallel evaluation).
    """
    sizes_sorted = sorted(set(sizes))
    for k in sizes_sorted:
        if not 1 <= k <= n_functions:
            raise ValueError(f"subset size {k} invalid for a set of {n_functions}")
    total = subset_count(n_functions, sizes_sorted)
    if stop is None:
        stop = total
    if not 0 <= start <= stop <= total:
        raise ValueError(f"invalid range [{start}, {stop}) for {total} subsets")
    if start == stop:
        return
    index = start
    k0, first = subset_at(n_functions, sizes_sorted, start)
    offset = 0
    for k in sizes_sorted:
        block = math.comb(n_functions, k)
        if k == k0:
            local = start - offset
            it = itertools.islice(itertools.combinations(range(n_functions), k), local, None)
        elif k > k0:
            it = itertools.combinations(range(n_functions), k)
        else:
            offset += block
            continue
        offset += block
        for kept in it:
            yield index, k, kept
            index += 1
            if index == stop:
                return


def enumerate_subsets(full: BasisSet, sizes: Sequence[int]) -> Iterator[tuple[int, BasisSet]]:
    """Yield (sequence index, sub-basis) for all subsets of the requested sizes.

    Ordering: all subsets of the smallest size first, then the next size;
    within a size, kept-index tuples run in lexicographic order, so the
    subsets that drop the later list elements come first. The order is
    stable across runs.
    """
    for index, _k, kept in iter_subset_indices(len(full), sizes):
        yield index, full.subset(kept)
