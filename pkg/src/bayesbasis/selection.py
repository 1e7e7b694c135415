"""Posterior probabilities over candidate models, subset search, model averaging.

Every candidate gets equal prior weight; evidences are normalized through a
log-sum-exp reduction performed in a fixed order, so results do not depend
on the parallelism degree. An exact fit (zero residual power) receives
probability one, with ties broken toward the smallest model.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import evidence
from .basis import BasisSet, build_design_matrix, subset_at, subset_count, iter_subset_indices
from .regression import FitResult, RankDeficiencyError, fit

__all__ = [
    "ModelCandidate",
    "PosteriorRow",
    "PosteriorTable",
    "AveragedPrediction",
    "evaluate_models",
    "subset_search",
    "model_average",
]

# Rows below this posterior mass may be skipped when averaging predictions.
PROBABILITY_FLOOR = 1e-12
# y must be centered this tightly (relative to its rms) before evaluation.
CENTERED_TOL = 1e-9
# Subsets are evaluated in fixed-size batches; the batch grid is global, so
# chunking across workers never changes any per-subset value.
_BATCH = 512

_METHOD_NAMES = {0: "closed-form", 1: "quadrature", 2: "closed-form"}


@dataclass(frozen=True)
class ModelCandidate:
    """One entry of a model family: a stable id, a basis set, and a label."""

    id: int
    basis: BasisSet
    label: str = ""

    def describe(self) -> str:
        return self.label or self.basis.describe()


@dataclass(frozen=True)
class PosteriorRow:
    """Per-candidate outcome; probability is 0.0 for flagged rows."""

    id: int
    l: int
    label: str
    log_z: float
    probability: float
    chi_eps2: float
    method: str
    degenerate_exact_fit: bool = False
    flag: str | None = None


@dataclass(frozen=True)
class PosteriorTable:
    """Normalized posterior over a candidate family.

    rows are ordered by candidate id for family evaluations and by
    descending evidence for subset searches. n_models counts every
    evaluated candidate, which can exceed len(rows) when only the top
    slice is retained; log_norm is the log normalization constant over
    all evaluated candidates.
    """

    rows: tuple[PosteriorRow, ...]
    n_models: int
    log_norm: float
    n_flagged: int = 0

    @property
    def covered_probability(self) -> float:
        return math.fsum(r.probability for r in self.rows)

    def best(self) -> PosteriorRow:
        return max(self.rows, key=lambda r: (r.probability, r.log_z))

    def row_by_id(self, candidate_id: int) -> PosteriorRow:
        for r in self.rows:
            if r.id == candidate_id:
                return r
        raise KeyError(f"no row with id {candidate_id}")


@dataclass(frozen=True, eq=False)
class AveragedPrediction:
    """Posterior-weighted prediction with the between-model spread."""

    points: np.ndarray
    mean: np.ndarray
    spread: np.ndarray


def _check_centered(y: np.ndarray) -> None:
    rms = float(np.sqrt(np.mean(y * y)))
    if rms == 0.0:
        raise ValueError("y is identically zero")
    if abs(float(np.mean(y))) >= CENTERED_TOL * rms:
        raise ValueError(
            "y must have its arithmetic mean removed before model evaluation "
            f"(|mean| = {abs(float(np.mean(y))):.3e}, rms = {rms:.3e})"
        )


def _assign_probabilities(
    log_z: np.ndarray, l_values: np.ndarray, ok: np.ndarray
) -> tuple[np.ndarray, float]:
    """Posterior probabilities over the ok rows, in a fixed reduction order.

    Returns (probabilities, log_norm). Degenerate exact fits (log_z = +inf)
    take probability one, smallest model first.
    """
    probs = np.zeros(log_z.shape)
    if not ok.any():
        raise ValueError("no valid candidate survived evaluation")
    finite = ok & np.isfinite(log_z)
    degen = ok & np.isposinf(log_z)
    if degen.any():
        cand = np.nonzero(degen)[0]
        winner = cand[np.lexsort((cand, l_values[cand]))[0]]
        probs[winner] = 1.0
        return probs, math.inf
    vals = log_z[finite]
    m = float(np.max(vals))
    total = math.fsum(math.exp(v - m) for v in vals.tolist())
    log_norm = m + math.log(total)
    probs[finite] = np.exp(log_z[finite] - log_norm)
    return probs, log_norm


# ---------------------------------------------------------------------------
# family evaluation
# ---------------------------------------------------------------------------

def _evaluate_one(args):
    points, y, candidate = args
    try:
        design = build_design_matrix(points, candidate.basis)
        res = fit(design, y)
    except RankDeficiencyError as exc:
        return {"id": candidate.id, "flag": f"rank-deficient: {', '.join(exc.columns)}"}
    if res.chi_y2 <= 0.0:
        return {"id": candidate.id, "flag": "zero fitted power (chi_y2 = 0)"}
    ev = evidence.log_evidence_closed(
        evidence.EvidenceInput(res.n_data, res.n_params, res.chi_y2, res.y_dot_e)
    )
    return {
        "id": candidate.id,
        "fit": res,
        "log_z": ev.log_z,
        "method": ev.method,
        "degenerate": ev.degenerate_exact_fit,
    }


def evaluate_models(
    points,
    y,
    candidates: Sequence[ModelCandidate],
    *,
    parallelism: int = 1,
    return_fits: bool = False,
):
    """Fit every candidate and normalize the evidences into probabilities.

    Every candidate receives the same prior weight. Candidates whose design
    matrix is rank deficient (or has zero fitted power) are flagged and
    excluded from the normalization, with a warning. y must be centered.

    Args:
        points: (N,) or (N, d) sample locations.
        y: centered data vector.
        candidates: model family with unique ids.
        parallelism: number of worker processes; 1 evaluates serially.
        return_fits: also return {candidate id: FitResult} for the unflagged
            rows (needed by model_average).

    Returns:
        PosteriorTable ordered by candidate id, or (table, fits) when
        return_fits is set.
    """
    y = np.asarray(y, dtype=float)
    _check_centered(y)
    if not candidates:
        raise ValueError("need at least one candidate")
    ids = [c.id for c in candidates]
    if len(set(ids)) != len(ids):
        raise ValueError("candidate ids must be unique")
    n = y.shape[0]
    for c in candidates:
        if n <= len(c.basis):
            raise ValueError(
                f"candidate {c.id} has l={len(c.basis)} >= N={n}; evidence needs N > l"
            )

    tasks = [(points, y, c) for c in candidates]
    if parallelism > 1 and len(candidates) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_evaluate_one, tasks))
    else:
        outcomes = [_evaluate_one(t) for t in tasks]

    order = sorted(range(len(candidates)), key=lambda i: candidates[i].id)
    log_z = np.full(len(candidates), -math.inf)
    l_values = np.zeros(len(candidates), dtype=int)
    ok = np.zeros(len(candidates), dtype=bool)
    by_pos = {}
    for pos, i in enumerate(order):
        out = outcomes[i]
        by_pos[pos] = (candidates[i], out)
        l_values[pos] = len(candidates[i].basis)
        if "flag" in out:
            warnings.warn(
                f"candidate {candidates[i].id} excluded from normalization: {out['flag']}",
                RuntimeWarning,
                stacklevel=2,
            )
        else:
            ok[pos] = True
            log_z[pos] = out["log_z"]

    probs, log_norm = _assign_probabilities(log_z, l_values, ok)

    rows = []
    fits = {}
    for pos in range(len(candidates)):
        cand, out = by_pos[pos]
        if "flag" in out:
            rows.append(
                PosteriorRow(cand.id, l_values[pos], cand.describe(), -math.inf,
                             0.0, math.nan, "none", flag=out["flag"])
            )
            continue
        res: FitResult = out["fit"]
        fits[cand.id] = res
        rows.append(
            PosteriorRow(cand.id, l_values[pos], cand.describe(), out["log_z"],
                         float(probs[pos]), res.chi_eps2, out["method"],
                         degenerate_exact_fit=out["degenerate"])
        )
    table = PosteriorTable(
        rows=tuple(rows),
        n_models=len(candidates),
        log_norm=log_norm,
        n_flagged=int((~ok).sum()),
    )
    return (table, fits) if return_fits else table


# ---------------------------------------------------------------------------
# subset search
# ---------------------------------------------------------------------------

def _evaluate_subset_range(w_full, y, sizes, start, stop):
    """Evidence statistics for subsets with sequence index in [start, stop).

    Returns (log_z, method codes, flagged) arrays of length stop - start.
    Values are independent of how the global range is split across calls.
    """
    n_rows = w_full.shape[0]
    y2 = float(y @ y)
    eps = np.finfo(float).eps
    out_logz = np.empty(stop - start)
    out_code = np.zeros(stop - start, dtype=np.uint8)
    out_flag = np.zeros(stop - start, dtype=bool)

    buf: list[tuple[int, ...]] = []
    buf_k = -1
    buf_at = 0

    def flush():
        nonlocal buf, buf_at
        if not buf:
            return
        idx = np.asarray(buf, dtype=np.intp)
        wb = np.ascontiguousarray(w_full[:, idx].transpose(1, 0, 2))
        q, r = np.linalg.qr(wb)
        diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
        deficient = (diag <= n_rows * eps * diag.max(axis=1, keepdims=True)).any(axis=1)
        qty = np.einsum("bnk,n->bk", q, y)
        chi_y2 = np.einsum("bk,bk->b", qty, qty)
        y_dot_e = np.maximum(y2 - chi_y2, 0.0)
        usable = ~deficient & (chi_y2 > 0.0)
        lz = np.full(len(buf), -math.inf)
        codes = np.zeros(len(buf), dtype=np.uint8)
        if usable.any():
            lz_u, codes_u = evidence._log_evidence_closed_arrays(
                n_rows, buf_k, chi_y2[usable], y_dot_e[usable]
            )
            lz[usable] = lz_u
            codes[usable] = codes_u
        sl = slice(buf_at, buf_at + len(buf))
        out_logz[sl] = lz
        out_code[sl] = codes
        out_flag[sl] = ~usable
        buf_at += len(buf)
        buf = []

    batch_end = 0
    for index, k, kept in iter_subset_indices(w_full.shape[1], sizes, start, stop):
        if k != buf_k or index >= batch_end:
            flush()
            buf_k = k
            # Align batch boundaries to the global index grid.
            batch_end = (index // _BATCH + 1) * _BATCH
        buf.append(kept)
    flush()
    return out_logz, out_code, out_flag


def _subset_worker(args):
    w_full, y, sizes, start, stop = args
    return start, _evaluate_subset_range(w_full, y, sizes, start, stop)


def _subset_label(kept: tuple[int, ...], labels: list[str]) -> str:
    return ", ".join(labels[i] for i in kept)


def subset_search(
    points,
    y,
    full: BasisSet,
    sizes: Sequence[int],
    *,
    top_k: int = 400,
    parallelism: int = 1,
    full_dump_path=None,
):
    """Exhaustively score every subset of the given sizes from a full basis.

    Subsets stream in the deterministic enumeration order; each one is fitted
    (orthogonal decomposition of the selected columns) and scored with the
    closed-form evidence, falling back to quadrature outside its domain. The
    normalization constant covers all evaluated subsets, while only the
    top_k rows are materialized. Rank-deficient subsets are flagged and
    excluded from the normalization.

    Args:
        points: sample locations matching the basis dimensionality.
        y: centered data vector.
        full: the full basis to draw subsets from.
        sizes: subset sizes to enumerate (e.g. {14, 15, 16}).
        top_k: number of best rows to retain in the table.
        parallelism: worker processes for the evaluation; results are
            identical for any value.
        full_dump_path: optional path; when set, one row per evaluated
            subset is written there as tab-separated text.

    Returns:
        PosteriorTable with rows ranked by descending evidence. Row ids are
        subset sequence indices and labels list the member functions.
    """
    y = np.asarray(y, dtype=float)
    _check_centered(y)
    sizes = sorted(set(int(s) for s in sizes))
    n_funcs = len(full)
    for k in sizes:
        if not 1 <= k <= n_funcs:
            raise ValueError(f"subset size {k} invalid for a basis of {n_funcs}")
    if y.shape[0] <= max(sizes):
        raise ValueError("evidence needs N > l for every requested subset size")
    total = subset_count(n_funcs, sizes)
    w_full = build_design_matrix(points, full).values

    log_z = np.empty(total)
    codes = np.empty(total, dtype=np.uint8)
    flagged = np.empty(total, dtype=bool)
    if parallelism > 1 and total > _BATCH:
        n_chunks = min(parallelism * 4, max(1, total // _BATCH))
        bounds = np.linspace(0, total, n_chunks + 1, dtype=int)
        tasks = [
            (w_full, y, sizes, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for start, (lz, cd, fl) in pool.map(_subset_worker, tasks):
                sl = slice(start, start + len(lz))
                log_z[sl] = lz
                codes[sl] = cd
                flagged[sl] = fl
    else:
        lz, cd, fl = _evaluate_subset_range(w_full, y, sizes, 0, total)
        log_z[:] = lz
        codes[:] = cd
        flagged[:] = fl

    if flagged.any():
        warnings.warn(
            f"{int(flagged.sum())} of {total} subsets were rank deficient and "
            "were excluded from the normalization",
            RuntimeWarning,
            stacklevel=2,
        )

    l_of = np.empty(total, dtype=int)
    offset = 0
    for k in sizes:
        block = math.comb(n_funcs, k)
        l_of[offset : offset + block] = k
        offset += block

    probs, log_norm = _assign_probabilities(log_z, l_of, ~flagged)

    keep = min(top_k, total)
    ranked = np.lexsort((np.arange(total), -log_z))[:keep]

    labels = full.labels()
    rows = []
    for rank_idx in ranked:
        k, kept = subset_at(n_funcs, sizes, int(rank_idx))
        if flagged[rank_idx]:
            rows.append(
                PosteriorRow(int(rank_idx), k, _subset_label(kept, labels),
                             -math.inf, 0.0, math.nan, "none", flag="rank-deficient")
            )
            continue
        res = fit(build_design_matrix(points, full.subset(kept)), y)
        rows.append(
            PosteriorRow(int(rank_idx), k, _subset_label(kept, labels),
                         float(log_z[rank_idx]), float(probs[rank_idx]),
                         res.chi_eps2, _METHOD_NAMES[codes[rank_idx]],
                         degenerate_exact_fit=bool(np.isposinf(log_z[rank_idx])))
        )

    if full_dump_path is not None:
        with open(full_dump_path, "w", encoding="utf-8") as fh:
            fh.write("# bayesbasis subset-dump v1\n")
            fh.write("id\tl\tmembers\tlog_z\tprobability\tmethod\n")
            for i in range(total):
                k, kept = subset_at(n_funcs, sizes, i)
                members = "+".join(str(j) for j in kept)
                fh.write(
                    f"{i}\t{k}\t{members}\t{log_z[i]!r}\t{probs[i]!r}\t"
                    f"{'flagged' if flagged[i] else _METHOD_NAMES[codes[i]]}\n"
                )

    return PosteriorTable(
        rows=tuple(rows),
        n_models=total,
        log_norm=log_norm,
        n_flagged=int(flagged.sum()),
    )


# ---------------------------------------------------------------------------
# model averaging
# ---------------------------------------------------------------------------

def model_average(
    table: PosteriorTable,
    candidates: Sequence[ModelCandidate],
    fits: Mapping[int, FitResult],
    query_points,
) -> AveragedPrediction:
    """Posterior-weighted mean prediction and between-model spread.

    mean(x) = sum_k p_k yhat_k(x);
    spread(x) = sqrt(sum_k p_k (yhat_k(x) - mean(x))^2).
    Rows with probability below PROBABILITY_FLOOR are skipped. The spread
    captures model-choice uncertainty only, not within-model parameter
    uncertainty.

    Raises:
        ValueError: when the fits do not match the table (different
            candidates or residuals, i.e. mismatched provenance).
    """
    by_id = {c.id: c for c in candidates}
    active = []
    for row in table.rows:
        if row.flag is not None:
            continue
        if row.id not in by_id:
            raise ValueError(f"table row {row.id} has no matching candidate")
        if row.id not in fits:
            raise ValueError(f"table row {row.id} has no matching fit")
        res = fits[row.id]
        if not math.isclose(res.chi_eps2, row.chi_eps2,
                            rel_tol=1e-9, abs_tol=1e-9 * (1.0 + res.chi_y2)):
            raise ValueError(
                f"fit for candidate {row.id} does not match the table row "
                "(mismatched provenance)"
            )
        if row.probability >= PROBABILITY_FLOOR:
            active.append(row)
    if not active:
        raise ValueError("no candidate carries posterior mass above the floor")

    dim = by_id[active[0].id].basis.dimension
    pts = np.asarray(query_points, dtype=float)
    if pts.ndim == 1 and dim == 1:
        pts = pts.reshape(-1, 1)

    preds = np.empty((len(active), pts.shape[0]))
    weights = np.empty(len(active))
    for i, row in enumerate(active):
        design = build_design_matrix(pts, by_id[row.id].basis)
        preds[i] = design.values @ fits[row.id].a_hat
        weights[i] = row.probability
    mean = weights @ preds
    var = weights @ (preds - mean) ** 2
    spread = np.sqrt(np.maximum(var, 0.0))
    return AveragedPrediction(points=pts, mean=mean, spread=spread)
