"""The Min-Max-Checking detector and its single-statistic relatives.

The pipeline estimates a clean subset by alternating a Min-Step (remove
observations whose T_min rejects) with a Max-Step (tentatively set aside
observations whose T_max rejects) until enough of the sample survives,
then tests every suspect against the clean set with a chi-square(1)
checking statistic under BH selection.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .chi2_fdr import bh_select, chi2_1_sf_vec
from .robust_stats import Dataset, EstimatorMode, InfluenceMatrix, standardize
from .subsample import min_max_sweep, subset_size


class DegenerateShrinkageError(RuntimeError):
    """The working set shrank too far to keep subsampling."""


class MinStepMode(Enum):
    BH = "bh"
    TOP_L0 = "topk"


@dataclass(frozen=True)
class MipConfig:
    """All tunables of the detection pipeline.

    ``l0`` is the fallback removal count for a Min-Step whose selection
    comes back empty while the stop test keeps failing; None resolves to
    max(1, ceil(0.05 n)). ``threads`` only affects scheduling, never
    output values.
    """

    m: int = 100
    k_sub: float = 0.5
    alpha: float = 0.05
    alpha0: float = 0.05
    c: float = 0.5
    l0: int | None = None
    max_rounds: int = 20
    seed: int = 0
    estimator: EstimatorMode = EstimatorMode.ROBUST
    min_step_mode: MinStepMode = MinStepMode.BH
    shared_subsets: bool = False
    restandardize_clean: bool = False
    fixed_n_sub: bool = False
    threads: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0.0 < self.k_sub < 1.0:
            raise ValueError("k_sub must be in (0, 1)")
        if not 0.0 < self.alpha < 1.0 or not 0.0 < self.alpha0 < 1.0:
            raise ValueError("alpha and alpha0 must be in (0, 1)")
        if not 0.0 < self.c <= 1.0:
            raise ValueError("c must be in (0, 1]")
        if self.l0 is not None and self.l0 < 1:
            raise ValueError("l0 must be at least 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    def resolve_l0(self, n: int) -> int:
        return self.l0 if self.l0 is not None else max(1, math.ceil(0.05 * n))

    def echo(self) -> dict:
        """Stable config dictionary for run reports (scheduling excluded)."""
        return {
            "m": self.m,
            "k_sub": self.k_sub,
            "alpha": self.alpha,
            "alpha0": self.alpha0,
            "c": self.c,
            "l0": self.l0,
            "max_rounds": self.max_rounds,
            "seed": self.seed,
            "estimator": self.estimator.value,
            "min_step_mode": self.min_step_mode.value,
            "shared_subsets": self.shared_subsets,
            "restandardize_clean": self.restandardize_clean,
            "fixed_n_sub": self.fixed_n_sub,
        }


@dataclass
class ObservationRecord:
    """Per-observation entry of a detection report.

    ``statistic`` is whatever statistic drove the method's decision (the
    checking statistic for the full pipeline, the leave-one-out statistic
    for the baseline, T_max or T_min for the single-statistic detectors);
    fields that a method does not produce stay None.
    """

    index: int
    influential: bool
    p_value: float | None = None
    statistic: float | None = None
    t_min: float | None = None
    t_max: float | None = None
    checking_stat: float | None = None
    clean_member: bool | None = None


@dataclass
class DetectionReport:
    method: str
    records: list[ObservationRecord]
    config: dict = field(default_factory=dict)
    clean_set: np.ndarray | None = None
    rounds_used: int | None = None
    hit_iteration_cap: bool = False
    timings: dict = field(default_factory=dict)  # in-memory diagnostics only

    @property
    def n(self) -> int:
        return len(self.records)

    def flagged(self) -> np.ndarray:
        return np.asarray(
            [r.index for r in self.records if r.influential], dtype=np.int64
        )


@dataclass
class CleanSetResult:
    """Outcome of the Min-Max alternation.

    ``removed`` is the ordered trail of (round, step, indices): every
    Min-Step removal plus, once the stop test passes, the surviving
    Max-Step rejections. ``clean`` and the union of all removed indices
    partition the sample. First-pass T statistics (full data) ride along
    for reporting.
    """

    clean: np.ndarray
    removed: list
    rounds_used: int
    hit_iteration_cap: bool
    first_t_min: np.ndarray
    first_t_max: np.ndarray


def _workable(n_active: int, n_sub: int) -> None:
    if n_sub < 3 or n_active < n_sub + 2:
        raise DegenerateShrinkageError(
            f"working set of {n_active} cannot support subsets of size {n_sub}"
        )


def min_max_clean_set(Z: InfluenceMatrix, cfg: MipConfig) -> CleanSetResult:
    """Alternate Min and Max steps until a large enough clean set remains.

    Each round: T_min over the working set, BH at cfg.alpha (or the l0
    smallest p-values in TOP_L0 mode) decides removals; then T_max over
    the survivors and BH picks a tentative rejection set. If removing it
    would keep at least c*n of the ORIGINAL sample, that remainder is the
    clean set. A BH Min-Step that selects nothing while the stop test
    fails falls back to removing the l0 smallest p-values.
    """
    n = Z.n
    S = np.arange(n, dtype=np.int64)
    removed: list = []
    sweep_no = 0
    first_t_min = first_t_max = None
    l0 = cfg.resolve_l0(n)
    # tiny slack so c*n (inexact for some c) compares as intended
    stop_at = cfg.c * n - 1e-9
    frozen_n_sub: int | None = None

    for round_no in range(1, cfg.max_rounds + 1):
        n_sub = frozen_n_sub or subset_size(S.size, cfg.k_sub)
        if cfg.fixed_n_sub and frozen_n_sub is None:
            frozen_n_sub = n_sub
        _workable(S.size, n_sub)
        t_min, t_max, _ = min_max_sweep(
            Z, S, cfg.m, n_sub, cfg.seed, sweep_no,
            threads=cfg.threads, shared=cfg.shared_subsets,
        )
        sweep_no += 1
        if first_t_min is None:
            first_t_min, first_t_max = t_min, t_max
        p_min = chi2_1_sf_vec(t_min)

        if cfg.min_step_mode is MinStepMode.TOP_L0:
            take = min(l0, S.size - 1)
            hits = np.sort(np.argsort(p_min, kind="stable")[:take])
        else:
            hits = np.sort(bh_select(p_min, cfg.alpha).rejected)
        min_step_empty = hits.size == 0

        if hits.size:
            removed.append((round_no, "min", S[hits].copy()))
            S = np.delete(S, hits)
            n_sub2 = frozen_n_sub or subset_size(S.size, cfg.k_sub)
            _workable(S.size, n_sub2)
            _, t_max2, _ = min_max_sweep(
                Z, S, cfg.m, n_sub2, cfg.seed, sweep_no,
                threads=cfg.threads, shared=cfg.shared_subsets,
            )
            sweep_no += 1
        else:
            # working set unchanged: the same draws carry the Max-Step
            t_max2 = t_max

        max_hits = np.sort(bh_select(chi2_1_sf_vec(t_max2), cfg.alpha).rejected)
        candidate = np.delete(S, max_hits)
        stop = candidate.size >= stop_at
        if stop or round_no == cfg.max_rounds:
            if max_hits.size:
                removed.append((round_no, "max", S[max_hits].copy()))
            return CleanSetResult(
                clean=candidate,
                removed=removed,
                rounds_used=round_no,
                hit_iteration_cap=not stop,
                first_t_min=first_t_min,
                first_t_max=first_t_max,
            )

        if cfg.min_step_mode is MinStepMode.BH and min_step_empty:
            take = min(l0, S.size - 1)
            fallback = np.sort(np.argsort(p_min, kind="stable")[:take])
            removed.append((round_no, "min", S[fallback].copy()))
            S = np.delete(S, fallback)

    raise AssertionError("unreachable: loop returns at the iteration cap")


# ---------------------------------------------------------------------------
# checking step
# ---------------------------------------------------------------------------


def _checking_stats(Z: InfluenceMatrix, clean: np.ndarray, suspects: np.ndarray) -> np.ndarray:
    ref = Z.Z[clean].mean(axis=0)
    diff = Z.Z[suspects] - ref
    return np.einsum("ij,ij->i", diff, diff) / Z.p


def checking_step(Z: InfluenceMatrix, S_c, alpha0: float = 0.05) -> DetectionReport:
    """Test every observation outside the clean set against it.

    The statistic for suspect i is n_c^2 * D_i = p^{-1} || Z_i - mean over
    the clean set ||^2 with n_c = |S_c| + 1; chi-square(1) p-values go
    through BH at alpha0. An empty suspect set reports no influentials.
    """
    clean = np.unique(np.asarray(S_c, dtype=np.int64))
    if clean.size == 0:
        raise ValueError("clean set must be non-empty")
    if clean[0] < 0 or clean[-1] >= Z.n:
        raise ValueError("clean set index out of range")
    suspects = np.setdiff1d(np.arange(Z.n, dtype=np.int64), clean)

    records = [
        ObservationRecord(index=int(i), influential=False, clean_member=True)
        for i in range(Z.n)
    ]
    if suspects.size:
        stats = _checking_stats(Z, clean, suspects)
        pvals = chi2_1_sf_vec(stats)
        hits = set(suspects[bh_select(pvals, alpha0).rejected].tolist())
        for i, stat, pv in zip(suspects.tolist(), stats, pvals):
            rec = records[i]
            rec.clean_member = False
            rec.checking_stat = float(stat)
            rec.statistic = float(stat)
            rec.p_value = float(pv)
            rec.influential = i in hits
    return DetectionReport(method="checking", records=records, clean_set=clean)


def checking_statistics_all(Z: InfluenceMatrix, S_c) -> np.ndarray:
    """Checking statistic for every observation, clean members included.

    Members of the clean set are tested against the clean set minus
    themselves (reference size |S_c| - 1), outsiders against the full
    clean set; used for figure-style p-value exports.
    """
    clean = np.unique(np.asarray(S_c, dtype=np.int64))
    if clean.size < 2:
        raise ValueError("need at least two clean observations")
    out = np.empty(Z.n)
    mask = np.zeros(Z.n, dtype=bool)
    mask[clean] = True
    outside = np.flatnonzero(~mask)
    if outside.size:
        out[outside] = _checking_stats(Z, clean, outside)
    csum = Z.Z[clean].sum(axis=0)
    ref = (csum[None, :] - Z.Z[clean]) / (clean.size - 1)
    diff = Z.Z[clean] - ref
    out[clean] = np.einsum("ij,ij->i", diff, diff) / Z.p
    return out


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------


def mip_detect(d: Dataset, cfg: MipConfig = MipConfig()) -> DetectionReport:
    """Full pipeline: standardize, estimate a clean set, check suspects."""
    t0 = time.perf_counter()
    Z = standardize(d, cfg.estimator)
    t1 = time.perf_counter()
    cs = min_max_clean_set(Z, cfg)
    t2 = time.perf_counter()
    Zc = (
        standardize(d, cfg.estimator, estimate_rows=cs.clean)
        if cfg.restandardize_clean
        else Z
    )
    report = checking_step(Zc, cs.clean, cfg.alpha0)
    t3 = time.perf_counter()

    report.method = "mip"
    report.config = cfg.echo()
    report.rounds_used = cs.rounds_used
    report.hit_iteration_cap = cs.hit_iteration_cap
    for rec in report.records:
        rec.t_min = float(cs.first_t_min[rec.index])
        rec.t_max = float(cs.first_t_max[rec.index])
    report.timings = {
        "standardize_s": t1 - t0,
        "clean_set_s": t2 - t1,
        "checking_s": t3 - t2,
        "total_s": t3 - t0,
    }
    return report


def max_detect(Z: InfluenceMatrix, cfg: MipConfig = MipConfig()) -> DetectionReport:
    """Single-pass detector on T_max with BH at alpha0."""
    n_sub = subset_size(Z.n, cfg.k_sub)
    _workable(Z.n, n_sub)
    t_min, t_max, _ = min_max_sweep(
        Z, np.arange(Z.n), cfg.m, n_sub, cfg.seed, 0,
        threads=cfg.threads, shared=cfg.shared_subsets,
    )
    pvals = chi2_1_sf_vec(t_max)
    hits = set(bh_select(pvals, cfg.alpha0).rejected.tolist())
    records = [
        ObservationRecord(
            index=i,
            influential=i in hits,
            p_value=float(pvals[i]),
            statistic=float(t_max[i]),
            t_min=float(t_min[i]),
            t_max=float(t_max[i]),
        )
        for i in range(Z.n)
    ]
    return DetectionReport(method="max", records=records, config=cfg.echo(), rounds_used=1)


def min_multiround_detect(Z: InfluenceMatrix, cfg: MipConfig = MipConfig()) -> DetectionReport:
    """Repeated T_min rounds, removing BH rejections until a round is quiet.

    The union of removals across rounds is the influential set; the
    expected false positive rate is bounded by alpha0 / (1 - alpha0).
    """
    n = Z.n
    U = np.arange(n, dtype=np.int64)
    flagged: list[int] = []
    first_t_min = first_t_max = first_p = None
    frozen_n_sub: int | None = None
    rounds_used = 0
    hit_cap = False

    for round_no in range(1, cfg.max_rounds + 1):
        n_sub = frozen_n_sub or subset_size(U.size, cfg.k_sub)
        if cfg.fixed_n_sub and frozen_n_sub is None:
            frozen_n_sub = n_sub
        _workable(U.size, n_sub)
        t_min, t_max, _ = min_max_sweep(
            Z, U, cfg.m, n_sub, cfg.seed, round_no - 1,
            threads=cfg.threads, shared=cfg.shared_subsets,
        )
        rounds_used = round_no
        pvals = chi2_1_sf_vec(t_min)
        if first_t_min is None:
            first_t_min, first_t_max, first_p = t_min, t_max, pvals
        hits = np.sort(bh_select(pvals, cfg.alpha0).rejected)
        if hits.size == 0:
            break
        flagged.extend(U[hits].tolist())
        U = np.delete(U, hits)
        if round_no == cfg.max_rounds:
            hit_cap = True

    flagged_set = set(flagged)
    records = [
        ObservationRecord(
            index=i,
            influential=i in flagged_set,
            p_value=float(first_p[i]),
            statistic=float(first_t_min[i]),
            t_min=float(first_t_min[i]),
            t_max=float(first_t_max[i]),
        )
        for i in range(n)
    ]
    return DetectionReport(
        method="min",
        records=records,
        config=cfg.echo(),
        rounds_used=rounds_used,
        hit_iteration_cap=hit_cap,
    )
