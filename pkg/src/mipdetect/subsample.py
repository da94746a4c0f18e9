"""Random group deletion: subset plans and the min/max subset statistics.

For a target observation k and a subset A_r of the other active
observations, the group statistic is

    n_sub^2 * D_{r,k} = p^{-1} * || mean_{t in A_r} Z_t - Z_k ||^2

where |A_r| = n_sub - 1. T_min and T_max for k are the extremes of that
statistic over m independently drawn subsets; under the null both are
asymptotically chi-square(1).

Subsets are drawn from counter-based streams keyed by
(master seed, target, round, subset id), so any plan can be regenerated
in isolation and results never depend on evaluation order or worker
count. Each stream yields one uniform per eligible observation and the
subset is the n_sub - 1 smallest keys, which is a uniform
without-replacement sample.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .robust_stats import InfluenceMatrix

if TYPE_CHECKING:
    from .mip import MipConfig

_KEY_K_BITS = 24
_KEY_ROUND_BITS = 20
_KEY_R_BITS = 20
# target slot reserved for pooled draws in shared-subsets mode
_SHARED_KEY_SLOT = (1 << _KEY_K_BITS) - 1

# pooled draws per working set in shared-subsets mode, relative to m;
# roughly half of them exclude any given target when k_sub = 1/2
_SHARED_OVERDRAW = 2.5


def _stream_key(seed: int, k: int, round_id: int, r: int) -> int:
    """Pack (seed, target, round, subset id) into one 128-bit Philox key."""
    if not 0 <= k <= _SHARED_KEY_SLOT:
        raise ValueError("target index does not fit the stream key layout")
    if not 0 <= round_id < (1 << _KEY_ROUND_BITS):
        raise ValueError("round id does not fit the stream key layout")
    if not 0 <= r < (1 << _KEY_R_BITS):
        raise ValueError("subset id does not fit the stream key layout")
    low = (k << (_KEY_ROUND_BITS + _KEY_R_BITS)) | (round_id << _KEY_R_BITS) | r
    return ((int(seed) & 0xFFFFFFFFFFFFFFFF) << 64) | low


def _uniform_rows(seed: int, k: int, round_id: int, m: int, width: int) -> np.ndarray:
    """One row of uniforms per subset id, each from its own keyed stream."""
    u = np.empty((m, width))
    for r in range(m):
        bg = np.random.Philox(key=_stream_key(seed, k, round_id, r))
        u[r] = np.random.Generator(bg).random(width)
    return u


def subset_size(n_active: int, k_sub: float) -> int:
    """Subset size n_sub = floor(k_sub * n_active) + 1."""
    if not 0.0 < k_sub < 1.0:
        raise ValueError("k_sub must be in (0, 1)")
    if n_active < 2:
        raise ValueError("need at least two active observations")
    return int(math.floor(k_sub * n_active)) + 1


# ---------------------------------------------------------------------------
# subset plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsetPlan:
    """m random subsets for one target observation.

    ``subsets`` is an (m, n_sub - 1) array of global row indices, each row
    sorted, none containing the target. The plan is a pure function of
    (active set, target, m, n_sub, master_seed, round_id).
    """

    k: int
    subsets: np.ndarray
    master_seed: int
    round_id: int
    _colsums: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.subsets.shape[0]

    @property
    def n_sub(self) -> int:
        return self.subsets.shape[1] + 1

    def column_sums(self, Z: InfluenceMatrix) -> np.ndarray:
        """(m, p) sums of Z rows over each subset, cached per matrix."""
        key = id(Z.Z)
        cached = self._colsums.get(key)
        if cached is not None:
            return cached
        uniq = np.unique(self.subsets)
        W = np.zeros((self.m, uniq.size))
        W[np.arange(self.m)[:, None], np.searchsorted(uniq, self.subsets)] = 1.0
        out = W @ Z.Z[uniq]
        self._colsums[key] = out
        return out


def draw_subsets(active, k: int, m: int, n_sub: int, seed: int, round_id: int = 0) -> SubsetPlan:
    """Draw m uniform without-replacement subsets of active minus {k}.

    Each subset has n_sub - 1 distinct indices; subsets are independent
    across r (replacement across draws). Deterministic given
    (seed, k, round_id).
    """
    av = np.unique(np.asarray(active, dtype=np.int64))
    pos = int(np.searchsorted(av, k))
    if pos >= av.size or av[pos] != k:
        raise ValueError("target must belong to the active set")
    eligible = np.delete(av, pos)
    if m < 1:
        raise ValueError("need at least one subset")
    s = n_sub - 1
    if not 1 <= s <= eligible.size:
        raise ValueError(
            f"subset size {s} impossible with {eligible.size} eligible observations"
        )
    u = _uniform_rows(seed, int(k), round_id, m, eligible.size)
    pick = np.sort(np.argpartition(u, s - 1, axis=1)[:, :s], axis=1)
    return SubsetPlan(
        k=int(k), subsets=eligible[pick], master_seed=int(seed), round_id=int(round_id)
    )


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinMaxStats:
    """Extremes of the group statistic over one plan."""

    t_min: float
    t_max: float
    per_subset: np.ndarray | None = None

    def __post_init__(self):
        if not (0.0 <= self.t_min <= self.t_max):
            raise ValueError("need 0 <= t_min <= t_max")


def group_statistic(Z: InfluenceMatrix, A_r, k: int, n_sub: int, colsum=None) -> float:
    """Group-deletion statistic n_sub^2 * D_{r,k} for one subset.

    Computed in the incremental form p^{-1} || colsum(A_r)/(n_sub-1) - Z_k ||^2,
    which is algebraically identical to comparing the marginal-correlation
    estimates with and without the target. Pass ``colsum`` to reuse a
    cached column sum.
    """
    idx = np.asarray(A_r, dtype=np.int64)
    if n_sub < 2 or idx.size != n_sub - 1:
        raise ValueError("subset must have n_sub - 1 indices")
    if np.unique(idx).size != idx.size:
        raise ValueError("subset indices must be distinct")
    if (idx == k).any():
        raise ValueError("subset must not contain the target")
    if not (0 <= k < Z.n):
        raise ValueError("target index out of range")
    if colsum is None:
        colsum = Z.Z[idx].sum(axis=0)
    diff = colsum / (n_sub - 1) - Z.Z[k]
    return float(np.mean(diff * diff))


def point_energy(Z: InfluenceMatrix, k: int) -> float:
    """Standalone signal of observation k: p^{-1} || Z_k ||^2."""
    if not (0 <= k < Z.n):
        raise ValueError("target index out of range")
    row = Z.Z[k]
    return float(np.mean(row * row))


def min_max_statistics(
    Z: InfluenceMatrix,
    active,
    k: int,
    cfg: "MipConfig",
    round_id: int = 0,
    keep_per_subset: bool = False,
) -> MinMaxStats:
    """T_min and T_max for one target over the active set, per the config."""
    av = np.unique(np.asarray(active, dtype=np.int64))
    n_sub = subset_size(av.size, cfg.k_sub)
    t_min, t_max, per = min_max_sweep(
        Z, av, cfg.m, n_sub, cfg.seed, round_id,
        targets=np.asarray([k], dtype=np.int64),
        keep_per_subset=keep_per_subset,
    )
    return MinMaxStats(
        t_min=float(t_min[0]),
        t_max=float(t_max[0]),
        per_subset=per[0] if per is not None else None,
    )


def _chunk_targets(m: int, p: int) -> int:
    # bounds the (targets*m, p) work buffer near 32 MB
    return max(1, min(64, 4_000_000 // max(1, m * p)))


def _chunk_stats(Zu, span, m, s, seed, round_id, av):
    """Group statistics for a contiguous block of target positions.

    Returns (len(span), m). One indicator-matrix product yields every
    subset's column sums; the statistic uses the squared-difference form
    directly (no cross-term expansion) so near-zero values keep full
    precision.
    """
    n_U, p = Zu.shape
    nk = len(span)
    U = np.empty((nk * m, n_U - 1))
    row = 0
    for i in span:
        U[row:row + m] = _uniform_rows(seed, int(av[i]), round_id, m, n_U - 1)
        row += m
    pick = np.argpartition(U, s - 1, axis=1)[:, :s]
    # eligible position q maps to working-set position q + (q >= target)
    tpos = np.repeat(np.arange(span.start, span.stop), m)
    cols = pick + (pick >= tpos[:, None])
    W = np.zeros((nk * m, n_U))
    W[np.arange(nk * m)[:, None], cols] = 1.0
    group = W @ Zu
    group *= 1.0 / s
    group = group.reshape(nk, m, p)
    group -= Zu[span.start:span.stop][:, None, :]
    stats = np.einsum("abj,abj->ab", group, group)
    stats /= p
    return stats


def min_max_sweep(
    Z: InfluenceMatrix,
    active,
    m: int,
    n_sub: int,
    seed: int,
    round_id: int,
    *,
    targets=None,
    threads: int | None = None,
    shared: bool = False,
    keep_per_subset: bool = False,
):
    """T_min and T_max for every target in one pass over a working set.

    Returns (t_min, t_max, per_subset) aligned with the sorted active set
    (or with ``targets`` when given); per_subset is None unless requested.
    Output is a pure function of the arguments: thread count and chunking
    never change a bit.
    """
    av = np.unique(np.asarray(active, dtype=np.int64))
    n_U = av.size
    s = n_sub - 1
    if not 1 <= s <= n_U - 1:
        raise ValueError("subset size out of range for this working set")
    Zu = np.ascontiguousarray(Z.Z[av])

    if targets is None:
        positions = np.arange(n_U)
    else:
        positions = np.searchsorted(av, np.asarray(targets, dtype=np.int64))
        if (positions >= n_U).any() or (av[positions] != targets).any():
            raise ValueError("targets must belong to the active set")

    if shared:
        return _sweep_shared(Z, Zu, av, positions, m, s, seed, round_id, keep_per_subset)

    nt = positions.size
    t_min = np.empty(nt)
    t_max = np.empty(nt)
    per = np.empty((nt, m)) if keep_per_subset else None

    # positions from searchsorted are sorted iff targets were; chunk over
    # the output order either way
    chunk = _chunk_targets(m, Zu.shape[1])
    blocks = [(lo, min(lo + chunk, nt)) for lo in range(0, nt, chunk)]

    def run_block(lo, hi):
        for j in range(lo, hi):
            i = int(positions[j])
            stats = _chunk_stats(Zu, range(i, i + 1), m, s, seed, round_id, av)
            t_min[j] = stats.min()
            t_max[j] = stats.max()
            if per is not None:
                per[j] = stats[0]

    def run_block_contiguous(lo, hi):
        span = range(int(positions[lo]), int(positions[hi - 1]) + 1)
        stats = _chunk_stats(Zu, span, m, s, seed, round_id, av)
        t_min[lo:hi] = stats.min(axis=1)
        t_max[lo:hi] = stats.max(axis=1)
        if per is not None:
            per[lo:hi] = stats

    contiguous = bool(
        nt and (np.diff(positions) == 1).all()
    ) if nt > 1 else True

    runner = run_block_contiguous if contiguous else run_block
    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: runner(*b), blocks))
    else:
        for b in blocks:
            runner(*b)
    return t_min, t_max, per


def _sweep_shared(Z, Zu, av, positions, m, s, seed, round_id, keep_per_subset):
    """Shared-subsets variant: one pooled draw reused across targets.

    Draws a pool of subsets from the whole working set and, per target,
    keeps the first m that exclude it; any target with too few usable
    pooled subsets falls back to its own per-target plan.
    """
    n_U, p = Zu.shape
    M = int(math.ceil(_SHARED_OVERDRAW * m))
    U = _uniform_rows(seed, _SHARED_KEY_SLOT, round_id, M, n_U)
    pick = np.argpartition(U, s - 1, axis=1)[:, :s]
    member = np.zeros((M, n_U), dtype=bool)
    member[np.arange(M)[:, None], pick] = True
    colsums = member.astype(np.float64) @ Zu

    nt = positions.size
    t_min = np.empty(nt)
    t_max = np.empty(nt)
    per = np.empty((nt, m)) if keep_per_subset else None
    for j in range(nt):
        i = int(positions[j])
        usable = np.flatnonzero(~member[:, i])
        if usable.size >= m:
            sel = colsums[usable[:m]]
        else:
            plan = draw_subsets(av, int(av[i]), m, s + 1, seed, round_id)
            sel = plan.column_sums(Z)
        diff = sel * (1.0 / s) - Zu[i]
        stats = np.einsum("rj,rj->r", diff, diff) / p
        t_min[j] = stats.min()
        t_max[j] = stats.max()
        if per is not None:
            per[j] = stats
    return t_min, t_max, per
