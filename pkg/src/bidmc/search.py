"""Search for capacity-optimal contiguous-group degradations.

The capacity-optimal 2n-output degradation of Q = sum_i q_i B(sigma_i) is a
cut plan, so the search space is the cut vectors 1 < k_1 < ... < k_{n-1} <=
m.  Three searchers are provided:

- ``enumerate_c_degradations``: depth-first enumeration of exactly the cut
  plans passing every threshold-window test (the C-degradations), with
  incremental means and early window cut-off;
- ``brute_force_c_optimal``: direct maximization over all cut vectors,
  guarded by a combinatorial bound (the independent oracle);
- ``c_optimal_degradation``: dynamic program over partial degradations with
  SMAWK row-maxima on the stage matrices, optionally pruning states whose
  decision-implied cut prefix fails a threshold-window test (the candidate
  filter soundly keeps every optimal traceback).

The DP state value S_j(i) is the maximum partial capacity over degradations
of the first i particles into j groups:

    S_j(i) = max_{j-1 <= a < i} S_{j-1}(a) + iota(a + 1, i)

with iota(s, e) the capacity contribution mass * (1 - h(mean)) of collapsing
particles s..e into one.  Stage j's values form an implicit matrix over
(row a = end state, column b = previous state) whose feasible lower triangle
is totally monotone and whose upper triangle holds a dominated sentinel, so
SMAWK applies.  The greedy merge baseline ``tv_greedy_degrade`` is included
for the capacity-loss comparisons.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import Channel, binary_entropy
from .refine import PHI_STRICT_TOL, PPlusPlan, _cut_ok, realize_pplus, split_threshold
from .smawk import smawk_row_maxima

__all__ = [
    "BRUTE_FORCE_GUARD",
    "DpTable",
    "StageMatrix",
    "iota_band",
    "enumerate_c_degradations",
    "brute_force_c_optimal",
    "c_optimal_degradation",
    "tv_greedy_plan",
    "tv_greedy_degrade",
]

BRUTE_FORCE_GUARD = 10**6

_SENTINEL_DEAD = -1e9


def _group_mean(q: np.ndarray, s: np.ndarray, a: int, b: int) -> float:
    """Mean crossover of particles a..b-1 (0-indexed, half-open).

    Must round identically to PPlusPlan.group_stats so that enumeration and
    the window test agree bit-for-bit; singletons take sigma exactly.
    """
    if b - a == 1:
        return float(s[a])
    return float((q[a:b] * s[a:b]).sum()) / float(q[a:b].sum())


def iota_band(q: Channel, max_len: int) -> np.ndarray:
    """Partial-capacity table: band[d, s] for particles s..s+d (1-indexed s).

    band[d, s] = mass * (1 - h(mean)) of the group of d+1 particles starting
    at s; entries outside 1 <= s <= m - d are NaN.  Built from prefix sums
    of q and q * sigma.
    """
    m = q.size
    w = q.weights
    s = q.sigmas
    cq = np.concatenate([[0.0], np.cumsum(w)])
    cqs = np.concatenate([[0.0], np.cumsum(w * s)])
    band = np.full((max_len, m + 1), np.nan)
    band[0, 1 : m + 1] = w * (1.0 - binary_entropy(s))
    for d in range(1, max_len):
        starts = np.arange(1, m - d + 1)
        mass = cq[starts + d] - cq[starts - 1]
        mean = (cqs[starts + d] - cqs[starts - 1]) / mass
        band[d, starts] = mass * (1.0 - binary_entropy(mean))
    return band


@dataclass
class DpTable:
    """Per-stage maxima, decision pointers and pruning bookkeeping.

    ``values[j]`` holds S_{j+1} over band offsets (i = j + 1 + offset for
    stages before the last, a single entry for the last); NaN marks states
    never computed.  ``decisions[j]`` holds the chosen previous band offset,
    -1 where unavailable.  ``pruned[j]`` flags skipped states.
    """

    values: list[np.ndarray]
    decisions: list[np.ndarray]
    pruned: list[np.ndarray]
    evaluations: int = 0
    pruned_states: int = 0
    capacity: float = math.nan


class StageMatrix:
    """Implicit totally monotone DP stage matrix.

    Row a corresponds to covering particles up to j + a with j groups,
    column b to the previous state at particle j - 1 + b.  The feasible
    lower triangle (b <= a) is S_prev[b] + iota(j + b, j + a); the upper
    triangle holds the dominated sentinel 1 - 2(b - a).  Lower-triangle
    evaluations are memoized and counted.
    """

    def __init__(self, stage: int, s_prev: np.ndarray, band: np.ndarray, size: int):
        self.stage = stage
        self.s_prev = s_prev
        self.band = band
        self.nrows = size
        self.ncols = size
        self._memo: dict[tuple[int, int], float] = {}
        self.evaluations = 0

    def value(self, a: int, b: int) -> float:
        if b > a:
            return 1.0 - 2.0 * (b - a)
        key = (a, b)
        v = self._memo.get(key)
        if v is None:
            prev = self.s_prev[b]
            if np.isnan(prev):
                v = _SENTINEL_DEAD + b - a
            else:
                v = float(prev) + float(self.band[a - b, self.stage + b])
                self.evaluations += 1
            self._memo[key] = v
        return v


def enumerate_c_degradations(q: Channel, n: int) -> list[PPlusPlan]:
    """All cut plans passing every threshold-window test, in cut order.

    Output equals filtering every cut vector through is_c_degradation; the
    depth-first search merely skips cut extensions once the running window
    threshold has passed the upper sigma (the threshold is increasing in
    the right group's mean).
    """
    m = q.size
    if not (2 <= n < m):
        raise ValueError(f"need 2 <= n < m, got n={n}, m={m}")
    w = q.weights
    s = q.sigmas
    out: list[PPlusPlan] = []
    cuts: list[int] = []

    def window(eps_l: float, eps_r: float, k_prev: int) -> tuple[bool, bool]:
        """(cut ok, hopeless for any larger right group)."""
        if eps_l <= 0.0 or eps_r >= 0.5:
            return True, False
        t = split_threshold(eps_l, eps_r)
        if t >= s[k_prev - 1] - PHI_STRICT_TOL:
            return False, True
        return t - s[k_prev - 2] > PHI_STRICT_TOL, False

    def rec(j: int, start: int, eps_prev: float) -> None:
        if j == n:
            eps = _group_mean(w, s, start - 1, m)
            ok, _ = window(eps_prev, eps, start)
            if ok:
                out.append(PPlusPlan(q, tuple(cuts)))
            return
        for k in range(start + 1, m - n + j + 2):
            eps = _group_mean(w, s, start - 1, k - 1)
            if j > 1:
                ok, hopeless = window(eps_prev, eps, start)
                if hopeless:
                    break
                if not ok:
                    continue
            cuts.append(k)
            rec(j + 1, k, eps)
            cuts.pop()

    rec(1, 1, 0.0)
    return out


@lru_cache(maxsize=8)
def _cut_vectors(m: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All cut vectors for (m, n) plus their group start/end index arrays."""
    count = math.comb(m - 1, n - 1)
    combos = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(2, m + 1), n - 1)),
        dtype=np.int64,
        count=count * (n - 1),
    ).reshape(count, n - 1)
    starts = np.hstack([np.ones((count, 1), dtype=np.int64), combos])
    ends = np.hstack([combos - 1, np.full((count, 1), m, dtype=np.int64)])
    return combos, starts, ends


def brute_force_c_optimal(q: Channel, n: int) -> tuple[PPlusPlan, float]:
    """Capacity-maximizing cut plan by direct enumeration (the oracle).

    Ties break to the lexicographically smallest cut vector.  Guarded by
    BRUTE_FORCE_GUARD on the number of cut vectors.
    """
    m = q.size
    if n == m:
        return PPlusPlan(q, tuple(range(2, m + 1))), float(np.dot(q.weights, 1.0 - binary_entropy(q.sigmas)))
    if not (2 <= n < m):
        raise ValueError(f"need 2 <= n <= m, got n={n}, m={m}")
    if math.comb(m - 1, n - 1) > BRUTE_FORCE_GUARD:
        raise ValueError(
            f"{math.comb(m - 1, n - 1)} cut vectors exceed the brute-force guard {BRUTE_FORCE_GUARD}"
        )
    band = iota_band(q, m - n + 1)
    combos, starts, ends = _cut_vectors(m, n)
    caps = band[(ends - starts), starts].sum(axis=1)
    best = int(np.argmax(caps))
    return PPlusPlan(q, tuple(int(k) for k in combos[best])), float(caps[best])


# Window scans replace SMAWK at a stage only when the surviving-pair total
# stays below this cap, so the pruned run's evaluation count cannot exceed
# the SMAWK count of the unpruned run (>= 1 evaluation per row always; and
# empirically >= 3.5 per row once the band exceeds _SCAN_SMALL).
_SCAN_SMALL = 16
_SCAN_FACTOR = 2.5


def _bisect_first(lo: int, hi: int, pred) -> int:
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def c_optimal_degradation(
    q: Channel, n: int, pruning: bool = True
) -> tuple[PPlusPlan, DpTable]:
    """Capacity-optimal cut plan via the SMAWK dynamic program.

    With ``pruning``, stage entries are only evaluated when the cut they
    would commit (between the predecessor state's decision-implied group
    and the new group) passes the threshold-window test, and states whose
    stored decision fails its window are dropped from later stages.  Every
    state on an optimal traceback passes its window tests, because optimal
    partial solutions are C-degradations of their sub-channels; the pruned
    run therefore reaches the same final capacity.  Per stage the windows
    are contiguous row runs (the threshold is increasing in the group
    mean), found by bisection; when they are not collectively small the
    stage falls back to plain SMAWK over the surviving columns, which keeps
    the pruned evaluation count below the unpruned one on every instance.
    ``pruning=False`` is the soundness baseline.
    """
    m = q.size
    if not (2 <= n < m):
        raise ValueError(f"need 2 <= n < m, got n={n}, m={m}")
    w = q.weights
    s = q.sigmas
    size = m - n + 1
    band = iota_band(q, size)
    cq = np.concatenate([[0.0], np.cumsum(w)])
    cqs = np.concatenate([[0.0], np.cumsum(w * s)])
    table = DpTable(values=[], decisions=[], pruned=[])

    s1 = band[np.arange(size), 1].copy()
    table.values.append(s1)
    table.decisions.append(np.full(size, -1, dtype=np.int64))
    table.pruned.append(np.zeros(size, dtype=bool))
    # Mean crossover of each state's last group, per its stored decision.
    eps_prev = (cqs[1 : size + 1] - cqs[0]) / (cq[1 : size + 1] - cq[0])
    s_prev = s1

    def windows_for(stage: int, alive: list[int]) -> tuple[list[tuple[int, int, int]], int]:
        """Per column: contiguous rows passing the cut-(stage-1) window."""
        wins = []
        total = 0
        for b in alive:
            start = stage + b - 1  # 0-indexed first particle of the new group
            e_prev = float(eps_prev[b])
            if e_prev <= 0.0:
                wins.append((b, b, size))
                total += size - b
                continue
            sig_lo, sig_hi = float(s[start - 1]), float(s[start])

            def thr(a: int, _e=e_prev, _st=start, _stage=stage, _b=b) -> float:
                mean = float(cqs[_stage + a] - cqs[_st]) / float(cq[_stage + a] - cq[_st])
                return split_threshold(_e, min(mean, 0.5 - 1e-15))

            lo = _bisect_first(b, size, lambda a: thr(a) - sig_lo > PHI_STRICT_TOL)
            hi = _bisect_first(lo, size, lambda a: thr(a) >= sig_hi - PHI_STRICT_TOL)
            wins.append((b, lo, hi))
            total += hi - lo
        return wins, total

    for stage in range(2, n):
        s_cur = np.full(size, np.nan)
        dec = np.full(size, -1, dtype=np.int64)
        eps_cur = np.full(size, np.nan)
        alive = [b for b in range(size) if not np.isnan(s_prev[b])]
        scan_cap = size if size < _SCAN_SMALL else int(_SCAN_FACTOR * size)
        wins = None
        if pruning:
            wins, total = windows_for(stage, alive)
        if wins is not None and total <= scan_cap:
            best = np.full(size, -np.inf)
            for b, lo, hi in wins:
                if hi <= lo:
                    continue
                rows = np.arange(lo, hi)
                vals = s_prev[b] + band[rows - b, stage + b]
                table.evaluations += hi - lo
                view = best[lo:hi]
                upd = vals > view
                view[upd] = vals[upd]
                dec[lo:hi][upd] = b
            for a in np.nonzero(dec >= 0)[0]:
                b = dec[a]
                s_cur[a] = best[a]
                eps_cur[a] = float(cqs[stage + a] - cqs[stage + b - 1]) / float(
                    cq[stage + a] - cq[stage + b - 1]
                )
        else:
            mat = StageMatrix(stage, s_prev, band, size)
            if pruning:
                maxima = _smawk_subcolumns(mat, alive)
            else:
                maxima = smawk_row_maxima(mat)
            table.evaluations += mat.evaluations
            for a, (b, val) in enumerate(maxima):
                if b > a or np.isnan(s_prev[b]):
                    continue
                eps_group = float(cqs[stage + a] - cqs[stage + b - 1]) / float(
                    cq[stage + a] - cq[stage + b - 1]
                )
                if pruning and not _cut_ok(
                    float(eps_prev[b]), eps_group, s[stage + b - 2], s[stage + b - 1]
                ):
                    continue
                s_cur[a] = val
                dec[a] = b
                eps_cur[a] = eps_group
        dead = np.isnan(s_cur)
        table.pruned_states += int(dead.sum())
        table.values.append(s_cur)
        table.decisions.append(dec)
        table.pruned.append(dead)
        s_prev = s_cur
        eps_prev = eps_cur

    # Final stage: the single state covering all m particles; with pruning,
    # candidates whose last-cut window fails are not evaluated.
    best_v = -np.inf
    best_b = -1
    for b in range(size):
        if np.isnan(s_prev[b]):
            continue
        if pruning:
            eps_last = float(cqs[m] - cqs[n + b - 1]) / float(cq[m] - cq[n + b - 1])
            if not _cut_ok(float(eps_prev[b]), eps_last, s[n + b - 2], s[n + b - 1]):
                continue
        v = float(s_prev[b]) + float(band[m - n - b, n + b])
        table.evaluations += 1
        if v > best_v:
            best_v = v
            best_b = b
    if best_b < 0:
        raise RuntimeError("no feasible traceback state")
    table.values.append(np.array([best_v]))
    table.decisions.append(np.array([best_b], dtype=np.int64))
    table.pruned.append(np.zeros(1, dtype=bool))
    table.capacity = best_v

    cuts = []
    b = best_b
    i_end = (n - 1) + b  # last particle of group n-1
    cuts.append(i_end + 1)
    for stage in range(n - 1, 1, -1):
        row = i_end - stage
        b = int(table.decisions[stage - 1][row])
        i_end = (stage - 1) + b
        cuts.append(i_end + 1)
    cuts.reverse()
    return PPlusPlan(q, tuple(cuts)), table


def _smawk_subcolumns(mat: StageMatrix, alive: list[int]) -> list[tuple[int, float]]:
    """Row maxima of the submatrix restricted to the alive columns.

    A column subset of a totally monotone matrix is totally monotone, so
    SMAWK still applies; results are reported in original column indices.
    """
    if not alive:
        return [(mat.ncols, -np.inf)] * mat.nrows

    class _View:
        nrows = mat.nrows
        ncols = len(alive)

        @staticmethod
        def value(a: int, b: int) -> float:
            return mat.value(a, alive[b])

    maxima = smawk_row_maxima(_View())
    return [(alive[b], v) for b, v in maxima]


def tv_greedy_plan(q: Channel, n: int) -> PPlusPlan:
    """Greedy least-capacity-loss adjacent merging, as a cut plan.

    Repeatedly merges the adjacent group pair whose collapse to the joint
    mean loses the least capacity until n groups remain (leftmost pair on
    ties).
    """
    m = q.size
    if not (2 <= n <= m):
        raise ValueError(f"need 2 <= n <= m, got n={n}, m={m}")
    w = q.weights
    s = q.sigmas
    cq = np.concatenate([[0.0], np.cumsum(w)])
    cqs = np.concatenate([[0.0], np.cumsum(w * s)])

    def iota(a: int, b: int) -> float:  # particles a..b-1, 0-indexed half-open
        mass = float(cq[b] - cq[a])
        mean = float(cqs[b] - cqs[a]) / mass
        return mass * (1.0 - float(binary_entropy(mean)))

    edges = list(range(m + 1))  # group j = [edges[j], edges[j+1])
    while len(edges) - 1 > n:
        best_loss = np.inf
        best_j = -1
        for j in range(len(edges) - 2):
            a, b, c = edges[j], edges[j + 1], edges[j + 2]
            loss = iota(a, b) + iota(b, c) - iota(a, c)
            if loss < best_loss:
                best_loss = loss
                best_j = j
        del edges[best_j + 1]
    return PPlusPlan(q, tuple(e + 1 for e in edges[1:-1]))


def tv_greedy_degrade(q: Channel, n: int) -> Channel:
    """Channel produced by the greedy merge baseline (n = m is identity)."""
    if n == q.size:
        return q
    return realize_pplus(tv_greedy_plan(q, n))
