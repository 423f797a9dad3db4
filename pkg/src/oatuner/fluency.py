"""Objective interaction-fluency metrics over two-agent event logs.

Four ratios of total task time: R-IDLE and H-IDLE (fraction the robot
or human performs no activity), C-ACT (fraction both are active at
once), and F-DEL (functional delay: gaps between the end of one
agent's activity and the start of the other agent's next activity).
"wait" intervals are idle time, not activity.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy.stats import norm, rankdata

from .sim import WAIT_LABELS, HUMAN, ROBOT

__all__ = [
    "FluencyReport",
    "PhaseComparison",
    "EmptyLog",
    "MalformedLog",
    "LengthMismatch",
    "ZeroTotal",
    "METRICS",
    "compute_fluency",
    "success_rate",
    "wilcoxon_signed_rank",
    "compare_phases",
]

METRICS = ("r_idle", "h_idle", "c_act", "f_del")


class EmptyLog(ValueError):
    pass


class MalformedLog(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class ZeroTotal(ValueError):
    pass


@dataclass(frozen=True)
class FluencyReport:
    r_idle: float
    h_idle: float
    c_act: float
    f_del: float
    total_time: float

    def metric(self, name):
        return getattr(self, name)

    def as_doc(self):
        return {
            "r_idle": self.r_idle,
            "h_idle": self.h_idle,
            "c_act": self.c_act,
            "f_del": self.f_del,
            "total_time": self.total_time,
        }


def _union_length(intervals):
    total = 0.0
    end = None
    for a, b in sorted(intervals):
        if end is None or a > end:
            total += b - a
            end = b
        elif b > end:
            total += b - end
            end = b
    return total


def _overlap_length(xs, ys):
    # both inputs are merged, sorted, disjoint
    total = 0.0
    i = j = 0
    while i < len(xs) and j < len(ys):
        a = max(xs[i][0], ys[j][0])
        b = min(xs[i][1], ys[j][1])
        if b > a:
            total += b - a
        if xs[i][1] <= ys[j][1]:
            i += 1
        else:
            j += 1
    return total


def _merge(intervals):
    merged = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def compute_fluency(events) -> FluencyReport:
    """Compute the four ratios from one event log.

    Raises EmptyLog on no intervals and MalformedLog when any two
    intervals of the same agent overlap (touching endpoints are fine).
    """
    if not events:
        raise EmptyLog("no intervals")
    for agent in (ROBOT, HUMAN):
        spans = sorted(
            (e.t_start, e.t_end) for e in events if e.agent == agent
        )
        for prev, cur in zip(spans, spans[1:]):
            if cur[0] < prev[1]:
                raise MalformedLog(f"overlapping {agent} intervals")

    t0 = min(e.t_start for e in events)
    t1 = max(e.t_end for e in events)
    total = t1 - t0
    if total <= 0:
        raise MalformedLog("log has zero span")

    active = [e for e in events if e.activity not in WAIT_LABELS]
    robot_active = _merge(
        (e.t_start, e.t_end) for e in active if e.agent == ROBOT
    )
    human_active = _merge(
        (e.t_start, e.t_end) for e in active if e.agent == HUMAN
    )

    r_active = _union_length(robot_active)
    h_active = _union_length(human_active)
    c_act = _overlap_length(robot_active, human_active) / total

    # functional delay: chronologically consecutive activities by
    # different agents, summed positive gaps
    ordered = sorted(active, key=lambda e: (e.t_start, e.t_end, e.agent))
    f_del = 0.0
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.agent != cur.agent:
            f_del += max(0.0, cur.t_start - prev.t_end)
    f_del /= total

    return FluencyReport(
        r_idle=(total - r_active) / total,
        h_idle=(total - h_active) / total,
        c_act=c_act,
        f_del=f_del,
        total_time=total,
    )


def success_rate(n_failed: int, n_total: int) -> float:
    if n_total <= 0:
        raise ZeroTotal("no handovers")
    if not 0 <= n_failed <= n_total:
        raise ValueError("failed count outside [0, total]")
    return 1.0 - n_failed / n_total


def wilcoxon_signed_rank(diffs):
    """Wilcoxon signed-rank test with the normal approximation.

    Zero differences are dropped, tied absolute values get average
    ranks, and the statistic is the positive-rank sum W+:

        z = (W+ - n(n+1)/4) / sqrt(n(n+1)(2n+1)/24)

    Returns (z, two-tailed p, n_nonzero, w_plus). All-zero input is
    reported as z = 0, p = 1.
    """
    nonzero = [d for d in diffs if d != 0]
    n = len(nonzero)
    if n == 0:
        return 0.0, 1.0, 0, 0.0
    ranks = rankdata([abs(d) for d in nonzero])
    w_plus = float(sum(r for d, r in zip(nonzero, ranks) if d > 0))
    mean = n * (n + 1) / 4.0
    sd = (n * (n + 1) * (2 * n + 1) / 24.0) ** 0.5
    z = (w_plus - mean) / sd
    p = 2.0 * float(norm.sf(abs(z)))
    return z, min(p, 1.0), n, w_plus


@dataclass
class PhaseComparison:
    """Paired before/after fluency comparison across sessions."""

    before: list
    after: list
    deltas: dict  # metric -> list of (after - before)
    stats: dict  # metric -> {before_mean, after_mean, z, p, n}

    def as_doc(self):
        return {
            metric: {
                "before_mean": self.stats[metric]["before_mean"],
                "after_mean": self.stats[metric]["after_mean"],
                "z": self.stats[metric]["z"],
                "p": self.stats[metric]["p"],
            }
            for metric in METRICS
        }


def compare_phases(before_logs, after_logs) -> PhaseComparison:
    """Pair up logs, compute fluency for each, and test each metric's
    paired differences with the signed-rank z approximation."""
    if len(before_logs) != len(after_logs):
        raise LengthMismatch(
            f"{len(before_logs)} before vs {len(after_logs)} after"
        )
    before = [r if isinstance(r, FluencyReport) else compute_fluency(r) for r in before_logs]
    after = [r if isinstance(r, FluencyReport) else compute_fluency(r) for r in after_logs]
    deltas = {}
    stats = {}
    for metric in METRICS:
        b = [r.metric(metric) for r in before]
        a = [r.metric(metric) for r in after]
        d = [ai - bi for ai, bi in zip(a, b)]
        z, p, n, w_plus = wilcoxon_signed_rank(d)
        deltas[metric] = d
        stats[metric] = {
            "before_mean": sum(b) / len(b) if b else 0.0,
            "after_mean": sum(a) / len(a) if a else 0.0,
            "z": z,
            "p": p,
            "n": n,
            "w_plus": w_plus,
        }
    return PhaseComparison(before=before, after=after, deltas=deltas, stats=stats)
