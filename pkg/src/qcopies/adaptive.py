"""Multi-round feedback protocol: shrink the error budget each round,
re-estimate the setting probabilities from all counts accumulated so far,
and prepare only the incremental copies the new allocation asks for.

Budgets in the schedule are squared bounds (eps = eps0**2), matching the
allocation solver; a run ending at eps therefore targets a fidelity
standard deviation of sqrt(eps).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .allocator import allocate_sc
from .core import DensityMatrix
from .errors import ConfigError, QcopiesError
from .reports import csv_text
from .simulator import RngSeed, _as_generator, sample_counts
from .witness import (
    SettingProbabilities,
    WitnessDecomposition,
    delta_f,
    fidelity_from_probabilities,
)


def geometric_schedule(start: float = 0.01, ratio: float = 0.1,
                       final: float = 0.0003) -> tuple[float, ...]:
    """Budgets start, start*ratio, ... down past `final` (last entry <= final)."""
    if not 0 < ratio < 1:
        raise ConfigError(f"ratio must be in (0, 1), got {ratio}")
    if not 0 < final < start:
        raise ConfigError(f"need 0 < final < start, got start={start}, final={final}")
    values = [start]
    while values[-1] > final:
        values.append(values[-1] * ratio)
    return tuple(values)


@dataclass(frozen=True)
class AdaptiveConfig:
    """Schedule of squared budgets plus the starting priors.

    initial_P seeds the first allocation (defaults to 1/2 everywhere, or
    the target's own probabilities if you know the state is close to pure);
    t_initial copies per setting are measured up front so the pooled
    estimates never start from nothing.
    """

    epsilon_schedule: tuple[float, ...]
    initial_P: np.ndarray | None = None
    t_initial: int | np.ndarray = 5
    t_min: int = 1
    refine_within_round: bool = True

    def __post_init__(self):
        sched = tuple(float(e) for e in self.epsilon_schedule)
        if not sched:
            raise ConfigError("schedule must not be empty")
        if any(e <= 0 for e in sched):
            raise ConfigError("budgets must be positive")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ConfigError("schedule must be strictly decreasing")
        object.__setattr__(self, "epsilon_schedule", sched)

    @classmethod
    def geometric(cls, start: float = 0.01, ratio: float = 0.1, final: float = 0.0003,
                  **kwargs) -> "AdaptiveConfig":
        return cls(epsilon_schedule=geometric_schedule(start, ratio, final), **kwargs)


@dataclass(frozen=True)
class RoundRecord:
    """What one allocate-measure-update cycle did."""

    index: int
    epsilon: float
    P_used: np.ndarray
    target_t: np.ndarray
    increments: np.ndarray
    cumulative_t: np.ndarray
    P_hat: np.ndarray


@dataclass
class AdaptiveState:
    """Trajectory of the feedback protocol."""

    n: int
    rounds: list[RoundRecord] = field(default_factory=list)
    cumulative_t: np.ndarray | None = None
    current_P: np.ndarray | None = None
    fidelity: float = float("nan")
    fidelity_std: float = float("nan")

    @property
    def round(self) -> int:
        return len(self.rounds)

    @property
    def total_copies(self) -> int:
        return int(self.cumulative_t.sum())

    def history_csv(self) -> str:
        rows = []
        for rec in self.rounds:
            for j in range(self.n + 1):
                rows.append((rec.index, rec.epsilon, j + 1, int(rec.increments[j]),
                             int(rec.cumulative_t[j]), rec.P_hat[j]))
        return csv_text(["round", "epsilon", "setting", "increment", "cumulative", "P_hat"],
                        rows)

    def final_report_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "rounds": self.round,
            "epsilon_final": self.rounds[-1].epsilon if self.rounds else None,
            "cumulative_t": self.cumulative_t.tolist(),
            "total_copies": self.total_copies,
            "P_hat": self.current_P.tolist(),
            "fidelity": self.fidelity,
            "fidelity_std": self.fidelity_std,
        })


def _clamped(P: np.ndarray, cumulative: np.ndarray) -> np.ndarray:
    """Clip estimates to [1/t, 1-1/t] so one lucky streak cannot freeze a
    setting at zero variance forever."""
    out = P.copy()
    for j, t in enumerate(cumulative):
        if t >= 2:
            out[j] = min(max(out[j], 1.0 / t), 1.0 - 1.0 / t)
    return out


def run_adaptive(rho: DensityMatrix, wd: WitnessDecomposition, cfg: AdaptiveConfig,
                 rng, method: str = "inverse_cdf") -> AdaptiveState:
    """Run the feedback protocol against a simulated state.

    Each round allocates with the current estimates and the round's budget,
    measures only the missing copies (settings whose targets are already
    covered are skipped), pools all counts, and refines the estimates.
    """
    n = wd.n
    m = n + 1
    gen = _as_generator(rng)
    born = [s.born_probabilities(rho) for s in wd.settings]
    pooled = [np.zeros(2**n, dtype=np.int64) for _ in range(m)]
    cumulative = np.zeros(m, dtype=np.int64)

    t_init = np.asarray(cfg.t_initial, dtype=np.int64)
    if t_init.ndim == 0:
        t_init = np.full(m, int(t_init), dtype=np.int64)
    if t_init.shape != (m,):
        raise ConfigError(f"t_initial must be scalar or length {m}")
    for j in range(m):
        if t_init[j] > 0:
            pooled[j] += sample_counts(born[j], int(t_init[j]), gen, method=method)
    cumulative += t_init

    if cfg.initial_P is None:
        P_used = np.full(m, 0.5)
    else:
        P_used = np.asarray(cfg.initial_P, dtype=float)
        if P_used.shape != (m,):
            raise ConfigError(f"initial_P must have length {m}")

    def pooled_estimates(cum):
        return np.array([
            wd.settings[j].aggregate_probability(pooled[j] / cum[j]) for j in range(m)
        ])

    state = AdaptiveState(n=n)
    for idx, eps in enumerate(cfg.epsilon_schedule, start=1):
        eps0 = float(np.sqrt(eps))
        entry_P = P_used.copy()
        round_increments = np.zeros(m, dtype=np.int64)
        P_hat = P_used
        # Top up within the round until the budget is met by the cumulative
        # counts at the refreshed estimates (one pass when nothing drifts).
        for _ in range(64):
            p_in = SettingProbabilities(n=n, P=_clamped(P_used, cumulative))
            alloc = allocate_sc(p_in, epsilon0=eps0, t_min=cfg.t_min)
            increments = np.maximum(alloc.t - cumulative, 0)
            if increments.sum() == 0:
                P_hat = P_used
                break
            for j in range(m):
                if increments[j] > 0:
                    pooled[j] += sample_counts(born[j], int(increments[j]), gen,
                                               method=method)
            cumulative = cumulative + increments
            round_increments += increments
            P_hat = pooled_estimates(cumulative)
            P_used = P_hat
            if not cfg.refine_within_round:
                break
            p_chk = SettingProbabilities(n=n, P=_clamped(P_hat, cumulative))
            if delta_f(p_chk, cumulative.astype(float)) <= eps0 * (1 + 1e-9):
                break
        state.rounds.append(RoundRecord(
            index=idx, epsilon=float(eps), P_used=entry_P, target_t=alloc.t.copy(),
            increments=round_increments, cumulative_t=cumulative.copy(), P_hat=P_hat,
        ))
        P_used = P_hat

    state.cumulative_t = cumulative
    state.current_P = P_used
    p_final = SettingProbabilities(n=n, P=P_used)
    state.fidelity = fidelity_from_probabilities(p_final)
    state.fidelity_std = delta_f(p_final, cumulative.astype(float))
    return state


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    mean_total: float
    std_total: float
    mean_rounds: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    @property
    def best(self) -> SweepRow:
        return min(self.rows, key=lambda r: r.mean_total)

    def to_csv(self) -> str:
        return csv_text(["ratio", "mean_total", "std_total", "mean_rounds"],
                        [(r.ratio, r.mean_total, r.std_total, r.mean_rounds)
                         for r in self.rows])


def sweep_epsilon_ratio(rho: DensityMatrix, wd: WitnessDecomposition, ratios,
                        repeats: int, rng: RngSeed, start: float = 0.01,
                        stop: float = 0.0003, prior_range=(0.25, 0.75),
                        pilot_range=(4, 7), t_min: int = 1) -> SweepResult:
    """Total copies consumed per schedule-shrink ratio.

    Each repeat starts from a random prior vector in `prior_range` and a
    random pilot size in `pilot_range` per setting, runs the protocol until
    the budget drops past `stop`, and reports the cumulative copies.
    """
    m = wd.n + 1
    rows = []
    for i, ratio in enumerate(ratios):
        totals = np.empty(repeats)
        rounds = np.empty(repeats)
        for rep in range(repeats):
            setup = rng.generator(i, rep, 0)
            cfg = AdaptiveConfig(
                epsilon_schedule=geometric_schedule(start, float(ratio), stop),
                initial_P=setup.uniform(prior_range[0], prior_range[1], size=m),
                t_initial=setup.integers(pilot_range[0], pilot_range[1] + 1, size=m),
                t_min=t_min,
            )
            state = run_adaptive(rho, wd, cfg, rng.generator(i, rep, 1))
            totals[rep] = state.total_copies
            rounds[rep] = state.round
        rows.append(SweepRow(
            ratio=float(ratio),
            mean_total=float(totals.mean()),
            std_total=float(totals.std(ddof=1)) if repeats > 1 else 0.0,
            mean_rounds=float(rounds.mean()),
        ))
    return SweepResult(rows=tuple(rows))


@dataclass(frozen=True)
class TimelineRow:
    label: str
    copies: int
    prep_hours: float
    switches: int


@dataclass(frozen=True)
class TimelineReport:
    """Wall-clock account of the feedback run versus a single-pass run."""

    rows: tuple[TimelineRow, ...]
    adaptive_prep_hours: float
    adaptive_switches: int
    adaptive_switch_hours: float
    single_pass_switches: int
    single_pass_switch_hours: float
    baseline_total: int | None = None
    baseline_prep_hours: float | None = None
    prep_hours_saved: float | None = None

    @property
    def adaptive_total_hours(self) -> float:
        return self.adaptive_prep_hours + self.adaptive_switch_hours

    def to_csv(self) -> str:
        return csv_text(["label", "copies", "prep_hours", "switches"],
                        [(r.label, r.copies, r.prep_hours, r.switches) for r in self.rows])


def protocol_timeline(state: AdaptiveState, switch_cost_hours: float,
                      copy_rate_per_hour: float,
                      baseline_total: int | None = None) -> TimelineReport:
    """Estimate measurement wall-clock time for an adaptive trajectory.

    Preparation time is copies/rate; each setting visited in a round costs
    one switch.  The single-pass reference measures the same cumulative
    distribution with one visit per setting.  With a baseline copy total
    (e.g. what a non-optimized experiment spent) the report also gives the
    preparation hours saved.
    """
    if not copy_rate_per_hour > 0:
        raise QcopiesError(f"copy rate must be positive, got {copy_rate_per_hour}")
    if switch_cost_hours < 0:
        raise QcopiesError(f"switch cost must be >= 0, got {switch_cost_hours}")
    m = state.n + 1
    rows = []
    pilot = state.cumulative_t - sum(rec.increments for rec in state.rounds)
    if pilot.sum() > 0:
        rows.append(TimelineRow("pilot", int(pilot.sum()),
                                float(pilot.sum() / copy_rate_per_hour),
                                int(np.count_nonzero(pilot))))
    for rec in state.rounds:
        visited = int(np.count_nonzero(rec.increments))
        rows.append(TimelineRow(f"round {rec.index}", int(rec.increments.sum()),
                                float(rec.increments.sum() / copy_rate_per_hour), visited))
    switches = sum(r.switches for r in rows)
    prep = float(state.total_copies / copy_rate_per_hour)
    report = dict(
        rows=tuple(rows),
        adaptive_prep_hours=prep,
        adaptive_switches=switches,
        adaptive_switch_hours=switches * switch_cost_hours,
        single_pass_switches=m,
        single_pass_switch_hours=m * switch_cost_hours,
    )
    if baseline_total is not None:
        baseline_prep = float(baseline_total / copy_rate_per_hour)
        report.update(
            baseline_total=int(baseline_total),
            baseline_prep_hours=baseline_prep,
            prep_hours_saved=baseline_prep - prep,
        )
    return TimelineReport(**report)
