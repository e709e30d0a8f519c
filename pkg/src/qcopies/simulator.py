"""Monte Carlo simulation of the measurement process: Born-rule sampling of
count tables, fidelity estimation from counts, histogram experiments and
copy-distribution comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allocator import CopyAllocation
from .core import DensityMatrix
from .errors import DimensionMismatchError, QcopiesError
from .witness import (
    SettingProbabilities,
    WitnessDecomposition,
    delta_f,
    fidelity_from_probabilities,
    setting_probabilities,
)


@dataclass(frozen=True)
class RngSeed:
    """Deterministic random stream: same (seed, stream) replays identically."""

    seed: int
    stream: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        """Generator for this stream, optionally forked by an index path."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, *path))
        return np.random.default_rng(ss)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngSeed):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise QcopiesError(f"expected RngSeed or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class CountTable:
    """Per-outcome event counts for one measurement setting."""

    setting_index: int
    total_copies: int
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if np.any(c < 0):
            raise QcopiesError("counts must be nonnegative")
        if int(c.sum()) != self.total_copies:
            raise QcopiesError(f"counts sum to {int(c.sum())}, expected {self.total_copies}")
        object.__setattr__(self, "counts", c)
        self.counts.flags.writeable = False

    @property
    def frequencies(self) -> np.ndarray:
        if self.total_copies == 0:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / self.total_copies


def sample_counts(probs: np.ndarray, copies: int, gen: np.random.Generator,
                  method: str = "inverse_cdf") -> np.ndarray:
    """Draw multinomial counts over outcome probabilities.

    "inverse_cdf" draws one uniform number per copy and locates its
    sub-interval of the cumulative distribution; "multinomial" is the
    library fast path.  Both are deterministic for a given generator state.
    """
    if copies < 0:
        raise QcopiesError(f"copies must be >= 0, got {copies}")
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    p = p / p.sum()
    if copies == 0:
        return np.zeros(p.size, dtype=np.int64)
    if method == "inverse_cdf":
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, gen.random(copies), side="right")
        return np.bincount(np.minimum(idx, p.size - 1), minlength=p.size).astype(np.int64)
    if method == "multinomial":
        return gen.multinomial(copies, p).astype(np.int64)
    raise QcopiesError(f"unknown sampling method {method!r}")


def sample_setting(rho: DensityMatrix, setting, copies: int, rng,
                   method: str = "inverse_cdf", setting_index: int = 0) -> CountTable:
    """Simulate projecting `copies` copies of the state into one setting."""
    probs = setting.born_probabilities(rho)
    counts = sample_counts(probs, copies, _as_generator(rng), method=method)
    return CountTable(setting_index=setting_index, total_copies=copies, counts=counts)


def probabilities_from_tables(tables, wd: WitnessDecomposition) -> SettingProbabilities:
    """Aggregate P-hat estimates from one count table per setting."""
    if len(tables) != wd.n + 1:
        raise DimensionMismatchError(f"need {wd.n + 1} tables, got {len(tables)}")
    P = []
    for table, setting in zip(tables, wd.settings):
        if table.total_copies == 0:
            raise QcopiesError("cannot estimate probabilities from an empty table")
        P.append(setting.aggregate_probability(table.frequencies))
    return SettingProbabilities(n=wd.n, P=np.array(P))


def estimate_fidelity(tables, wd: WitnessDecomposition) -> tuple[float, float]:
    """(F-hat, dF-hat) from one count table per setting."""
    p_hat = probabilities_from_tables(tables, wd)
    totals = np.array([t.total_copies for t in tables], dtype=float)
    return fidelity_from_probabilities(p_hat), delta_f(p_hat, totals)


def _simulate_fidelities(born_probs, wd, allocation, trials, rng, base_path, method):
    """One estimated fidelity per trial; per-trial RNG streams."""
    n = wd.n
    fids = np.empty(trials)
    for trial in range(trials):
        gen = rng.generator(*base_path, trial)
        p_hat = np.empty(n + 1)
        for j, (setting, probs) in enumerate(zip(wd.settings, born_probs)):
            counts = sample_counts(probs, int(allocation.t[j]), gen, method=method)
            p_hat[j] = setting.aggregate_probability(counts / allocation.t[j])
        fids[trial] = fidelity_from_probabilities(SettingProbabilities(n=n, P=p_hat))
    return fids


@dataclass
class HistogramSpec:
    """Binned fidelity events over a fixed range."""

    bins: int = 50
    value_range: tuple[float, float] = (0.0, 1.0)
    events: np.ndarray | None = None

    @property
    def bin_edges(self) -> np.ndarray:
        return np.linspace(self.value_range[0], self.value_range[1], self.bins + 1)

    def to_csv(self) -> str:
        from .reports import csv_text

        if self.events is None:
            raise QcopiesError("histogram has no events yet")
        edges = self.bin_edges
        rows = [(edges[i], edges[i + 1], int(self.events[i])) for i in range(self.bins)]
        return csv_text(["bin_low", "bin_high", "events"], rows)


@dataclass(frozen=True)
class HistogramResult:
    """Filled histogram plus the summary statistics of the trials."""

    histogram: HistogramSpec
    fidelities: np.ndarray = field(repr=False)
    mean: float
    std: float
    predicted_delta_f: float

    def summary_json(self) -> str:
        import json

        return json.dumps({
            "trials": int(self.fidelities.size),
            "mean": self.mean,
            "std": self.std,
            "predicted_delta_f": self.predicted_delta_f,
            "bins": self.histogram.bins,
            "range": list(self.histogram.value_range),
        })


def run_histogram_experiment(rho: DensityMatrix, wd: WitnessDecomposition,
                             allocation: CopyAllocation, trials: int,
                             rng: RngSeed, spec: HistogramSpec | None = None,
                             method: str = "inverse_cdf") -> HistogramResult:
    """Repeat the full measurement `trials` times and bin the fidelities.

    The summary carries both the empirical spread of the estimates and the
    binomial-formula prediction evaluated at the true probabilities, so the
    two can be compared.
    """
    if trials < 1:
        raise QcopiesError(f"trials must be >= 1, got {trials}")
    spec = spec or HistogramSpec()
    p_true = setting_probabilities(rho, wd)
    born = [s.born_probabilities(rho) for s in wd.settings]
    fids = _simulate_fidelities(born, wd, allocation, trials, rng, (), method)
    events, _ = np.histogram(fids, bins=spec.bins, range=spec.value_range)
    filled = HistogramSpec(bins=spec.bins, value_range=spec.value_range, events=events)
    return HistogramResult(
        histogram=filled,
        fidelities=fids,
        mean=float(fids.mean()),
        std=float(fids.std(ddof=1)) if trials > 1 else 0.0,
        predicted_delta_f=delta_f(p_true, allocation),
    )


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    total: int
    mean_fidelity: float
    std_fidelity: float
    predicted_delta_f: float
    savings_pct: float


@dataclass(frozen=True)
class ComparisonReport:
    """Copy totals and fidelity spreads of several distributions."""

    baseline: str
    trials: int
    rows: tuple[ComparisonRow, ...]

    def row(self, name: str) -> ComparisonRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        from .reports import csv_text

        return csv_text(
            ["name", "total", "mean_fidelity", "std_fidelity", "predicted_delta_f",
             "savings_pct"],
            [(r.name, r.total, r.mean_fidelity, r.std_fidelity, r.predicted_delta_f,
              r.savings_pct) for r in self.rows],
        )

    def to_json(self) -> str:
        import json

        return json.dumps({
            "baseline": self.baseline,
            "trials": self.trials,
            "rows": [r.__dict__ for r in self.rows],
        })


def compare_distributions(rho: DensityMatrix, wd: WitnessDecomposition,
                          allocations: dict[str, CopyAllocation], trials: int,
                          rng: RngSeed, baseline: str | None = None,
                          method: str = "inverse_cdf") -> ComparisonReport:
    """Simulate several copy distributions on the same state side by side.

    Savings are total-copy percentages relative to the baseline (the first
    entry unless named).
    """
    if len(allocations) < 2:
        raise QcopiesError("need at least two allocations to compare")
    names = list(allocations)
    baseline = baseline or names[0]
    if baseline not in allocations:
        raise QcopiesError(f"baseline {baseline!r} not among allocations")
    p_true = setting_probabilities(rho, wd)
    born = [s.born_probabilities(rho) for s in wd.settings]
    base_total = allocations[baseline].total
    rows = []
    for i, name in enumerate(names):
        alloc = allocations[name]
        fids = _simulate_fidelities(born, wd, alloc, trials, rng, (i,), method)
        rows.append(ComparisonRow(
            name=name,
            total=alloc.total,
            mean_fidelity=float(fids.mean()),
            std_fidelity=float(fids.std(ddof=1)) if trials > 1 else 0.0,
            predicted_delta_f=delta_f(p_true, alloc),
            savings_pct=100.0 * (base_total - alloc.total) / base_total,
        ))
    return ComparisonReport(baseline=baseline, trials=trials, rows=tuple(rows))
