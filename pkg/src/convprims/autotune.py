"""Empirical autotuning: time every compatible algorithm, keep the argmin ranking."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .algorithms import Algorithm, compatible_algorithms
from .bench import ConvConfig, default_label, run_bench
from .selector import ParamMatch, SelectorTable
from .tensor import ConvParams

# measure(config, algorithm) -> best time in nanoseconds
Measure = Callable[[ConvConfig, Algorithm], float]


@dataclass
class TuneResult:
    table: SelectorTable
    timings: dict = field(default_factory=dict)  # rule key -> {Algorithm: best ns}
    warnings: list = field(default_factory=list)

    def win_counts(self) -> Counter:
        return Counter(ranking[0] for _, ranking in self.table.rules if ranking)


def rank_by_time(times: dict) -> tuple:
    """Ascending best time; ties go to the earlier-declared algorithm."""
    return tuple(sorted(times, key=lambda a: (times[a], a.order)))


def autotune(configs: Sequence[Union[ConvConfig, ConvParams]], reps: int = 3, seed: int = 0,
             warmups: int = 1, algorithms: Optional[Iterable[Algorithm]] = None,
             measure: Optional[Measure] = None) -> TuneResult:
    """Build an exact-match selector table from measurements.

    Each distinct (window, stride, rows, cols, in, out) tuple is measured
    once, serially, so repeated configs share one ranking.  An algorithm
    whose measurement raises is left out of that ranking and reported in
    ``warnings``.  The default ranking orders all algorithms by how many
    configs they won.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    wanted = set(Algorithm if algorithms is None else algorithms)
    if measure is None:
        def measure(config, alg):
            return run_bench(config, alg, reps, warmups, seed).best_time_ns

    rules = {}
    timings = {}
    warnings = []
    for item in configs:
        config = item if isinstance(item, ConvConfig) else ConvConfig(default_label(item), item)
        predicate = ParamMatch.exact(config.params)
        if predicate.key in timings:
            continue
        times = {}
        for alg in compatible_algorithms(config.params):
            if alg not in wanted:
                continue
            try:
                times[alg] = measure(config, alg)
            except Exception as e:  # noqa: BLE001  (any kernel failure drops that candidate)
                warnings.append(f"{config.label}: {alg.value} failed: {e}")
        timings[predicate.key] = times
        if times:
            rules[predicate.key] = (predicate, rank_by_time(times))
        else:
            warnings.append(f"{config.label}: no algorithm could be measured")

    wins = Counter(ranking[0] for _, ranking in rules.values())
    default = tuple(sorted(Algorithm, key=lambda a: (-wins[a], a.order)))
    return TuneResult(SelectorTable(tuple(rules.values()), default), timings, warnings)
