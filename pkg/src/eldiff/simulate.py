"""Oracle-feedback simulation for semi-automated entity linking.

Measures each system's accuracy on the commonly recognised mentions that
exist in the gold standard, then replaces the links of a selected mention
budget with the gold answer and measures again. Selection strategies:
consensus-HARD (topped up with MEDIUM), classifier-predicted HARD, uniform
random, and most-candidates-first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .consensus import Label, read_annotations
from .rand import derive_seed

#: (doc_id, offset, surface) identifies an evaluated mention.
MentionKey = tuple[str, int, str]


class Strategy(Enum):
    DIFFICULT = "difficult"
    PRED_DIFFICULT = "pred_difficult"
    RANDOM = "random"
    CANDIDATES = "candidates"


class GoldStandard:
    """Mapping from mention key to the correct entity id."""

    def __init__(self, entries: Mapping[MentionKey, str]):
        self._entries = dict(entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: MentionKey) -> bool:
        return key in self._entries

    def entity(self, key: MentionKey) -> str:
        return self._entries[key]

    def keys(self):
        return self._entries.keys()

    @classmethod
    def read(cls, path: str | Path, redirect_map: Mapping[str, str] | None = None,
             normalize: bool = True) -> "GoldStandard":
        """Read gold annotations (same tab-separated layout as system dumps);
        conflicting duplicate keys are rejected."""
        entries: dict[MentionKey, str] = {}
        for a in read_annotations(path, system_id="gold", redirect_map=redirect_map,
                                  normalize=normalize):
            key = (a.doc_id, a.offset, a.surface)
            if key in entries and entries[key] != a.entity_id:
                raise ValueError(f"conflicting gold entries for mention {key}")
            entries[key] = a.entity_id
        return cls(entries)


def accuracy(choices: Mapping[MentionKey, str], gold: GoldStandard) -> float:
    """Fraction of correctly linked mentions among the evaluated ones."""
    if not choices:
        raise ValueError("cannot compute accuracy over an empty mention set")
    correct = 0
    for key, entity in choices.items():
        if key not in gold:
            raise KeyError(f"mention {key} is missing from the gold standard")
        correct += entity == gold.entity(key)
    return correct / len(choices)


def _draw(rng: np.random.Generator, items: Sequence[MentionKey], size: int) -> list[MentionKey]:
    if size >= len(items):
        return list(items)
    picked = rng.choice(len(items), size=size, replace=False)
    return [items[i] for i in picked]


def select_mentions(
    strategy: Strategy,
    n: int,
    pool: Sequence[MentionKey],
    labels: Mapping[MentionKey, Label] | None = None,
    cand_counts: Mapping[MentionKey, int] | None = None,
    seed: int = 0,
) -> set[MentionKey]:
    """Pick min(n, available) mentions for manual judgement.

    DIFFICULT and PRED_DIFFICULT sample uniformly from the HARD-labelled
    pool (consensus or predicted labels, whichever the caller passes) and
    top up a shortfall uniformly from MEDIUM. RANDOM samples the whole
    pool; CANDIDATES takes the highest candidate counts with seeded random
    tie-breaking.
    """
    if n < 0:
        raise ValueError("selection budget must be >= 0")
    rng = np.random.default_rng(seed)
    pool = list(pool)
    if strategy in (Strategy.DIFFICULT, Strategy.PRED_DIFFICULT):
        if labels is None:
            raise ValueError(f"{strategy.value} selection needs labels")
        hard = [k for k in pool if labels.get(k) is Label.HARD]
        medium = [k for k in pool if labels.get(k) is Label.MEDIUM]
        selected = _draw(rng, hard, min(n, len(hard)))
        if len(selected) < n:
            selected += _draw(rng, medium, min(n - len(selected), len(medium)))
        return set(selected)
    if strategy is Strategy.RANDOM:
        return set(_draw(rng, pool, min(n, len(pool))))
    if strategy is Strategy.CANDIDATES:
        if cand_counts is None:
            raise ValueError("candidates selection needs candidate counts")
        tie = rng.permutation(len(pool))
        ranked = sorted(range(len(pool)),
                        key=lambda i: (-cand_counts.get(pool[i], 0), tie[i]))
        return {pool[i] for i in ranked[:n]}
    raise ValueError(f"unknown strategy {strategy!r}")


def apply_feedback(
    choices: Mapping[MentionKey, str],
    selected: Iterable[MentionKey],
    gold: GoldStandard,
) -> dict[MentionKey, str]:
    """Replace the selected mentions' links with the gold entity; everything
    else is untouched. Feedback can therefore never introduce an error."""
    corrected = dict(choices)
    for key in selected:
        if key not in corrected:
            raise KeyError(f"selected mention {key} is not among the evaluated mentions")
        if key not in gold:
            raise KeyError(f"selected mention {key} is missing from the gold standard")
        corrected[key] = gold.entity(key)
    return corrected


def budget_from_fraction(n_evaluated: int, fraction: float) -> int:
    """Mention budget for a fraction of the evaluated set, rounded half-up."""
    return int(math.floor(n_evaluated * fraction + 0.5))


@dataclass(frozen=True)
class StrategyOutcome:
    mean_after: float
    std_after: float
    per_repetition: tuple[float, ...]


@dataclass(frozen=True)
class SimulationResult:
    systems: tuple[str, ...]
    strategies: tuple[Strategy, ...]
    budgets: tuple[int, ...]
    n_evaluated: int
    before: Mapping[str, float]
    after: Mapping[tuple[str, str, int], StrategyOutcome]
    repetitions: int
    seed: int

    def outcome(self, system: str, strategy: Strategy, budget: int) -> StrategyOutcome:
        return self.after[(system, strategy.value, budget)]


def run_simulation(
    system_choices: Mapping[str, Mapping[MentionKey, str]],
    gold: GoldStandard,
    labels: Mapping[MentionKey, Label] | None,
    budgets: Sequence[int],
    predictions: Mapping[MentionKey, Label] | None = None,
    cand_counts: Mapping[MentionKey, int] | None = None,
    strategies: Sequence[Strategy] | None = None,
    repetitions: int = 10,
    seed: int = 0,
) -> SimulationResult:
    """Before/after accuracy per system, strategy and budget.

    The evaluated set is the intersection of every system's mentions with
    the gold standard. Each (strategy, budget, repetition) selection uses an
    independent seed derived from the master seed, the strategy name, the
    budget index and the repetition index, so repetitions can run in any
    order (or in parallel) with identical results.
    """
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    systems = tuple(system_choices)
    if not systems:
        raise ValueError("no systems to simulate")
    common = set.intersection(*(set(choices) for choices in system_choices.values()))
    pool = sorted(k for k in common if k in gold)
    if not pool:
        raise ValueError("no commonly recognised mention exists in the gold standard")
    if strategies is None:
        strategies = [Strategy.DIFFICULT, Strategy.RANDOM]
        if predictions is not None:
            strategies.insert(1, Strategy.PRED_DIFFICULT)
        if cand_counts is not None:
            strategies.append(Strategy.CANDIDATES)
    strategies = tuple(strategies)

    evaluated = {
        system: {k: system_choices[system][k] for k in pool} for system in systems
    }
    before = {system: accuracy(evaluated[system], gold) for system in systems}

    after: dict[tuple[str, str, int], StrategyOutcome] = {}
    for strategy in strategies:
        strategy_labels = predictions if strategy is Strategy.PRED_DIFFICULT else labels
        for budget_index, budget in enumerate(budgets):
            per_system: dict[str, list[float]] = {system: [] for system in systems}
            for rep in range(repetitions):
                rep_seed = derive_seed(seed, strategy.value, budget_index, rep)
                selected = select_mentions(
                    strategy, budget, pool,
                    labels=strategy_labels, cand_counts=cand_counts, seed=rep_seed,
                )
                for system in systems:
                    corrected = apply_feedback(evaluated[system], selected, gold)
                    per_system[system].append(accuracy(corrected, gold))
            for system in systems:
                values = np.array(per_system[system])
                after[(system, strategy.value, budget)] = StrategyOutcome(
                    mean_after=float(values.mean()),
                    std_after=float(values.std()),
                    per_repetition=tuple(float(v) for v in values),
                )
    return SimulationResult(
        systems=systems,
        strategies=strategies,
        budgets=tuple(budgets),
        n_evaluated=len(pool),
        before=before,
        after=after,
        repetitions=repetitions,
        seed=seed,
    )


def write_simulation_report(result: SimulationResult, path: str | Path) -> None:
    """Tab-separated report: one row per (system, strategy, budget) with
    before, mean/stddev after, repetition count and master seed."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("system\tstrategy\tbudget\tbefore\tafter_mean\tafter_stddev\trepetitions\tseed\n")
        fh.write(f"# evaluated_mentions\t{result.n_evaluated}\n")
        for system in result.systems:
            for strategy in result.strategies:
                for budget in result.budgets:
                    outcome = result.outcome(system, strategy, budget)
                    fh.write(
                        f"{system}\t{strategy.value}\t{budget}\t{result.before[system]:.6f}"
                        f"\t{outcome.mean_after:.6f}\t{outcome.std_after:.6f}"
                        f"\t{result.repetitions}\t{result.seed}\n"
                    )
