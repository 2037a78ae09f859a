"""Monte Carlo simulation of the two-phase double-spend race.

A trial flips one coin per block: the attacker finds it with probability q,
the honest miners with p = 1 - q.  Phase 1 (the wait) runs until the honest
miners have found z blocks; the attacker's tally during that time is k.
Phase 2 (the chase) starts from a deficit of z + 1 - k, since the attacker
must end strictly ahead; if the deficit is already <= 0 the trial is an
immediate win.  The chase ends as a win when the deficit reaches 0, and as a
loss when it reaches its starting value plus the remaining loss budget
z + budget_surplus - k.  No formula from the closed-form model decides any
trial; everything is coin flips.

Trial t draws its coins from a counter-based substream keyed by
(master_seed, t), so results are bit-identical for a given

    (config, trials, master_seed)

regardless of batch size, execution order, or parallelism.  Aggregation is
counts only, hence order-insensitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import MiningPowerSplit, DEFAULT_BUDGET_SURPLUS
from .rng import (
    TrialStream,
    bernoulli_threshold,
    mix64_array,
    step_offset,
    trial_keys,
)

__all__ = [
    "SimulationResult",
    "TrialConfig",
    "TrialRecord",
    "empirical_catch_up",
    "empirical_k_distribution",
    "run_trials",
    "simulate_trial",
]

DEFAULT_MAX_BLOCKS = 1_000_000

# Vector width per batch; outcomes are independent of this value.
_BATCH_TRIALS = 1 << 20


@dataclass(frozen=True)
class TrialConfig:
    """Parameters of one simulated race.

    max_blocks is a per-trial safety cap on total coin flips; with any sane
    budget the race absorbs long before it.  Capped trials are counted and
    reported, never dropped.
    """

    power: MiningPowerSplit
    z: int
    budget_surplus: int = DEFAULT_BUDGET_SURPLUS
    max_blocks: int = DEFAULT_MAX_BLOCKS

    def __post_init__(self) -> None:
        if self.z < 0:
            raise ValueError("confirmation depth z must be >= 0")
        if self.budget_surplus < 1:
            raise ValueError("budget_surplus must be >= 1")
        if self.max_blocks < 1:
            raise ValueError("max_blocks must be >= 1")


@dataclass(frozen=True)
class TrialRecord:
    """Observables of a single trial."""

    k_during_wait: int
    attacker_won: bool
    blocks_elapsed: int
    capped: bool

    def __post_init__(self) -> None:
        if self.attacker_won and self.capped:
            raise ValueError("a capped trial cannot be a win")


@dataclass(frozen=True)
class SimulationResult:
    """Aggregates over independent trials of one TrialConfig."""

    config: TrialConfig
    trials: int
    wins: int
    k_histogram: dict[int, int] = field(compare=True)
    master_seed: int = 0
    capped_count: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.wins <= self.trials:
            raise ValueError("wins must be in [0, trials]")
        if sum(self.k_histogram.values()) != self.trials:
            raise ValueError("k_histogram must account for every trial")

    @property
    def success_rate(self) -> float:
        return self.wins / self.trials

    @property
    def std_err(self) -> float:
        r = self.success_rate
        return math.sqrt(r * (1.0 - r) / self.trials)

    @property
    def mean_k(self) -> float:
        return sum(k * n for k, n in self.k_histogram.items()) / self.trials

    @property
    def k_variance(self) -> float:
        m = self.mean_k
        sq = sum(k * k * n for k, n in self.k_histogram.items()) / self.trials
        return sq - m * m


def simulate_trial(rng_stream: TrialStream, config: TrialConfig) -> TrialRecord:
    """Run one race on the given substream; bit-exact replay of the batch engine."""
    z, surplus = config.z, config.budget_surplus
    threshold = bernoulli_threshold(config.power.q)
    h = k = draws = 0
    while h < z:
        if draws == config.max_blocks:
            return TrialRecord(k, False, draws, True)
        if rng_stream.next_bernoulli(threshold):
            k += 1
        else:
            h += 1
        draws += 1
    deficit = z + 1 - k
    if deficit <= 0:
        return TrialRecord(k, True, draws, False)
    loss_at = deficit + (z + surplus - k)
    d = deficit
    while True:
        if d == 0:
            return TrialRecord(k, True, draws, False)
        if d == loss_at:
            return TrialRecord(k, False, draws, False)
        if draws == config.max_blocks:
            return TrialRecord(k, False, draws, True)
        d += -1 if rng_stream.next_bernoulli(threshold) else 1
        draws += 1


def _run_batch(
    config: TrialConfig, master_seed: int, start: int, count: int
) -> tuple[int, int, np.ndarray]:
    """Race trials start..start+count-1 in lockstep; returns (wins, capped, k_wait)."""
    z, surplus = config.z, config.budget_surplus
    threshold = np.uint64(bernoulli_threshold(config.power.q))
    keys = trial_keys(master_seed, count, start=start)
    pos = np.arange(count, dtype=np.int64)
    k_wait = np.zeros(count, dtype=np.int64)
    chasing = np.zeros(count, dtype=bool)
    h = np.zeros(count, dtype=np.int64)
    k = np.zeros(count, dtype=np.int64)
    d = np.zeros(count, dtype=np.int64)
    loss_at = np.zeros(count, dtype=np.int64)
    wins = 0

    if z == 0:
        # The wait ends before any coin flip: k = 0, deficit 1.
        chasing[:] = True
        d[:] = 1
        loss_at[:] = 1 + surplus

    step = 0
    while keys.size and step < config.max_blocks:
        att = mix64_array(keys + np.uint64(step_offset(step))) < threshold
        step += 1

        was_chasing = chasing.copy()
        waiting = ~chasing
        if waiting.any():
            k[waiting] += att[waiting]
            h[waiting] += ~att[waiting]
            done_wait = waiting & (h == z)
        else:
            done_wait = waiting  # all False

        if was_chasing.any():
            d[was_chasing] += np.where(att[was_chasing], -1, 1)
            caught = was_chasing & (d == 0)
            busted = was_chasing & (d == loss_at)
        else:
            caught = busted = was_chasing  # all False

        if done_wait.any():
            k_wait[pos[done_wait]] = k[done_wait]
            instant = done_wait.copy()
            instant[done_wait] = z + 1 - k[done_wait] <= 0
            enter = done_wait & ~instant
            d[enter] = z + 1 - k[enter]
            loss_at[enter] = d[enter] + (z + surplus - k[enter])
            chasing[enter] = True
        else:
            instant = done_wait  # all False

        wins += int(instant.sum()) + int(caught.sum())
        finished = instant | caught | busted
        if finished.any():
            keep = ~finished
            keys, pos, chasing = keys[keep], pos[keep], chasing[keep]
            h, k, d, loss_at = h[keep], k[keep], d[keep], loss_at[keep]

    capped = int(keys.size)
    if capped:
        still_waiting = ~chasing
        if still_waiting.any():
            k_wait[pos[still_waiting]] = k[still_waiting]
    return wins, capped, k_wait


def run_trials(config: TrialConfig, trials: int, master_seed: int) -> SimulationResult:
    """Aggregate independent trials; deterministic in (config, trials, master_seed)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    wins = capped = 0
    histogram: dict[int, int] = {}
    for batch_start in range(0, trials, _BATCH_TRIALS):
        count = min(_BATCH_TRIALS, trials - batch_start)
        w, c, k_wait = _run_batch(config, master_seed, batch_start, count)
        wins += w
        capped += c
        for kk, n in enumerate(np.bincount(k_wait)):
            if n:
                histogram[int(kk)] = histogram.get(int(kk), 0) + int(n)
    return SimulationResult(config, trials, wins, histogram, master_seed, capped)


def empirical_catch_up(
    power: MiningPowerSplit,
    deficit: int,
    budget: int,
    trials: int,
    master_seed: int,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
) -> float:
    """Win fraction of pure chase-phase walks: win at 0, lose at deficit + budget.

    Validates the catch-up component of the model independently of the
    Poisson component.  A deficit of 0 is an immediate win.  Trials that hit
    the block cap (essentially impossible with a finite budget) count as
    losses.
    """
    if deficit < 0:
        raise ValueError("deficit must be >= 0")
    if deficit == 0:
        return 1.0
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    threshold = np.uint64(bernoulli_threshold(power.q))
    wins = 0
    for batch_start in range(0, trials, _BATCH_TRIALS):
        count = min(_BATCH_TRIALS, trials - batch_start)
        keys = trial_keys(master_seed, count, start=batch_start)
        d = np.full(count, deficit, dtype=np.int64)
        step = 0
        while keys.size and step < max_blocks:
            att = mix64_array(keys + np.uint64(step_offset(step))) < threshold
            step += 1
            d += np.where(att, -1, 1)
            caught = d == 0
            busted = d == deficit + budget
            wins += int(caught.sum())
            finished = caught | busted
            if finished.any():
                keep = ~finished
                keys, d = keys[keep], d[keep]
    return wins / trials


def empirical_k_distribution(
    power: MiningPowerSplit,
    z: int,
    trials: int,
    master_seed: int,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
) -> dict[int, float]:
    """Normalized histogram of attacker blocks mined while honest miners reach z.

    Wait-phase-only simulation.  Under the per-block coin-flip model the true
    law of k is negative binomial, not Poisson; this instrument is what makes
    that gap observable.
    """
    if z < 1:
        raise ValueError("z must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    threshold = np.uint64(bernoulli_threshold(power.q))
    histogram: dict[int, int] = {}
    for batch_start in range(0, trials, _BATCH_TRIALS):
        count = min(_BATCH_TRIALS, trials - batch_start)
        keys = trial_keys(master_seed, count, start=batch_start)
        h = np.zeros(count, dtype=np.int64)
        k = np.zeros(count, dtype=np.int64)
        done_k: list[np.ndarray] = []
        step = 0
        while keys.size and step < max_blocks:
            att = mix64_array(keys + np.uint64(step_offset(step))) < threshold
            step += 1
            k += att
            h += ~att
            done = h == z
            if done.any():
                done_k.append(k[done])
                keep = ~done
                keys, h, k = keys[keep], h[keep], k[keep]
        if keys.size:
            done_k.append(k)  # capped: record progress so counts still sum to trials
        for kk, n in enumerate(np.bincount(np.concatenate(done_k))):
            if n:
                histogram[int(kk)] = histogram.get(int(kk), 0) + int(n)
    return {kk: n / trials for kk, n in sorted(histogram.items())}
