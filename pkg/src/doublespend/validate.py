"""Model-vs-simulation validation: error surfaces and error attribution.

run_validation sweeps a (q, z) grid, computing the closed-form attack success
and the Monte Carlo estimate side by side with absolute and relative errors.

component_attribution breaks the budgeted model into its three components and
tests each one against the simulator separately:

  (a) the catch-up probabilities, at exactly the deficit/budget pairs the
      budgeted sum uses;
  (b) the progress rate lambda = z*q/p, against the empirical mean of k;
  (c) the Poisson pmf, against the empirical distribution of k (including a
      total-variation distance).

It also evaluates a hybrid model: the budgeted sum re-weighted by the
empirical k distribution instead of the Poisson pmf.  The hybrid agreeing
with the simulation while (c) fails is what pins the model's error on the
Poisson density rather than on the catch-up term or the rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    AttackQuery,
    MiningPowerSplit,
    Variant,
    attack_success,
    catch_up_limited,
    poisson_pmf,
    poisson_rate,
    DEFAULT_BUDGET_SURPLUS,
)
from .rng import derive_seed
from .simulate import (
    TrialConfig,
    empirical_catch_up,
    empirical_k_distribution,
    run_trials,
)

__all__ = [
    "AttributionReport",
    "ComparisonRow",
    "SweepGrid",
    "ValidationRow",
    "component_attribution",
    "run_validation",
]


@dataclass(frozen=True)
class SweepGrid:
    """Axes and settings of a validation sweep."""

    q_values: tuple[float, ...]
    z_values: tuple[int, ...]
    variant: Variant = Variant.BUDGETED
    budget_surplus: int = DEFAULT_BUDGET_SURPLUS
    trials: int = 100_000
    master_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_values", tuple(self.q_values))
        object.__setattr__(self, "z_values", tuple(self.z_values))
        for name, values in ("q_values", self.q_values), ("z_values", self.z_values):
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if list(values) != sorted(set(values)):
                raise ValueError(f"{name} must be ascending and duplicate-free")
        if not all(0.0 < q < 1.0 for q in self.q_values):
            raise ValueError("q_values must lie in (0, 1)")
        if self.z_values[0] < 0:
            raise ValueError("z_values must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class ValidationRow:
    """One grid cell: model vs simulation with error metrics.

    rel_error is None when the simulation estimate is zero (undefined, not 0).
    """

    q: float
    z: int
    model_prob: float
    sim_prob: float
    sim_std_err: float
    abs_error: float
    rel_error: float | None
    trials: int


def run_validation(grid: SweepGrid) -> list[ValidationRow]:
    """Evaluate every (q, z) cell; deterministic for a fixed grid.

    Each cell's simulation seed is derived from (master_seed, q index,
    z index), so appending values to either axis never perturbs existing
    cells.
    """
    rows = []
    for qi, q in enumerate(grid.q_values):
        power = MiningPowerSplit(q)
        for zi, z in enumerate(grid.z_values):
            model = attack_success(
                AttackQuery(power, z, grid.variant, grid.budget_surplus)
            )
            config = TrialConfig(power, z, grid.budget_surplus)
            seed = derive_seed(grid.master_seed, qi, zi)
            sim = run_trials(config, grid.trials, seed)
            abs_error = abs(model - sim.success_rate)
            rel_error = abs_error / sim.success_rate if sim.success_rate > 0 else None
            rows.append(
                ValidationRow(
                    q=q,
                    z=z,
                    model_prob=model,
                    sim_prob=sim.success_rate,
                    sim_std_err=sim.std_err,
                    abs_error=abs_error,
                    rel_error=rel_error,
                    trials=grid.trials,
                )
            )
    return rows


@dataclass(frozen=True)
class ComparisonRow:
    """One empirical-vs-model comparison with its standard error."""

    component: str
    label: str
    observed: float
    expected: float
    std_err: float

    @property
    def z_score(self) -> float:
        if self.std_err > 0.0:
            return (self.observed - self.expected) / self.std_err
        return 0.0 if self.observed == self.expected else math.inf


@dataclass(frozen=True)
class AttributionReport:
    """Component-wise error attribution at one (q, z) point."""

    q: float
    z: int
    budget_surplus: int
    trials: int
    master_seed: int
    model_prob: float
    sim_prob: float
    sim_std_err: float
    catch_up: tuple[ComparisonRow, ...]
    mean_k: ComparisonRow
    k_pmf: tuple[ComparisonRow, ...]
    total_variation: ComparisonRow
    hybrid: ComparisonRow

    def rows(self) -> list[ComparisonRow]:
        return [
            *self.catch_up,
            self.mean_k,
            *self.k_pmf,
            self.total_variation,
            self.hybrid,
        ]


def _negative_binomial_pmf(k: int, z: int, p: float) -> float:
    # Exact law of attacker blocks before the z-th honest block.  Test oracle
    # only: deliberately not offered as a "fixed" public model.
    q = 1.0 - p
    return math.exp(
        math.lgamma(k + z)
        - math.lgamma(k + 1)
        - math.lgamma(z)
        + z * math.log(p)
        + k * math.log(q)
    )


def _binomial_se(prob: float, trials: int) -> float:
    return math.sqrt(max(prob * (1.0 - prob), 0.0) / trials)


def component_attribution(
    power: MiningPowerSplit,
    z: int,
    budget_surplus: int,
    trials: int,
    master_seed: int,
) -> AttributionReport:
    """Compare each model component against its empirical counterpart.

    The catch-up runs, the k-distribution run, and the success-rate run use
    distinct seeds derived from master_seed, so the comparisons are
    statistically independent.
    """
    if z < 1:
        raise ValueError("z must be >= 1")
    rate = poisson_rate(z, power)

    # (a) catch-up at the deficit/budget pairs the budgeted sum uses
    catch_rows = []
    for k in range(z + 1):
        deficit = z + 1 - k
        budget = z + budget_surplus - k
        observed = empirical_catch_up(
            power, deficit, budget, trials, derive_seed(master_seed, 1, k)
        )
        expected = catch_up_limited(deficit, budget, power)
        catch_rows.append(
            ComparisonRow(
                component="catch_up",
                label=f"deficit={deficit},budget={budget}",
                observed=observed,
                expected=expected,
                std_err=_binomial_se(expected, trials),
            )
        )

    # (b) and (c): one wait-phase run feeds the mean and the distribution
    k_dist = empirical_k_distribution(power, z, trials, derive_seed(master_seed, 2))
    mean_k = sum(k * w for k, w in k_dist.items())
    var_k = sum(k * k * w for k, w in k_dist.items()) - mean_k * mean_k
    mean_row = ComparisonRow(
        component="mean_k",
        label="mean_k",
        observed=mean_k,
        expected=rate,
        std_err=math.sqrt(max(var_k, 0.0) / trials),
    )

    pmf_rows = []
    tvd_twice = 0.0
    sign_mass = 0.0
    for k, w in k_dist.items():
        expected = poisson_pmf(k, rate)
        pmf_rows.append(
            ComparisonRow(
                component="k_pmf",
                label=f"k={k}",
                observed=w,
                expected=expected,
                std_err=_binomial_se(expected, trials),
            )
        )
        tvd_twice += abs(w - expected)
        sign_mass += w if w > expected else -w
    poisson_tail = 1.0 - sum(row.expected for row in pmf_rows)
    tvd_twice += max(poisson_tail, 0.0)  # mass at k values never observed
    # Delta-method SE of the plug-in total-variation estimator.
    tvd_se = math.sqrt(max(1.0 - sign_mass * sign_mass, 0.0) / (4.0 * trials))
    tvd_row = ComparisonRow(
        component="k_pmf",
        label="total_variation",
        observed=0.5 * tvd_twice,
        expected=0.0,
        std_err=tvd_se,
    )

    # Hybrid model: the budgeted sum re-weighted by the empirical k law.
    def _catch(k: int) -> float:
        if k >= z + 1:
            return 1.0
        return catch_up_limited(z + 1 - k, z + budget_surplus - k, power)

    hybrid = sum(w * _catch(k) for k, w in k_dist.items())
    hybrid_sq = sum(w * _catch(k) ** 2 for k, w in k_dist.items())
    hybrid_se = math.sqrt(max(hybrid_sq - hybrid * hybrid, 0.0) / trials)

    race = run_trials(
        TrialConfig(power, z, budget_surplus), trials, derive_seed(master_seed, 3)
    )
    hybrid_row = ComparisonRow(
        component="hybrid",
        label="success_rate",
        observed=hybrid,
        expected=race.success_rate,
        std_err=math.sqrt(hybrid_se**2 + race.std_err**2),
    )

    model = attack_success(AttackQuery(power, z, Variant.BUDGETED, budget_surplus))
    return AttributionReport(
        q=power.q,
        z=z,
        budget_surplus=budget_surplus,
        trials=trials,
        master_seed=master_seed,
        model_prob=model,
        sim_prob=race.success_rate,
        sim_std_err=race.std_err,
        catch_up=tuple(catch_rows),
        mean_k=mean_row,
        k_pmf=tuple(pmf_rows),
        total_variation=tvd_row,
        hybrid=hybrid_row,
    )
