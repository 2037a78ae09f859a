"""Independent reference implementations used as test oracles.

Nothing here imports from the doublespend package: every function evaluates
the underlying mathematics by a different route (linear algebra, scipy
distributions, naive direct summation) so agreement is meaningful.
"""

from __future__ import annotations

import numpy as np
from scipy import stats


def ruin_by_linear_solve(i: int, n: int, q: float) -> float:
    """Gambler's Ruin win probability from the one-step recurrence.

    Solves q_f = q * q_{f+1} + p * q_{f-1} for f = 1..n-1 with boundaries
    q_0 = 0 and q_n = 1 as a dense linear system; no closed form involved.
    """
    if i == 0:
        return 0.0
    if i == n:
        return 1.0
    p = 1.0 - q
    size = n - 1
    matrix = np.zeros((size, size))
    rhs = np.zeros(size)
    for row, fortune in enumerate(range(1, n)):
        matrix[row, row] = 1.0
        if fortune - 1 >= 1:
            matrix[row, row - 1] = -p
        if fortune + 1 <= n - 1:
            matrix[row, row + 1] = -q
        else:
            rhs[row] = q  # q * q_n with q_n = 1
    return float(np.linalg.solve(matrix, rhs)[i - 1])


def limited_catch_up(deficit: int, budget: int, q: float) -> float:
    """Naive finite-budget catch-up probability (direct ratio powers)."""
    if deficit == 0:
        return 1.0
    p = 1.0 - q
    if abs(p - q) <= 1e-12:
        return budget / (budget + deficit)
    r = p / q
    return (1.0 - r**budget) / (1.0 - r ** (budget + deficit))


def attack_success_naive(q: float, z: int, variant: str, surplus: int = 35) -> float:
    """Second, naively-summed attack-success implementation (scipy pmf)."""
    p = 1.0 - q
    lam = z * q / p
    k_top = z if variant == "original" else z + 1
    total = 0.0
    for k in range(k_top + 1):
        deficit = k_top - k
        if variant == "budgeted":
            catch = limited_catch_up(deficit, z + surplus - k, q)
        elif p <= q or deficit == 0:
            catch = 1.0
        else:
            catch = (q / p) ** deficit
        total += stats.poisson.pmf(k, lam) * (1.0 - catch)
    return 1.0 - total


def negative_binomial_pmf(k: int, z: int, p: float) -> float:
    """scipy's law of attacker blocks before the z-th honest block."""
    return float(stats.nbinom.pmf(k, z, p))


def budgeted_race_law(q: float, z: int, surplus: int = 35) -> float:
    """Exact success probability of the simulated race.

    The wait phase makes k negative binomial; the chase phase from deficit
    z+1-k with budget z+surplus-k is a Gambler's Ruin.  Mixing the two gives
    the simulator's true Bernoulli parameter, free of any Poisson
    approximation.
    """
    p = 1.0 - q
    total = 0.0
    k = 0
    while True:
        weight = negative_binomial_pmf(k, z, p)
        deficit = z + 1 - k
        if deficit <= 0:
            catch = 1.0
        else:
            catch = limited_catch_up(deficit, z + surplus - k, q)
        total += weight * catch
        if k > z + 1 and weight < 1e-16:
            break
        k += 1
    return total
