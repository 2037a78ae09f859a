"""A single attack scenario, worked end to end.

An attacker holds 25% of the mining power and the merchant waits for three
confirmations.  We walk through every quantity the library computes for that
point: the attacker's expected progress, the per-k terms of the success sum,
the three formula variants, and the confirmation depths needed to push the
risk below common thresholds.
"""

from doublespend import (
    AttackQuery,
    MiningPowerSplit,
    Variant,
    attack_success,
    attack_summands,
    catch_up_unlimited,
    min_confirmations,
    poisson_rate,
)

power = MiningPowerSplit(0.25)
z = 3

print(f"attacker power q = {power.q}, honest power p = {power.p}, depth z = {z}")
print(f"expected attacker blocks during the wait: lambda = z*q/p = "
      f"{poisson_rate(z, power)}")
print(f"catch-up probability from one block behind: (q/p)^1 = "
      f"{catch_up_unlimited(1, power):.6f}")
print()

print("per-k terms of the original formulation (k = attacker blocks mined "
      "while waiting):")
print(f"{'k':>3} {'P(X=k)':>12} {'catch-up':>12} {'product':>12}")
for row in attack_summands(AttackQuery(power, z, Variant.ORIGINAL)):
    print(f"{row.k:>3} {row.pmf:>12.6f} {row.catch_up:>12.6f} {row.product:>12.6f}")
print("the k=2 product is 1/(6e) ~ 6%: an 18% chance of mining 2 blocks "
      "times a 1/3 chance of catching up from 1 behind")
print()

for variant in Variant:
    value = attack_success(AttackQuery(power, z, variant))
    print(f"attack success, {variant.value:>9}: {value:.6f}")
print("the corrected variant is lower because overtaking (one block past) "
      "is strictly harder than drawing even;")
print("the budgeted variant differs imperceptibly: a 35-block loss budget is "
      "nearly as good as an unlimited one")
print()

print("confirmations the merchant needs before releasing goods:")
for target in (0.1, 0.01, 0.001):
    depth = min_confirmations(power, target)
    print(f"  risk <= {target:<6}: wait for z = {depth}")
