"""How much does a finite loss budget cost the attacker?

The corrected model assumes the attacker never gives up.  A simulation can
only play finite games, so the budgeted variant caps the attacker's net loss
at z + surplus blocks.  This script shows the budgeted value converging to
the unlimited one as the surplus grows, and that surplus = 35 is already
indistinguishable for q below ~0.45 - which is what makes the budgeted model
a faithful, simulable stand-in.
"""

from doublespend import AttackQuery, MiningPowerSplit, Variant, attack_success

z = 6
surpluses = (1, 5, 15, 35, 100)

header = f"{'q':>5} {'unlimited':>11} " + " ".join(
    f"{f'surplus={s}':>11}" for s in surpluses
)
print(f"attack success at z = {z}, corrected target (overtake by one)")
print(header)
print("-" * len(header))
for q in (0.10, 0.20, 0.30, 0.40, 0.45, 0.49):
    power = MiningPowerSplit(q)
    corrected = attack_success(AttackQuery(power, z, Variant.CORRECTED))
    row = [f"{corrected:>11.6f}"]
    for surplus in surpluses:
        budgeted = attack_success(AttackQuery(power, z, Variant.BUDGETED, surplus))
        row.append(f"{budgeted:>11.6f}")
    print(f"{q:>5} " + " ".join(row))

print()
print("worst gap |budgeted(35) - unlimited| over q <= 0.40, z <= 10:")
worst = max(
    abs(
        attack_success(AttackQuery(MiningPowerSplit(q), depth, Variant.BUDGETED, 35))
        - attack_success(AttackQuery(MiningPowerSplit(q), depth, Variant.CORRECTED))
    )
    for q in (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4)
    for depth in range(11)
)
print(f"  {worst:.2e}  (a 35-block budget is effectively unlimited there)")
