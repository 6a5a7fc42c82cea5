"""Block-controllability probability vs the ALOHA parameter (small Fig-2 run).

Sweeps q for both protocols and both system types at the dense-network
preset, 2000 single-block realizations per point. Block ALOHA dominates for
the restless system (it preserves consecutive access); the rested system
tops the restless one everywhere.
"""

from alohactrl.config import load_config
from alohactrl.montecarlo import estimate_block_controllability

config = load_config("fig2", overrides=["num_realizations=2000", "seed=11"])
results = estimate_block_controllability(config)

table = {(r.protocol.value, r.system, r.q): r.estimate for r in results}
qs = config.q_values

print(f"lambda={config.ppp.intensity_lambda:g}/m^2, T={config.T}, v={config.v}, "
      f"{2000} blocks per point\n")
print("   q   | restless blk | restless cls | rested blk | rested cls")
print("-------+--------------+--------------+------------+-----------")
for q in qs:
    print(f"  {q:.1f}  |    {table[('block', 'restless', q)]:.3f}     |"
          f"    {table[('classical', 'restless', q)]:.3f}     |"
          f"   {table[('block', 'rested', q)]:.3f}    |"
          f"   {table[('classical', 'rested', q)]:.3f}")

print("\nRun the full 10000-realization sweep with:")
print("  alohactrl simulate --config fig2 --out out/fig2")
