"""Track four targets marching on parallel lanes for a full run.

Prints the per-target error summary and drops the trajectory CSV next to
this script for plotting elsewhere.
"""

from pathlib import Path

from sectrack.config import ScenarioConfig
from sectrack.metrics import mean_tracking_error, plt_efficiency, write_csv
from sectrack.scenarios import run_trajectory

log = run_trajectory(ScenarioConfig(master_seed=1))

print("target  lane-y  estimates  mean-err  efficiency")
for target in sorted(log.tracks):
    rec = log.tracks[target]
    lane_y = 140.0 + (target - 9) * 40.0
    print(f"{target:6d} {lane_y:7.0f} {len(rec.estimates):10d} "
          f"{mean_tracking_error(rec):8.2f}  {plt_efficiency(rec):9.2f}")

print(f"\nreference switches during the run: {len(log.switches)}")
for ev in log.switches[:5]:
    print(f"  t={ev.t:6.1f} target {ev.target}: ref {ev.old_ref} -> {ev.new_ref} "
          f"({ev.cause.value}, {ev.delay_s:.1f} s)")
if len(log.switches) > 5:
    print(f"  ... and {len(log.switches) - 5} more")

out = Path(__file__).parent / "out_trajectory"
write_csv(log, out)
print(f"\nCSV files written under {out}/")
