"""Timeline of a reference losing and regaining its friendly status.

Scripted re-authentication failures force the tracker to scan: 20 s for
a lone failure, 30 s when the retry fails again right after.
"""

from sectrack.config import ScenarioConfig
from sectrack.scenarios import run_friendliness

log = run_friendliness(ScenarioConfig(master_seed=1))

print("time     node  peer  event            delay")
for ev in log.friend_events:
    if ev.event in ("reauth_fail", "scan_start", "scan_end",
                    "track_suspend", "track_resume", "detected_malicious"):
        print(f"{ev.t:8.2f} {ev.node:4d} {ev.peer:5d}  {ev.event:16s} "
              f"{ev.delay_s:5.1f}")

resumes = [ev for ev in log.friend_events if ev.event == "track_resume"]
fails = [ev for ev in log.friend_events if ev.event == "reauth_fail"]
print(f"\nsingle failure cost: {resumes[0].t - fails[0].t:.1f} s (floor 20 s)")
print(f"consecutive failures cost: {resumes[1].t - fails[2].t:.1f} s (floor 30 s)")
