"""Detection probability of a suspicious node: closed form vs sampling.

A node slips one key check whenever any of its three replay tricks works;
more detection keys drive the miss chance down geometrically.
"""

from sectrack.protocol import AdversaryModel, detection_rate, monte_carlo_detection

TRIALS = 50_000

print(f"{'p_wh':>5} {'p_i':>5} {'p_r':>5} {'n':>3} {'closed':>9} {'sampled':>9}")
for probs in [(0.0, 0.0, 0.0), (0.25, 0.25, 0.25), (0.5, 0.5, 0.5), (0.75, 0.5, 0.25)]:
    adv = AdversaryModel(*probs)
    for n in (1, 2, 4, 8):
        closed = detection_rate(adv, n)
        sampled = monte_carlo_detection(adv, n, TRIALS, rng_seed=n)
        print(f"{adv.p_wh:5.2f} {adv.p_i:5.2f} {adv.p_r:5.2f} {n:3d} "
              f"{closed:9.4f} {sampled:9.4f}")
    print()

print("more keys always help; certain replays (p=1) defeat every check:")
hopeless = AdversaryModel(1.0, 0.3, 0.2)
print(f"  p_wh=1: detection rate with 8 keys = {detection_rate(hopeless, 8):.4f}")
