"""Received energy as a transmitter splits more sectored beams."""

from sectrack.channel import ChannelConfig, received_energy, ranging_noise_std

cfg = ChannelConfig()
print("beams  energy  ranging-noise-std")
for m in range(1, 9):
    e = received_energy(cfg, m)
    bar = "#" * int(round(50 * e))
    print(f"{m:5d}  {e:6.3f}  {ranging_noise_std(cfg, m) * 1e9:6.2f} ns  {bar}")
