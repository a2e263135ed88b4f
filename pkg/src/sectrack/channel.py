"""Timing, range and energy model of the radio links.

Propagation is line-of-sight with Gaussian timestamp noise and a hard
range cutoff; all richer channel effects are folded into the one noise
knob.  Transmit energy splits across a node's simultaneously active
sectored beams and loses an interference term per extra beam, which is
what couples beam count to ranging accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sectrack.geometry import Position

# Largest beam count the energy model must stay positive for.
MAX_BEAMS = 8


@dataclass(frozen=True)
class ChannelConfig:
    c: float = 3.0e8
    range_limit: float = 250.0
    sigma_t: float = 5.0e-9
    e_total: float = 1.0
    beta: float = 0.06

    def __post_init__(self) -> None:
        for name in ("c", "range_limit", "sigma_t", "e_total", "beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.c == 0:
            raise ValueError("propagation speed must be positive")
        if self.beta * (MAX_BEAMS - 1) >= 1.0:
            raise ValueError(f"beta must be below {1.0 / (MAX_BEAMS - 1):.4f}")


def propagate(
    tx: Position,
    rx: Position,
    t_send: float,
    cfg: ChannelConfig,
    rng: np.random.Generator | None = None,
    sigma_t: float | None = None,
) -> float | None:
    """Arrival timestamp of a packet sent at t_send, or None beyond range.

    The stamp carries Gaussian noise of std sigma_t (defaulting to the
    config's); non-delivery is a normal outcome, not an error.
    """
    d = math.hypot(rx[0] - tx[0], rx[1] - tx[1])
    if d > cfg.range_limit:
        return None
    sigma = cfg.sigma_t if sigma_t is None else sigma_t
    noise = rng.normal(0.0, sigma) if (rng is not None and sigma > 0.0) else 0.0
    return t_send + d / cfg.c + noise


def received_energy(cfg: ChannelConfig, m_active_beams: int) -> float:
    """Receive-side energy when the transmitter splits m beams.

    E(m) = (E_total / m) * (1 - beta * (m - 1)), floored at zero: power
    splits evenly and every extra beam costs an interference fraction.
    """
    if m_active_beams < 1:
        raise ValueError(f"beam count must be at least 1, got {m_active_beams}")
    e = (cfg.e_total / m_active_beams) * (1.0 - cfg.beta * (m_active_beams - 1))
    return max(e, 0.0)


def ranging_noise_std(cfg: ChannelConfig, m_active_beams: int) -> float:
    """Timestamp noise std of a reference running m tracking beams.

    Splitting energy across beams lowers the received energy and widens
    the timing jitter as 1/sqrt(E); one beam gives the base sigma_t.
    """
    e = received_energy(cfg, m_active_beams)
    if e <= 0.0:
        raise ValueError("energy model exhausted; too many beams")
    return cfg.sigma_t * math.sqrt(received_energy(cfg, 1) / e)
