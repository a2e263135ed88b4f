"""Strict friendliness verification: handshake sessions and detection math.

A verification session walks preamble -> seed agreement -> challenge
packets -> verdict.  Honest candidates run the real chained cipher with
their own seeds; a candidate whose seeds or identity disagree fails the
challenge.  Adversarial candidates are abstracted by three replay
probabilities, and the closed-form detection probability they induce is
cross-checked by a Monte Carlo sampler that simulates the replay draws
directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from sectrack import cipher
from sectrack.cipher import EnsemblePacket, SeedPair


class OutOfRangeError(ValueError):
    """Candidate is beyond the initiator's radio range."""


class SessionStateError(RuntimeError):
    """Operation applied to a session in the wrong state."""


class SessionState(enum.Enum):
    PREAMBLE_SENT = "preamble_sent"
    SEEDS_AGREED = "seeds_agreed"
    CHALLENGING = "challenging"
    VERIFIED = "verified"
    REJECTED = "rejected"


_STATE_ORDER = {
    SessionState.PREAMBLE_SENT: 0,
    SessionState.SEEDS_AGREED: 1,
    SessionState.CHALLENGING: 2,
    SessionState.VERIFIED: 3,
    SessionState.REJECTED: 3,
}


class Verdict(enum.Enum):
    FRIENDLY = "friendly"
    MALICIOUS = "malicious"


@dataclass(frozen=True)
class AdversaryModel:
    """Replay success probabilities available to a suspicious node.

    p_wh: challenge traffic replayed through a wormhole.
    p_i:  another node's key/identity replayed.
    p_r:  the round-trip time locally replayed.
    """

    p_wh: float = 0.0
    p_i: float = 0.0
    p_r: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p_wh", "p_i", "p_r"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass
class VerificationSession:
    """One initiator/candidate screening exchange."""

    initiator_id: int
    candidate_id: int
    j_max: int = 4
    state: SessionState = SessionState.PREAMBLE_SENT
    initiator_seeds: SeedPair | None = None
    candidate_seeds: SeedPair | None = None
    tx_id_at_candidate: int | None = None
    challenge_index: int = 0
    started_at: float = 0.0
    decided_at: float | None = None

    def _advance(self, new: SessionState) -> None:
        if _STATE_ORDER[new] < _STATE_ORDER[self.state]:
            raise SessionStateError(f"cannot move from {self.state} back to {new}")
        self.state = new


def start_verification(
    initiator,
    candidate,
    now: float,
    *,
    range_limit: float = 250.0,
    j_max: int = 4,
) -> VerificationSession:
    """Open a session and send the preamble.

    `initiator` and `candidate` need `id` and `position` attributes; the
    candidate must be within radio range.
    """
    ix, iy = initiator.position
    cx, cy = candidate.position
    if math.hypot(cx - ix, cy - iy) > range_limit:
        raise OutOfRangeError(
            f"candidate {candidate.id} beyond {range_limit} m of initiator {initiator.id}"
        )
    return VerificationSession(
        initiator_id=initiator.id,
        candidate_id=candidate.id,
        j_max=j_max,
        started_at=now,
    )


def agree_seeds(
    session: VerificationSession,
    initiator_seeds: SeedPair,
    candidate_seeds: SeedPair,
    tx_id_at_candidate: int | None = None,
) -> VerificationSession:
    """Record the seeds each side derived from the preamble exchange.

    Honest peers derive identical pairs; any disagreement surfaces later
    as a failed challenge, never as an error here.
    """
    if session.state != SessionState.PREAMBLE_SENT:
        raise SessionStateError("seeds can only be agreed after the preamble")
    session.initiator_seeds = initiator_seeds
    session.candidate_seeds = candidate_seeds
    session.tx_id_at_candidate = (
        session.initiator_id if tx_id_at_candidate is None else tx_id_at_candidate
    )
    session._advance(SessionState.SEEDS_AGREED)
    return session


def _challenge_payloads(session: VerificationSession, rng: np.random.Generator) -> list[bytes]:
    return [
        cipher.pad(rng.bytes(24 + 8 * (j % 3)))  # 1..2 blocks after padding
        for j in range(session.j_max)
    ]


def _run_honest_challenge(session: VerificationSession, rng: np.random.Generator) -> bool:
    """Drive the real cipher on both ends; True iff every packet validates."""
    assert session.initiator_seeds is not None and session.candidate_seeds is not None
    payloads = _challenge_payloads(session, rng)

    tx_id = session.initiator_id
    tx_key = cipher.derive_initial_key(
        session.initiator_seeds, tx_id, cipher.first_plain_segment(payloads[0])
    )
    tx_keys = cipher.key_chain(tx_key, tx_id, session.j_max)
    cipher_packets = [
        cipher.encrypt_packet(EnsemblePacket(p, index=j + 1), tx_keys[j])
        for j, p in enumerate(payloads)
    ]

    # Receiver side: reconstruct from its own seeds and the claimed identity.
    rx_id = tx_id if session.tx_id_at_candidate is None else session.tx_id_at_candidate
    rx_key = cipher.reconstruct_initial_key(cipher_packets[0], session.candidate_seeds, rx_id)
    rx_keys = cipher.key_chain(rx_key, rx_id, session.j_max)

    for j, cpkt in enumerate(cipher_packets):
        session.challenge_index = j + 1
        session._advance(SessionState.CHALLENGING)
        recovered = cipher.decrypt_packet(cpkt, rx_keys[j])
        if cipher.xor_fold_digest(recovered.payload) != cipher.xor_fold_digest(payloads[j]):
            return False
    return True


def _sample_evasion(
    adversary: AdversaryModel, n_keys: int, rng: np.random.Generator
) -> bool:
    """True iff the suspicious node slips through every one of n key checks.

    A single key check catches the node only when all three replay
    attempts fail; one successful replay defeats that check.
    """
    for _ in range(n_keys):
        wh = rng.random() < adversary.p_wh
        ki = rng.random() < adversary.p_i
        rt = rng.random() < adversary.p_r
        detected = not (wh or ki or rt)
        if detected:
            return False
    return True


def complete_verification(
    session: VerificationSession,
    *,
    candidate_honest: bool,
    adversary: AdversaryModel | None = None,
    n_keys: int = 1,
    rng_seed: int | np.random.Generator = 0,
    now: float | None = None,
) -> Verdict:
    """Run the challenge phase to a verdict.

    Honest candidates exercise the real cipher chain; they pass exactly
    when their seeds and the claimed identity match the initiator's.
    Dishonest candidates are screened by n independent key checks whose
    detection odds follow the replay model.
    """
    if session.state != SessionState.SEEDS_AGREED:
        raise SessionStateError("challenge requires agreed seeds")
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )

    if candidate_honest:
        passed = _run_honest_challenge(session, rng)
    else:
        if n_keys < 1:
            raise ValueError("n_keys must be at least 1")
        adv = adversary if adversary is not None else AdversaryModel()
        passed = _sample_evasion(adv, n_keys, rng)

    session._advance(SessionState.VERIFIED if passed else SessionState.REJECTED)
    session.decided_at = session.started_at if now is None else now
    return Verdict.FRIENDLY if passed else Verdict.MALICIOUS


def detection_single(adv: AdversaryModel) -> float:
    """Probability one friendly node catches a suspicious node on one key."""
    return (1.0 - adv.p_wh) * (1.0 - adv.p_i) * (1.0 - adv.p_r)


def detection_rate(adv: AdversaryModel, n: int) -> float:
    """Detection probability with n independent detection keys."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return 1.0 - (1.0 - detection_single(adv)) ** n


def monte_carlo_detection(
    adv: AdversaryModel,
    n: int,
    trials: int,
    rng_seed: int | np.random.Generator = 0,
) -> float:
    """Empirical detection rate from simulating the replay draws directly.

    Each trial runs n key checks; a check detects when none of the three
    replays succeeds, and the trial detects when at least one check does.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    probs = np.array([adv.p_wh, adv.p_i, adv.p_r])
    replays = rng.random((trials, n, 3)) < probs
    detected_per_key = ~replays.any(axis=2)
    return float(detected_per_key.any(axis=1).mean())
