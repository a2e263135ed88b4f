"""Deterministic discrete-event simulation binding all subsystems.

One cluster head (node 0) screens every neighbor with the chained-key
handshake and re-authenticates friendly relations periodically.  Nodes
failing the screen are targets: pairs of friendly references keep a
tracking zone focused on each one, range it with two-way timestamp
exchanges on their sectored beams, triangulate, and switch references
when range, zone, friendliness or sector availability breaks down.

Determinism contract: one master seed fans out into per-node and
per-purpose streams; events dispatch in nondecreasing time with FIFO
order among equal times, so identical configs produce identical logs.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from sectrack import channel as ch
from sectrack import cipher, mobility, protocol
from sectrack.config import ScenarioConfig, config_fields, validate
from sectrack.geometry import (
    DegenerateGeometryError,
    MeasurementError,
    NoFixError,
    OutOfZoneError,
    Position,
    RangeMeasurement,
    TrackingZone,
    beamwidth_for_zone,
    bearing_deg,
    circle_intersections,
    distance,
    form_zone,
    point_line_distance,
    range_from_timestamps,
    sector_of,
    triangulate,
)
from sectrack.metrics import (
    EstimateSample,
    FriendEvent,
    MetricsLog,
    SwitchCause,
    SwitchEvent,
    TrackRecord,
    VerdictEvent,
)

MOBILITY_DT = 1.0
PROCESSING_DELAY = 2.0e-4
SCAN_DURATION = 20.0
CONSECUTIVE_SCAN_PENALTY = 10.0
# Minimum perpendicular offset of a target from a reference pair's
# baseline: closer than this the two-circle fix cannot tell the sides
# apart, so such pairs are never assigned and are switched away from.
BASELINE_MARGIN = 25.0
AREA_SLACK = 10.0


class Role(enum.Enum):
    CLUSTER_HEAD = "cluster_head"
    FRIENDLY_REFERENCE = "friendly_reference"
    MALICIOUS_TARGET = "malicious_target"


class Friendliness(enum.Enum):
    UNKNOWN = "unknown"
    FRIENDLY = "friendly"
    MALICIOUS = "malicious"


class BeamState(enum.Enum):
    IDLE = "idle"
    SCANNING = "scanning"
    AUTHENTICATING = "authenticating"
    TRACKING = "tracking"


@dataclass
class SectorBeam:
    owner: int
    sector_index: int
    boresight: float
    beamwidth: float
    state: BeamState = BeamState.IDLE
    target_id: int | None = None
    partner_id: int | None = None

    def release(self) -> None:
        self.state = BeamState.IDLE
        self.target_id = None
        self.partner_id = None


@dataclass
class FriendRecord:
    status: Friendliness = Friendliness.UNKNOWN
    since: float = 0.0
    consecutive_failures: int = 0
    scanning_until: float | None = None


@dataclass
class NodeState:
    id: int
    role: Role
    mobility: mobility.MobilityState
    sectors: list[SectorBeam] = field(default_factory=list)
    friendliness: dict[int, FriendRecord] = field(default_factory=dict)

    @property
    def position(self) -> Position:
        return self.mobility.position

    def record_for(self, peer: int) -> FriendRecord:
        if peer not in self.friendliness:
            self.friendliness[peer] = FriendRecord()
        return self.friendliness[peer]

    def beam_for_target(self, target: int) -> SectorBeam | None:
        # A SCANNING beam still belongs to its target's suspended track.
        for beam in self.sectors:
            if beam.target_id == target and beam.state in (
                BeamState.TRACKING,
                BeamState.SCANNING,
            ):
                return beam
        return None

    def tracking_beam_count(self) -> int:
        return max(1, sum(1 for b in self.sectors if b.state is BeamState.TRACKING))


class TrackStatus(enum.Enum):
    ACTIVE = "active"
    WAITING = "waiting"  # scanning for a replacement reference or re-auth


@dataclass
class Track:
    record: TrackRecord
    ref_a: int
    ref_b: int
    anchor: Position  # zone seed: last estimate, prediction, or detection fix
    anchor_time: float
    vel_est: tuple[float, float] = (0.0, 0.0)
    status: TrackStatus = TrackStatus.ACTIVE
    resume_at: float = 0.0
    waiting_on: int | None = None  # peer whose re-auth must complete
    failed_ref: int | None = None
    suspended_at: float = 0.0
    scan_until: float = 0.0
    pending_cause: SwitchCause | None = None
    consecutive_no_fix: int = 0
    lost: bool = False

    @property
    def target(self) -> int:
        return self.record.target

    def predict(self, t: float) -> Position:
        dt = t - self.anchor_time
        return Position(
            self.anchor.x + self.vel_est[0] * dt, self.anchor.y + self.vel_est[1] * dt
        )


class EventKind(enum.Enum):
    MOBILITY = "mobility"
    SWEEP = "sweep"
    ASSIGN = "assign"
    TRACK = "track"
    SCAN_DONE = "scan_done"
    VERDICT = "verdict"


class EventQueue:
    """Time-ordered event dispatch, FIFO among equal timestamps."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, EventKind, dict]] = []
        self._seq = itertools.count()

    def push(self, time: float, kind: EventKind, payload: dict | None = None) -> None:
        heapq.heappush(self._heap, (time, next(self._seq), kind, payload or {}))

    def pop(self) -> tuple[float, EventKind, dict]:
        time, _, kind, payload = heapq.heappop(self._heap)
        return time, kind, payload

    def __len__(self) -> int:
        return len(self._heap)


class Engine:
    """Owns all mutable simulation state; single-threaded event loop."""

    def __init__(self, cfg: ScenarioConfig):
        validate(cfg)
        self.cfg = cfg
        self.chan = cfg.channel_config()
        self.zone_cfg = cfg.zone_config()
        self.now = 0.0
        self._last_mobility = 0.0
        self.queue = EventQueue()
        self.adversary = protocol.AdversaryModel(cfg.p_wh, cfg.p_i, cfg.p_r)

        seed = cfg.master_seed
        self.rng_channel = np.random.default_rng(cipher.derive_stream_seed(seed, "channel"))
        self.rng_protocol = np.random.default_rng(cipher.derive_stream_seed(seed, "protocol"))
        scene_rng = np.random.default_rng(cipher.derive_stream_seed(seed, "scenario"))
        self.node_rngs: dict[int, np.random.Generator] = {}

        self.nodes: dict[int, NodeState] = {}
        self._build_nodes(scene_rng)
        self.ch_node = self.nodes[0]

        self.tracks: dict[int, Track] = {}
        self._last_activation = float("-inf")
        self._pending_failures = sorted(cfg.inject_failures)
        self._consumed_failures = [False] * len(self._pending_failures)

        self.log = MetricsLog(
            config=config_fields(cfg),
            master_seed=seed,
            sample_times=cfg.sample_times(),
        )

    # ------------------------------------------------------------------
    # setup

    def _build_nodes(self, rng: np.random.Generator) -> None:
        cfg = self.cfg
        area = cfg.area_side
        first_target = cfg.node_count - cfg.malicious_count
        placements = cfg.placements or {}
        static_ids = cfg.static_ids or frozenset()
        lane = 0
        for nid in range(cfg.node_count):
            if nid == 0:
                role = Role.CLUSTER_HEAD
                default_pos = Position(area / 2.0, area / 2.0)
            elif nid >= first_target:
                role = Role.MALICIOUS_TARGET
                default_pos = Position(rng.uniform(0, area), rng.uniform(0, area))
            else:
                role = Role.FRIENDLY_REFERENCE
                default_pos = Position(rng.uniform(0, area), rng.uniform(0, area))
            pos = placements.get(nid, default_pos)
            node_rng = np.random.default_rng(
                cipher.derive_stream_seed(cfg.master_seed, "mobility", nid)
            )
            self.node_rngs[nid] = node_rng
            if nid in static_ids:
                mob = mobility.make_random_waypoint(pos, 0.0, 0.0, area, node_rng)
            elif role is Role.MALICIOUS_TARGET and cfg.model == "parallel_path":
                speed = float(node_rng.uniform(cfg.v_min, cfg.v_max))
                default_lane_pos = Position(
                    area * 0.1,
                    area / 2.0 + (lane - (cfg.malicious_count - 1) / 2.0) * cfg.lane_spacing,
                )
                mob = mobility.make_parallel_path(
                    placements.get(nid, default_lane_pos),
                    speed,
                    cfg.heading,
                    lane,
                    cfg.lane_spacing,
                )
                lane += 1
            else:
                mob = mobility.make_random_waypoint(pos, cfg.v_min, cfg.v_max, area, node_rng)
            span = 360.0 / cfg.sectors
            sectors = [
                SectorBeam(owner=nid, sector_index=k, boresight=(k + 0.5) * span, beamwidth=span)
                for k in range(cfg.sectors)
            ]
            self.nodes[nid] = NodeState(id=nid, role=role, mobility=mob, sectors=sectors)

    def _schedule_all(self) -> None:
        cfg = self.cfg
        t = MOBILITY_DT
        while t <= cfg.duration + 1e-9:
            self.queue.push(t, EventKind.MOBILITY)
            t += MOBILITY_DT
        t = 0.0
        while t <= cfg.duration + 1e-9:
            self.queue.push(t, EventKind.SWEEP)
            t += cfg.reauth_interval
        t = cfg.sample_interval / 2.0
        while t <= cfg.duration + 1e-9:
            self.queue.push(t, EventKind.ASSIGN)
            t += cfg.sample_interval
        for t in cfg.sample_times():
            self.queue.push(t, EventKind.TRACK)

    # ------------------------------------------------------------------
    # event loop

    def run(self) -> MetricsLog:
        self._schedule_all()
        while len(self.queue):
            t, kind, payload = self.queue.pop()
            if t > self.cfg.duration + 1e-9:
                continue
            if t < self.now - 1e-12:
                raise RuntimeError("event queue delivered an event in the past")
            self.now = max(self.now, t)
            if kind is EventKind.MOBILITY:
                self._handle_mobility(t)
            elif kind is EventKind.SWEEP:
                self.reauthentication_tick(t)
            elif kind is EventKind.ASSIGN:
                self.assign_targets(t)
            elif kind is EventKind.TRACK:
                self._handle_track_tick(t)
            elif kind is EventKind.SCAN_DONE:
                self._handle_scan_done(t, payload)
            elif kind is EventKind.VERDICT:
                self._handle_verdict(t, payload)
        return self.log

    # ------------------------------------------------------------------
    # mobility

    def _handle_mobility(self, t: float) -> None:
        dt = t - self._last_mobility
        if dt <= 0:
            return
        for node in self.nodes.values():
            node.mobility = mobility.step(
                node.mobility, dt, self.cfg.area_side, self.node_rngs[node.id]
            )
        self._last_mobility = t

    # ------------------------------------------------------------------
    # verification sweeps and verdicts

    def _forced_failure_pending(self, peer: int, t: float) -> bool:
        for i, (after, target_peer) in enumerate(self._pending_failures):
            if not self._consumed_failures[i] and target_peer == peer and after <= t:
                self._consumed_failures[i] = True
                return True
        return False

    def reauthentication_tick(self, t: float) -> None:
        """Re-verify every known relation and screen new neighbors."""
        for peer_id in sorted(self.nodes):
            if peer_id == self.ch_node.id:
                continue
            rec = self.ch_node.friendliness.get(peer_id)
            status = rec.status if rec else Friendliness.UNKNOWN
            if status is Friendliness.MALICIOUS:
                continue
            if rec and rec.scanning_until is not None:
                continue  # a scan owns this relation's recovery
            self._verify(peer_id, t)

    def _verify(self, peer_id: int, t: float) -> None:
        """Run one handshake; schedules the verdict at the exchange end."""
        ch_node = self.ch_node
        peer = self.nodes[peer_id]
        d = distance(ch_node.position, peer.position)
        if d > self.cfg.range_limit:
            rec = ch_node.friendliness.get(peer_id)
            if rec and rec.status is Friendliness.FRIENDLY:
                rec.status = Friendliness.UNKNOWN
                rec.since = t
                self.log.friend_events.append(
                    FriendEvent(t, ch_node.id, peer_id, "out_of_range", 0.0)
                )
                self._suspend_tracks_using(peer_id, t, reauth_pending=False)
            return

        session = protocol.start_verification(
            ch_node, peer, t, range_limit=self.cfg.range_limit, j_max=self.cfg.j_max
        )

        # Preamble: two ping/echo exchanges so each side holds an RTT sample.
        legs = []
        t_cursor = t
        endpoints = [(ch_node, peer), (peer, ch_node), (peer, ch_node), (ch_node, peer)]
        for tx, rx in endpoints:
            arrival = ch.propagate(
                tx.position, rx.position, t_cursor, self.chan, self.rng_channel
            )
            if arrival is None:
                return  # moved out of range mid-exchange; retry next sweep
            legs.append(arrival - t_cursor)
            t_cursor = arrival
        # timestamp noise can push a near-field RTT below zero; both sides
        # clamp into the first quantization bucket
        rtt_initiator = max(legs[0] + legs[1], 0.0)
        rtt_candidate = max(legs[2] + legs[3], 0.0)

        # Location seed from the positions carried in the preamble; both
        # sides quantize the initiator->candidate distance and bearing.
        dist_q = distance(ch_node.position, peer.position)
        bear_q = bearing_deg(ch_node.position, peer.position)
        init_seeds = cipher.SeedPair.from_measurements(
            dist_q, bear_q, rtt_initiator, self.cfg.rtt_bucket
        )
        cand_seeds = cipher.SeedPair.from_measurements(
            dist_q, bear_q, rtt_candidate, self.cfg.rtt_bucket
        )

        honest = peer.role is not Role.MALICIOUS_TARGET
        if honest and self._forced_failure_pending(peer_id, t):
            # Injected failure: the candidate derives an off-by-one RTT seed.
            cand_seeds = cipher.SeedPair(cand_seeds.loc_seed, cand_seeds.rtt_seed + 1)

        protocol.agree_seeds(session, init_seeds, cand_seeds)
        challenge_time = 2.0 * self.cfg.j_max * d / self.chan.c
        decided_at = t_cursor + challenge_time + self.cfg.auth_duration
        verdict = protocol.complete_verification(
            session,
            candidate_honest=honest,
            adversary=self.adversary,
            n_keys=self.cfg.n_keys,
            rng_seed=self.rng_protocol,
            now=decided_at,
        )
        self.queue.push(
            decided_at,
            EventKind.VERDICT,
            {"peer": peer_id, "verdict": verdict, "honest": honest},
        )

    def _handle_verdict(self, t: float, payload: dict) -> None:
        peer_id = payload["peer"]
        verdict: protocol.Verdict = payload["verdict"]
        rec = self.ch_node.record_for(peer_id)
        self.log.verdicts.append(VerdictEvent(t, self.ch_node.id, peer_id, verdict.value))

        if verdict is protocol.Verdict.FRIENDLY:
            was_unknown_after_fail = rec.consecutive_failures > 0
            rec.status = Friendliness.FRIENDLY
            rec.since = t
            rec.consecutive_failures = 0
            rec.scanning_until = None
            self.log.friend_events.append(
                FriendEvent(t, self.ch_node.id, peer_id, "reauth_ok", 0.0)
            )
            if was_unknown_after_fail:
                self._resume_tracks_waiting_on(peer_id, t)
            return

        if not payload["honest"]:
            rec.status = Friendliness.MALICIOUS
            rec.since = t
            self.log.friend_events.append(
                FriendEvent(t, self.ch_node.id, peer_id, "detected_malicious", 0.0)
            )
            return

        # Honest relation failed re-authentication: demote and scan.
        rec.status = Friendliness.UNKNOWN
        rec.since = t
        rec.consecutive_failures += 1
        scan = SCAN_DURATION + (
            CONSECUTIVE_SCAN_PENALTY if rec.consecutive_failures >= 2 else 0.0
        )
        rec.scanning_until = t + scan
        self.log.friend_events.append(
            FriendEvent(t, self.ch_node.id, peer_id, "reauth_fail", 0.0)
        )
        self.log.friend_events.append(
            FriendEvent(t, self.ch_node.id, peer_id, "scan_start", scan)
        )
        self.queue.push(t + scan, EventKind.SCAN_DONE, {"peer": peer_id})
        self._suspend_tracks_using(peer_id, t, reauth_pending=True)

    def _handle_scan_done(self, t: float, payload: dict) -> None:
        if "peer" in payload:
            peer_id = payload["peer"]
            rec = self.ch_node.record_for(peer_id)
            rec.scanning_until = None
            self.log.friend_events.append(
                FriendEvent(t, self.ch_node.id, peer_id, "scan_end", 0.0)
            )
            self._verify(peer_id, t)
            return
        # Track scan: retry the reference switch.
        target = payload["target"]
        track = self.tracks.get(target)
        if (
            track is None
            or track.status is not TrackStatus.WAITING
            or track.waiting_on is not None
        ):
            return
        self._try_switch(track, t)

    # ------------------------------------------------------------------
    # friendliness fallout on tracks

    def _suspend_tracks_using(self, peer_id: int, t: float, reauth_pending: bool) -> None:
        for target in sorted(self.tracks):
            track = self.tracks[target]
            if track.status is not TrackStatus.ACTIVE:
                continue
            if peer_id not in (track.ref_a, track.ref_b):
                continue
            survivor = track.ref_b if track.ref_a == peer_id else track.ref_a
            replaced = self._find_replacement(track, survivor, t)
            if replaced is not None:
                self._apply_switch(track, peer_id, replaced, SwitchCause.FRIENDLINESS_LOST, t)
                continue
            track.status = TrackStatus.WAITING
            track.suspended_at = t
            track.scan_until = t + SCAN_DURATION
            track.pending_cause = SwitchCause.FRIENDLINESS_LOST
            track.waiting_on = peer_id if reauth_pending else None
            track.failed_ref = peer_id
            self._release_beams(track, only=peer_id)
            beam = self.nodes[survivor].beam_for_target(track.target)
            if beam is not None:
                beam.state = BeamState.SCANNING
            self.log.friend_events.append(
                FriendEvent(t, survivor, track.target, "track_suspend", 0.0)
            )
            if not reauth_pending:
                self.queue.push(
                    t + SCAN_DURATION, EventKind.SCAN_DONE, {"target": track.target}
                )

    def _is_friendly(self, node_id: int) -> bool:
        rec = self.ch_node.friendliness.get(node_id)
        return rec is not None and rec.status is Friendliness.FRIENDLY

    def _resume_tracks_waiting_on(self, peer_id: int, t: float) -> None:
        for target in sorted(self.tracks):
            track = self.tracks[target]
            if track.status is not TrackStatus.WAITING or track.waiting_on != peer_id:
                continue
            survivor = track.ref_b if track.ref_a == peer_id else track.ref_a
            if not self._is_friendly(survivor) or not self._claim_pair(
                track, survivor, peer_id, t
            ):
                track.waiting_on = None  # fall back to assignment-pass retries
                continue
            delay = t - track.suspended_at
            self._record_switch(track, peer_id, peer_id, SwitchCause.FRIENDLINESS_LOST, t, delay)
            self._reactivate(track, t)
            self.log.friend_events.append(
                FriendEvent(t, survivor, track.target, "track_resume", delay)
            )

    # ------------------------------------------------------------------
    # assignment

    def _detected_targets(self) -> list[int]:
        out = []
        for peer_id, rec in self.ch_node.friendliness.items():
            if rec.status is Friendliness.MALICIOUS:
                out.append((rec.since, peer_id))
        return [pid for _, pid in sorted(out)]

    def assign_targets(self, t: float) -> None:
        """Pair detected targets with references; retry suspended tracks."""
        # Retry suspended tracks whose scans have run dry; tracks still
        # waiting on a relation re-auth get a fallback retry once the scan
        # window has clearly lapsed without recovery.
        for target in sorted(self.tracks):
            track = self.tracks[target]
            if track.status is not TrackStatus.WAITING or t < track.scan_until:
                continue
            if track.waiting_on is not None and t - track.suspended_at < SCAN_DURATION:
                continue
            self._try_switch(track, t)

        # New tracks activate one at a time, paced by the verification
        # sweep cadence: a fresh pairing rides on fresh SFV verdicts.
        if t - self._last_activation < self.cfg.reauth_interval:
            return
        for target_id in self._detected_targets():
            track = self.tracks.get(target_id)
            if track is not None and track.status is TrackStatus.WAITING:
                continue
            if track is not None and not track.lost:
                continue
            if self._activate_track(target_id, t):
                self._last_activation = t
                break

    def _reference_candidates(self, around: Position, exclude: set[int]) -> list[NodeState]:
        cands = []
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            if node.role is not Role.FRIENDLY_REFERENCE or nid in exclude:
                continue
            rec = self.ch_node.friendliness.get(nid)
            if rec is None or rec.status is not Friendliness.FRIENDLY:
                continue
            if distance(node.position, around) > self.cfg.range_limit:
                continue
            cands.append(node)
        cands.sort(key=lambda n: (distance(n.position, around), n.id))
        return cands

    def _free_facing_beam(self, node: NodeState, toward: Position) -> SectorBeam | None:
        sec = sector_of(bearing_deg(node.position, toward), self.cfg.sectors)
        beam = node.sectors[sec]
        return beam if beam.state is BeamState.IDLE else None

    def _pair_in_use(self, a: int, b: int, for_target: int | None = None) -> bool:
        pair = frozenset((a, b))
        return any(
            frozenset((tr.ref_a, tr.ref_b)) == pair
            for tr in self.tracks.values()
            if tr.target != for_target
        )

    def _activate_track(self, target_id: int, t: float) -> bool:
        target = self.nodes[target_id]
        fix = target.position  # detection fix at assignment time
        contention_logged = False
        cands = self._reference_candidates(fix, exclude={target_id})
        for i, ref_a in enumerate(cands):
            beam_a = self._free_facing_beam(ref_a, fix)
            if beam_a is None:
                if not contention_logged:
                    self.log.switches.append(
                        SwitchEvent(t, target_id, ref_a.id, -1, SwitchCause.SECTOR_CONTENTION, 0.0)
                    )
                    contention_logged = True
                continue
            for ref_b in cands[i + 1 :]:
                if self._pair_in_use(ref_a.id, ref_b.id, for_target=target_id):
                    continue
                if point_line_distance(fix, ref_a.position, ref_b.position) < BASELINE_MARGIN:
                    continue
                beam_b = self._free_facing_beam(ref_b, fix)
                if beam_b is None:
                    continue
                old = self.tracks.get(target_id)
                record = old.record if old else TrackRecord(
                    target=target_id,
                    ref_pair=(ref_a.id, ref_b.id),
                    sample_times=self.cfg.sample_times(),
                    primary_sector=beam_a.sector_index,
                )
                self.log.tracks[target_id] = record
                track = Track(
                    record=record,
                    ref_a=ref_a.id,
                    ref_b=ref_b.id,
                    anchor=fix,
                    anchor_time=t,
                )
                record.ref_pair = (ref_a.id, ref_b.id)
                self.tracks[target_id] = track
                self._claim_beam(beam_a, track, ref_b.id, fix, t)
                self._claim_beam(beam_b, track, ref_a.id, fix, t)
                track.resume_at = t + self.cfg.auth_duration
                return True
        return False

    def _claim_beam(
        self, beam: SectorBeam, track: Track, partner: int, toward: Position, t: float
    ) -> None:
        node = self.nodes[beam.owner]
        beam.state = BeamState.TRACKING
        beam.target_id = track.target
        beam.partner_id = partner
        beam.boresight = bearing_deg(node.position, toward)
        zone = self._form_zone(track, t)
        track.record.zone = zone
        beam.beamwidth = self._beamwidth(zone, node.position)

    def _beamwidth(self, zone: TrackingZone, observer: Position) -> float:
        return beamwidth_for_zone(zone, observer, self.cfg.sectors)

    def _form_zone(self, track: Track, t: float) -> TrackingZone:
        return form_zone(
            self.nodes[track.ref_a].position,
            self.nodes[track.ref_b].position,
            track.anchor,
            self.cfg.v_max,
            self.cfg.sample_interval,
            self.zone_cfg,
            ref_pair=(track.ref_a, track.ref_b),
            target=track.target,
            now=t,
        )

    # ------------------------------------------------------------------
    # tracking

    def _handle_track_tick(self, t: float) -> None:
        self._check_invariants(t)
        for target in sorted(self.tracks):
            track = self.tracks[target]
            if track.status is not TrackStatus.ACTIVE or t < track.resume_at:
                continue
            self.tracking_tick(track, t)

    def _check_invariants(self, t: float) -> None:
        # Sector exclusivity and friendly-references-only, enforced live so
        # a violation fails loudly instead of skewing the metrics.
        for node in self.nodes.values():
            targets = [
                b.target_id for b in node.sectors if b.state is BeamState.TRACKING
            ]
            if len(targets) != len(set(targets)):
                raise RuntimeError(
                    f"t={t}: node {node.id} has one target on two sectors"
                )
        for track in self.tracks.values():
            if track.status is TrackStatus.ACTIVE:
                for rid in (track.ref_a, track.ref_b):
                    if not self._is_friendly(rid):
                        raise RuntimeError(
                            f"t={t}: active track {track.target} uses "
                            f"non-friendly reference {rid}"
                        )

    def tracking_tick(self, track: Track, t: float) -> None:
        """One zone -> beams -> ranging -> triangulation -> update cycle."""
        target = self.nodes[track.target]
        prediction = track.predict(t)

        for ref_id in (track.ref_a, track.ref_b):
            rec = self.ch_node.friendliness.get(ref_id)
            if rec is None or rec.status is not Friendliness.FRIENDLY:
                self._suspend_tracks_using(ref_id, t, reauth_pending=False)
                return
            if distance(self.nodes[ref_id].position, prediction) > self.cfg.range_limit:
                self.switch_reference(track, ref_id, SwitchCause.OUT_OF_RANGE, t)
                return

        pos_a = self.nodes[track.ref_a].position
        pos_b = self.nodes[track.ref_b].position
        if point_line_distance(prediction, pos_a, pos_b) < BASELINE_MARGIN / 2.0:
            # Target drifting onto the pair baseline: re-pair before the
            # fix goes side-ambiguous.
            far_ref = max(
                (track.ref_a, track.ref_b),
                key=lambda rid: (distance(self.nodes[rid].position, prediction), rid),
            )
            self.switch_reference(track, far_ref, SwitchCause.OUT_OF_ZONE, t)
            return

        zone = self._form_zone(track, t)
        track.record.zone = zone
        if not self._reselect_sectors(track, zone, prediction, t):
            return

        ranges = []
        saw_out_of_range = False
        for ref_id in (track.ref_a, track.ref_b):
            r = self._range_exchange(self.nodes[ref_id], target, t)
            if r is None:
                saw_out_of_range = saw_out_of_range or (
                    distance(self.nodes[ref_id].position, target.position)
                    > self.cfg.range_limit
                )
                ranges = None
                break
            ranges.append(r)

        est = None
        ambiguous = False
        if ranges is not None:
            est, ambiguous = self._triangulate(track, ranges, zone, prediction, t)
        if est is not None and not (
            -AREA_SLACK <= est.x <= self.cfg.area_side + AREA_SLACK
            and -AREA_SLACK <= est.y <= self.cfg.area_side + AREA_SLACK
        ):
            est = None  # fixes outside the cluster area are impossible

        if est is None:
            track.consecutive_no_fix += 1
            track.anchor = prediction
            track.anchor_time = t
            if track.consecutive_no_fix >= 2:
                track.lost = True
                cause = (
                    SwitchCause.OUT_OF_RANGE if saw_out_of_range else SwitchCause.OUT_OF_ZONE
                )
                far_ref = max(
                    (track.ref_a, track.ref_b),
                    key=lambda rid: (distance(self.nodes[rid].position, prediction), rid),
                )
                self.switch_reference(track, far_ref, cause, t)
            return

        if ambiguous:
            est = self._sector_disambiguate(track, ranges, est)
        truth = target.position
        err = distance(est, truth)
        prev = track.record.estimates[-1] if track.record.estimates else None
        track.record.add_estimate(EstimateSample(t, est, truth, err))
        if prev is not None and t > prev.t:
            track.vel_est = ((est.x - prev.est.x) / (t - prev.t), (est.y - prev.est.y) / (t - prev.t))
        track.anchor = est
        track.anchor_time = t
        track.consecutive_no_fix = 0
        track.lost = False

    def _reselect_sectors(
        self, track: Track, zone: TrackingZone, prediction: Position, t: float
    ) -> bool:
        """Point both references' beams at the predicted bearing.

        Returns False when a needed sector is busy with another track and
        the reference had to be switched (sector contention).
        """
        for ref_id in (track.ref_a, track.ref_b):
            node = self.nodes[ref_id]
            bearing = bearing_deg(node.position, prediction)
            want = sector_of(bearing, self.cfg.sectors)
            current = node.beam_for_target(track.target)
            if current is not None and current.sector_index == want:
                current.boresight = bearing
                current.beamwidth = self._beamwidth(zone, node.position)
                continue
            dest = node.sectors[want]
            if dest.state is BeamState.TRACKING and dest.target_id != track.target:
                self.switch_reference(track, ref_id, SwitchCause.SECTOR_CONTENTION, t)
                return False
            if current is not None:
                current.release()
            partner = track.ref_b if ref_id == track.ref_a else track.ref_a
            dest.state = BeamState.TRACKING
            dest.target_id = track.target
            dest.partner_id = partner
            dest.boresight = bearing
            dest.beamwidth = self._beamwidth(zone, node.position)
        return True

    def _range_exchange(self, ref: NodeState, target: NodeState, t: float) -> float | None:
        # Stamps are exchange-relative: the sub-millisecond exchange sits
        # inside one tick, and absolute-time offsets would only feed
        # floating-point cancellation into the range.
        sigma = ch.ranging_noise_std(self.chan, ref.tracking_beam_count())
        toa_b = ch.propagate(
            ref.position, target.position, 0.0, self.chan, self.rng_channel, sigma_t=sigma
        )
        if toa_b is None:
            return None
        tod_b = toa_b + PROCESSING_DELAY
        toa_a = ch.propagate(
            target.position, ref.position, tod_b, self.chan, self.rng_channel, sigma_t=sigma
        )
        if toa_a is None:
            return None
        try:
            return range_from_timestamps(
                RangeMeasurement(tod_a=0.0, toa_b=toa_b, tod_b=tod_b, toa_a=toa_a),
                self.chan.c,
            )
        except MeasurementError:
            return None

    def _triangulate(
        self,
        track: Track,
        ranges: list[float],
        zone: TrackingZone,
        prediction: Position,
        t: float,
    ) -> tuple[Position | None, bool]:
        pos_a = self.nodes[track.ref_a].position
        pos_b = self.nodes[track.ref_b].position
        try:
            return triangulate(
                pos_a, ranges[0], pos_b, ranges[1], zone, eps_gap=self.cfg.eps_gap
            )
        except OutOfZoneError:
            # Rebuild the zone around the prediction and retry once.
            track.anchor = prediction
            track.anchor_time = t
            rezone = self._form_zone(track, t)
            track.record.zone = rezone
            try:
                return triangulate(
                    pos_a, ranges[0], pos_b, ranges[1], rezone, eps_gap=self.cfg.eps_gap
                )
            except (OutOfZoneError, NoFixError, DegenerateGeometryError):
                return None, False
        except (NoFixError, DegenerateGeometryError):
            return None, False

    def _sector_disambiguate(
        self, track: Track, ranges: list[float], chosen: Position
    ) -> Position:
        """Prefer the candidate whose bearing matches the claimed sector."""
        node = self.nodes[track.ref_a]
        beam = node.beam_for_target(track.target)
        if beam is None:
            return chosen
        points = circle_intersections(
            node.position, ranges[0], self.nodes[track.ref_b].position, ranges[1]
        )
        matching = [
            p
            for p in points
            if sector_of(bearing_deg(node.position, p), self.cfg.sectors) == beam.sector_index
        ]
        return matching[0] if len(matching) == 1 else chosen

    # ------------------------------------------------------------------
    # reference switching

    def _find_replacement(self, track: Track, survivor: int, t: float) -> int | None:
        if not self._is_friendly(survivor):
            return None  # survivor lapsed too; the pair must rebuild fully
        prediction = track.predict(t)
        survivor_node = self.nodes[survivor]
        if (
            survivor_node.beam_for_target(track.target) is None
            and self._free_facing_beam(survivor_node, prediction) is None
        ):
            return None  # the surviving reference cannot re-point a beam
        exclude = {track.target, track.ref_a, track.ref_b}
        for cand in self._reference_candidates(prediction, exclude):
            if self._pair_in_use(survivor, cand.id, for_target=track.target):
                continue
            if (
                point_line_distance(prediction, survivor_node.position, cand.position)
                < BASELINE_MARGIN
            ):
                continue
            if self._free_facing_beam(cand, prediction) is None:
                continue
            return cand.id
        return None

    def _claim_pair(self, track: Track, ref_a: int, ref_b: int, t: float) -> bool:
        """Claim facing beams on both references; True on success."""
        prediction = track.predict(t)
        beams = []
        for rid in (ref_a, ref_b):
            node = self.nodes[rid]
            beam = node.beam_for_target(track.target)
            if beam is None:
                beam = self._free_facing_beam(node, prediction)
            if beam is None:
                for b in beams:
                    b.release()
                return False
            beams.append(beam)
        track.ref_a, track.ref_b = ref_a, ref_b
        track.record.ref_pair = (ref_a, ref_b)
        track.anchor = self.nodes[track.target].position  # fresh detection fix
        track.anchor_time = t
        zone = self._form_zone(track, t)
        track.record.zone = zone
        for beam, partner in zip(beams, (ref_b, ref_a)):
            node = self.nodes[beam.owner]
            beam.state = BeamState.TRACKING
            beam.target_id = track.target
            beam.partner_id = partner
            beam.boresight = bearing_deg(node.position, track.anchor)
            beam.beamwidth = self._beamwidth(zone, node.position)
        return True

    def switch_reference(self, track: Track, failed_ref: int, cause: SwitchCause, t: float) -> None:
        """Replace one reference of a track, or suspend it behind a scan."""
        survivor = track.ref_b if track.ref_a == failed_ref else track.ref_a
        replacement = self._find_replacement(track, survivor, t)
        if replacement is not None:
            self._apply_switch(track, failed_ref, replacement, cause, t)
            return
        self._suspend_for_scan(track, failed_ref, survivor, cause, t)

    def _suspend_for_scan(
        self, track: Track, failed_ref: int, survivor: int, cause: SwitchCause, t: float
    ) -> None:
        # No candidate: the surviving beam scans, the switch retries later.
        track.status = TrackStatus.WAITING
        track.suspended_at = t
        track.scan_until = t + SCAN_DURATION
        track.pending_cause = cause
        track.waiting_on = None
        track.failed_ref = failed_ref
        self._release_beams(track, only=failed_ref)
        beam = self.nodes[survivor].beam_for_target(track.target)
        if beam is not None:
            beam.state = BeamState.SCANNING
        self.log.friend_events.append(
            FriendEvent(t, survivor, track.target, "track_suspend", 0.0)
        )
        self.queue.push(t + SCAN_DURATION, EventKind.SCAN_DONE, {"target": track.target})

    def _try_switch(self, track: Track, t: float) -> None:
        """Retry a pending switch after a scan or at an assignment pass."""
        cause = track.pending_cause or SwitchCause.OUT_OF_RANGE
        failed = track.failed_ref
        if failed is None:
            failed = track.waiting_on if track.waiting_on is not None else track.ref_b
        survivor = track.ref_b if track.ref_a == failed else track.ref_a
        replacement = self._find_replacement(track, survivor, t)
        if replacement is not None:
            self._apply_switch(track, failed, replacement, cause, t)
            return
        if not self._is_friendly(survivor) or t - track.suspended_at >= 2.0 * SCAN_DURATION:
            # Survivor lapsed too, or the outage has dragged on: release
            # everything and rebuild the pair from scratch (the old
            # references become eligible again once re-verified).
            self._release_beams(track)
            if self._activate_track(track.target, t):
                delay = t - track.suspended_at + self.cfg.auth_duration
                new_track = self.tracks[track.target]
                self._record_switch(new_track, failed, new_track.ref_a, cause, t, delay)

    def _apply_switch(
        self, track: Track, old_ref: int, new_ref: int, cause: SwitchCause, t: float
    ) -> None:
        survivor = track.ref_b if track.ref_a == old_ref else track.ref_a
        self._release_beams(track, only=old_ref)
        if not self._claim_pair(track, survivor, new_ref, t):
            # claim raced the beam away; fall back to a scan, never re-enter
            self._suspend_for_scan(track, old_ref, survivor, cause, t)
            return
        delay = self.cfg.auth_duration
        if track.status is TrackStatus.WAITING:
            delay += t - track.suspended_at
        self._record_switch(track, old_ref, new_ref, cause, t, delay)
        self._reactivate(track, t)

    def _record_switch(
        self, track: Track, old: int, new: int, cause: SwitchCause, t: float, delay: float
    ) -> None:
        ev = SwitchEvent(t, track.target, old, new, cause, delay)
        self.log.switches.append(ev)
        track.record.switches.append(ev)

    def _reactivate(self, track: Track, t: float) -> None:
        track.status = TrackStatus.ACTIVE
        track.resume_at = t + self.cfg.auth_duration
        track.waiting_on = None
        track.pending_cause = None
        track.consecutive_no_fix = 0
        track.lost = False

    def _release_beams(self, track: Track, only: int | None = None) -> None:
        for rid in (track.ref_a, track.ref_b):
            if only is not None and rid != only:
                continue
            beam = self.nodes[rid].beam_for_target(track.target)
            if beam is not None:
                beam.release()


def run_scenario(cfg: ScenarioConfig) -> MetricsLog:
    """Simulate one full scenario and return its observation log."""
    return Engine(cfg).run()
