"""The size discovery automaton and its orchestrator.

Every node runs the same deterministic machine driven solely by its label
and what it hears, in three procedures:

1. Parameter learning: degree-learning tags reach the root, which floods
   the maximum degree; nodes date their level from the flood's arrival, the
   designated deepest node reports the depth back along the relay path, and
   the root floods the depth.
2. Size learning, one phase per level from the bottom up: the phase's
   maximum-weight node floods that weight, then children repeat tag and
   weight-report slots in fixed-size blocks until their owning upper-set
   member decodes a consistent account, adopts its weight, and transmits a
   stop; the phase-end member floods its stop round so everyone can date
   the next phase.
3. Final: the root floods the network size and all nodes output it.

Flooding (the wave subroutine) encodes a value bit-serially: 1 -> 10,
0 -> 00, terminated by 11, spreading level by level with each level
occupying 2k+2 rounds.  Relaying is suppressed where it cannot serve a
deeper node: root-initiated waves are relayed only by upper-set members
(whose neighborhoods cover the next level), and mid-phase waves only while
the 2h-block propagation budget allows.  Without that suppression, the
final level's echo would collide with the hop relay that follows.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Callable, Dict, List, Optional, Tuple

from .graphs import Graph, LevelDecomposition, decompose
from .labels import Label, LabelingScheme, assign_labels
from .radio import (
    COLLISION,
    NOT_LISTENING,
    SILENCE,
    CollisionTagMsg,
    DeltaLearn,
    Heard,
    HopValue,
    Message,
    Observation,
    SimulationError,
    SimulationTrace,
    Stop,
    WavePulse,
    WeightReport,
    run,
    run_scheduled,
)
from .upper_sets import UpperSetPlan, bitlen, compute_upper_sets, compute_weights

_PULSE = WavePulse()
_STOP = Stop()

MAX_WAVE_BITS = 2 * 64 + 2  # decoder hygiene cap: values fit in 64 bits


class MalformedWaveError(ValueError):
    """A pulse pattern that is not a valid encoded value."""


class ProtocolDesyncError(SimulationError):
    """An observation impossible at the node's current stage."""

    def __init__(self, message: str, round_no: int, node: int, stage: str):
        super().__init__(f"[{stage}] {message}", round_no, node)
        self.stage = stage


def wave_encode(x: int) -> str:
    """Bit-serial schedule for x: each 1 becomes 10, each 0 becomes 00, then 11."""
    if x < 1:
        raise ValueError(f"wave value must be >= 1, got {x}")
    return "".join("10" if c == "1" else "00" for c in format(x, "b")) + "11"


def wave_decode(pattern: str) -> int:
    """Inverse of wave_encode over a non-silence pattern.

    Consumes bit pairs until the terminating 11; a pair whose second bit is
    one anywhere earlier is malformed.  Leading zero pairs decode to leading
    zero bits, which vanish under integer normalization.
    """
    seq = [int(c) for c in pattern]
    bits: List[int] = []
    i = 0
    while True:
        if i + 1 >= len(seq):
            raise MalformedWaveError("pattern ended before the 11 terminator")
        a, b = seq[i], seq[i + 1]
        if a == 1 and b == 1:
            if i + 2 != len(seq):
                raise MalformedWaveError("bits after the terminator")
            if not bits:
                raise MalformedWaveError("empty payload before terminator")
            value = int("".join(map(str, bits)), 2)
            if value < 1:
                raise MalformedWaveError("payload decodes to zero")
            return value
        if b == 1:
            raise MalformedWaveError(f"second bit of pair at offset {i} is 1")
        bits.append(a)
        i += 2


# --- timeline arithmetic ----------------------------------------------------

def t1_formula(delta: int, h: int) -> int:
    m = bitlen(delta)
    return m + h * (2 * m + 2) + h + h * (2 * bitlen(h) + 2)


def tau_formula(delta: int, x: int) -> int:
    m = bitlen(delta)
    return m + x * m + 1


@dataclass(frozen=True)
class Timeline:
    """Round bookkeeping for one run: t2[0] is the end of parameter learning."""

    m: int
    t1: int
    x: Tuple[int, ...]
    tau: Tuple[int, ...]
    t2: Tuple[int, ...]
    t2_prime: Tuple[int, ...]


def compute_timeline(
    delta: int,
    h: int,
    xs: Tuple[int, ...] = (),
    stop_rounds: Tuple[int, ...] = (),
) -> Timeline:
    """Assemble the full schedule from observed per-phase maxima and stop rounds."""
    if delta < 1 or h < 1:
        raise ValueError("delta and h must be >= 1")
    if len(stop_rounds) != len(xs):
        raise ValueError("need one stop round per observed phase maximum")
    t1 = t1_formula(delta, h)
    t2 = [t1]
    t2p = []
    taus = []
    for x, big_t in zip(xs, stop_rounds):
        t2p.append(t2[-1] + 2 * h * (2 * bitlen(x) + 2))
        taus.append(tau_formula(delta, x))
        t2.append(big_t + 2 * h * (2 * bitlen(big_t) + 2))
    return Timeline(
        m=bitlen(delta),
        t1=t1,
        x=tuple(xs),
        tau=tuple(taus),
        t2=tuple(t2),
        t2_prime=tuple(t2p),
    )


# --- the in-simulation wave listener -----------------------------------------

class WaveListener:
    """Collects pulse patterns against every plausible start round at once.

    Ambient collision noise (simultaneous stops, tag slot clashes) is
    indistinguishable from a wave pulse, so a single-buffer decoder can be
    poisoned and miss the real wave.  Instead, every non-silent round also
    opens a fresh candidate alignment; candidates die on structural
    violations (a pair's second bit set early, overlong buffers) or when
    their decoded value fails the caller's validator.  The validator gets
    (value, finish_round) and accepts by returning a context dict; since it
    checks exact round arithmetic, only the true alignment survives to
    acceptance.
    """

    __slots__ = ("validator", "cands")

    MAX_CANDIDATES = 64

    def __init__(self, validator: Callable[[int, int], Optional[dict]]):
        self.validator = validator
        self.cands: List[List[int]] = []

    def silence_span(self, count: int) -> None:
        if count <= 0 or not self.cands:
            return
        if count >= MAX_WAVE_BITS:
            self.cands.clear()
            return
        pad = [0] * count
        self.cands = [bits for bits in self.cands if len(bits) + count <= MAX_WAVE_BITS]
        for bits in self.cands:
            bits.extend(pad)

    def typed_message(self) -> None:
        """A clean non-pulse message: no wave is in the air at this round."""
        self.cands.clear()

    def pulse(self, r: int) -> Optional[dict]:
        """A non-silent round: extend all candidates, spawn one, check terminators."""
        survivors: List[List[int]] = []
        for bits in self.cands:
            bits.append(1)
            n = len(bits)
            if n > MAX_WAVE_BITS:
                continue
            if n % 2 == 0:
                if bits[-2] == 1:  # pair (1, 1): candidate terminator
                    payload = bits[:-2]
                    if payload and all(payload[i] == 0 for i in range(1, len(payload), 2)):
                        value = int(
                            "".join(str(payload[i]) for i in range(0, len(payload), 2)), 2
                        )
                        if value >= 1:
                            got = self.validator(value, r)
                            if got is not None:
                                got["value"] = value
                                got["round"] = r
                                self.cands.clear()
                                return got
                    continue  # rejected: drop this alignment
                if bits[-1] == 1:  # second bit of a pair set before any terminator
                    continue
            survivors.append(bits)
        survivors.append([1])
        if len(survivors) > self.MAX_CANDIDATES:
            survivors = survivors[-self.MAX_CANDIDATES :]
        self.cands = survivors
        return None


# --- the node automaton -------------------------------------------------------

_STOP_MARK = object()  # outbox sentinel: evaluate stop decision at a block-final round


class SizeDiscoveryNode:
    """Deterministic per-node machine; consumes only its label and observations."""

    def __init__(self, label: Label, node_id: int = -1):
        self.label = label
        self.node_id = node_id
        self.events: List[tuple] = []

        self.delta: Optional[int] = None
        self.m: Optional[int] = None
        self.level: Optional[int] = None
        self.h: Optional[int] = None
        self.t1: Optional[int] = None
        self.weight: Optional[int] = None
        self.output: Optional[int] = None

        self.phase = 0
        self.t2: Optional[int] = None
        self.x_i: Optional[int] = None
        self.t2p: Optional[int] = None
        self.tau: Optional[int] = None

        self._round = 0
        self._outbox: Dict[int, Message] = {}
        self._alarms: List[Tuple[int, str, tuple]] = []
        self._listener: Optional[WaveListener] = None
        self._noise_rounds: List[int] = []

        self._delta_bits: Dict[int, int] = {}
        self._hop_relayed = False
        self._status_complete = False
        self._block_no = 0
        self._dirty_tag = False
        self._dirty_rep = False
        self._tags_heard: Dict[int, int] = {}
        self._reports_heard: Dict[int, Dict[int, int]] = {}

        if label.has(0):
            self.stage = "root_collect"
            self.level = 0
            self.m = label.l1.id
        else:
            self.stage = "wave_delta"
            self._arm_listener(self._validate_delta_wave)
            if label.l1.active():
                self._schedule(label.l1.id, DeltaLearn(label.l1))

    # -- engine interface --

    @property
    def done(self) -> bool:
        return self.output is not None and not self._outbox

    def decide(self, r: int) -> Optional[Message]:
        self._catch_up(r)
        entry = self._outbox.pop(r, None)
        if entry is None:
            return None
        if entry is _STOP_MARK:
            return self._evaluate_stop(r)
        return entry

    def observe(self, r: int, obs: Observation) -> None:
        self._catch_up(r)
        if obs is not NOT_LISTENING:
            self._dispatch(r, obs)
        self._round = max(self._round, r)

    def next_transmit_round(self, r: int) -> Optional[int]:
        self._fire_alarms(r)
        best = None
        for k in self._outbox:
            if k >= r and (best is None or k < best):
                best = k
        for k, _tag, _args in self._alarms:
            if k >= r and (best is None or k < best):
                best = k
                break  # heap: first entry is minimal
        return best

    # -- internal plumbing --

    def _schedule(self, r: int, msg: Message) -> None:
        if r in self._outbox:
            raise ProtocolDesyncError(
                f"transmission already scheduled for round {r}", r, self.node_id, self.stage
            )
        self._outbox[r] = msg

    def _schedule_wave(self, start: int, value: int) -> None:
        for idx, c in enumerate(wave_encode(value)):
            if c == "1":
                self._schedule(start + idx, _PULSE)

    def _alarm(self, r: int, tag: str, *args) -> None:
        heappush(self._alarms, (r, tag, args))

    def _fire_alarms(self, r: int) -> None:
        while self._alarms and self._alarms[0][0] <= r:
            when, tag, args = heappop(self._alarms)
            getattr(self, f"_on_{tag}")(when, *args)

    def _catch_up(self, r: int) -> None:
        self._fire_alarms(r)
        if self._listener is not None and r - 1 > self._round:
            self._listener.silence_span(r - 1 - self._round)
        self._round = max(self._round, r - 1)

    def _desync(self, message: str, r: int) -> None:
        raise ProtocolDesyncError(message, r, self.node_id, self.stage)

    def _event(self, *items) -> None:
        self.events.append(items)

    def _arm_listener(self, validator) -> None:
        self._listener = WaveListener(validator)
        self._noise_rounds = []

    def _quiet_since(self, quiet_from: int, front: int) -> bool:
        """True iff no untyped non-silence was heard in (quiet_from, front]."""
        return not any(quiet_from < q <= front for q in self._noise_rounds)

    # -- wave validators --
    #
    # Each checks the exact round equation for its wave and then the quiet
    # window: if the decoded value were true, every echo of earlier traffic
    # audible at this node would have ended by a computable round, so any
    # untyped non-silence between that round and the claimed wave front
    # exposes a forged alignment (echo blocks of an earlier wave can mimic a
    # shorter wave's pattern at exactly the right rounds).

    def _validate_delta_wave(self, value: int, r: int) -> Optional[dict]:
        mb = bitlen(value)
        span = 2 * mb + 2
        if (r - mb) % span != 0:
            return None
        j = (r - mb) // span
        if j < 1 or not self._quiet_since(mb, r - span):
            return None
        return {"level": j}

    def _validate_h_wave(self, value: int, r: int) -> Optional[dict]:
        assert self.m is not None and self.level is not None
        if self.level > value:
            return None
        start = self.m + value * (2 * self.m + 2) + value
        span = 2 * bitlen(value) + 2
        if r != start + self.level * span:
            return None
        if self.h is not None and value != self.h:
            return None
        echo_end = self.m + min(self.level + 2, value) * (2 * self.m + 2)
        if not self._quiet_since(echo_end, r - span):
            return None
        return {}

    def _validate_x_wave(self, value: int, r: int) -> Optional[dict]:
        assert self.t2 is not None and self.h is not None
        span = 2 * bitlen(value) + 2
        if (r - self.t2) % span != 0:
            return None
        d = (r - self.t2) // span
        if not (1 <= d <= 2 * self.h) or not self._quiet_since(self.t2, r - span):
            return None
        return {"distance": d}

    def _validate_t_wave(self, value: int, r: int) -> Optional[dict]:
        assert self.t2p is not None and self.tau is not None and self.h is not None
        if value <= self.t2p or (value - self.t2p) % self.tau != 0:
            return None
        span = 2 * bitlen(value) + 2
        if (r - value) % span != 0:
            return None
        d = (r - value) // span
        if not (1 <= d <= 2 * self.h) or not self._quiet_since(value, r - span):
            return None
        return {"distance": d}

    def _validate_n_wave(self, value: int, r: int) -> Optional[dict]:
        assert self.t2 is not None and self.level is not None
        if value < 2:
            return None
        span = 2 * bitlen(value) + 2
        if r != self.t2 + self.level * span:
            return None
        if not self._quiet_since(self.t2, r - span):
            return None
        return {}

    # -- observation dispatch --

    def _dispatch(self, r: int, obs: Observation) -> None:
        handler = getattr(self, f"_obs_{self.stage}", None)
        if handler is not None:
            handler(r, obs)

    def _feed_listener(self, r: int, obs: Observation) -> Optional[dict]:
        lst = self._listener
        assert lst is not None
        if obs is SILENCE:
            lst.silence_span(1)
            return None
        if obs is COLLISION or (isinstance(obs, Heard) and isinstance(obs.message, WavePulse)):
            self._noise_rounds.append(r)
            return lst.pulse(r)
        if isinstance(obs, Heard):
            lst.typed_message()
            return None
        return None

    # -- stage: root collecting degree tags --

    def _obs_root_collect(self, r: int, obs: Observation) -> None:
        if isinstance(obs, Heard) and isinstance(obs.message, DeltaLearn):
            tag = obs.message.tag
            if tag.id != r:
                self._desync(f"degree tag id {tag.id} arrived in round {r}", r)
            self._delta_bits[tag.id] = tag.bit
        elif obs is COLLISION:
            self._desync("collision while collecting degree tags", r)
        if r == self.m:
            if sorted(self._delta_bits) != list(range(1, self.m + 1)):
                self._desync(
                    f"degree bits incomplete: have ids {sorted(self._delta_bits)}", r
                )
            value = int("".join(str(self._delta_bits[i]) for i in range(1, self.m + 1)), 2)
            if bitlen(value) != self.m:
                self._desync(f"degree {value} does not fit its own bit count", r)
            self.delta = value
            self._event("delta", r, value)
            self._event("level", r, 0)
            self._schedule_wave(self.m + 1, self.delta)
            self.stage = "root_await_hop"

    def _obs_root_await_hop(self, r: int, obs: Observation) -> None:
        if isinstance(obs, Heard) and isinstance(obs.message, HopValue):
            x = obs.message.value
            expected = self.m + x * (2 * self.m + 2) + x
            if r != expected:
                self._desync(f"depth report {x} arrived in round {r}, expected {expected}", r)
            self._finish_param_learning(r, x)
            self._schedule_wave(r + 1, x)
            self.stage = "idle_until_phase"

    # -- stage: decoding the degree wave --

    def _obs_wave_delta(self, r: int, obs: Observation) -> None:
        got = self._feed_listener(r, obs)
        if got is None:
            return
        self.delta = got["value"]
        self.m = bitlen(self.delta)
        self.level = got["level"]
        self._event("delta", r, self.delta)
        self._event("level", r, self.level)
        self._event("wave", "delta", r, self.delta, self.level)
        if self.label.has(4):
            self._schedule_wave(r + 1, self.delta)
        if self.label.has(1):
            # the designated deepest node knows its level is the depth
            self._schedule(r + 1, HopValue(self.level))
            self.h = self.level
            self._arm_listener(self._validate_h_wave)
            self.stage = "wave_h"
        elif self.label.has(3):
            self.stage = "await_hop"
            self._listener = None
        else:
            self._arm_listener(self._validate_h_wave)
            self.stage = "wave_h"

    def _obs_await_hop(self, r: int, obs: Observation) -> None:
        if isinstance(obs, Heard) and isinstance(obs.message, HopValue):
            self.h = obs.message.value
            if not self._hop_relayed:
                self._hop_relayed = True
                self._schedule(r + 1, HopValue(self.h))
            self._arm_listener(self._validate_h_wave)
            self.stage = "wave_h"

    def _obs_wave_h(self, r: int, obs: Observation) -> None:
        got = self._feed_listener(r, obs)
        if got is None:
            return
        self._event("wave", "h", r, got["value"], self.level)
        self._finish_param_learning(r, got["value"])
        if self.label.has(4):
            self._schedule_wave(r + 1, self.h)
        self.stage = "idle_until_phase"
        self._listener = None

    def _finish_param_learning(self, r: int, h: int) -> None:
        if self.h is not None and self.h != h:
            self._desync(f"depth {h} contradicts earlier value {self.h}", r)
        self.h = h
        self.t1 = t1_formula(self.delta, self.h)
        self._event("h", r, self.h)
        self._event("t1", r, self.t1)
        self.t2 = self.t1
        self._alarm(self.t1 + 1, "phase_start", 1)

    # -- phases --

    def _on_phase_start(self, r: int, i: int) -> None:
        self.phase = i
        self.x_i = None
        self.t2p = None
        self.tau = None
        assert self.t2 is not None and r == self.t2 + 1
        if i == 1 and self.level == self.h and self.weight is None:
            self.weight = 1
            self._event("weight", r - 1, 1)
        if self.level == self.h - i and not self.label.has(4) and self.weight is None:
            self.weight = 1
            self._event("weight", r - 1, 1)
        if self.label.has(6) and self.level == self.h - i + 1:
            assert self.weight is not None, "phase initiator without a weight"
            self._set_phase_schedule(self.weight)
            self._schedule_wave(r, self.weight)
            self.stage = "idle_until_blocks"
            self._listener = None
        else:
            self._arm_listener(self._validate_x_wave)
            self.stage = "wave_x"

    def _set_phase_schedule(self, x: int) -> None:
        self.x_i = x
        self.t2p = self.t2 + 2 * self.h * (2 * bitlen(x) + 2)
        self.tau = tau_formula(self.delta, x)
        self._event("x", self.phase, x, self.t2p, self.tau)
        self._alarm(self.t2p + 1, "blocks_start")

    def _obs_wave_x(self, r: int, obs: Observation) -> None:
        got = self._feed_listener(r, obs)
        if got is None:
            return
        self._set_phase_schedule(got["value"])
        self._event("wave", "x", r, got["value"], got["distance"], self.phase)
        if got["distance"] + 1 <= 2 * self.h:
            self._schedule_wave(r + 1, got["value"])
        self.stage = "idle_until_blocks"
        self._listener = None

    def _on_blocks_start(self, r: int) -> None:
        assert self.t2p is not None and r == self.t2p + 1
        if self.level == self.h - self.phase + 1:
            self._status_complete = False
            self._block_no = 1
            self._schedule_child_slots(1)
            if self.label.l2.active() or self.label.l3.active():
                self._alarm(self.t2p + self.tau + 1, "child_block", 2)
            self.stage = "child_blocks"
        elif self.level == self.h - self.phase and self.label.has(4):
            self._status_complete = False
            self._block_no = 1
            self._reset_member_windows()
            self._schedule(self.t2p + self.tau, _STOP_MARK)
            self.stage = "member_blocks"
        else:
            self._arm_phase_end_listener()

    def _arm_phase_end_listener(self) -> None:
        self._arm_listener(self._validate_t_wave)
        self.stage = "await_phase_end"

    # children ---------------------------------------------------------------

    def _schedule_child_slots(self, j: int) -> None:
        base = self.t2p + (j - 1) * self.tau
        if self.label.l2.active():
            self._schedule(base + self.label.l2.id, CollisionTagMsg(self.label.l2))
        if self.label.l3.active():
            assert self.weight is not None, "weight-tagged child without a weight"
            slot = base + self.m + (self.weight - 1) * self.m + self.label.l3.id
            self._schedule(slot, WeightReport(self.label.l3, self.weight))

    def _on_child_block(self, r: int, j: int) -> None:
        if self.stage != "child_blocks":
            return  # completed meanwhile; stale alarm
        self._block_no = j
        self._schedule_child_slots(j)
        self._alarm(self.t2p + j * self.tau + 1, "child_block", j + 1)

    def _obs_child_blocks(self, r: int, obs: Observation) -> None:
        off = r - self.t2p
        if off <= 0 or off % self.tau != 0:
            return  # mid-block traffic belongs to members
        if obs is COLLISION or (isinstance(obs, Heard) and isinstance(obs.message, Stop)):
            self._status_complete = True
            self._event("child_complete", self.phase, r)
            self._outbox = {k: v for k, v in self._outbox.items() if k <= r}
            self._arm_phase_end_listener()

    # members ----------------------------------------------------------------

    def _reset_member_windows(self) -> None:
        self._dirty_tag = False
        self._dirty_rep = False
        self._tags_heard = {}
        self._reports_heard = {}

    def _obs_member_blocks(self, r: int, obs: Observation) -> None:
        off_total = r - self.t2p
        if off_total < 1:
            self._desync("observation before the block schedule began", r)
        off = (off_total - 1) % self.tau + 1
        if off == self.tau:
            return  # stop slot: other members' stops are not ours to act on
        if off <= self.m:
            if obs is COLLISION:
                self._dirty_tag = True
            elif isinstance(obs, Heard):
                msg = obs.message
                if not isinstance(msg, CollisionTagMsg):
                    self._desync(f"unexpected {type(msg).__name__} in tag slots", r)
                if msg.tag.id != off:
                    self._desync(f"tag id {msg.tag.id} heard in slot {off}", r)
                self._tags_heard[msg.tag.id] = msg.tag.bit
        elif off < self.tau:
            if obs is COLLISION:
                self._dirty_rep = True
            elif isinstance(obs, Heard):
                msg = obs.message
                if not isinstance(msg, WeightReport):
                    self._desync(f"unexpected {type(msg).__name__} in report slots", r)
                expected = self.m + (msg.weight - 1) * self.m + msg.tag.id
                if not (1 <= msg.weight <= self.x_i) or off != expected:
                    self._desync(
                        f"weight report ({msg.tag.id}, w={msg.weight}) in slot {off}", r
                    )
                self._reports_heard.setdefault(msg.weight, {})[msg.tag.id] = msg.tag.bit

    def _evaluate_stop(self, r: int) -> Optional[Message]:
        """Block-final decision: adopt the weight and stop, or retry next block."""
        complete = False
        if not self._dirty_tag and not self._dirty_rep and self._tags_heard:
            d = int("".join(str(b) for _i, b in sorted(self._tags_heard.items())), 2)
            d_by_weight = {
                w: int("".join(str(b) for _i, b in sorted(pairs.items())), 2)
                for w, pairs in self._reports_heard.items()
            }
            if sum(d_by_weight.values()) == d:
                self.weight = 1 + sum(w * c for w, c in d_by_weight.items())
                complete = True
        if not complete:
            self._block_no += 1
            self._reset_member_windows()
            self._schedule(self.t2p + self._block_no * self.tau, _STOP_MARK)
            return None
        self._status_complete = True
        self._event("weight", r, self.weight)
        self._event("member_stop", self.phase, r)
        if self.label.has(5):
            self._event("T", self.phase, r, r)
            self._schedule_wave(r + 1, r)
            self._finish_phase(r, r)
        else:
            self._arm_phase_end_listener()
        return _STOP

    # phase end ----------------------------------------------------------------

    def _obs_await_phase_end(self, r: int, obs: Observation) -> None:
        got = self._feed_listener(r, obs)
        if got is None:
            return
        big_t = got["value"]
        self._event("wave", "T", r, big_t, got["distance"])
        if got["distance"] + 1 <= 2 * self.h:
            self._schedule_wave(r + 1, big_t)
        self._finish_phase(r, big_t)

    def _finish_phase(self, r: int, big_t: int) -> None:
        self.t2 = big_t + 2 * self.h * (2 * bitlen(big_t) + 2)
        self._event("t2", self.phase + 1, r, self.t2)
        self._listener = None
        if self.phase < self.h:
            self._alarm(self.t2 + 1, "phase_start", self.phase + 1)
            self.stage = "idle_until_phase"
        else:
            self._alarm(self.t2 + 1, "final_start")
            self.stage = "idle_until_phase"

    # final ----------------------------------------------------------------------

    def _on_final_start(self, r: int) -> None:
        if self.label.has(0):
            assert self.weight is not None, "root finished phases without a weight"
            self.output = self.weight
            self._event("output", r - 1, self.output)
            self._schedule_wave(r, self.output)
            self.stage = "draining"
        else:
            self._arm_listener(self._validate_n_wave)
            self.stage = "wave_n"

    def _obs_wave_n(self, r: int, obs: Observation) -> None:
        got = self._feed_listener(r, obs)
        if got is None:
            return
        self.output = got["value"]
        self._event("output", r, self.output)
        self._event("wave", "n", r, got["value"], self.level)
        if self.label.has(4):
            self._schedule_wave(r + 1, self.output)
        self.stage = "draining"
        self._listener = None


# --- orchestration -------------------------------------------------------------

@dataclass
class ProtocolResult:
    """Outcome of one end-to-end run plus everything tests need to audit it."""

    ok: bool
    outputs: Dict[int, Optional[int]]
    rounds_used: int
    round_cap: int
    scheme: LabelingScheme
    decomposition: LevelDecomposition
    plan: UpperSetPlan
    oracle_weights: Dict[int, int]
    nodes: Dict[int, SizeDiscoveryNode]
    trace: Optional[SimulationTrace] = None
    failure: Optional[str] = None

    def report(self, g: Graph) -> dict:
        return {
            "n": g.n,
            "delta": self.decomposition.delta,
            "h": self.decomposition.h,
            "rounds_used": self.rounds_used,
            "max_label_bits": self.scheme.max_bits(),
            "outputs_ok": self.ok,
            "bound_Dn2logDelta": self.round_cap,
        }


def round_cap_multiplier() -> int:
    return int(os.environ.get("RSD_ROUND_CAP_MULTIPLIER", "64"))


def run_protocol(
    g: Graph,
    engine: str = "fast",
    record_trace: bool = False,
    cap_multiplier: Optional[int] = None,
) -> ProtocolResult:
    """Label the graph, run size discovery, and audit the outputs against n."""
    if g.n < 2:
        raise ValueError("size discovery requires n >= 2: the root must have a neighbor")
    d = decompose(g)
    plan = compute_upper_sets(g, d)
    weights = compute_weights(plan, d)
    scheme = assign_labels(g, d, plan, weights)
    mult = cap_multiplier if cap_multiplier is not None else round_cap_multiplier()
    cap = mult * g.diameter() * g.n * g.n * bitlen(d.delta)
    nodes = {v: SizeDiscoveryNode(scheme.labels[v], node_id=v) for v in range(g.n)}

    failure = None
    trace = None
    try:
        if engine == "fast":
            rounds_used = run_scheduled(g, nodes, cap)
        elif engine == "reference":
            trace, rounds_used = run(g, nodes, cap, record_trace=record_trace)
            rounds_used = _last_activity(trace, rounds_used)
        else:
            raise ValueError(f"unknown engine {engine!r}")
    except SimulationError as exc:
        failure = str(exc)
        rounds_used = cap

    outputs = {v: nodes[v].output for v in range(g.n)}
    ok = failure is None and all(out == g.n for out in outputs.values())
    if failure is None and not all(nodes[v].done for v in range(g.n)):
        ok = False
        failure = f"round cap {cap} exhausted before all nodes finished"
    return ProtocolResult(
        ok=ok,
        outputs=outputs,
        rounds_used=rounds_used,
        round_cap=cap,
        scheme=scheme,
        decomposition=d,
        plan=plan,
        oracle_weights=weights,
        nodes=nodes,
        trace=trace if record_trace else None,
        failure=failure,
    )


def _last_activity(trace: SimulationTrace, default: int) -> int:
    for r in range(len(trace.rounds), 0, -1):
        actions, _obs = trace.rounds[r - 1]
        if any(msg is not None for msg in actions.values()):
            return r
    return default
