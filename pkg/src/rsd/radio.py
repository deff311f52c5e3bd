"""Synchronous radio rounds with collision detection.

Model: in each round every node either transmits to all neighbors or
listens.  A listener hears a message iff exactly one neighbor transmits;
two or more transmitting neighbors produce collision noise, zero produce
silence.  Transmitters learn nothing in their own round.

Two engines drive automata over this model.  `run` visits every round and
every node (the reference semantics).  `run_scheduled` skips globally
silent stretches by asking automata when they might transmit next; it
produces the same observations and is validated against `run` in tests.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Tuple

from .graphs import Graph
from .labels import Tag


# --- messages -------------------------------------------------------------

@dataclass(frozen=True)
class WavePulse:
    """Content-free pulse used by the bit-serial flooding subroutine."""


@dataclass(frozen=True)
class DeltaLearn:
    tag: Tag


@dataclass(frozen=True)
class HopValue:
    value: int


@dataclass(frozen=True)
class CollisionTagMsg:
    tag: Tag


@dataclass(frozen=True)
class WeightReport:
    tag: Tag
    weight: int


@dataclass(frozen=True)
class Stop:
    """End-of-accounting signal from an upper-set member to its children."""


@dataclass(frozen=True)
class Opaque:
    """Arbitrary payload, used by the lower-bound history computations."""

    payload: str


Message = object  # union of the frozen dataclasses above


# --- observations ---------------------------------------------------------

class _Singleton:
    _name = "?"

    def __repr__(self) -> str:  # pragma: no cover - repr cosmetics
        return self._name


class _SilenceT(_Singleton):
    _name = "Silence"


class _CollisionT(_Singleton):
    _name = "CollisionNoise"


class _NotListeningT(_Singleton):
    _name = "NotListening"


SILENCE = _SilenceT()
COLLISION = _CollisionT()
NOT_LISTENING = _NotListeningT()


@dataclass(frozen=True)
class Heard:
    message: Message


Observation = object  # SILENCE | COLLISION | NOT_LISTENING | Heard


def resolve_round(g: Graph, actions: Dict[int, Optional[Message]]) -> Dict[int, Observation]:
    """Apply the 0/1/>=2 transmitter rule to one round of actions.

    `actions[v]` is the message v transmits, or None to listen.  Every node
    must appear.
    """
    obs: Dict[int, Observation] = {}
    counts = [0] * g.n
    single: List[Optional[Message]] = [None] * g.n
    for v in range(g.n):
        msg = actions[v]
        if msg is not None:
            for w in g.adj[v]:
                counts[w] += 1
                single[w] = msg
    for v in range(g.n):
        if actions[v] is not None:
            obs[v] = NOT_LISTENING
        elif counts[v] == 0:
            obs[v] = SILENCE
        elif counts[v] == 1:
            obs[v] = Heard(single[v])
        else:
            obs[v] = COLLISION
    return obs


# --- automaton interface ----------------------------------------------------

class Automaton(Protocol):
    """Deterministic per-node step machine.

    decide(r) returns the action for round r; its knowledge is everything
    observed in rounds < r.  observe(r, obs) delivers round r's observation.
    Rounds not delivered via observe were silent (or the node transmitted,
    which it knows).  done is terminal.
    """

    done: bool

    def decide(self, r: int) -> Optional[Message]: ...

    def observe(self, r: int, obs: Observation) -> None: ...

    def next_transmit_round(self, r: int) -> Optional[int]: ...


class SimulationError(RuntimeError):
    def __init__(self, message: str, round_no: int, node: int):
        super().__init__(f"round {round_no}, node {node}: {message}")
        self.round_no = round_no
        self.node = node


@dataclass
class SimulationTrace:
    """Per-round actions and observations (reference engine only)."""

    rounds: List[Tuple[Dict[int, Optional[Message]], Dict[int, Observation]]] = field(
        default_factory=list
    )

    def format_text(self) -> str:
        """Trace file format: `round node action observation` per line."""
        lines = []
        for r, (actions, obs) in enumerate(self.rounds, start=1):
            for v in sorted(actions):
                lines.append(f"{r} {v} {_action_str(actions[v])} {_obs_str(obs[v])}")
        return "\n".join(lines) + ("\n" if lines else "")


def _action_str(msg: Optional[Message]) -> str:
    return "L" if msg is None else f"T:{type(msg).__name__}"


def _obs_str(obs: Observation) -> str:
    if obs is SILENCE:
        return "S"
    if obs is COLLISION:
        return "C"
    if obs is NOT_LISTENING:
        return "-"
    return f"H:{type(obs.message).__name__}"


def run(
    g: Graph,
    automata: Dict[int, Automaton],
    max_rounds: int,
    record_trace: bool = True,
) -> Tuple[SimulationTrace, int]:
    """Reference engine: visit rounds 1..max_rounds, stepping every node.

    Returns the trace and the last round in which anyone transmitted (0 if
    nobody ever did).  Stops early once every automaton is done.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")
    trace = SimulationTrace()
    last_activity = 0
    for r in range(1, max_rounds + 1):
        if all(a.done for a in automata.values()):
            break
        actions: Dict[int, Optional[Message]] = {}
        for v in range(g.n):
            try:
                actions[v] = automata[v].decide(r)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(f"automaton failed in decide: {exc}", r, v) from exc
        obs = resolve_round(g, actions)
        for v in range(g.n):
            try:
                automata[v].observe(r, obs[v])
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(f"automaton failed in observe: {exc}", r, v) from exc
        if record_trace:
            trace.rounds.append((actions, obs))
        if any(msg is not None for msg in actions.values()):
            last_activity = r
    return trace, last_activity


def run_scheduled(
    g: Graph,
    automata: Dict[int, Automaton],
    max_rounds: int,
) -> int:
    """Fast engine: jump between rounds where some node may transmit.

    Sound because an untouched automaton only ever moves its next pending
    transmission later, never earlier, in response to silence; a lazy heap
    of declared rounds therefore always knows the next globally non-silent
    round.  Returns the last round in which anyone transmitted.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")
    heap: List[Tuple[int, int]] = []
    not_done = set()
    for v in range(g.n):
        if not automata[v].done:
            not_done.add(v)
        nxt = automata[v].next_transmit_round(1)
        if nxt is not None:
            heapq.heappush(heap, (nxt, v))
    last_activity = 0
    while not_done:
        r = None
        while heap:
            declared, v = heap[0]
            actual = automata[v].next_transmit_round(declared)
            if actual == declared:
                r = declared
                break
            heapq.heappop(heap)
            if actual is not None:
                heapq.heappush(heap, (actual, v))
        if r is None:
            v = min(not_done)
            raise SimulationError(
                f"no node will ever transmit again but {len(not_done)} are not done",
                last_activity,
                v,
            )
        if r > max_rounds:
            return last_activity
        candidates: List[int] = []
        while heap and heap[0][0] == r:
            _, v = heapq.heappop(heap)
            if v not in candidates:
                candidates.append(v)
        transmitters: Dict[int, Message] = {}
        for v in candidates:
            try:
                msg = automata[v].decide(r)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(f"automaton failed in decide: {exc}", r, v) from exc
            if msg is not None:
                transmitters[v] = msg
        touched = set(candidates)
        for v in transmitters:
            touched.update(g.adj[v])
        for v in sorted(touched):
            if v in transmitters:
                obs: Observation = NOT_LISTENING
            else:
                heard = [transmitters[w] for w in g.adj[v] if w in transmitters]
                if len(heard) == 1:
                    obs = Heard(heard[0])
                elif len(heard) >= 2:
                    obs = COLLISION
                else:
                    obs = SILENCE
            try:
                automata[v].observe(r, obs)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(f"automaton failed in observe: {exc}", r, v) from exc
        for v in touched:
            if automata[v].done:
                not_done.discard(v)
            elif v not in not_done:
                not_done.add(v)
            nxt = automata[v].next_transmit_round(r + 1)
            if nxt is not None:
                heapq.heappush(heap, (nxt, v))
        if transmitters:
            last_activity = r
    return last_activity
