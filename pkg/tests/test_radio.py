import pytest
from hypothesis import given, strategies as st

from rsd.generators import path, random_connected_graph, star
from rsd.graphs import Graph
from rsd.radio import (
    COLLISION,
    NOT_LISTENING,
    SILENCE,
    Heard,
    Opaque,
    SimulationError,
    resolve_round,
    run,
    run_scheduled,
)


def test_no_transmitters_all_silence():
    g = star(1)
    obs = resolve_round(g, {0: None, 1: None})
    assert obs == {0: SILENCE, 1: SILENCE}


def test_two_transmitting_leaves_collide_at_center():
    g = star(3)
    msg = Opaque("x")
    obs = resolve_round(g, {0: None, 1: msg, 2: msg, 3: None})
    assert obs[0] is COLLISION
    assert obs[3] is SILENCE  # leaves are not adjacent to each other
    assert obs[1] is NOT_LISTENING and obs[2] is NOT_LISTENING


def test_single_transmitter_heard_only_by_neighbors():
    g = star(3)
    msg = Opaque("ping")
    obs = resolve_round(g, {0: None, 1: msg, 2: None, 3: None})
    assert obs[0] == Heard(msg)
    assert obs[2] is SILENCE and obs[3] is SILENCE


class Dummy:
    """Scriptable automaton: transmits per a fixed round -> message map.

    Done once the schedule drains, unless told to linger forever.
    """

    def __init__(self, schedule=None, linger=False):
        self.schedule = dict(schedule or {})
        self.linger = linger
        self.seen = []

    @property
    def done(self):
        return not self.schedule and not self.linger

    def decide(self, r):
        return self.schedule.pop(r, None)

    def observe(self, r, obs):
        self.seen.append((r, obs))

    def next_transmit_round(self, r):
        pending = [k for k in self.schedule if k >= r]
        return min(pending) if pending else None


def test_zero_round_run():
    g = star(1)
    autos = {0: Dummy(linger=True), 1: Dummy(linger=True)}
    trace, last = run(g, autos, 0)
    assert trace.rounds == [] and last == 0
    assert autos[0].seen == []


def test_always_listen_sees_silence():
    g = star(1)
    autos = {0: Dummy(linger=True), 1: Dummy(linger=True)}
    _trace, last = run(g, autos, 3)
    assert last == 0
    assert [o for _r, o in autos[1].seen] == [SILENCE] * 3


def test_transmitter_not_listening_in_own_round():
    g = star(1)
    autos = {0: Dummy({2: Opaque("m")}), 1: Dummy(linger=True)}
    run(g, autos, 3)
    assert autos[0].seen[1] == (2, NOT_LISTENING)
    assert autos[1].seen[1] == (2, Heard(Opaque("m")))


def test_trace_format():
    g = star(1)
    autos = {0: Dummy({1: Opaque("m")}), 1: Dummy(linger=True)}
    trace, _ = run(g, autos, 2)
    lines = trace.format_text().strip().split("\n")
    assert lines[0] == "1 0 T:Opaque -"
    assert lines[1] == "1 1 L H:Opaque"
    assert lines[2] == "2 0 L S"


def test_run_reports_failing_node_and_round():
    class Broken(Dummy):
        done = False

        def decide(self, r):
            if r == 2:
                raise RuntimeError("boom")
            return None

    g = star(1)
    with pytest.raises(SimulationError) as err:
        run(g, {0: Broken(), 1: Dummy(linger=True)}, 5)
    assert err.value.round_no == 2
    assert err.value.node == 0


def test_determinism_full_trace():
    g = random_connected_graph(12, 4, 3)
    sched = {v: {1 + (v % 3): Opaque(str(v))} for v in range(g.n)}

    def build():
        return {v: Dummy(dict(sched[v])) for v in range(g.n)}

    t1, _ = run(g, build(), 6)
    t2, _ = run(g, build(), 6)
    assert t1.format_text() == t2.format_text()


def test_model_soundness_recheck_from_trace():
    g = random_connected_graph(15, 5, 8)
    autos = {v: Dummy({1 + (v % 4): Opaque(str(v))}) for v in range(g.n)}
    trace, _ = run(g, autos, 5)
    for actions, obs in trace.rounds:
        for v in range(g.n):
            transmitting = [w for w in g.adj[v] if actions[w] is not None]
            if actions[v] is not None:
                assert obs[v] is NOT_LISTENING
            elif len(transmitting) == 0:
                assert obs[v] is SILENCE
            elif len(transmitting) == 1:
                assert obs[v] == Heard(actions[transmitting[0]])
            else:
                assert obs[v] is COLLISION


def test_scheduled_engine_agrees_with_reference():
    g = path(6)
    sched = {v: {2 + v: Opaque(str(v)), 4 + 2 * v: Opaque("b" + str(v))} for v in range(g.n)}

    def build():
        return {v: Dummy(dict(sched[v])) for v in range(g.n)}

    ref = build()
    run(g, ref, 20)
    fast = build()
    last = run_scheduled(g, fast, 20)
    assert last == max(r for v in range(g.n) for r in sched[v])
    for v in range(g.n):
        nonsilent_ref = [(r, o) for r, o in ref[v].seen if o is not SILENCE]
        nonsilent_fast = [(r, o) for r, o in fast[v].seen if o is not SILENCE]
        assert nonsilent_ref == nonsilent_fast


def test_scheduled_engine_deadlock_detection():
    g = star(1)
    with pytest.raises(SimulationError) as err:
        run_scheduled(g, {0: Dummy(linger=True), 1: Dummy(linger=True)}, 100)
    assert "not done" in str(err.value)


@given(st.integers(2, 8), st.data())
def test_resolve_round_counts(n, data):
    edges = [(i, i + 1) for i in range(n - 1)]
    g = Graph.from_edges(n, edges)
    transmit = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    actions = {v: (Opaque(str(v)) if transmit[v] else None) for v in range(n)}
    obs = resolve_round(g, actions)
    for v in range(n):
        talkers = [w for w in g.adj[v] if transmit[w]]
        if transmit[v]:
            assert obs[v] is NOT_LISTENING
        elif len(talkers) == 1:
            assert obs[v] == Heard(Opaque(str(talkers[0])))
        else:
            assert obs[v] is (SILENCE if not talkers else COLLISION)
