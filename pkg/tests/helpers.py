"""Shared builders and independent oracles for the test suite.

The cycle-ratio oracle here enumerates simple cycles directly and must stay
independent of the package's analytical search, so the two can check each
other.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from sdfmig.graph import Actor, ActorKind, Channel, SDFG, disable_auto_concurrency


def build_graph(actor_times: dict[str, int],
                channels: list[tuple],
                reference: str | None = None,
                kinds: dict[str, ActorKind] | None = None) -> SDFG:
    """Compact graph builder.

    ``channels`` rows are (src, dst, prod, cons, tokens) with trailing fields
    optional; channel ids are generated as c0, c1, ...
    """
    kinds = kinds or {}
    actors = [Actor(a, et, kind=kinds.get(a, ActorKind.SOFTWARE))
              for a, et in actor_times.items()]
    chans = []
    for i, row in enumerate(channels):
        src, dst = row[0], row[1]
        prod = row[2] if len(row) > 2 else 1
        cons = row[3] if len(row) > 3 else 1
        tokens = row[4] if len(row) > 4 else 0
        chans.append(Channel(f"c{i}", src, dst, prod, cons, tokens))
    return SDFG(actors=actors, channels=chans, reference_actor=reference)


def enumerate_cycle_ratios(graph: SDFG) -> list[Fraction]:
    """All simple-cycle ratios (total execution time / total tokens) by
    explicit DFS enumeration. Parallel channels count as distinct cycles."""
    ids = sorted(a.id for a in graph.actors)
    index = {a: i for i, a in enumerate(ids)}
    edges = [(index[c.src], index[c.dst], graph.actor_map[c.src].exec_time,
              c.initial_tokens) for c in graph.channels]
    outgoing: list[list[int]] = [[] for _ in ids]
    for ei, (u, _, _, _) in enumerate(edges):
        outgoing[u].append(ei)

    ratios: list[Fraction] = []

    def walk(start: int, node: int, visited: set[int], weight: int, tokens: int):
        for ei in outgoing[node]:
            _, v, w, t = edges[ei]
            if v == start:
                if tokens + t == 0:
                    ratios.append(Fraction(-1))  # sentinel: token-free cycle
                else:
                    ratios.append(Fraction(weight + w, tokens + t))
            elif v > start and v not in visited:
                visited.add(v)
                walk(start, v, visited, weight + w, tokens + t)
                visited.remove(v)

    for s in range(len(ids)):
        walk(s, s, {s}, 0, 0)
    return ratios


def oracle_throughput(graph: SDFG) -> Fraction:
    """1 / max simple-cycle ratio, straight from enumeration."""
    ratios = enumerate_cycle_ratios(graph)
    assert ratios, "oracle needs at least one cycle"
    assert Fraction(-1) not in ratios, "oracle hit a token-free cycle"
    return 1 / max(ratios)


def random_homogeneous_graph(rng: random.Random, max_actors: int = 8,
                             max_exec: int = 20, max_tokens: int = 3) -> SDFG:
    """Random strongly-connected, live, all-rates-1 graph.

    Strong connectivity comes from a random ring over all actors; liveness
    from forcing tokens onto every edge that does not advance along the ring
    order, so every cycle carries at least one token.
    """
    n = rng.randint(2, max_actors)
    ids = [f"a{i}" for i in range(n)]
    ring = list(range(n))
    rng.shuffle(ring)
    position = {node: pos for pos, node in enumerate(ring)}

    def tokens_between(u: int, v: int) -> int:
        if position[v] <= position[u]:
            return rng.randint(1, max_tokens)
        return rng.randint(0, max_tokens)

    pairs = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for _ in range(rng.randint(0, 2 * n)):
        pairs.append((rng.randrange(n), rng.randrange(n)))
    actors = [Actor(a, rng.randint(1, max_exec)) for a in ids]
    channels = [Channel(f"c{i}", ids[u], ids[v], 1, 1, tokens_between(u, v))
                for i, (u, v) in enumerate(pairs)]
    graph = SDFG(actors=actors, channels=channels)
    if rng.random() < 0.5:
        graph = disable_auto_concurrency(graph)
    return graph


def random_consistent_graph(rng: random.Random, max_actors: int = 6,
                            max_exec: int = 20, self_loops: bool = True) -> SDFG:
    """Random consistent, live, bounded multirate graph.

    Rates are derived from a preselected repetition vector so the balance
    equations hold by construction; every forward channel gets a reversed
    buffer channel holding two iterations worth of tokens, which bounds all
    buffers and guarantees liveness.
    """
    n = rng.randint(2, max_actors)
    reps = [rng.randint(1, 4) for _ in range(n)]
    ids = [f"a{i}" for i in range(n)]
    pairs = [(i, i + 1) for i in range(n - 1)]
    for _ in range(rng.randint(0, n)):
        u = rng.randrange(n - 1)
        v = rng.randint(u + 1, n - 1)
        if (u, v) not in pairs:
            pairs.append((u, v))
    channels = []
    for i, (u, v) in enumerate(pairs):
        g = math.gcd(reps[u], reps[v])
        m = rng.randint(1, 2)
        prod, cons = m * reps[v] // g, m * reps[u] // g
        flow = reps[u] * prod
        channels.append(Channel(f"f{i}", ids[u], ids[v], prod, cons, 0))
        channels.append(Channel(f"b{i}", ids[v], ids[u], cons, prod, 2 * flow))
    actors = [Actor(a, rng.randint(1, max_exec)) for a in ids]
    graph = SDFG(actors=actors, channels=channels)
    return disable_auto_concurrency(graph) if self_loops else graph


def mjpeg_application() -> SDFG:
    """Six-stage MJPEG decoder for 32x24 frames: VLD and RE handle whole
    frames (12 blocks), the middle stages one 8x8 block per firing."""
    actors = [
        Actor("VLD", 2082463), Actor("IZZ", 24791), Actor("IQ", 49582),
        Actor("IDCT", 99165), Actor("CC", 74374), Actor("RE", 892484),
    ]
    channels = [
        Channel("vld_izz", "VLD", "IZZ", 12, 1, token_size=1024),
        Channel("izz_iq", "IZZ", "IQ", 1, 1, token_size=1024),
        Channel("iq_idct", "IQ", "IDCT", 1, 1, token_size=1024),
        Channel("idct_cc", "IDCT", "CC", 1, 1, token_size=512),
        Channel("cc_re", "CC", "RE", 1, 12, token_size=512),
    ]
    return SDFG(actors=actors, channels=channels, reference_actor="VLD")


def mjpeg_platform():
    from fractions import Fraction as F
    from sdfmig.mpsoc import NocConnection, Platform, Tile
    tiles = [Tile("T1", tdma_wheel=100000), Tile("T2", tdma_wheel=100000),
             Tile("T3", tdma_wheel=100000)]
    connections = [
        NocConnection("n1", "T1", "T2", latency=3, bandwidth=F("0.00406278")),
        NocConnection("n2", "T2", "T3", latency=3, bandwidth=F("0.00203139")),
    ]
    return Platform(tiles=tiles, connections=connections)


def mjpeg_mapping(vld_izz_buffer=13, iq_idct_buffer=2, cc_re_buffer=24,
                  izz_iq_alpha=(2, 1), idct_cc_alpha=(2, 2)):
    """Calibrated case-study mapping. The tile-1 buffer of 13 blocks (one
    frame plus one slack block) and the single consumer-side buffer token on
    the first chain pin the baseline throughput; see the bundled scenario
    for the full rationale."""
    from sdfmig.mpsoc import ChannelBinding, PlatformMapping
    return PlatformMapping(
        actor_tile={"VLD": "T1", "IZZ": "T1", "IQ": "T2", "IDCT": "T2",
                    "CC": "T3", "RE": "T3"},
        tdma_slice={"VLD": 50000, "IZZ": 50000, "IQ": 10000, "IDCT": 90000,
                    "CC": 20000, "RE": 80000},
        channel_binding={
            "vld_izz": ChannelBinding(buffer_tokens=vld_izz_buffer),
            "izz_iq": ChannelBinding(target="n1", alpha_src=izz_iq_alpha[0],
                                     alpha_dst=izz_iq_alpha[1], latency_bound=100000),
            "iq_idct": ChannelBinding(buffer_tokens=iq_idct_buffer),
            "idct_cc": ChannelBinding(target="n2", alpha_src=idct_cc_alpha[0],
                                      alpha_dst=idct_cc_alpha[1], latency_bound=100000),
            "cc_re": ChannelBinding(buffer_tokens=cc_re_buffer),
        },
    )


def random_scenario(rng: random.Random, max_actors: int = 5):
    """Random consistent application graph with a full-mesh platform and a
    mapping that binds every channel (local buffer or connection chain).

    Buffer and alpha sizes are scaled to the channel rates so the scenario is
    structurally valid; liveness is not guaranteed (structural property tests
    only need consistency).
    """
    from sdfmig.graph import compute_repetition_vector
    from sdfmig.mpsoc import (ChannelBinding, NocConnection, Platform,
                              PlatformMapping, Tile)

    graph = random_consistent_graph(rng, max_actors=max_actors, self_loops=False)
    q = compute_repetition_vector(graph)

    n_tiles = rng.randint(2, 3)
    tiles = [Tile(f"T{i}", tdma_wheel=10000) for i in range(n_tiles)]
    connections = [
        NocConnection(f"n{i}_{j}", f"T{i}", f"T{j}", latency=rng.randint(0, 5),
                      bandwidth=Fraction(rng.randint(1, 8), rng.choice([1, 2, 4])))
        for i in range(n_tiles) for j in range(n_tiles) if i != j
    ]
    platform = Platform(tiles=tiles, connections=connections)

    actor_tile = {a.id: f"T{rng.randrange(n_tiles)}" for a in graph.actors}
    per_tile = {t.id: [a for a, tid in actor_tile.items() if tid == t.id]
                for t in tiles}
    tdma_slice = {}
    for t in tiles:
        members = per_tile[t.id]
        if members:
            share = t.tdma_wheel // (len(members) + 1)
            for a in members:
                tdma_slice[a] = rng.randint(1, share)

    bindings = {}
    for c in graph.channels:
        if c.is_self_loop:
            continue
        flow = q[c.src] * c.prod_rate
        if actor_tile[c.src] == actor_tile[c.dst]:
            bindings[c.id] = ChannelBinding(
                buffer_tokens=c.initial_tokens + flow + rng.randint(0, flow))
        else:
            conn = f"n{actor_tile[c.src][1:]}_{actor_tile[c.dst][1:]}"
            bindings[c.id] = ChannelBinding(
                target=conn,
                alpha_src=c.prod_rate + rng.randint(0, 2),
                alpha_dst=c.cons_rate + rng.randint(0, 2),
                latency_bound=rng.randint(0, 50))
    mapping = PlatformMapping(actor_tile=actor_tile, tdma_slice=tdma_slice,
                              channel_binding=bindings)
    return graph, platform, mapping
