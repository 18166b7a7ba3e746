"""Software-to-hardware task migration.

A migration moves one software actor onto a dedicated hardware block and
models four effects: the actor runs faster (configurable speedup), its TDMA
slice returns to the co-mapped actors, its channels switch communication
style depending on the peer (software producer -> chain onto a NoC
connection; software consumer -> prefetch from the block's memory; hardware
peer -> retarget the existing chain), and the extra NoC load those styles
imply.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal
from enum import Enum
from fractions import Fraction

from .analysis import ThroughputResult, self_timed_throughput, to_frames_per_second
from .errors import (
    AlreadyHardwareError,
    SdfmigError,
    UnknownActorError,
    UnmappedActorError,
)
from .graph import ActorKind, Channel, SDFG, compute_repetition_vector
from .mpsoc import (
    BIND_PREFETCH,
    ChannelBinding,
    NocConnection,
    Platform,
    PlatformMapping,
    Tile,
    TileKind,
)
from .transforms import build_bound_graph, prefetch_batch


class CommClass(str, Enum):
    """Communication style by endpoint kinds (producer -> consumer)."""

    SS = "SS"
    SH1 = "SH1"
    HS1 = "HS1"
    HH1 = "HH1"


@dataclass(frozen=True)
class MigrationSpec:
    """Parameters of one migration. ``hw_connection`` optionally names the
    platform connection whose latency/bandwidth the new hardware link copies;
    when omitted the link borrows from the channel's previous connection, or
    failing that from the first connection touching the vacated tile.
    ``hw_buffer_tokens`` bounds the producer of a prefetch channel (defaults
    to two gate batches). ``alpha_src``/``alpha_dst`` size the buffers of
    chains that did not exist before the migration."""

    actor: str = ""
    speedup: Fraction = Fraction(2)
    prefetch_time: int = 10000
    hw_connection: str | None = None
    hw_buffer_tokens: int | None = None
    alpha_src: int = 2
    alpha_dst: int = 2


@dataclass(frozen=True)
class MigrationResult:
    """A migrated scenario: the analyzable (bound) graph plus the updated
    application graph, platform and mapping it was built from."""

    graph: SDFG
    mapping: PlatformMapping
    platform: Platform
    app_graph: SDFG
    hw_tile: str


@dataclass(frozen=True)
class MigrationCandidate:
    """One row of an exploration: either a throughput or the error that
    stopped this candidate."""

    actor: str
    result: ThroughputResult | None = None
    fps_after: Decimal | None = None
    gain_fps: Decimal | None = None
    error: str | None = None


def classify_channel(channel: Channel, graph: SDFG) -> CommClass:
    """Communication class from the endpoint kinds after migration; every
    non-software kind counts as hardware."""
    src_sw = graph.actor(channel.src).kind == ActorKind.SOFTWARE
    dst_sw = graph.actor(channel.dst).kind == ActorKind.SOFTWARE
    if src_sw and dst_sw:
        return CommClass.SS
    if src_sw:
        return CommClass.SH1
    if dst_sw:
        return CommClass.HS1
    return CommClass.HH1


def migrate_task(graph: SDFG, platform: Platform, mapping: PlatformMapping,
                 spec: MigrationSpec) -> MigrationResult:
    """Apply one software-to-hardware migration and rebuild the bound graph.

    The migrated actor's execution time becomes ``floor(time / speedup)`` and
    it moves to a fresh hardware tile, freeing its TDMA slice. Channel
    bindings are rewritten per communication class; everything downstream
    (after-mapping times, TDMA waits, chains, prefetch templates) follows
    from the rebuilt scenario.
    """
    actor = graph.actor_map.get(spec.actor)
    if actor is None:
        raise UnknownActorError(f"no actor {spec.actor!r} in graph")
    if actor.kind != ActorKind.SOFTWARE:
        raise AlreadyHardwareError(f"actor {spec.actor!r} is not a software actor")
    old_tile = mapping.tile_of(actor.id)
    if old_tile is None:
        raise UnmappedActorError(f"actor {spec.actor!r} is not mapped")
    repetition = compute_repetition_vector(graph)

    hw_exec_time = int(Fraction(actor.exec_time) / Fraction(spec.speedup))
    app_graph = graph.with_actors([
        replace(a, exec_time=hw_exec_time, kind=ActorKind.HARDWARE)
        if a.id == actor.id else a
        for a in graph.actors
    ])

    tiles = list(platform.tiles)
    hw_tile = Tile(_unique(f"hw_{actor.id}", {t.id for t in tiles}),
                   kind=TileKind.HARDWARE_BLOCK,
                   clock_hz=platform.tile(old_tile).clock_hz)
    tiles.append(hw_tile)
    connections = list(platform.connections)
    bindings = dict(mapping.channel_binding)
    actor_tile = {**mapping.actor_tile, actor.id: hw_tile.id}
    tdma_slice = {a: s for a, s in mapping.tdma_slice.items() if a != actor.id}

    def add_connection(channel: Channel, src_tile: str, dst_tile: str) -> NocConnection:
        template = _template_connection(channel, platform, mapping, spec, old_tile)
        conn = NocConnection(
            id=_unique(f"noc_{channel.id}", {c.id for c in connections}),
            src_tile=src_tile, dst_tile=dst_tile,
            latency=template.latency, bandwidth=template.bandwidth,
        )
        connections.append(conn)
        return conn

    for channel in graph.channels:
        if channel.is_self_loop or actor.id not in (channel.src, channel.dst):
            continue
        comm = classify_channel(channel, app_graph)
        previous = mapping.channel_binding.get(channel.id)
        was_remote = previous is not None and previous.connection_id is not None

        # Default buffer sizes for chains that did not exist before scale
        # with the channel rates: a buffer must hold at least one firing's
        # burst to be usable at all.
        default_alpha_src = spec.alpha_src * channel.prod_rate
        default_alpha_dst = spec.alpha_dst * channel.cons_rate

        if comm == CommClass.SH1:
            # Software producer writes into the block's buffer over the NoC.
            # A previously local channel turns into a genuinely new chain; a
            # previously remote one is retargeted with its old buffer sizes.
            conn = add_connection(channel, mapping.tile_of(channel.src), hw_tile.id)
            bindings[channel.id] = ChannelBinding(
                target=conn.id,
                alpha_src=(previous.alpha_src if was_remote else None) or default_alpha_src,
                alpha_dst=(previous.alpha_dst if was_remote else None) or default_alpha_dst,
                latency_bound=previous.latency_bound if previous else None,
            )
        elif comm == CommClass.HS1:
            # Software consumer must fetch its input from the block's memory:
            # prefetch template, transfer time taken over the hardware link.
            conn = add_connection(channel, hw_tile.id, mapping.tile_of(channel.dst))
            batch = prefetch_batch(repetition, channel.src, channel.dst)
            buffer_tokens = spec.hw_buffer_tokens
            if buffer_tokens is None:
                buffer_tokens = channel.initial_tokens + 2 * batch * channel.cons_rate
            bindings[channel.id] = ChannelBinding(
                target=BIND_PREFETCH,
                connection=conn.id,
                prefetch_time=spec.prefetch_time,
                buffer_tokens=buffer_tokens,
            )
        else:
            # HH1: the peer is already a hardware block and the data already
            # crosses the NoC; retarget the chain without new overhead.
            if channel.src == actor.id:
                endpoints = (hw_tile.id, actor_tile.get(channel.dst))
            else:
                endpoints = (actor_tile.get(channel.src), hw_tile.id)
            conn = add_connection(channel, *endpoints)
            bindings[channel.id] = ChannelBinding(
                target=conn.id,
                alpha_src=(previous.alpha_src if previous else None) or default_alpha_src,
                alpha_dst=(previous.alpha_dst if previous else None) or default_alpha_dst,
                latency_bound=previous.latency_bound if previous else None,
            )

    new_platform = Platform(tiles=tiles, connections=connections)
    new_mapping = PlatformMapping(actor_tile=actor_tile, tdma_slice=tdma_slice,
                                  channel_binding=bindings)
    bound = build_bound_graph(app_graph, new_platform, new_mapping)
    return MigrationResult(graph=bound, mapping=new_mapping, platform=new_platform,
                           app_graph=app_graph, hw_tile=hw_tile.id)


def migration_gain(base: ThroughputResult, migrated: ThroughputResult,
                   clock_hz) -> Decimal:
    """Frames-per-second gained by the migration at the given clock."""
    return to_frames_per_second(migrated, clock_hz) - to_frames_per_second(base, clock_hz)


def explore_single_migrations(graph: SDFG, platform: Platform,
                              mapping: PlatformMapping,
                              defaults: MigrationSpec = MigrationSpec(),
                              clock_hz=Fraction(100_000_000),
                              state_budget: int | None = None,
                              ) -> tuple[ThroughputResult, list[MigrationCandidate]]:
    """Migrate every software actor in turn and rank the outcomes by gain.

    Returns the baseline throughput plus one candidate per software actor,
    sorted by descending gain (ties and failures by actor id; failures
    last, carrying their error message instead of a result)."""
    budget_kwargs = {} if state_budget is None else {"state_budget": state_budget}
    baseline = self_timed_throughput(build_bound_graph(graph, platform, mapping),
                                     **budget_kwargs)
    candidates: list[MigrationCandidate] = []
    for actor in sorted(graph.actors, key=lambda a: a.id):
        if actor.kind != ActorKind.SOFTWARE:
            continue
        try:
            migrated = migrate_task(graph, platform, mapping,
                                    replace(defaults, actor=actor.id))
            result = self_timed_throughput(migrated.graph, **budget_kwargs)
            candidates.append(MigrationCandidate(
                actor=actor.id,
                result=result,
                fps_after=to_frames_per_second(result, clock_hz),
                gain_fps=migration_gain(baseline, result, clock_hz),
            ))
        except SdfmigError as exc:
            candidates.append(MigrationCandidate(actor=actor.id, error=str(exc)))
    candidates.sort(key=lambda c: (c.gain_fps is None,
                                   -c.gain_fps if c.gain_fps is not None else 0,
                                   c.actor))
    return baseline, candidates


def _template_connection(channel: Channel, platform: Platform,
                         mapping: PlatformMapping, spec: MigrationSpec,
                         vacated_tile: str) -> NocConnection:
    """Connection whose latency/bandwidth the new hardware link copies."""
    previous = mapping.channel_binding.get(channel.id)
    if previous is not None and previous.connection_id in platform.connection_map:
        return platform.connection(previous.connection_id)
    if spec.hw_connection is not None:
        return platform.connection(spec.hw_connection)
    touching = sorted((c for c in platform.connections
                       if vacated_tile in (c.src_tile, c.dst_tile)),
                      key=lambda c: c.id)
    if touching:
        return touching[0]
    if platform.connections:
        return sorted(platform.connections, key=lambda c: c.id)[0]
    raise SdfmigError(
        f"platform has no connection to model the hardware link for {channel.id!r}")


def _unique(stem: str, taken: set[str]) -> str:
    if stem not in taken:
        return stem
    n = 2
    while f"{stem}_{n}" in taken:
        n += 1
    return f"{stem}_{n}"
