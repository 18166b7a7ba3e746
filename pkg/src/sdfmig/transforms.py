"""Graph rewrites that embed platform mapping decisions into an SDF graph.

Three rewrites:

* local binding: a reversed buffer channel models the finite memory a
  same-tile channel lives in;
* remote binding: a channel crossing tiles becomes a chain of three
  infrastructure actors (connection send time, guaranteed token latency,
  worst-case TDMA re-entry wait of the consumer) plus buffer back-edges on
  both sides;
* prefetch (memory-aware) rewrite: a consumer that reads from a remote
  memory is split into an issue/execute pair overlapped with a memory actor,
  framed by batch gates.

:func:`build_bound_graph` composes them into the analyzable graph for a full
scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import BufferTooSmallError, SameTileError, UnknownActorError
from .graph import (
    Actor,
    ActorKind,
    Channel,
    SDFG,
    compute_repetition_vector,
    disable_auto_concurrency,
)
from .mpsoc import (
    ChannelBinding,
    NocConnection,
    Platform,
    PlatformMapping,
    TileKind,
    compute_etam,
    resolve_latency_bound,
    tdma_wait,
)


@dataclass(frozen=True)
class RemoteBindingParams:
    """Inputs for binding one channel onto a NoC connection. ``alpha_src`` and
    ``alpha_dst`` are the buffer sizes (in tokens) reserved in the producing
    and consuming tiles; ``latency_bound`` is the guaranteed token latency of
    the connection."""

    connection: NocConnection
    alpha_src: int = 1
    alpha_dst: int = 1
    latency_bound: int = 0
    token_size: int | None = None
    # The consumer-side buffer release edge normally returns to the
    # connection actor; "wait" re-targets it at the TDMA-wait actor instead.
    dst_backedge_at: str = "connection"


@dataclass(frozen=True)
class MemoryAwareParams:
    """Inputs for the prefetch rewrite. ``n`` is the number of consumer
    firings released per gate batch; the fetch path is only needed when one
    firing's tokens cannot be prefetched entirely during the previous one."""

    n: int
    prefetch_time: int = 0
    transfer_time: int = 0
    enable_fetch_path: bool = False


def connection_actor_time(token_size: int, connection: NocConnection) -> int:
    """Cycles to push one token through a connection: latency plus the
    truncated size/bandwidth quotient."""
    if connection.bandwidth <= 0:
        raise ValueError(f"connection {connection.id!r} has non-positive bandwidth")
    return connection.latency + int(token_size / connection.bandwidth)


def bind_local_channel(graph: SDFG, channel_id: str, buffer_tokens: int) -> SDFG:
    """Add the reversed buffer channel for a same-tile channel.

    The back-edge starts with ``buffer_tokens - initial_tokens`` tokens: the
    free space left in a buffer of ``buffer_tokens`` tokens. The forward
    channel is untouched, so tokens(forward) + tokens(back) stays equal to
    ``buffer_tokens`` in every reachable state.
    """
    channel = graph.channel(channel_id)
    if buffer_tokens < channel.initial_tokens:
        raise BufferTooSmallError(
            f"buffer of {buffer_tokens} tokens cannot hold the "
            f"{channel.initial_tokens} initial tokens of {channel_id!r}")
    back = Channel(
        id=graph.unique_id(f"{channel_id}__buf"),
        src=channel.dst, dst=channel.src,
        prod_rate=channel.cons_rate, cons_rate=channel.prod_rate,
        initial_tokens=buffer_tokens - channel.initial_tokens,
    )
    return graph.with_channels(list(graph.channels) + [back])


def bind_remote_channel(graph: SDFG, channel_id: str,
                        params: RemoteBindingParams, dst_wait: int) -> SDFG:
    """Replace a channel with the connection chain
    src -> send -> latency -> wait -> dst.

    The inserted actors carry the send time of one token, the guaranteed
    token latency, and the consumer's worst-case TDMA re-entry wait (zero for
    hardware consumers). Buffer back-edges hold ``alpha_src`` and
    ``alpha_dst`` tokens; the channel's initial tokens carry over to the last
    chain edge. All inserted actors get unit self-loops.
    """
    channel = graph.channel(channel_id)
    token_size = params.token_size if params.token_size is not None else channel.token_size
    send = Actor(graph.unique_id(f"ac_{channel_id}"),
                 connection_actor_time(token_size, params.connection),
                 kind=ActorKind.INFRASTRUCTURE)
    latency = Actor(graph.unique_id(f"a_{channel_id}"), params.latency_bound,
                    kind=ActorKind.INFRASTRUCTURE)
    wait = Actor(graph.unique_id(f"as_{channel_id}"), dst_wait,
                 kind=ActorKind.INFRASTRUCTURE)
    dst_backedge_target = wait.id if params.dst_backedge_at == "wait" else send.id
    chain = [
        Channel(graph.unique_id(f"{channel_id}__send"), channel.src, send.id,
                prod_rate=channel.prod_rate, cons_rate=1, token_size=token_size),
        Channel(graph.unique_id(f"{channel_id}__lat"), send.id, latency.id),
        Channel(graph.unique_id(f"{channel_id}__wait"), latency.id, wait.id),
        Channel(graph.unique_id(f"{channel_id}__recv"), wait.id, channel.dst,
                prod_rate=1, cons_rate=channel.cons_rate,
                initial_tokens=channel.initial_tokens, token_size=token_size),
        Channel(graph.unique_id(f"{channel_id}__srcbuf"), send.id, channel.src,
                prod_rate=1, cons_rate=channel.prod_rate,
                initial_tokens=params.alpha_src),
        Channel(graph.unique_id(f"{channel_id}__dstbuf"), channel.dst,
                dst_backedge_target,
                prod_rate=channel.cons_rate, cons_rate=1,
                initial_tokens=params.alpha_dst),
    ]
    for inserted in (send, latency, wait):
        chain.append(Channel(graph.unique_id(f"{inserted.id}__self"),
                             inserted.id, inserted.id, 1, 1, 1))
    channels = [c for c in graph.channels if c.id != channel_id] + chain
    return SDFG(actors=list(graph.actors) + [send, latency, wait],
                channels=channels, reference_actor=graph.reference_actor)


def memory_aware_transform(graph: SDFG, actor_id: str,
                           params: MemoryAwareParams) -> SDFG:
    """Split an actor that reads from a remote memory into the prefetch
    template.

    ``X`` becomes ``X1`` (prefetch issue) and ``X2`` (execution, keeping X's
    execution time); ``X_m1`` models the remote memory and the transfer of
    one prefetched token; the pipeline edge X1 -> X2 holds one token so the
    prefetch for firing i+1 overlaps execution i. Gates ``X_ri``/``X_ro``
    release firings in batches of ``n``; the gate-to-gate return edge carries
    two batch tokens, so the prefetch of one batch may overlap the execution
    of the previous one but cannot run further ahead (keeping every internal
    buffer bounded). With ``enable_fetch_path`` an extra memory actor
    ``X_m2`` serializes a fetch into every execution.

    X's input channels move to the input gate (consuming n times their rate),
    output channels and self-loops move to ``X2``.
    """
    original = graph.actor_map.get(actor_id)
    if original is None:
        raise UnknownActorError(f"no actor {actor_id!r} in graph")
    gate_in = Actor(graph.unique_id(f"{actor_id}_ri"), 1, kind=ActorKind.INFRASTRUCTURE)
    gate_out = Actor(graph.unique_id(f"{actor_id}_ro"), 1, kind=ActorKind.INFRASTRUCTURE)
    issue = Actor(graph.unique_id(f"{actor_id}1"), params.prefetch_time,
                  kind=ActorKind.INFRASTRUCTURE)
    execute = Actor(graph.unique_id(f"{actor_id}2"), original.exec_time,
                    kind=original.kind)
    memory = Actor(graph.unique_id(f"{actor_id}_m1"),
                   params.prefetch_time + params.transfer_time,
                   kind=ActorKind.INFRASTRUCTURE)

    channels: list[Channel] = []
    for c in graph.channels:
        if c.src == actor_id and c.dst == actor_id:
            channels.append(replace(c, src=execute.id, dst=execute.id))
        elif c.dst == actor_id:
            channels.append(replace(c, dst=gate_in.id,
                                    cons_rate=c.cons_rate * params.n))
        elif c.src == actor_id:
            channels.append(replace(c, src=execute.id))
        else:
            channels.append(c)

    n = params.n
    channels += [
        Channel(graph.unique_id(f"{actor_id}__batch"), gate_in.id, memory.id,
                prod_rate=n, cons_rate=1),
        Channel(graph.unique_id(f"{actor_id}__batch_ret"), memory.id, gate_in.id,
                prod_rate=1, cons_rate=n, initial_tokens=n),
        Channel(graph.unique_id(f"{actor_id}__issue"), issue.id, memory.id),
        Channel(graph.unique_id(f"{actor_id}__issue_ret"), memory.id, issue.id,
                initial_tokens=1),
        Channel(graph.unique_id(f"{actor_id}__pipe"), issue.id, execute.id,
                initial_tokens=1),
        Channel(graph.unique_id(f"{actor_id}__collect"), execute.id, gate_out.id,
                prod_rate=1, cons_rate=n),
        Channel(graph.unique_id(f"{actor_id}__release"), gate_out.id, execute.id,
                prod_rate=n, cons_rate=1, initial_tokens=n),
        Channel(graph.unique_id(f"{actor_id}__rearm"), gate_out.id, gate_in.id,
                initial_tokens=2),
    ]
    new_actors = [gate_in, issue, memory, execute, gate_out]
    if params.enable_fetch_path:
        fetch_memory = Actor(graph.unique_id(f"{actor_id}_m2"), params.transfer_time,
                             kind=ActorKind.INFRASTRUCTURE)
        new_actors.append(fetch_memory)
        channels += [
            Channel(graph.unique_id(f"{actor_id}__fetch"), execute.id, fetch_memory.id),
            Channel(graph.unique_id(f"{actor_id}__fetch_ret"), fetch_memory.id,
                    execute.id, initial_tokens=1),
        ]
    actors = [a for a in graph.actors if a.id != actor_id] + new_actors
    reference = graph.reference_actor
    if reference == actor_id:
        reference = execute.id
    return SDFG(actors=actors, channels=channels, reference_actor=reference)


def build_bound_graph(graph: SDFG, platform: Platform, mapping: PlatformMapping,
                      disable_concurrency: bool = True) -> SDFG:
    """Turn an application graph plus mapping into the analyzable graph:
    execution times inflated to their after-mapping values, every bound
    channel rewritten per its binding, and (by default) a unit self-loop on
    every actor.

    Channels without a binding entry are left untouched.
    """
    repetition = compute_repetition_vector(graph)
    bound = graph.with_exec_times(compute_etam(graph, platform, mapping))

    waits = {a.id: (tdma_wait(a.id, platform, mapping)
                    if a.kind == ActorKind.SOFTWARE and mapping.tile_of(a.id) else 0)
             for a in graph.actors}

    # Prefetch rewrites first: they re-point the affected channels, and the
    # remaining bindings then attach to the split actors transparently.
    for channel in graph.channels:
        binding = mapping.channel_binding.get(channel.id)
        if binding is None or not binding.is_prefetch:
            continue
        connection = platform.connection(binding.connection)
        batch = prefetch_batch(repetition, channel.src, channel.dst)
        bound = memory_aware_transform(bound, channel.dst, MemoryAwareParams(
            n=batch,
            prefetch_time=binding.prefetch_time or 0,
            transfer_time=connection_actor_time(channel.token_size, connection),
            enable_fetch_path=channel.cons_rate > 1,
        ))
        if binding.buffer_tokens is not None:
            bound = bind_local_channel(bound, channel.id, binding.buffer_tokens)

    for channel in graph.channels:
        binding = mapping.channel_binding.get(channel.id)
        if binding is None or binding.is_prefetch:
            continue
        if binding.is_local:
            src_tile, dst_tile = mapping.tile_of(channel.src), mapping.tile_of(channel.dst)
            if src_tile != dst_tile:
                raise SameTileError(
                    f"channel {channel.id!r} bound locally but endpoints sit on "
                    f"{src_tile!r} and {dst_tile!r}")
            if binding.buffer_tokens is not None:
                bound = bind_local_channel(bound, channel.id, binding.buffer_tokens)
        else:
            src_tile, dst_tile = mapping.tile_of(channel.src), mapping.tile_of(channel.dst)
            if src_tile is not None and src_tile == dst_tile:
                raise SameTileError(
                    f"channel {channel.id!r} bound to connection {binding.target!r} "
                    f"but both endpoints sit on {src_tile!r}")
            params = RemoteBindingParams(
                connection=platform.connection(binding.target),
                alpha_src=binding.alpha_src if binding.alpha_src is not None else 1,
                alpha_dst=binding.alpha_dst if binding.alpha_dst is not None else 1,
                latency_bound=resolve_latency_bound(channel.id, graph, platform, mapping),
            )
            bound = bind_remote_channel(bound, channel.id, params,
                                        dst_wait=waits[channel.dst])
    if disable_concurrency:
        bound = disable_auto_concurrency(bound)
    return bound


def prefetch_batch(repetition, producer: str, consumer: str) -> int:
    """Gate batch size for a prefetch rewrite: the consumer firings released
    per producer batch, kept integral by dividing out the common factor."""
    q_dst, q_src = repetition[consumer], repetition[producer]
    return q_dst // math.gcd(q_dst, q_src)
