"""NoC-based MPSoC platform model and actor/channel mapping.

TDMA arbitration is modeled analytically: sharing a processor inflates each
actor's execution time by the co-mapped actors' slices (the worst case where
a token arrives right at the end of the actor's own slot). There is no
slot-level simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping as TMapping

from .errors import SliceOverflowError, UnmappedActorError
from .graph import ActorKind, Diagnostic, SDFG

BIND_LOCAL = "local"
# Binding kind used after a hardware migration for channels whose consumer
# reads from the hardware block's memory (modeled by the prefetch template
# in transforms, not by a connection chain).
BIND_PREFETCH = "prefetch"


class TileKind(str, Enum):
    PROCESSOR = "processor"
    HARDWARE_BLOCK = "hardware_block"
    MEMORY = "memory"


@dataclass(frozen=True)
class Tile:
    """One platform tile. ``tdma_wheel`` is the full TDMA period in cycles and
    only meaningful for processor tiles."""

    id: str
    kind: TileKind = TileKind.PROCESSOR
    tdma_wheel: int = 0
    clock_hz: Fraction = Fraction(100_000_000)


@dataclass(frozen=True)
class NocConnection:
    """Directed NoC connection with a fixed latency (cycles) and bandwidth
    (bytes per cycle, exact rational)."""

    id: str
    src_tile: str
    dst_tile: str
    latency: int = 0
    bandwidth: Fraction = Fraction(1)


@dataclass(frozen=True, eq=False)
class Platform:
    """Tiles plus connections; compares structurally (declaration order of
    elements does not matter)."""

    tiles: tuple[Tile, ...] = ()
    connections: tuple[NocConnection, ...] = ()

    def __init__(self, tiles: Iterable[Tile] = (),
                 connections: Iterable[NocConnection] = ()):
        object.__setattr__(self, "tiles", tuple(tiles))
        object.__setattr__(self, "connections", tuple(connections))

    def __eq__(self, other):
        if not isinstance(other, Platform):
            return NotImplemented
        return (sorted(self.tiles, key=lambda t: t.id)
                == sorted(other.tiles, key=lambda t: t.id)
                and sorted(self.connections, key=lambda c: c.id)
                == sorted(other.connections, key=lambda c: c.id))

    @cached_property
    def tile_map(self) -> dict[str, Tile]:
        return {t.id: t for t in self.tiles}

    @cached_property
    def connection_map(self) -> dict[str, NocConnection]:
        return {c.id: c for c in self.connections}

    def tile(self, tile_id: str) -> Tile:
        return self.tile_map[tile_id]

    def connection(self, connection_id: str) -> NocConnection:
        return self.connection_map[connection_id]


@dataclass(frozen=True)
class ChannelBinding:
    """How one application channel is realized on the platform.

    ``target`` is ``"local"`` (endpoints share a tile, buffer reserved in the
    tile memory), a connection id (endpoints on different tiles, NoC chain),
    or ``"prefetch"`` (consumer reads from a hardware block's memory).
    ``latency_bound`` is the guaranteed token latency over the connection; it
    is an input produced by the surrounding design flow, defaulting to the
    consumer tile's TDMA wheel.
    """

    target: str = BIND_LOCAL
    buffer_tokens: int | None = None
    alpha_src: int | None = None
    alpha_dst: int | None = None
    latency_bound: int | None = None
    connection: str | None = None
    prefetch_time: int | None = None

    @property
    def is_local(self) -> bool:
        return self.target == BIND_LOCAL

    @property
    def is_prefetch(self) -> bool:
        return self.target == BIND_PREFETCH

    @property
    def connection_id(self) -> str | None:
        if self.is_local:
            return None
        if self.is_prefetch:
            return self.connection
        return self.target


@dataclass(frozen=True)
class PlatformMapping:
    """Placement of actors on tiles, per-actor TDMA slices, and per-channel
    bindings."""

    actor_tile: TMapping[str, str]
    tdma_slice: TMapping[str, int]
    channel_binding: TMapping[str, ChannelBinding]

    @property
    def channel_latency_bound(self) -> dict[str, int]:
        """Explicitly configured latency bounds (defaults are resolved against
        the platform, see :func:`resolve_latency_bound`)."""
        return {cid: b.latency_bound
                for cid, b in self.channel_binding.items()
                if b.latency_bound is not None}

    def tile_of(self, actor_id: str) -> str | None:
        return self.actor_tile.get(actor_id)

    def actors_on(self, tile_id: str) -> list[str]:
        return sorted(a for a, t in self.actor_tile.items() if t == tile_id)


def tdma_wait(actor_id: str, platform: Platform, mapping: PlatformMapping) -> int:
    """Worst-case wait for an actor to re-enter its TDMA slot: the sum of the
    other co-mapped actors' slices. Zero on hardware and memory tiles."""
    tile_id = mapping.tile_of(actor_id)
    if tile_id is None or tile_id not in platform.tile_map:
        raise UnmappedActorError(f"actor {actor_id!r} is not mapped to a tile")
    if platform.tile(tile_id).kind != TileKind.PROCESSOR:
        return 0
    return sum(mapping.tdma_slice.get(other, 0)
               for other in mapping.actors_on(tile_id) if other != actor_id)


def compute_etam(graph: SDFG, platform: Platform,
                 mapping: PlatformMapping) -> dict[str, int]:
    """Execution time after mapping for every actor: software actors pay the
    co-mapped actors' TDMA slices on top of their own execution time, other
    kinds are unchanged."""
    _check_slices(platform, mapping)
    etam: dict[str, int] = {}
    for actor in graph.actors:
        if actor.kind == ActorKind.SOFTWARE:
            tile_id = mapping.tile_of(actor.id)
            if tile_id is None or tile_id not in platform.tile_map:
                raise UnmappedActorError(
                    f"software actor {actor.id!r} is not mapped to a tile")
            etam[actor.id] = actor.exec_time + tdma_wait(actor.id, platform, mapping)
        else:
            etam[actor.id] = actor.exec_time
    return etam


def _check_slices(platform: Platform, mapping: PlatformMapping) -> None:
    for tile in platform.tiles:
        if tile.kind != TileKind.PROCESSOR:
            continue
        used = sum(mapping.tdma_slice.get(a, 0) for a in mapping.actors_on(tile.id))
        if used > tile.tdma_wheel:
            raise SliceOverflowError(
                f"tile {tile.id!r}: slices total {used} exceed wheel {tile.tdma_wheel}")


def validate_mapping(graph: SDFG, platform: Platform,
                     mapping: PlatformMapping) -> list[Diagnostic]:
    """Structural checks on a mapping; empty result means it is usable."""
    diags: list[Diagnostic] = []
    for actor_id, tile_id in mapping.actor_tile.items():
        if actor_id not in graph.actor_map:
            diags.append(Diagnostic("UnknownActor", actor_id,
                                    "mapped actor is not in the graph"))
        if tile_id not in platform.tile_map:
            diags.append(Diagnostic("UnknownTile", actor_id,
                                    f"mapped to unknown tile {tile_id!r}"))
    for actor in graph.actors:
        if actor.kind == ActorKind.SOFTWARE and mapping.tile_of(actor.id) is None:
            diags.append(Diagnostic("UnmappedActor", actor.id,
                                    "software actor has no tile"))
    for tile in platform.tiles:
        if tile.kind != TileKind.PROCESSOR:
            continue
        used = sum(mapping.tdma_slice.get(a, 0) for a in mapping.actors_on(tile.id))
        if used > tile.tdma_wheel:
            diags.append(Diagnostic("SliceOverflow", tile.id,
                                    f"slices total {used} exceed wheel {tile.tdma_wheel}"))
    for channel_id, binding in mapping.channel_binding.items():
        channel = graph.channel_map.get(channel_id)
        if channel is None:
            diags.append(Diagnostic("UnknownChannel", channel_id,
                                    "binding references unknown channel"))
            continue
        src_tile = mapping.tile_of(channel.src)
        dst_tile = mapping.tile_of(channel.dst)
        if binding.is_local:
            if src_tile is not None and dst_tile is not None and src_tile != dst_tile:
                diags.append(Diagnostic("BindingMismatch", channel_id,
                                        f"local binding but endpoints on {src_tile!r} "
                                        f"and {dst_tile!r}"))
        elif not binding.is_prefetch:
            connection = platform.connection_map.get(binding.target)
            if connection is None:
                diags.append(Diagnostic("UnknownConnection", channel_id,
                                        f"bound to unknown connection {binding.target!r}"))
            elif (src_tile, dst_tile) != (connection.src_tile, connection.dst_tile):
                diags.append(Diagnostic("BindingMismatch", channel_id,
                                        f"connection {connection.id!r} joins "
                                        f"{connection.src_tile!r}->{connection.dst_tile!r} "
                                        f"but endpoints sit on {src_tile!r}->{dst_tile!r}"))
    return diags


def resolve_latency_bound(channel_id: str, graph: SDFG, platform: Platform,
                          mapping: PlatformMapping) -> int:
    """Latency bound for a channel's connection chain: the explicit value when
    configured, else the consumer tile's TDMA wheel (falling back to the
    producer tile's for hardware consumers)."""
    binding = mapping.channel_binding.get(channel_id, ChannelBinding())
    if binding.latency_bound is not None:
        return binding.latency_bound
    channel = graph.channel(channel_id)
    for endpoint in (channel.dst, channel.src):
        tile_id = mapping.tile_of(endpoint)
        if tile_id is not None and tile_id in platform.tile_map:
            tile = platform.tile(tile_id)
            if tile.kind == TileKind.PROCESSOR:
                return tile.tdma_wheel
    return 0
