"""Synchronous dataflow graph model: actors, rated channels, consistency.

The graph objects are immutable; every transformation produces a new graph.
Execution times and rates are plain Python integers, so arbitrarily large
cycle counts are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .errors import InconsistentGraphError


class ActorKind(str, Enum):
    SOFTWARE = "software"
    HARDWARE = "hardware"
    # Actors introduced by graph transformations (connection actors, memory
    # actors, batch gates) rather than by the application itself.
    INFRASTRUCTURE = "infrastructure"


@dataclass(frozen=True)
class Actor:
    """A task node: fires by consuming on all inputs, then producing after
    ``exec_time`` clock cycles. ``exec_time`` 0 means the firing completes
    instantaneously."""

    id: str
    exec_time: int
    kind: ActorKind = ActorKind.SOFTWARE
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class Channel:
    """A token queue between two actors.

    ``prod_rate`` tokens are appended per source firing, ``cons_rate`` removed
    per destination firing. ``token_size`` is in bytes; 0 marks channels whose
    tokens carry no payload (back-edges, self-loops).
    """

    id: str
    src: str
    dst: str
    prod_rate: int = 1
    cons_rate: int = 1
    initial_tokens: int = 0
    token_size: int = 0

    @property
    def is_self_loop(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True, eq=False)
class SDFG:
    """An immutable synchronous dataflow graph.

    ``reference_actor`` names the actor whose firings are counted to measure
    iterations; when ``None`` the analysis picks the default (the repetition-
    vector-1 actor with the smallest id). Graphs compare structurally: the
    declaration order of actors and channels does not matter.
    """

    actors: tuple[Actor, ...] = ()
    channels: tuple[Channel, ...] = ()
    reference_actor: str | None = None

    def __init__(self, actors: Iterable[Actor] = (), channels: Iterable[Channel] = (),
                 reference_actor: str | None = None):
        object.__setattr__(self, "actors", tuple(actors))
        object.__setattr__(self, "channels", tuple(channels))
        object.__setattr__(self, "reference_actor", reference_actor)

    def __eq__(self, other):
        if not isinstance(other, SDFG):
            return NotImplemented
        return (sorted(self.actors, key=lambda a: a.id)
                == sorted(other.actors, key=lambda a: a.id)
                and sorted(self.channels, key=lambda c: c.id)
                == sorted(other.channels, key=lambda c: c.id)
                and self.reference_actor == other.reference_actor)

    @cached_property
    def actor_map(self) -> dict[str, Actor]:
        return {a.id: a for a in self.actors}

    @cached_property
    def channel_map(self) -> dict[str, Channel]:
        return {c.id: c for c in self.channels}

    @cached_property
    def inputs(self) -> dict[str, tuple[Channel, ...]]:
        """Actor id -> channels consumed by that actor (self-loops included)."""
        table: dict[str, list[Channel]] = {a.id: [] for a in self.actors}
        for c in self.channels:
            if c.dst in table:
                table[c.dst].append(c)
        return {k: tuple(v) for k, v in table.items()}

    @cached_property
    def outputs(self) -> dict[str, tuple[Channel, ...]]:
        """Actor id -> channels produced by that actor (self-loops included)."""
        table: dict[str, list[Channel]] = {a.id: [] for a in self.actors}
        for c in self.channels:
            if c.src in table:
                table[c.src].append(c)
        return {k: tuple(v) for k, v in table.items()}

    def actor(self, actor_id: str) -> Actor:
        return self.actor_map[actor_id]

    def channel(self, channel_id: str) -> Channel:
        return self.channel_map[channel_id]

    def has_self_loop(self, actor_id: str) -> bool:
        return any(c.is_self_loop for c in self.outputs.get(actor_id, ()))

    def with_actors(self, actors: Iterable[Actor]) -> "SDFG":
        return replace(self, actors=tuple(actors))

    def with_channels(self, channels: Iterable[Channel]) -> "SDFG":
        return replace(self, channels=tuple(channels))

    def with_exec_times(self, exec_times: Mapping[str, int]) -> "SDFG":
        """Copy of the graph with the listed actors' execution times replaced."""
        actors = tuple(
            replace(a, exec_time=exec_times[a.id]) if a.id in exec_times else a
            for a in self.actors
        )
        return replace(self, actors=actors)

    def unique_id(self, stem: str) -> str:
        """A fresh id based on ``stem`` that collides with no actor or channel."""
        taken = self.actor_map.keys() | self.channel_map.keys()
        if stem not in taken:
            return stem
        n = 2
        while f"{stem}_{n}" in taken:
            n += 1
        return f"{stem}_{n}"


@dataclass(frozen=True)
class RepetitionVector:
    """Smallest positive firing counts per actor that return every channel to
    its initial token count."""

    entries: Mapping[str, int]

    def __getitem__(self, actor_id: str) -> int:
        return self.entries[actor_id]

    def __iter__(self):
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    @property
    def total_firings(self) -> int:
        return sum(self.entries.values())


@dataclass(frozen=True)
class Diagnostic:
    """One structural violation found by :func:`validate`."""

    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}"


DANGLING_ENDPOINT = "DanglingEndpoint"
ZERO_RATE = "ZeroRate"
NEGATIVE_TOKENS = "NegativeTokens"
NEGATIVE_EXEC_TIME = "NegativeExecTime"
DUPLICATE_ID = "DuplicateId"
BAD_REFERENCE = "BadReference"
INCONSISTENT = "Inconsistent"


def compute_repetition_vector(graph: SDFG) -> RepetitionVector:
    """Solve the balance equations q(src)*prod = q(dst)*cons for the smallest
    positive integer vector.

    Each weakly-connected component is normalized independently, so the
    whole-graph vector is collectively coprime. Raises
    :class:`InconsistentGraphError` when only the zero solution exists.
    """
    ratios: dict[str, Fraction] = {}
    adjacency: dict[str, list[Channel]] = {a.id: [] for a in graph.actors}
    for c in graph.channels:
        if c.src in adjacency and c.dst in adjacency:
            adjacency[c.src].append(c)
            adjacency[c.dst].append(c)

    bad: list[str] = []
    components: list[list[str]] = []
    for seed in graph.actors:
        if seed.id in ratios:
            continue
        ratios[seed.id] = Fraction(1)
        component = [seed.id]
        stack = [seed.id]
        while stack:
            here = stack.pop()
            for c in adjacency[here]:
                if c.prod_rate <= 0 or c.cons_rate <= 0:
                    continue  # reported by validate(), not solvable here
                other = c.dst if here == c.src else c.src
                implied = (ratios[here] * c.prod_rate / c.cons_rate
                           if here == c.src else
                           ratios[here] * c.cons_rate / c.prod_rate)
                if other not in ratios:
                    ratios[other] = implied
                    component.append(other)
                    stack.append(other)
                elif ratios[other] != implied and c.id not in bad:
                    bad.append(c.id)
        components.append(component)

    # Re-check every channel: DFS only detects mismatches on tree-closing
    # edges of the traversal order it happened to take.
    for c in graph.channels:
        if c.prod_rate <= 0 or c.cons_rate <= 0:
            continue
        if c.src not in ratios or c.dst not in ratios:
            continue
        if ratios[c.src] * c.prod_rate != ratios[c.dst] * c.cons_rate:
            if c.id not in bad:
                bad.append(c.id)
    if bad:
        raise InconsistentGraphError(
            f"balance equations unsolvable, offending channels: {', '.join(sorted(bad))}",
            channels=tuple(sorted(bad)),
        )

    entries: dict[str, int] = {}
    for component in components:
        scale = math.lcm(*(ratios[a].denominator for a in component))
        counts = {a: int(ratios[a] * scale) for a in component}
        shrink = math.gcd(*counts.values())
        for a in component:
            entries[a] = counts[a] // shrink
    return RepetitionVector(entries={a.id: entries[a.id] for a in graph.actors})


def validate(graph: SDFG) -> list[Diagnostic]:
    """Check all structural invariants; empty result means the graph is well
    formed and consistent."""
    diags: list[Diagnostic] = []
    seen_actor_ids: set[str] = set()
    for a in graph.actors:
        if a.id in seen_actor_ids:
            diags.append(Diagnostic(DUPLICATE_ID, a.id, "duplicate actor id"))
        seen_actor_ids.add(a.id)
        if a.exec_time < 0:
            diags.append(Diagnostic(NEGATIVE_EXEC_TIME, a.id,
                                    f"execution time {a.exec_time} is negative"))
    seen_channel_ids: set[str] = set()
    structurally_ok = True
    for c in graph.channels:
        if c.id in seen_channel_ids:
            diags.append(Diagnostic(DUPLICATE_ID, c.id, "duplicate channel id"))
        seen_channel_ids.add(c.id)
        for endpoint in (c.src, c.dst):
            if endpoint not in seen_actor_ids:
                diags.append(Diagnostic(DANGLING_ENDPOINT, c.id,
                                        f"references unknown actor {endpoint!r}"))
                structurally_ok = False
        if c.prod_rate < 1 or c.cons_rate < 1:
            diags.append(Diagnostic(ZERO_RATE, c.id,
                                    f"rates must be >= 1, got {c.prod_rate}/{c.cons_rate}"))
            structurally_ok = False
        if c.initial_tokens < 0:
            diags.append(Diagnostic(NEGATIVE_TOKENS, c.id,
                                    f"initial tokens {c.initial_tokens} is negative"))
    if graph.reference_actor is not None and graph.reference_actor not in seen_actor_ids:
        diags.append(Diagnostic(BAD_REFERENCE, graph.reference_actor,
                                "reference actor is not in the graph"))
    if structurally_ok:
        try:
            compute_repetition_vector(graph)
        except InconsistentGraphError as exc:
            for channel_id in exc.channels:
                diags.append(Diagnostic(INCONSISTENT, channel_id,
                                        "balance equation has no positive solution"))
    return diags


def disable_auto_concurrency(graph: SDFG) -> SDFG:
    """Give every actor without a self-loop a rate-1 self-loop with one token,
    so no actor ever has two overlapping firings. Idempotent."""
    channels = list(graph.channels)
    for a in graph.actors:
        if not graph.has_self_loop(a.id):
            channels.append(Channel(
                id=graph.unique_id(f"{a.id}__self"),
                src=a.id, dst=a.id,
                prod_rate=1, cons_rate=1, initial_tokens=1,
            ))
    return graph.with_channels(channels)
