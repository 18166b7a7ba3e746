"""Scenario files: application graph, platform, mapping and migration
defaults in one self-describing XML document, plus report emission.

Numeric attributes are parsed exactly (a bandwidth of 0.00406278 stays the
rational 203139/50000000); serialization is canonical, so saving the same
scenario twice produces identical bytes. An import shim reads the
application-graph subset of SDF3-style XML files.
"""

from __future__ import annotations

import xml.parsers.expat
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable
from xml.sax.saxutils import escape, quoteattr

from .analysis import ThroughputResult, to_frames_per_second
from .errors import ScenarioParseError, ScenarioValidationError
from .graph import Actor, ActorKind, Channel, SDFG, validate
from .migration import MigrationCandidate, MigrationSpec
from .mpsoc import (
    BIND_LOCAL,
    BIND_PREFETCH,
    ChannelBinding,
    NocConnection,
    Platform,
    PlatformMapping,
    Tile,
    TileKind,
    validate_mapping,
)
from .rational import format_rational, parse_rational

DEFAULT_CLOCK_HZ = Fraction(100_000_000)


@dataclass(frozen=True)
class Scenario:
    """Everything one analysis run needs. ``platform`` and ``mapping`` are
    optional for graph-only scenarios (the graph is then analyzed as-is)."""

    name: str
    graph: SDFG
    platform: Platform | None = None
    mapping: PlatformMapping | None = None
    defaults: MigrationSpec = field(default_factory=MigrationSpec)
    description: str = ""
    clock_hz: Fraction = DEFAULT_CLOCK_HZ


# ---------------------------------------------------------------------------
# positioned XML tree (expat keeps line/column for every element)

class _Node:
    __slots__ = ("tag", "attrib", "children", "text", "line", "column")

    def __init__(self, tag: str, attrib: dict[str, str], line: int, column: int):
        self.tag = tag
        self.attrib = attrib
        self.children: list[_Node] = []
        self.text = ""
        self.line = line
        self.column = column

    def where(self) -> tuple[int, int]:
        return self.line, self.column


def _parse_tree(text: str) -> _Node:
    parser = xml.parsers.expat.ParserCreate()
    root: list[_Node] = []
    stack: list[_Node] = []

    def start(tag, attrs):
        node = _Node(tag, dict(attrs), parser.CurrentLineNumber,
                     parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(_tag):
        stack.pop()

    def chardata(data):
        if stack:
            stack[-1].text += data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chardata
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError as exc:
        raise ScenarioParseError(str(exc), line=exc.lineno, column=exc.offset) from exc
    if not root:
        raise ScenarioParseError("empty document")
    return root[0]


class _Reader:
    """Attribute access with position-aware errors and exact number parsing."""

    def __init__(self, node: _Node, allowed: Iterable[str]):
        self.node = node
        unknown = set(node.attrib) - set(allowed)
        if unknown:
            line, column = node.where()
            raise ScenarioParseError(
                f"unknown attribute {sorted(unknown)[0]!r} on <{node.tag}>",
                line=line, column=column)

    def fail(self, message: str):
        line, column = self.node.where()
        raise ScenarioParseError(f"<{self.node.tag}>: {message}",
                                 line=line, column=column)

    def text(self, name: str, default: str | None = None) -> str:
        value = self.node.attrib.get(name, default)
        if value is None:
            self.fail(f"missing attribute {name!r}")
        return value

    def integer(self, name: str, default: int | None = None) -> int | None:
        raw = self.node.attrib.get(name)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            self.fail(f"attribute {name!r} must be an integer, got {raw!r}")

    def rational(self, name: str, default: Fraction | None = None) -> Fraction | None:
        raw = self.node.attrib.get(name)
        if raw is None:
            return default
        try:
            return parse_rational(raw)
        except ValueError:
            self.fail(f"attribute {name!r} must be a number, got {raw!r}")


def _expect_children(node: _Node, allowed: set[str]) -> None:
    for child in node.children:
        if child.tag not in allowed:
            line, column = child.where()
            raise ScenarioParseError(
                f"unknown element <{child.tag}> inside <{node.tag}>",
                line=line, column=column)


# ---------------------------------------------------------------------------
# loading

def load_scenario(path) -> Scenario:
    """Parse and validate one scenario file.

    Raises :class:`ScenarioParseError` (with line/column) for malformed or
    unknown content and :class:`ScenarioValidationError` (with the diagnostic
    list) when the parsed model violates graph or mapping invariants.
    """
    text = Path(path).read_text(encoding="utf-8")
    root = _parse_tree(text)
    if root.tag == "sdf3":
        return Scenario(name=Path(path).stem, graph=_read_sdf3(root))
    if root.tag != "scenario":
        line, column = root.where()
        raise ScenarioParseError(f"expected <scenario> root, got <{root.tag}>",
                                 line=line, column=column)
    reader = _Reader(root, ["name", "clock-hz", "auto-concurrency"])
    name = reader.text("name", Path(path).stem)
    clock = reader.rational("clock-hz", DEFAULT_CLOCK_HZ)
    _expect_children(root, {"description", "application", "platform", "mapping",
                            "defaults"})

    description = ""
    graph: SDFG | None = None
    platform: Platform | None = None
    mapping: PlatformMapping | None = None
    defaults = MigrationSpec()
    for child in root.children:
        if child.tag == "description":
            description = child.text.strip()
        elif child.tag == "application":
            graph = _read_application(child)
        elif child.tag == "platform":
            platform = _read_platform(child)
        elif child.tag == "mapping":
            mapping = _read_mapping(child)
        elif child.tag == "defaults":
            defaults = _read_defaults(child)
    if graph is None:
        line, column = root.where()
        raise ScenarioParseError("scenario has no <application>", line=line,
                                 column=column)
    if mapping is not None and platform is None:
        line, column = root.where()
        raise ScenarioParseError("scenario has a <mapping> but no <platform>",
                                 line=line, column=column)

    scenario = Scenario(name=name, graph=graph, platform=platform,
                        mapping=mapping, defaults=defaults,
                        description=description, clock_hz=clock)
    _validate_scenario(scenario)
    return scenario


def _validate_scenario(scenario: Scenario) -> None:
    diagnostics = list(validate(scenario.graph))
    if scenario.mapping is not None and scenario.platform is not None:
        diagnostics += validate_mapping(scenario.graph, scenario.platform,
                                        scenario.mapping)
    if diagnostics:
        raise ScenarioValidationError(
            "; ".join(str(d) for d in diagnostics), diagnostics=tuple(diagnostics))


def _read_application(node: _Node) -> SDFG:
    _Reader(node, ["reference-actor"])
    _expect_children(node, {"actor", "channel"})
    actors: list[Actor] = []
    channels: list[Channel] = []
    for child in node.children:
        if child.tag == "actor":
            r = _Reader(child, ["id", "exec-time", "kind", "name"])
            kind_text = r.text("kind", ActorKind.SOFTWARE.value)
            try:
                kind = ActorKind(kind_text)
            except ValueError:
                r.fail(f"unknown actor kind {kind_text!r}")
            actors.append(Actor(
                id=r.text("id"),
                exec_time=r.integer("exec-time", 0),
                kind=kind,
                name=r.text("name", "") or r.text("id"),
            ))
        else:
            r = _Reader(child, ["id", "src", "dst", "prod-rate", "cons-rate",
                                "initial-tokens", "token-size"])
            channels.append(Channel(
                id=r.text("id"),
                src=r.text("src"),
                dst=r.text("dst"),
                prod_rate=r.integer("prod-rate", 1),
                cons_rate=r.integer("cons-rate", 1),
                initial_tokens=r.integer("initial-tokens", 0),
                token_size=r.integer("token-size", 0),
            ))
    return SDFG(actors=actors, channels=channels,
                reference_actor=node.attrib.get("reference-actor"))


def _read_platform(node: _Node) -> Platform:
    _Reader(node, [])
    _expect_children(node, {"tile", "connection"})
    tiles: list[Tile] = []
    connections: list[NocConnection] = []
    for child in node.children:
        if child.tag == "tile":
            r = _Reader(child, ["id", "kind", "tdma-wheel", "clock-hz"])
            kind_text = r.text("kind", TileKind.PROCESSOR.value)
            try:
                kind = TileKind(kind_text)
            except ValueError:
                r.fail(f"unknown tile kind {kind_text!r}")
            tiles.append(Tile(
                id=r.text("id"), kind=kind,
                tdma_wheel=r.integer("tdma-wheel", 0),
                clock_hz=r.rational("clock-hz", DEFAULT_CLOCK_HZ),
            ))
        else:
            r = _Reader(child, ["id", "src-tile", "dst-tile", "latency", "bandwidth"])
            bandwidth = r.rational("bandwidth", Fraction(1))
            if bandwidth <= 0:
                r.fail("bandwidth must be positive")
            connections.append(NocConnection(
                id=r.text("id"),
                src_tile=r.text("src-tile"),
                dst_tile=r.text("dst-tile"),
                latency=r.integer("latency", 0),
                bandwidth=bandwidth,
            ))
    return Platform(tiles=tiles, connections=connections)


def _read_mapping(node: _Node) -> PlatformMapping:
    _Reader(node, [])
    _expect_children(node, {"place", "bind"})
    actor_tile: dict[str, str] = {}
    tdma_slice: dict[str, int] = {}
    bindings: dict[str, ChannelBinding] = {}
    for child in node.children:
        if child.tag == "place":
            r = _Reader(child, ["actor", "tile", "tdma-slice"])
            actor = r.text("actor")
            actor_tile[actor] = r.text("tile")
            slice_cycles = r.integer("tdma-slice")
            if slice_cycles is not None:
                tdma_slice[actor] = slice_cycles
        else:
            r = _Reader(child, ["channel", "connection", "prefetch",
                                "buffer-tokens", "alpha-src", "alpha-dst",
                                "latency-bound", "prefetch-time"])
            channel = r.text("channel")
            prefetch = r.text("prefetch", "false")
            if prefetch not in ("true", "false"):
                r.fail("prefetch must be 'true' or 'false'")
            connection = child.attrib.get("connection")
            if prefetch == "true":
                if connection is None:
                    r.fail("prefetch binding needs a connection")
                target = BIND_PREFETCH
            elif connection is not None:
                target = connection
                connection = None
            else:
                target = BIND_LOCAL
            bindings[channel] = ChannelBinding(
                target=target,
                connection=connection,
                buffer_tokens=r.integer("buffer-tokens"),
                alpha_src=r.integer("alpha-src"),
                alpha_dst=r.integer("alpha-dst"),
                latency_bound=r.integer("latency-bound"),
                prefetch_time=r.integer("prefetch-time"),
            )
    return PlatformMapping(actor_tile=actor_tile, tdma_slice=tdma_slice,
                           channel_binding=bindings)


def _read_defaults(node: _Node) -> MigrationSpec:
    r = _Reader(node, ["speedup", "prefetch-time", "hw-connection",
                       "hw-buffer-tokens", "alpha-src", "alpha-dst"])
    _expect_children(node, set())
    return MigrationSpec(
        speedup=r.rational("speedup", Fraction(2)),
        prefetch_time=r.integer("prefetch-time", 10000),
        hw_connection=node.attrib.get("hw-connection"),
        hw_buffer_tokens=r.integer("hw-buffer-tokens"),
        alpha_src=r.integer("alpha-src", 2),
        alpha_dst=r.integer("alpha-dst", 2),
    )


# ---------------------------------------------------------------------------
# SDF3 application-graph import shim

def _read_sdf3(root: _Node) -> SDFG:
    """Read the application-graph subset of an SDF3-style file: actors with
    rated ports, channels wired port to port, execution times from the actor
    properties block."""

    def find_all(node: _Node, tag: str) -> list[_Node]:
        found = []
        for child in node.children:
            if child.tag == tag:
                found.append(child)
            found.extend(find_all(child, tag))
        return found

    port_rates: dict[tuple[str, str], int] = {}
    actor_nodes = find_all(root, "actor")
    channel_nodes = find_all(root, "channel")
    exec_times: dict[str, int] = {}
    for properties in find_all(root, "actorProperties"):
        actor_name = properties.attrib.get("actor", "")
        for timing in find_all(properties, "executionTime"):
            try:
                exec_times[actor_name] = int(timing.attrib.get("time", "0"))
            except ValueError:
                line, column = timing.where()
                raise ScenarioParseError("executionTime must be an integer",
                                         line=line, column=column)
    token_sizes: dict[str, int] = {}
    for properties in find_all(root, "channelProperties"):
        channel_name = properties.attrib.get("channel", "")
        for size in find_all(properties, "tokenSize"):
            token_sizes[channel_name] = int(size.attrib.get("sz", "0"))

    actors = []
    for node in actor_nodes:
        name = node.attrib.get("name")
        if name is None:
            line, column = node.where()
            raise ScenarioParseError("actor without name", line=line, column=column)
        for port in node.children:
            if port.tag == "port":
                try:
                    rate = int(port.attrib.get("rate", "1"))
                except ValueError:
                    line, column = port.where()
                    raise ScenarioParseError("port rate must be an integer",
                                             line=line, column=column)
                port_rates[(name, port.attrib.get("name", ""))] = rate
        actors.append(Actor(id=name, exec_time=exec_times.get(name, 0)))

    channels = []
    for node in channel_nodes:
        r = _Reader(node, ["name", "srcActor", "srcPort", "dstActor", "dstPort",
                           "initialTokens", "size"])
        src, dst = r.text("srcActor"), r.text("dstActor")
        name = r.text("name")
        channels.append(Channel(
            id=name, src=src, dst=dst,
            prod_rate=port_rates.get((src, r.text("srcPort", "")), 1),
            cons_rate=port_rates.get((dst, r.text("dstPort", "")), 1),
            initial_tokens=r.integer("initialTokens", 0),
            token_size=token_sizes.get(name, 0),
        ))
    graph = SDFG(actors=actors, channels=channels)
    diagnostics = validate(graph)
    if diagnostics:
        raise ScenarioValidationError(
            "; ".join(str(d) for d in diagnostics), diagnostics=tuple(diagnostics))
    return graph


# ---------------------------------------------------------------------------
# saving

def save_scenario(scenario: Scenario, path) -> None:
    """Write the canonical text form: elements sorted by id, attributes in a
    fixed order, defaults omitted. Saving the same value twice is
    byte-identical."""
    Path(path).write_text(scenario_to_text(scenario), encoding="utf-8")


def scenario_to_text(scenario: Scenario) -> str:
    out: list[str] = []
    head = [f"name={quoteattr(scenario.name)}"]
    if scenario.clock_hz != DEFAULT_CLOCK_HZ:
        head.append(f"clock-hz={quoteattr(format_rational(scenario.clock_hz))}")
    out.append(f"<scenario {' '.join(head)}>")
    if scenario.description:
        out.append(f"  <description>{escape(scenario.description)}</description>")

    graph = scenario.graph
    ref = (f" reference-actor={quoteattr(graph.reference_actor)}"
           if graph.reference_actor else "")
    out.append(f"  <application{ref}>")
    for actor in sorted(graph.actors, key=lambda a: a.id):
        attrs = [f"id={quoteattr(actor.id)}",
                 f"exec-time={quoteattr(str(actor.exec_time))}"]
        if actor.kind != ActorKind.SOFTWARE:
            attrs.append(f"kind={quoteattr(actor.kind.value)}")
        if actor.name != actor.id:
            attrs.append(f"name={quoteattr(actor.name)}")
        out.append(f"    <actor {' '.join(attrs)}/>")
    for channel in sorted(graph.channels, key=lambda c: c.id):
        attrs = [f"id={quoteattr(channel.id)}",
                 f"src={quoteattr(channel.src)}",
                 f"dst={quoteattr(channel.dst)}"]
        if channel.prod_rate != 1:
            attrs.append(f"prod-rate={quoteattr(str(channel.prod_rate))}")
        if channel.cons_rate != 1:
            attrs.append(f"cons-rate={quoteattr(str(channel.cons_rate))}")
        if channel.initial_tokens:
            attrs.append(f"initial-tokens={quoteattr(str(channel.initial_tokens))}")
        if channel.token_size:
            attrs.append(f"token-size={quoteattr(str(channel.token_size))}")
        out.append(f"    <channel {' '.join(attrs)}/>")
    out.append("  </application>")

    if scenario.platform is not None:
        out.append("  <platform>")
        for tile in sorted(scenario.platform.tiles, key=lambda t: t.id):
            attrs = [f"id={quoteattr(tile.id)}"]
            if tile.kind != TileKind.PROCESSOR:
                attrs.append(f"kind={quoteattr(tile.kind.value)}")
            if tile.tdma_wheel:
                attrs.append(f"tdma-wheel={quoteattr(str(tile.tdma_wheel))}")
            if tile.clock_hz != DEFAULT_CLOCK_HZ:
                attrs.append(f"clock-hz={quoteattr(format_rational(tile.clock_hz))}")
            out.append(f"    <tile {' '.join(attrs)}/>")
        for conn in sorted(scenario.platform.connections, key=lambda c: c.id):
            attrs = [f"id={quoteattr(conn.id)}",
                     f"src-tile={quoteattr(conn.src_tile)}",
                     f"dst-tile={quoteattr(conn.dst_tile)}"]
            if conn.latency:
                attrs.append(f"latency={quoteattr(str(conn.latency))}")
            attrs.append(f"bandwidth={quoteattr(format_rational(conn.bandwidth))}")
            out.append(f"    <connection {' '.join(attrs)}/>")
        out.append("  </platform>")

    if scenario.mapping is not None:
        out.append("  <mapping>")
        mapping = scenario.mapping
        for actor_id in sorted(mapping.actor_tile):
            attrs = [f"actor={quoteattr(actor_id)}",
                     f"tile={quoteattr(mapping.actor_tile[actor_id])}"]
            if actor_id in mapping.tdma_slice:
                attrs.append(f"tdma-slice={quoteattr(str(mapping.tdma_slice[actor_id]))}")
            out.append(f"    <place {' '.join(attrs)}/>")
        for channel_id in sorted(mapping.channel_binding):
            binding = mapping.channel_binding[channel_id]
            attrs = [f"channel={quoteattr(channel_id)}"]
            if binding.is_prefetch:
                attrs.append('prefetch="true"')
                attrs.append(f"connection={quoteattr(binding.connection)}")
            elif not binding.is_local:
                attrs.append(f"connection={quoteattr(binding.target)}")
            for label, value in (("buffer-tokens", binding.buffer_tokens),
                                 ("alpha-src", binding.alpha_src),
                                 ("alpha-dst", binding.alpha_dst),
                                 ("latency-bound", binding.latency_bound),
                                 ("prefetch-time", binding.prefetch_time)):
                if value is not None:
                    attrs.append(f"{label}={quoteattr(str(value))}")
            out.append(f"    <bind {' '.join(attrs)}/>")
        out.append("  </mapping>")

    defaults = scenario.defaults
    attrs = []
    if defaults.speedup != Fraction(2):
        attrs.append(f"speedup={quoteattr(format_rational(defaults.speedup))}")
    if defaults.prefetch_time != 10000:
        attrs.append(f"prefetch-time={quoteattr(str(defaults.prefetch_time))}")
    if defaults.hw_connection is not None:
        attrs.append(f"hw-connection={quoteattr(defaults.hw_connection)}")
    if defaults.hw_buffer_tokens is not None:
        attrs.append(f"hw-buffer-tokens={quoteattr(str(defaults.hw_buffer_tokens))}")
    if defaults.alpha_src != 2:
        attrs.append(f"alpha-src={quoteattr(str(defaults.alpha_src))}")
    if defaults.alpha_dst != 2:
        attrs.append(f"alpha-dst={quoteattr(str(defaults.alpha_dst))}")
    if attrs:
        out.append(f"  <defaults {' '.join(attrs)}/>")
    out.append("</scenario>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class ExplorationReport:
    scenario: str
    clock_hz: Fraction
    baseline: ThroughputResult
    candidates: tuple[MigrationCandidate, ...] = ()


def emit_report(report: ExplorationReport, format: str = "text") -> bytes:
    """Render an exploration as a deterministic byte stream: a readable table
    or CSV with header actor,fps_before,fps_after,gain_fps."""
    fps_before = to_frames_per_second(report.baseline, report.clock_hz)
    if format == "csv":
        lines = ["actor,fps_before,fps_after,gain_fps"]
        for candidate in report.candidates:
            if candidate.error is None:
                lines.append(f"{candidate.actor},{fps_before},"
                             f"{candidate.fps_after},{candidate.gain_fps}")
            else:
                lines.append(f"{candidate.actor},{fps_before},,")
        return ("\n".join(lines) + "\n").encode()
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = [f"scenario: {report.scenario}",
             f"throughput without migration (f/s): {fps_before}"]
    if report.candidates:
        lines.append("")
        width = max(len("actor"), *(len(c.actor) for c in report.candidates))
        lines.append(f"{'actor':<{width}}  with migration (f/s)  gain (f/s)")
        for candidate in report.candidates:
            if candidate.error is None:
                lines.append(f"{candidate.actor:<{width}}  "
                             f"{str(candidate.fps_after):>20}  "
                             f"{str(candidate.gain_fps):>10}")
            else:
                lines.append(f"{candidate.actor:<{width}}  failed: {candidate.error}")
    return ("\n".join(lines) + "\n").encode()


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (e.g. ``mjpeg_base``)."""
    from importlib.resources import files

    resource = files("sdfmig") / "scenarios" / f"{name}.xml"
    with_path = Path(str(resource))
    if not with_path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return with_path


def list_bundled_scenarios() -> list[str]:
    from importlib.resources import files

    folder = files("sdfmig") / "scenarios"
    return sorted(p.stem for p in Path(str(folder)).glob("*.xml"))
