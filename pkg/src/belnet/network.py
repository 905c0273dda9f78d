"""Network definition: parsing, structural validation, topological order.

File format (line oriented, ``#`` starts a comment):

    net NAME
    var X1 : a b
    edge X1 -> X2
    table X2 | X1 kind=m
      {a} | {a} : 0.166667
    end

Root tables are declared as ``table X1 | kind=m`` with rows ``{a} : 0.4``.
Missing table rows default to zero mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NetworkParseError
from .tables import (
    CondCommonalityTable,
    CondMassTable,
    Frame,
    ValidationReport,
    parse_subset_label,
)


@dataclass
class Node:
    """One variable with its frame, ordered parents/successors, and table."""

    name: str
    frame: Frame
    parents: tuple[str, ...] = ()
    successors: tuple[str, ...] = ()
    table: CondMassTable | CondCommonalityTable | None = None


@dataclass
class Network:
    """A directed acyclic model over frames, one conditional table per node."""

    name: str
    nodes: dict[str, Node] = field(default_factory=dict)
    edges: tuple[tuple[str, str], ...] = ()

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.nodes)

    def node(self, name: str) -> Node:
        return self.nodes[name]

    def frame(self, name: str) -> Frame:
        return self.nodes[name].frame


def parse_network(text: str, name_hint: str = "net") -> Network:
    """Parse a network definition; raises NetworkParseError with a line number."""
    net = Network(name_hint)
    edges: list[tuple[str, str]] = []
    pending: dict[str, tuple[int, tuple[str, ...], str, dict]] = {}
    cur: dict | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if cur is not None:
            if line == "end":
                _finish_table(net, pending, cur)
                cur = None
            else:
                _parse_table_row(net, cur, line, lineno)
            continue
        if line.startswith("net "):
            net.name = line[4:].strip()
        elif line.startswith("var "):
            _parse_var(net, line, lineno)
        elif line.startswith("edge "):
            edges.append(_parse_edge(net, line, lineno))
        elif line.startswith("table"):
            cur = _parse_table_header(net, pending, line, lineno)
        else:
            raise NetworkParseError(f"unrecognized directive {line.split()[0]!r}", lineno)
    if cur is not None:
        raise NetworkParseError(f"table {cur['child']!r} not closed with 'end'", cur["line"])

    net.edges = tuple(edges)
    for child, node in net.nodes.items():
        node.parents = tuple(p for p, c in edges if c == child)
        node.successors = tuple(c for p, c in edges if p == child)
    _check_acyclic(net)
    for name, node in net.nodes.items():
        if node.table is None:
            raise NetworkParseError(f"no table declared for variable {name!r}")
        declared = pending[name][1]
        if set(declared) != set(node.parents):
            raise NetworkParseError(
                f"table for {name!r} conditions on ({', '.join(declared) or 'nothing'}) "
                f"but its incoming edges are ({', '.join(node.parents) or 'none'})",
                pending[name][0],
            )
        # the table's declared parent order is authoritative
        node.parents = declared
    return net


def load_network(path: str) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_network(text, name_hint=stem)


def _parse_var(net: Network, line: str, lineno: int) -> None:
    body = line[4:]
    if ":" not in body:
        raise NetworkParseError("var line needs ': value value ...'", lineno)
    name, values = body.split(":", 1)
    name = name.strip()
    labels = tuple(values.split())
    if not name:
        raise NetworkParseError("missing variable name", lineno)
    if name in net.nodes:
        raise NetworkParseError(f"duplicate variable {name!r}", lineno)
    if len(labels) < 2:
        raise NetworkParseError(f"variable {name!r} needs at least two values", lineno)
    try:
        frame = Frame(name, labels)
    except ValueError as exc:
        raise NetworkParseError(str(exc), lineno) from None
    net.nodes[name] = Node(name, frame)


def _parse_edge(net: Network, line: str, lineno: int) -> tuple[str, str]:
    body = line[5:]
    if "->" not in body:
        raise NetworkParseError("edge line needs 'A -> B'", lineno)
    a, b = (p.strip() for p in body.split("->", 1))
    for v in (a, b):
        if v not in net.nodes:
            raise NetworkParseError(f"undeclared variable {v!r}", lineno)
    if a == b:
        raise NetworkParseError(f"cycle: self-edge on {a!r}", lineno)
    return a, b


def _parse_table_header(net: Network, pending: dict, line: str, lineno: int) -> dict:
    body = line[5:].strip()
    kind = "m"
    if "kind=" in body:
        body, _, kindpart = body.rpartition("kind=")
        kind = kindpart.strip()
        if kind not in ("m", "k"):
            raise NetworkParseError(f"kind must be 'm' or 'k', got {kind!r}", lineno)
    else:
        raise NetworkParseError("table header needs kind=m or kind=k", lineno)
    if "|" in body:
        childpart, parentpart = body.split("|", 1)
        parents = tuple(parentpart.split())
    else:
        childpart, parents = body, ()
    child = childpart.strip()
    if not child:
        raise NetworkParseError("missing table variable", lineno)
    if child not in net.nodes:
        raise NetworkParseError(f"undeclared variable {child!r}", lineno)
    for p in parents:
        if p not in net.nodes:
            raise NetworkParseError(f"undeclared variable {p!r}", lineno)
    if child in pending:
        raise NetworkParseError(f"duplicate table for {child!r}", lineno)
    cur = {"child": child, "parents": parents, "kind": kind, "line": lineno, "entries": {}}
    pending[child] = (lineno, parents, kind, cur["entries"])
    return cur


def _parse_table_row(net: Network, cur: dict, line: str, lineno: int) -> None:
    if ":" not in line:
        raise NetworkParseError("table row needs ': value'", lineno)
    left, valuepart = line.rsplit(":", 1)
    try:
        value = float(valuepart)
    except ValueError:
        raise NetworkParseError(f"bad numeric value {valuepart.strip()!r}", lineno) from None
    child_frame = net.nodes[cur["child"]].frame
    parents = cur["parents"]
    if "|" in left:
        childpart, parentpart = left.split("|", 1)
        plits = parentpart.split()
    else:
        childpart, plits = left, []
    if len(plits) != len(parents):
        raise NetworkParseError(
            f"row has {len(plits)} conditioning subsets, table declares {len(parents)}", lineno
        )
    try:
        child = parse_subset_label(childpart.strip(), child_frame)
        cfg = tuple(
            parse_subset_label(lit, net.nodes[p].frame) for lit, p in zip(plits, parents)
        )
    except Exception as exc:
        raise NetworkParseError(str(exc), lineno) from None
    key = (cfg, child)
    if key in cur["entries"]:
        raise NetworkParseError(f"duplicate row for ({left.strip()})", lineno)
    cur["entries"][key] = value


def _finish_table(net: Network, pending: dict, cur: dict) -> None:
    child = cur["child"]
    frames = tuple(net.nodes[p].frame for p in cur["parents"])
    cls = CondMassTable if cur["kind"] == "m" else CondCommonalityTable
    net.nodes[child].table = cls.from_entries(net.nodes[child].frame, frames, cur["entries"])


def _check_acyclic(net: Network) -> None:
    order = _kahn_order(net)
    if len(order) != len(net.nodes):
        stuck = [n for n in net.nodes if n not in order]
        raise NetworkParseError(f"cycle involving {', '.join(sorted(stuck))}")


def _kahn_order(net: Network) -> list[str]:
    indeg = {n: 0 for n in net.nodes}
    for _, c in net.edges:
        indeg[c] += 1
    # stable by declaration order
    ready = [n for n in net.nodes if indeg[n] == 0]
    order: list[str] = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for p, c in net.edges:
            if p == n:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
    return order


def topological_order(net: Network) -> tuple[str, ...]:
    """Parents-first node order, stable with respect to declaration order."""
    order = _kahn_order(net)
    if len(order) != len(net.nodes):
        raise NetworkParseError("network contains a cycle")
    # prefer declaration order among nodes whose parents are all placed
    placed: set[str] = set()
    result: list[str] = []
    remaining = list(net.nodes)
    while remaining:
        for n in remaining:
            if all(p in placed for p in net.nodes[n].parents):
                placed.add(n)
                result.append(n)
                remaining.remove(n)
                break
        else:
            raise NetworkParseError("network contains a cycle")
    return tuple(result)


def edge_index(net: Network, parent: str, child: str) -> int:
    """1-based position of child among parent's successors (declaration order)."""
    try:
        return net.nodes[parent].successors.index(child) + 1
    except ValueError:
        raise ValueError(f"no edge {parent} -> {child}") from None


def validate_structure(net: Network) -> ValidationReport:
    """Report cycles and directly-connected parent pairs."""
    report = ValidationReport()
    if len(_kahn_order(net)) != len(net.nodes):
        report.errors.append("network contains a cycle")
    edge_set = set(net.edges)
    for name, node in net.nodes.items():
        ps = node.parents
        for i, u in enumerate(ps):
            for v in ps[i + 1 :]:
                if (u, v) in edge_set or (v, u) in edge_set:
                    report.errors.append(
                        f"parents {u!r} and {v!r} of {name!r} are directly connected"
                    )
    return report
