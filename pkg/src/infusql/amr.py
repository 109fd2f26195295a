"""PENMAN notation: parsing AMR graphs and rendering them canonically.

The reader accepts the conventional multi-line, indented notation; the
canonical renderer emits a single line with exactly one space between
tokens, which is the form infused into prompts.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

from .errors import DuplicateVariable, UnbalancedParens, UndeclaredReference

# Values an edge may point at: a variable name, a symbol or quoted-string
# constant (quotes kept in the stored string), or a number.
Target = str | int | float

_VARIABLE_RE = re.compile(r"^[a-z][0-9]*$")
_NUMBER_RE = re.compile(r"^[+-]?\d+(?:\.\d+)?$")


@dataclass
class AmrGraph:
    """A rooted semantic graph: concepts on variables, role-labelled edges.

    ``nodes`` maps variable names to concept labels in declaration order;
    ``edges`` holds (source variable, role, target) triples in source order.
    A string target that names a declared variable is a variable reference,
    anything else is a constant.
    """

    top: str
    nodes: dict[str, str]
    edges: list[tuple[str, str, Target]] = field(default_factory=list)
    graph_id: str | None = None

    def validate(self) -> None:
        """Check variable uniqueness, reference resolution, and reachability."""
        if self.top not in self.nodes:
            raise UndeclaredReference(f"top {self.top!r} is not a declared variable")
        for src, role, tgt in self.edges:
            if src not in self.nodes:
                raise UndeclaredReference(f"edge source {src!r} is not declared")
        reachable = {self.top}
        frontier = [self.top]
        out: dict[str, list[Target]] = {}
        for src, _, tgt in self.edges:
            out.setdefault(src, []).append(tgt)
        while frontier:
            var = frontier.pop()
            for tgt in out.get(var, []):
                if isinstance(tgt, str) and tgt in self.nodes and tgt not in reachable:
                    reachable.add(tgt)
                    frontier.append(tgt)
        unreachable = set(self.nodes) - reachable
        if unreachable:
            names = ", ".join(sorted(unreachable))
            raise UndeclaredReference(f"variables not reachable from top: {names}")

    def structurally_equal(self, other: "AmrGraph") -> bool:
        """Equality up to edge order (ids are ignored)."""
        return (
            self.top == other.top
            and self.nodes == other.nodes
            and sorted(self.edges, key=_edge_key) == sorted(other.edges, key=_edge_key)
        )


def _edge_key(edge: tuple[str, str, Target]) -> tuple[str, str, str]:
    src, role, tgt = edge
    return (src, role, repr(tgt))


class _Scanner:
    """Tokenizer over one graph block, tracking character offsets."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def next_token(self) -> tuple[str, int] | None:
        text, n = self.text, len(self.text)
        while self.pos < n and text[self.pos].isspace():
            self.pos += 1
        if self.pos >= n:
            return None
        start = self.pos
        ch = text[start]
        if ch in "()/":
            self.pos += 1
            return ch, start
        if ch == '"':
            end = text.find('"', start + 1)
            if end < 0:
                raise UnbalancedParens(f"offset {start}: unterminated string constant")
            self.pos = end + 1
            return text[start : end + 1], start
        end = start
        while end < n and not text[end].isspace() and text[end] not in '()"':
            end += 1
        self.pos = end
        return text[start:end], start


def _parse_block(text: str, graph_id: str | None) -> AmrGraph:
    scanner = _Scanner(text)
    nodes: dict[str, str] = {}
    edges: list[tuple[str, str, Target]] = []

    def expect(token: str) -> int:
        got = scanner.next_token()
        if got is None:
            raise UnbalancedParens(f"offset {len(text)}: expected {token!r}, found end of block")
        value, offset = got
        if value != token:
            raise UnbalancedParens(f"offset {offset}: expected {token!r}, found {value!r}")
        return offset

    def parse_node(open_offset: int) -> str:
        got = scanner.next_token()
        if got is None:
            raise UnbalancedParens(f"offset {open_offset}: unclosed '('")
        var, var_offset = got
        if not _VARIABLE_RE.match(var):
            raise UnbalancedParens(f"offset {var_offset}: {var!r} is not a valid variable name")
        if var in nodes:
            raise DuplicateVariable(f"offset {var_offset}: variable {var!r} declared twice")
        expect("/")
        got = scanner.next_token()
        if got is None or got[0] in "()/":
            where = got[1] if got else len(text)
            raise UnbalancedParens(f"offset {where}: missing concept for variable {var!r}")
        nodes[var] = got[0]
        while True:
            got = scanner.next_token()
            if got is None:
                raise UnbalancedParens(f"offset {open_offset}: unclosed '('")
            token, offset = got
            if token == ")":
                return var
            if not token.startswith(":") or len(token) < 2:
                raise UnbalancedParens(f"offset {offset}: expected a :role or ')', found {token!r}")
            role = token[1:]
            got = scanner.next_token()
            if got is None:
                raise UnbalancedParens(f"offset {offset}: role :{role} has no target")
            value, value_offset = got
            if value == "(":
                child = parse_node(value_offset)
                edges.append((var, role, child))
            elif value == ")":
                raise UnbalancedParens(f"offset {value_offset}: role :{role} has no target")
            else:
                edges.append((var, role, _parse_target(value, value_offset, nodes)))

    open_offset = expect("(")
    top = parse_node(open_offset)
    trailing = scanner.next_token()
    if trailing is not None:
        raise UnbalancedParens(f"offset {trailing[1]}: trailing {trailing[0]!r} after graph")
    graph = AmrGraph(top=top, nodes=nodes, edges=edges, graph_id=graph_id)
    graph.validate()
    return graph


def _parse_target(token: str, offset: int, declared: dict[str, str]) -> Target:
    if token.startswith('"'):
        return token
    if _NUMBER_RE.match(token):
        return float(token) if "." in token else int(token)
    if token in declared:
        return token  # re-entrancy to an earlier declaration
    if _VARIABLE_RE.match(token):
        raise UndeclaredReference(f"offset {offset}: {token!r} does not refer to an earlier variable")
    return token  # symbol constant such as 'imperative' or '-'


def read_penman(text: str) -> list[AmrGraph]:
    """Parse blank-line separated PENMAN blocks into validated graphs.

    A ``# ::id <id>`` comment line attaches an id to the following graph.
    Offsets in error messages count characters within the graph body of the
    offending block (comment lines excluded).
    """
    text = unicodedata.normalize("NFC", text)
    graphs: list[AmrGraph] = []
    block_lines: list[str] = []
    graph_id: str | None = None

    def flush() -> None:
        nonlocal block_lines, graph_id
        body = "\n".join(block_lines).strip()
        if body:
            graphs.append(_parse_block(body, graph_id))
        block_lines, graph_id = [], None

    for raw in text.split("\n"):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.lstrip().startswith("#"):
            match = re.match(r"#\s*::id\s+(\S+)", line.lstrip())
            if match:
                graph_id = match.group(1)
            continue
        block_lines.append(line)
    flush()
    return graphs


def _format_target(target: Target) -> str:
    if isinstance(target, float):
        return str(target)
    return str(target)


def render_penman(graph: AmrGraph) -> str:
    """Render a graph as canonical single-line PENMAN.

    Depth-first from the top; a variable is expanded in full at its first
    visit and printed as a bare name afterwards.  Exactly one space between
    tokens, no newlines.
    """
    out_edges: dict[str, list[tuple[str, Target]]] = {}
    for src, role, tgt in graph.edges:
        out_edges.setdefault(src, []).append((role, tgt))
    expanded: set[str] = set()

    def emit(var: str) -> str:
        expanded.add(var)
        parts = [f"({var} / {graph.nodes[var]}"]
        for role, tgt in out_edges.get(var, []):
            if isinstance(tgt, str) and tgt in graph.nodes:
                rendered = tgt if tgt in expanded else emit(tgt)
            else:
                rendered = _format_target(tgt)
            parts.append(f":{role} {rendered}")
        return " ".join(parts) + ")"

    return emit(graph.top)
