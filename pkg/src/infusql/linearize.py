"""Turning parses into the prompt-text fragments infused into model inputs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .amr import AmrGraph, render_penman
from .conllu import DepTree
from .errors import MissingFragment

# Subject, object, and conjunction relation labels, covering both the
# Universal Dependencies tagset (nsubj, obj, obl, ...) and the legacy
# Stanford tagset (dobj, pobj) seen in older parser output.
DEFAULT_RELATIONS = frozenset(
    {"nsubj", "nsubjpass", "csubj", "obj", "dobj", "iobj", "pobj", "obl", "conj"}
)


@dataclass(frozen=True)
class RelationFilter:
    """The set of dependency relations that survive linearization."""

    allowed: frozenset[str] = field(default_factory=lambda: DEFAULT_RELATIONS)

    def __post_init__(self) -> None:
        if not self.allowed:
            raise ValueError("relation filter must not be empty")
        for label in self.allowed:
            if not label or label.lower() != label or not label.isascii():
                raise ValueError(f"relation label {label!r} must be lowercase ASCII")


class InfusionMode(enum.Enum):
    """Which linguistic fragments are concatenated with the question."""

    NONE = "none"
    SYNTAX = "syntax"
    AMR = "amr"
    SYNTAX_AND_AMR = "syntax_and_amr"

    @classmethod
    def from_string(cls, value: str) -> "InfusionMode":
        try:
            return cls(value.strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown infusion mode {value!r}; expected one of: {names}") from None

    @property
    def wants_syntax(self) -> bool:
        return self in (InfusionMode.SYNTAX, InfusionMode.SYNTAX_AND_AMR)

    @property
    def wants_amr(self) -> bool:
        return self in (InfusionMode.AMR, InfusionMode.SYNTAX_AND_AMR)


def linearize_dependency(tree: DepTree, relation_filter: RelationFilter | None = None) -> str:
    """Emit ``[row] {form}; {deprel}`` for each token whose relation passes the filter.

    Fragments follow sentence order and are joined by single spaces; the
    result is empty when nothing passes.
    """
    if relation_filter is None:
        relation_filter = RelationFilter()
    fragments = [
        f"[row] {t.form}; {t.deprel}" for t in tree.tokens if t.deprel in relation_filter.allowed
    ]
    return " ".join(fragments)


def linearize_amr(graph: AmrGraph) -> str:
    """Canonical single-line PENMAN rendering of the graph."""
    return render_penman(graph)


def compose_infusion(
    question: str,
    syntax: str | None = None,
    amr: str | None = None,
    mode: InfusionMode = InfusionMode.NONE,
) -> str:
    """Concatenate the question with its linguistic fragments for ``mode``.

    The AMR fragment is introduced by the ``[AMR]`` tag when it follows a
    syntax fragment.  Joins are single spaces and the result carries no
    trailing whitespace.
    """
    if mode.wants_syntax and syntax is None:
        raise MissingFragment(f"mode {mode.value} requires a syntax fragment")
    if mode.wants_amr and amr is None:
        raise MissingFragment(f"mode {mode.value} requires an AMR fragment")

    parts = [question]
    if mode.wants_syntax and syntax:
        parts.append(syntax)
    if mode.wants_amr and amr:
        if mode is InfusionMode.SYNTAX_AND_AMR:
            parts.append("[AMR]")
        parts.append(amr)
    return " ".join(p for p in parts if p)
