"""CoNLL-U reading, writing, and the verbose per-token tree dump."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .errors import BadHead, MalformedLine, MissingId

N_COLUMNS = 10


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True)
class DepToken:
    """One token of a dependency parse.

    ``index`` is 1-based sentence position; ``head`` is the 1-based index of
    the syntactic head, with 0 marking the sentence root.
    """

    index: int
    form: str
    lemma: str
    upos: str
    deprel: str
    head: int


@dataclass(frozen=True)
class DepTree:
    """A parsed sentence: ordered tokens plus the id aligning it with a corpus."""

    sentence_id: str
    tokens: tuple[DepToken, ...]

    def token(self, index: int) -> DepToken:
        """Return the token at 1-based ``index``."""
        return self.tokens[index - 1]

    def children(self, index: int) -> list[DepToken]:
        """Tokens whose head is ``index``, in sentence order."""
        return [t for t in self.tokens if t.head == index]

    def root(self) -> DepToken:
        return next(t for t in self.tokens if t.head == 0)


def _validate_tree(sentence_id: str, tokens: list[DepToken], line_of: dict[int, int]) -> DepTree:
    n = len(tokens)
    for tok in tokens:
        line = line_of[tok.index]
        if tok.head < 0 or tok.head > n:
            raise BadHead(
                f"line {line}: head {tok.head} out of range for {n}-token sentence {sentence_id!r}"
            )
        if tok.head == tok.index:
            raise BadHead(f"line {line}: token {tok.index} is its own head in {sentence_id!r}")
    roots = [t for t in tokens if t.head == 0]
    if len(roots) != 1:
        where = line_of[tokens[0].index] if tokens else 0
        raise BadHead(f"line {where}: sentence {sentence_id!r} has {len(roots)} root tokens, expected 1")
    # every token must reach the root by following heads
    for tok in tokens:
        seen = set()
        cur = tok.index
        while cur != 0:
            if cur in seen:
                raise BadHead(
                    f"line {line_of[tok.index]}: head cycle through token {cur} in {sentence_id!r}"
                )
            seen.add(cur)
            cur = tokens[cur - 1].head
    return DepTree(sentence_id=sentence_id, tokens=tuple(tokens))


def read_conllu(text: str) -> list[DepTree]:
    """Parse CoNLL-U text into validated dependency trees.

    Sentences are blank-line separated; each needs a ``# sent_id = <id>``
    comment and 10 tab-separated columns per token line.  Multi-word token
    ranges (ids like ``3-4``) are skipped.  Raises MalformedLine, BadHead,
    or MissingId, each naming the offending 1-based line number.
    """
    trees: list[DepTree] = []
    sent_id: str | None = None
    tokens: list[DepToken] = []
    line_of: dict[int, int] = {}
    block_start = 0

    def flush(line_no: int) -> None:
        nonlocal sent_id, tokens, line_of
        if sent_id is None and not tokens:
            return
        if sent_id is None:
            raise MissingId(f"line {block_start}: sentence block has no '# sent_id =' comment")
        if not tokens:
            raise MalformedLine(f"line {block_start}: sentence {sent_id!r} has no token lines")
        trees.append(_validate_tree(sent_id, tokens, line_of))
        sent_id, tokens, line_of = None, [], {}

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush(line_no)
            continue
        if not tokens and sent_id is None:
            block_start = line_no
        if line.startswith("#"):
            if line[1:].strip().startswith("sent_id"):
                _, _, value = line.partition("=")
                sent_id = _nfc(value.strip())
            continue
        fields = line.split("\t")
        if len(fields) != N_COLUMNS:
            raise MalformedLine(f"line {line_no}: expected {N_COLUMNS} columns, got {len(fields)}")
        if "-" in fields[0]:
            continue  # multi-word token range
        try:
            index = int(fields[0])
        except ValueError:
            raise MalformedLine(f"line {line_no}: token index {fields[0]!r} is not an integer") from None
        if index != len(tokens) + 1:
            raise MalformedLine(f"line {line_no}: token index {index} breaks 1..n ordering")
        form = _nfc(fields[1])
        if not form:
            raise MalformedLine(f"line {line_no}: empty token form")
        try:
            head = int(fields[6])
        except ValueError:
            raise MalformedLine(f"line {line_no}: head {fields[6]!r} is not an integer") from None
        tokens.append(
            DepToken(
                index=index,
                form=form,
                lemma=_nfc(fields[2]),
                upos=_nfc(fields[3]),
                deprel=_nfc(fields[7]),
                head=head,
            )
        )
        line_of[index] = line_no
    flush(len(text.split("\n")) + 1)
    return trees


def write_conllu(trees: list[DepTree]) -> str:
    """Serialize trees back to CoNLL-U (unused columns rendered as ``_``)."""
    blocks = []
    for tree in trees:
        lines = [f"# sent_id = {tree.sentence_id}"]
        for t in tree.tokens:
            lines.append(
                "\t".join(
                    [str(t.index), t.form, t.lemma, t.upos, "_", "_", str(t.head), t.deprel, "_", "_"]
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def render_verbose(tree: DepTree) -> str:
    """Render the verbose one-line-per-token dump of a dependency tree.

    Each line is ``form deprel head-form head-upos [children-forms]``; the
    root token lists itself as its head and its relation prints as ROOT.
    """
    lines = []
    for t in tree.tokens:
        head_tok = t if t.head == 0 else tree.token(t.head)
        deprel = "ROOT" if t.head == 0 else t.deprel
        kids = ", ".join(c.form for c in tree.children(t.index))
        lines.append(f"{t.form} {deprel} {head_tok.form} {head_tok.upos} [{kids}]")
    return "\n".join(lines)
