"""Exception types raised across the toolkit.

Every error carries a human-readable message that names the offending
location (line number, character offset, or identifier) where the input
format makes that meaningful.
"""


class InfusqlError(Exception):
    """Base class for all toolkit errors."""


# --- CoNLL-U ingestion ---

class MalformedLine(InfusqlError):
    """A CoNLL-U token line has the wrong shape (column count, bad index, empty form)."""


class BadHead(InfusqlError):
    """Head index out of range, self-referential, cyclic, or root count != 1."""


class MissingId(InfusqlError):
    """A sentence block has no ``# sent_id =`` comment."""


# --- PENMAN ingestion ---

class UnbalancedParens(InfusqlError):
    """Parenthesis mismatch in a PENMAN block."""


class DuplicateVariable(InfusqlError):
    """The same variable name is introduced twice in one graph."""


class UndeclaredReference(InfusqlError):
    """A bare variable token does not refer to an earlier declaration."""


# --- linearization ---

class MissingFragment(InfusqlError):
    """A fragment required by the requested infusion mode was not supplied."""


# --- schema loading / serialization ---

class BadIndex(InfusqlError):
    """A table or column index in a tables.json document is out of range."""


class DuplicateDb(InfusqlError):
    """The same db_id appears twice in a tables.json document."""


class BadRanking(InfusqlError):
    """A supplied relevance ranking is not a permutation of the schema."""


# --- prompt building ---

class MissingParse(InfusqlError):
    """A parse required by the infusion mode is absent under the strict policy."""


# --- SQL parsing / evaluation ---

class UnparsableSql(InfusqlError):
    """The statement is outside the supported SQL subset or syntactically broken."""


class UnknownColumn(InfusqlError):
    """A column reference does not resolve against the database schema."""


class GoldExecutionFailed(InfusqlError):
    """The gold query itself failed to execute (a corpus defect, not a model miss)."""


class DbMissing(InfusqlError):
    """The SQLite database file for a db_id does not exist."""


# --- metrics / reporting ---

class EmptyRun(InfusqlError):
    """aggregate() was called with no outcomes."""


class ZeroBaseline(InfusqlError):
    """Relative variation is undefined for a zero baseline."""


class BadQuota(InfusqlError):
    """Requested sample size exceeds the population."""


class EmptyStratum(InfusqlError):
    """A hardness stratum required by the computation has no members."""
