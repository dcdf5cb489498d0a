"""Exception taxonomy shared across the package.

Invalid arguments and out-of-range requests raise the builtin ValueError;
the classes here cover conditions a caller may want to branch on.
"""


class NoDataError(Exception):
    """Not enough data to compute a result (distinct from bad input)."""


class IngestionError(Exception):
    """Input file rejected during ingestion (bad header, jitter, etc.)."""


class RuleParseError(Exception):
    """Rule XML is not well-formed. Carries 1-based line/column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, column)
        super().__init__(message)


class RuleSemanticError(Exception):
    """Rule XML is well-formed but violates the rule schema."""


class SchemaMismatchError(Exception):
    """Feature vector or dataset does not match the declared schema."""


class IntegrityError(Exception):
    """Cross-reference or invariant violation in stored/serialized data."""
