"""Exception hierarchy shared by all agreementforge modules.

Every error carries a short machine-readable ``code`` so the CLI can map
failures onto stable exit codes without string matching.
"""

from __future__ import annotations


class AgreementForgeError(Exception):
    """Base class for all library errors."""

    code = "ERROR"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(AgreementForgeError):
    """A value or model object violates a documented invariant."""

    code = "VALIDATION"


class TermError(ValidationError):
    """A Term or Triple violates its structural invariants."""

    code = "MALFORMED_TERM"


class PrefixError(AgreementForgeError):
    """Attempt to re-bind an existing prefix to a different namespace."""

    code = "PREFIX_REBIND"


class ParseError(AgreementForgeError):
    """Turtle syntax error; carries the 1-based line and column."""

    code = "SYNTAX"

    def __init__(self, message: str, line: int, column: int, *, code: str | None = None):
        super().__init__(f"{message} (line {line}, column {column})", code=code)
        self.line = line
        self.column = column


class UnsupportedConstructError(ParseError):
    """Input uses Turtle syntax outside the supported subset."""

    code = "UNSUPPORTED_CONSTRUCT"


class CapacityError(AgreementForgeError):
    """A documented size bound was exceeded."""

    code = "CAPACITY"


class StructuralError(AgreementForgeError):
    """An RDF graph does not encode a well-formed contract."""

    code = "STRUCTURE"


class BindingError(AgreementForgeError):
    """Instance bindings do not cover the contract's participants."""

    code = "BINDING"


class TemplateMismatchError(AgreementForgeError):
    """A bound individual violates its entry template."""

    code = "TEMPLATE_MISMATCH"


class UnsupportedOperatorError(AgreementForgeError):
    """A conditional uses an operator outside the evaluation registry."""

    code = "UNSUPPORTED_OPERATOR"


class EvaluationError(AgreementForgeError):
    """A conditional head cannot be discharged against the knowledge base."""

    code = "EVALUATION"


class LedgerError(AgreementForgeError):
    """A command was rejected by the ledger's validation rules."""

    code = "LEDGER"


class ChainIntegrityError(AgreementForgeError):
    """The hash chain failed verification; ``seq`` names the first bad record."""

    code = "CHAIN_INTEGRITY"

    def __init__(self, seq: int):
        super().__init__(f"ledger chain verification failed at seq {seq}")
        self.seq = seq


class NotFoundError(AgreementForgeError):
    """A competency question's anchor individual is absent from the graph."""

    code = "NOT_FOUND"


class IntegrityError(AgreementForgeError):
    """The graph violates a functional-property assumption of a query."""

    code = "INTEGRITY"
