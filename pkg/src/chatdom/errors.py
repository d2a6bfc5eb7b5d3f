"""Exception hierarchy.

Each family maps to a distinct CLI exit code (see ``chatdom.cli``).
"""


class ChatdomError(Exception):
    """Base class for all package errors."""


class InputError(ChatdomError):
    """Unreadable or malformed input data (transcripts, annotations, model files)."""


class TranscriptParseError(InputError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class EmptyTranscriptError(TranscriptParseError):
    def __init__(self, source: str | None = None):
        super().__init__("empty transcript", source=source)


class AnnotationError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ConfigurationError(ChatdomError):
    """Invalid lexicon, run configuration, or option combination."""


class ModelingError(ChatdomError):
    """Model fitting or scoring cannot proceed."""


class SingleClassError(ModelingError):
    pass


class RankDeficientError(ModelingError):
    def __init__(self, columns: list[str]):
        self.columns = list(columns)
        super().__init__("rank-deficient design; collinear columns: " + ", ".join(self.columns))


class ColumnMismatchError(ModelingError):
    def __init__(self, missing: list[str], extra: list[str]):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        parts = []
        if self.missing:
            parts.append("missing columns: " + ", ".join(self.missing))
        if self.extra:
            parts.append("extra columns: " + ", ".join(self.extra))
        super().__init__("; ".join(parts) or "column mismatch")


class UnresolvedLabelsError(ModelingError):
    def __init__(self, keys):
        self.keys = sorted(keys)
        shown = ", ".join(f"{g}#{s}" for g, s in self.keys[:10])
        more = f" (+{len(self.keys) - 10} more)" if len(self.keys) > 10 else ""
        super().__init__(
            f"{len(self.keys)} ED label disagreement(s) are unresolved: {shown}{more}. "
            "Run `chatdom reconcile` to supply consensus values, or pass --fallback-coder-a."
        )


class UndefinedKappaError(ChatdomError):
    """Chance agreement is 1, so kappa has a zero denominator."""

    def __init__(self, percent_agreement: float):
        self.percent_agreement = percent_agreement
        super().__init__(
            f"Cohen's kappa undefined (expected agreement = 1); percent agreement = {percent_agreement}"
        )
