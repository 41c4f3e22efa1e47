"""Exception types shared across the package.

Every error that user input can trigger derives from HanfixError so the
CLI can map them to a data-error exit code in one place.
"""


class HanfixError(Exception):
    """Base class for all hanfix domain errors."""


class InvalidSyllable(HanfixError):
    """String is not a parseable pinyin syllable."""

    def __init__(self, text: str, reason: str = ""):
        self.text = text
        self.reason = reason
        msg = f"invalid pinyin syllable: {text!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class MissingPinyin(HanfixError):
    """A lexicon character has no reading in the pinyin table."""

    def __init__(self, char: str, context: str = ""):
        self.char = char
        msg = f"no pinyin reading for character {char!r}"
        if context:
            msg += f" in {context}"
        super().__init__(msg)


class MalformedLine(HanfixError):
    """An input file line does not match the expected format."""

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class WordTooLong(HanfixError):
    """Lexicon word exceeds the supported 4-character maximum."""

    def __init__(self, surface: str):
        self.surface = surface
        super().__init__(f"word too long (max 4 chars): {surface!r}")


class LengthMismatch(HanfixError):
    """Source/target (or prediction) sequences differ in length."""

    def __init__(self, detail: str):
        super().__init__(f"length mismatch: {detail}")


class SequenceTooLong(HanfixError):
    """Input sentence exceeds the model's max_len."""

    def __init__(self, length: int, max_len: int):
        self.length = length
        self.max_len = max_len
        super().__init__(f"sequence length {length} exceeds max_len {max_len}")


class CheckpointError(HanfixError):
    """Checkpoint file is corrupt, or its version/shapes do not match."""


class LexiconFormatError(HanfixError):
    """Serialized lexicon file is corrupt or has a wrong version."""
