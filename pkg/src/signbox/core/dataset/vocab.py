"""The 36-class label vocabulary."""

from __future__ import annotations

import string
from collections.abc import Iterator
from dataclasses import dataclass
from functools import cached_property

from signbox.core.errors import RecordingValidationError

DEFAULT_LABELS: tuple[str, ...] = (
    *string.ascii_uppercase,
    *(str(n) for n in range(1, 11)),
)


@dataclass(frozen=True)
class LabelVocab:
    """Ordered class names with an index <-> name bijection.

    The default vocabulary is letters A-Z followed by digits 1-10, so "A" is
    class 0 and "10" is class 35.
    """

    names: tuple[str, ...] = DEFAULT_LABELS

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("Vocabulary names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._lookup

    @cached_property
    def _lookup(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def index(self, name: str) -> int:
        """Class index of a label name.

        Raises:
            RecordingValidationError: If the name is not in the vocabulary.
        """
        try:
            return self._lookup[name]
        except KeyError:
            raise RecordingValidationError(f"Unknown label {name!r}") from None

    def name(self, index: int) -> str:
        if not 0 <= index < len(self.names):
            raise RecordingValidationError(f"Label index {index} out of range")
        return self.names[index]


VOCAB = LabelVocab()
