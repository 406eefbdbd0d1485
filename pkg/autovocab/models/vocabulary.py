from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from ..exceptions import EmptyInputError, SchemaError


class CaptionSource(str, Enum):
    IMAGE = 'image'
    POINT = 'point'


class PartOfSpeech(str, Enum):
    NOUN = 'noun'
    OTHER = 'other'


@dataclass(frozen=True)
class Caption:
    text: str
    source: CaptionSource = CaptionSource.IMAGE
    source_index: int = 0

    def __post_init__(self):
        if not str(self.text or '').strip():
            raise EmptyInputError('caption text is empty after trimming')
        object.__setattr__(self, 'source', CaptionSource(self.source))
        object.__setattr__(self, 'source_index', int(self.source_index))


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    pos: PartOfSpeech
    lemma: str
    valid: bool

    @property
    def is_noun(self) -> bool:
        return self.pos == PartOfSpeech.NOUN


@dataclass(frozen=True)
class Lexicon:
    """Word list driving POS tagging, lemmatisation and dictionary checks."""
    entries: Dict[str, LexiconEntry]

    def __post_init__(self):
        for word, entry in self.entries.items():
            lemma = self.entries.get(entry.lemma)
            if lemma is None:
                raise SchemaError(f'lemma {entry.lemma!r} of {word!r} is not a lexicon entry')
            if lemma.lemma != lemma.word:
                raise SchemaError(f'lemma {entry.lemma!r} of {word!r} is not its own lemma')

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, word: str) -> Optional[LexiconEntry]:
        return self.entries.get(word)

    def lookup(self, token: str) -> Optional[LexiconEntry]:
        """Entry for a token: direct hit first, then the trailing "es"/"s" rule."""
        entry = self.entries.get(token)
        if entry is not None:
            return entry
        for suffix in ('es', 's'):
            if token.endswith(suffix) and len(token) > len(suffix):
                stem = self.entries.get(token[:-len(suffix)])
                if stem is not None:
                    return stem
        return None

    def nouns(self) -> List[str]:
        """Valid singular nouns (words that are their own lemma), sorted."""
        return sorted(
            word for word, entry in self.entries.items()
            if entry.is_noun and entry.valid and entry.lemma == word
        )


@dataclass(frozen=True)
class Vocabulary:
    """Ordered, duplicate-free list of lowercase tags."""
    tags: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        tags = tuple(self.tags)
        if len(set(tags)) != len(tags):
            raise SchemaError('vocabulary tags must be unique')
        for tag in tags:
            if not tag or tag != tag.lower() or tag != tag.strip():
                raise SchemaError(f'vocabulary tag {tag!r} is not a trimmed lowercase string')
        object.__setattr__(self, 'tags', tags)

    @classmethod
    def from_iterable(cls, tags: Iterable[str]) -> 'Vocabulary':
        """Canonicalise and dedupe, keeping first occurrences."""
        seen = {}
        for tag in tags:
            text = ' '.join(str(tag).lower().split())
            if text and text not in seen:
                seen[text] = None
        return cls(tuple(seen))

    def __iter__(self) -> Iterator[str]:
        return iter(self.tags)

    def __len__(self) -> int:
        return len(self.tags)

    def __getitem__(self, index: int) -> str:
        return self.tags[index]

    def __contains__(self, tag: str) -> bool:
        return tag in self.tags

    def index(self, tag: str) -> int:
        return self.tags.index(tag)

    def require_non_empty(self, what: str = 'vocabulary') -> None:
        if not self.tags:
            raise EmptyInputError(f'{what} is empty')
