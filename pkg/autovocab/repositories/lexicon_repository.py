from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Union

from django.conf import settings

from ..exceptions import MissingResourceError, SchemaError
from ..models import Lexicon, LexiconEntry, PartOfSpeech, Vocabulary

logger = logging.getLogger(__name__)

_TRUE = ('1', 'true', 'yes')
_FALSE = ('0', 'false', 'no')


class LexiconRepository:
    """Tab-separated lexicon: ``word<TAB>pos<TAB>lemma<TAB>valid``; ``#`` starts a comment."""

    @staticmethod
    def parse(text: str, source: str = '<lexicon>') -> Lexicon:
        entries = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split('\t')]
            if len(fields) != 4:
                raise SchemaError(f'{source} line {number}: expected 4 tab-separated fields, got {len(fields)}')
            word, pos, lemma, valid = fields
            if not word or word != word.lower() or not lemma or lemma != lemma.lower():
                raise SchemaError(f'{source} line {number}: word and lemma must be non-empty lowercase')
            if pos not in (p.value for p in PartOfSpeech):
                raise SchemaError(f'{source} line {number}: unknown part of speech {pos!r}')
            if valid.lower() not in _TRUE + _FALSE:
                raise SchemaError(f'{source} line {number}: valid flag must be 0/1, got {valid!r}')
            if word in entries:
                raise SchemaError(f'{source} line {number}: duplicate entry {word!r}')
            entries[word] = LexiconEntry(word=word, pos=PartOfSpeech(pos), lemma=lemma, valid=valid.lower() in _TRUE)
        lexicon = Lexicon(entries)
        logger.debug('lexicon %s: %d entries, %d nouns', source, len(lexicon), len(lexicon.nouns()))
        return lexicon

    @staticmethod
    def load(path: Optional[Union[str, Path]] = None) -> Lexicon:
        return _load_cached(str(path or settings.AVS['LEXICON_PATH']))

    @staticmethod
    def read_labels(path: Union[str, Path]) -> Vocabulary:
        """Labels file: UTF-8, one label per line, blank lines ignored."""
        path = Path(path)
        if not path.is_file():
            raise MissingResourceError(f'labels file not found: {path}')
        lines: List[str] = path.read_text(encoding='utf-8').splitlines()
        return Vocabulary.from_iterable(line for line in lines if line.strip())

    @staticmethod
    def write_labels(vocabulary: Vocabulary, path: Union[str, Path]) -> None:
        Path(path).write_text(''.join(tag + '\n' for tag in vocabulary), encoding='utf-8')


@lru_cache(maxsize=8)
def _load_cached(path: str) -> Lexicon:
    file = Path(path)
    if not file.is_file():
        raise MissingResourceError(f'lexicon not found: {file}')
    return LexiconRepository.parse(file.read_text(encoding='utf-8'), str(file))
