from __future__ import annotations

import logging
from typing import Iterable, List, Optional

import numpy as np
from nltk.tokenize import RegexpTokenizer

from ..models import (
    Caption,
    CaptionSource,
    Lexicon,
    PartOfSpeech,
    SmapBatch,
    SmapParams,
    SyntheticSpace,
    Vocabulary,
)
from .embedding_service import EmbeddingService
from .smap_service import SmapService

logger = logging.getLogger(__name__)

# Words, or any single non-space non-letter character; the latter break noun runs.
_tokenizer = RegexpTokenizer(r"[a-z]+|[^\sa-z]")


class CaptioningService:
    """Caption parsing into tags, point-caption decoding and vocabulary fusion."""

    @staticmethod
    def tokenize(text: str) -> List[str]:
        return _tokenizer.tokenize(text.lower())

    @staticmethod
    def lemmatize(token: str, lexicon: Lexicon) -> Optional[str]:
        """Singular form of a valid noun token; None for anything else."""
        entry = lexicon.lookup(token)
        if entry is None or entry.pos != PartOfSpeech.NOUN:
            return None
        lemma = lexicon.get(entry.lemma)
        if not (entry.valid and lemma.valid):
            return None
        return lemma.word

    @staticmethod
    def caption_to_tags(caption: Caption, lexicon: Lexicon, allow_compound: bool = True) -> Vocabulary:
        """Nouns of a caption, singularised and checked against the lexicon.

        With ``allow_compound`` a run of two or more consecutive nouns also
        yields the space-joined compound (emitted before its constituents).
        """
        tags: List[str] = []
        run: List[str] = []

        def flush():
            if not run:
                return
            if allow_compound and len(run) >= 2:
                tags.append(' '.join(run))
            tags.extend(run)
            run.clear()

        for token in CaptioningService.tokenize(caption.text):
            lemma = CaptioningService.lemmatize(token, lexicon)
            if lemma is None:
                flush()
                continue
            run.append(lemma)
        flush()
        vocab = Vocabulary.from_iterable(tags)
        logger.debug('caption_to_tags(%r) -> %s', caption.text, list(vocab))
        return vocab

    @staticmethod
    def captions_to_vocabulary(captions: Iterable[Caption], lexicon: Lexicon, allow_compound: bool = True) -> Vocabulary:
        return CaptioningService.merge_vocabularies(
            CaptioningService.caption_to_tags(c, lexicon, allow_compound) for c in captions
        )

    @staticmethod
    def decode_point_caption(
        pooled: np.ndarray,
        space: SyntheticSpace,
        lexicon: Lexicon,
        k: int,
        empty: bool = False,
    ) -> Vocabulary:
        """The k lexicon nouns closest to a pooled feature, best first,
        ties broken alphabetically."""
        if empty:
            return Vocabulary()
        nouns = lexicon.nouns()
        if not nouns or k < 1:
            return Vocabulary()
        text = EmbeddingService.encode_texts(space, nouns).values
        scores = EmbeddingService.similarity_matrix(np.asarray(pooled, dtype=np.float64)[None, :], text)[0]
        # nouns are sorted, so position is the alphabetical tie-break
        order = np.lexsort((np.arange(len(nouns)), -scores))
        return Vocabulary(tuple(nouns[i] for i in order[:k]))

    @staticmethod
    def compose_caption(vocabulary: Vocabulary, index: int) -> Optional[Caption]:
        """A point caption listing the decoded tags, parseable back into them."""
        if not len(vocabulary):
            return None
        return Caption(text=', '.join(vocabulary), source=CaptionSource.POINT, source_index=index)

    @staticmethod
    def caption_point_cloud(
        batch: SmapBatch,
        params: SmapParams,
        space: SyntheticSpace,
        lexicon: Lexicon,
        k: int,
        use_pe: bool = True,
    ) -> List[Caption]:
        """Pool every mask and decode the non-empty ones into point captions."""
        pooled, empty = SmapService.smap_forward(batch, params, use_pe=use_pe)
        captions = []
        for j in range(pooled.shape[0]):
            tags = CaptioningService.decode_point_caption(pooled[j], space, lexicon, k, empty=bool(empty[j]))
            caption = CaptioningService.compose_caption(tags, j)
            if caption is not None:
                captions.append(caption)
        logger.info('point captioner: %d masks, %d captions', pooled.shape[0], len(captions))
        return captions

    @staticmethod
    def merge_vocabularies(vocabularies: Iterable[Vocabulary]) -> Vocabulary:
        merged = {}
        for vocab in vocabularies:
            for tag in vocab:
                merged.setdefault(tag, None)
        return Vocabulary(tuple(merged))
