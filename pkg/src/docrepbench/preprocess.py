"""Text preprocessing: tag stripping, tokenization, stopwords, stemming.

Pipeline for one document: strip markup tags (optional), split into
sentences on .!? and tokenize to lowercase ASCII-letter runs, drop
stopwords, stem with the Porter algorithm. Everything here is pure and
deterministic; documents can be processed in parallel.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import RawDocument
from .stemmer import porter_stem

_TAG_RE = re.compile(r"<[^>]*(?:>|$)")
_ENTITY_RE = re.compile(r"&(amp|lt|gt|quot|#\d+);")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]")
_TOKEN_RE = re.compile(r"[A-Za-z]+")

_NAMED_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"'}


@dataclass
class PreprocessConfig:
    """Settings for the preprocessing pipeline.

    stopword_path None means the bundled 127-word English list; an empty
    string disables stopword removal entirely.
    """

    stopword_path: str | None = None
    strip_html: bool = False
    min_token_len: int = 1


@dataclass
class ProcessedDocument:
    """A labeled document as sentences of lowercase word stems."""

    id: str
    label: str
    sentences: list[list[str]] = field(default_factory=list)

    def stems(self) -> list[str]:
        """All stems in document order, sentence boundaries dropped."""
        return [stem for sentence in self.sentences for stem in sentence]


def strip_tags(text: str) -> str:
    """Remove <...> spans and decode the basic character entities.

    A '<' without a closing '>' greedily drops the rest of the string.
    Entities are decoded after tag removal, so encoded angle brackets
    survive as literal text.
    """

    def _decode(match: re.Match) -> str:
        name = match.group(1)
        if name.startswith("#"):
            return chr(int(name[1:]))
        return _NAMED_ENTITIES[name]

    return _ENTITY_RE.sub(_decode, _TAG_RE.sub("", text))


def segment_and_tokenize(text: str, min_token_len: int = 1) -> list[list[str]]:
    """Split on sentence punctuation and keep lowercase letter runs."""
    sentences = []
    for chunk in _SENTENCE_SPLIT_RE.split(text):
        tokens = [
            t.lower() for t in _TOKEN_RE.findall(chunk) if len(t) >= min_token_len
        ]
        if tokens:
            sentences.append(tokens)
    return sentences


def remove_stopwords(tokens: list[str], stoplist: set[str]) -> list[str]:
    """Order-preserving filter; stoplist entries are lowercase."""
    return [t for t in tokens if t not in stoplist]


def load_stopwords(path: str | Path | None = None) -> set[str]:
    """Read a stopword file: UTF-8, one word per line, '#' comments ignored.

    With no path the bundled English list is used.
    """
    if path is None:
        text = (
            resources.files("docrepbench").joinpath("data/stopwords.txt")
            .read_text(encoding="utf-8")
        )
    else:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"stopword file not found: {p}")
        text = p.read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.add(word.lower())
    return words


def preprocess_document(
    doc: RawDocument,
    cfg: PreprocessConfig | None = None,
    stoplist: set[str] | None = None,
) -> ProcessedDocument:
    """Run the full pipeline on one raw document.

    Stage order: tag stripping (if enabled), sentence segmentation and
    tokenization, stopword removal, Porter stemming. Sentences emptied by
    stopword removal are dropped; a document may come out with no
    sentences at all.
    """
    cfg = cfg or PreprocessConfig()
    if stoplist is None:
        stoplist = set() if cfg.stopword_path == "" else load_stopwords(cfg.stopword_path)
    text = doc.text
    if cfg.strip_html:
        text = strip_tags(text)
    sentences = []
    for tokens in segment_and_tokenize(text, cfg.min_token_len):
        kept = remove_stopwords(tokens, stoplist)
        if kept:
            sentences.append([porter_stem(t) for t in kept])
    return ProcessedDocument(id=doc.id, label=doc.label, sentences=sentences)


def preprocess_corpus(
    docs: list[RawDocument], cfg: PreprocessConfig | None = None
) -> list[ProcessedDocument]:
    """Preprocess a document list, loading the stopword set once."""
    cfg = cfg or PreprocessConfig()
    stoplist = set() if cfg.stopword_path == "" else load_stopwords(cfg.stopword_path)
    return [preprocess_document(d, cfg, stoplist) for d in docs]
