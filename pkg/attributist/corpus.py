"""
attributist.corpus
~~~~~~~~~~~~~~~~~~
Loads a corpus of plain-text plays described by a manifest.

A manifest is a UTF-8 CSV file with a header row::

    path,title,author,date,source,encoding
    texts/burlador.txt,El burlador de Sevilla,unknown,1612-1617,BVC,
    texts/vergonzoso.txt,El vergonzoso en palacio,Tirso,1621,BVC,latin-1

`date`, `source` and `encoding` may be left empty (the last column may be
left out altogether). Relative paths are resolved against the manifest's
directory. Blank lines and lines starting with `#` are skipped. The author
`unknown` marks the texts whose authorship is to be attributed.

Every text is preprocessed before use: decoded to Unicode (NFC), Windows
line breaks replaced by `\\n` and lines holding only a verse number removed.
Speaker names and stage directions are kept::

    manifest = load_manifest("corpus/manifest.csv")
    corpus = ingest(manifest)
"""

from __future__ import annotations

import csv
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Union

import regex

from attributist.errors import IngestError, ManifestError, PreprocessError
from attributist.features import FeatureKind, FeatureVector, tokenize, vectorize
from attributist.parallel import parallel_map

if TYPE_CHECKING:
    from collections.abc import Iterator

logger = logging.getLogger(__name__)

# Reserved author label of the texts to attribute
UNKNOWN_AUTHOR = "unknown"

MANIFEST_FIELDS = ("path", "title", "author", "date", "source", "encoding")
REQUIRED_FIELDS = ("path", "title", "author")

_VERSE_NUMBER_RE = regex.compile(r"\s*\d+\s*")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    title: str
    author: str
    date: Optional[str] = None
    source: Optional[str] = None
    encoding: Optional[str] = None

    @property
    def is_unknown(self) -> bool:
        return self.author == UNKNOWN_AUTHOR


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self.entries)

    @property
    def authors(self) -> tuple[str, ...]:
        """Labeled authors in order of first appearance."""
        return tuple(dict.fromkeys(e.author for e in self.entries if not e.is_unknown))

    @property
    def unknown(self) -> tuple[ManifestEntry, ...]:
        return tuple(e for e in self.entries if e.is_unknown)


@dataclass(frozen=True)
class Document:
    """
    One preprocessed text.

    Build it with `Document.from_text` so that `token_count` always matches
    the tokenizer.
    """

    title: str
    author_label: str
    text: str
    token_count: int
    date: Optional[str] = None
    source: Optional[str] = None
    _vectors: dict[FeatureKind, FeatureVector] = field(
        default_factory=dict, compare=False, repr=False
    )

    @classmethod
    def from_text(
        cls,
        title: str,
        author_label: str,
        text: str,
        date: Optional[str] = None,
        source: Optional[str] = None,
    ) -> Document:
        return cls(
            title=title,
            author_label=author_label,
            text=text,
            token_count=len(tokenize(text)),
            date=date,
            source=source,
        )

    @property
    def name(self) -> str:
        return self.title

    @property
    def is_unknown(self) -> bool:
        return self.author_label == UNKNOWN_AUTHOR

    def vector(self, kind: FeatureKind) -> FeatureVector:
        """Feature vector of the text, computed once per kind."""
        if kind not in self._vectors:
            self._vectors[kind] = vectorize(self, kind)
        return self._vectors[kind]


# Ordered list of documents, in manifest order
Corpus = list[Document]


# --- Manifest


def load_manifest(path: Union[str, Path]) -> Manifest:
    """
    Parse and validate a manifest file.

    Blank lines and lines whose first non-blank character is `#` are
    skipped before CSV parsing, so a path starting with `#` must be quoted.

    :param :path Path to the manifest CSV
    :raises ManifestError: missing manifest or text file, duplicate title,
        empty author, missing column
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    base = path.parent

    with open(path, encoding="utf-8-sig", newline="") as f:
        lines = [line for line in f if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    reader.fieldnames = [h.strip() for h in reader.fieldnames or []]
    missing = [name for name in REQUIRED_FIELDS if name not in reader.fieldnames]
    if missing:
        raise ManifestError(f"{path}: missing column(s) {', '.join(missing)}")

    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for entry_no, raw_row in enumerate(reader, start=1):
        row = {name: (raw_row.get(name) or "").strip() for name in MANIFEST_FIELDS}
        title, author = row["title"], row["author"]
        if not title:
            raise ManifestError(f"{path} entry {entry_no}: empty title")
        if not author:
            raise ManifestError(f"{path} entry {entry_no}: {title}: empty author")
        if title in seen:
            raise ManifestError(f"{path} entry {entry_no}: duplicate title {title!r}")
        seen.add(title)

        text_path = Path(row["path"])
        if not text_path.is_absolute():
            text_path = base / text_path
        if not text_path.is_file():
            raise ManifestError(f"{path} entry {entry_no}: file not found: {text_path}")

        entries.append(
            ManifestEntry(
                path=text_path,
                title=title,
                author=author,
                date=row.get("date") or None,
                source=row.get("source") or None,
                encoding=row.get("encoding") or None,
            )
        )

    logger.info("Loaded manifest %s with %d entries", path, len(entries))
    return Manifest(tuple(entries))


def write_manifest(manifest: Manifest, path: Union[str, Path]) -> None:
    """Write `manifest` with paths relative to the manifest's directory."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        # a leading `#` would read back as a comment line
        quoted = csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_ALL)
        writer.writerow(MANIFEST_FIELDS)
        for e in manifest:
            try:
                entry_path = e.path.relative_to(path.parent)
            except ValueError:
                entry_path = e.path
            row_writer = quoted if entry_path.as_posix().startswith("#") else writer
            row_writer.writerow(
                [
                    entry_path.as_posix(),
                    e.title,
                    e.author,
                    e.date or "",
                    e.source or "",
                    e.encoding or "",
                ]
            )


# --- Preprocessing


def decode(raw: bytes, encoding_hint: Optional[str] = None) -> str:
    """Decode under `encoding_hint` first, then under UTF-8."""
    encodings = [enc for enc in (encoding_hint, "utf-8-sig") if enc]
    for encoding in encodings:
        try:
            return raw.decode(encoding)
        except UnicodeDecodeError:
            continue
        except LookupError as err:
            raise PreprocessError(f"unknown encoding {encoding!r}") from err
    raise PreprocessError(f"undecodable bytes under {', '.join(encodings)}")


def clean_text(text: str) -> str:
    """
    Compose to NFC, turn every line break into a single `\\n` and drop the
    lines holding nothing but a verse number.

    NFC may lengthen a text: composition exclusions such as U+0958 decompose
    into a base letter plus a combining mark.
    """
    text = unicodedata.normalize("NFC", text)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    return "\n".join(
        line for line in text.split("\n") if not _VERSE_NUMBER_RE.fullmatch(line)
    )


def preprocess(raw: Union[bytes, str], encoding_hint: Optional[str] = None) -> str:
    """
    Turn raw file content into preprocessed text.

    :param :raw Bytes as read from disk (an already decoded string is accepted
        too, so preprocessing can be re-applied)
    :param :encoding_hint Encoding to try before UTF-8
    """
    text = raw if isinstance(raw, str) else decode(raw, encoding_hint)
    return clean_text(text)


def load_document(entry: ManifestEntry) -> Document:
    try:
        raw = entry.path.read_bytes()
        text = preprocess(raw, entry.encoding)
    except PreprocessError as err:
        raise IngestError(entry.title, str(err)) from err
    except OSError as err:
        raise IngestError(entry.title, f"cannot read {entry.path}: {err}") from err

    doc = Document.from_text(
        title=entry.title,
        author_label=entry.author,
        text=text,
        date=entry.date,
        source=entry.source,
    )
    logger.debug("Ingested %r (%s): %d tokens", doc.title, doc.author_label, doc.token_count)
    return doc


def ingest(manifest: Manifest, jobs: Optional[int] = None) -> Corpus:
    """One Document per manifest entry, in manifest order."""
    corpus = parallel_map(load_document, manifest.entries, jobs)
    logger.info("Ingested %d documents", len(corpus))
    return corpus
