import csv

import pytest
from hypothesis import settings

from attributist.corpus import Document
from attributist.synthetic import (
    DEFAULT_SEED,
    desk_corpus,
    near_duplicate_corpus,
    to_corpus,
    write_corpus,
)

# No per-example deadline
settings.register_profile("attributist", deadline=None)
settings.load_profile("attributist")


def make_doc(title, text, author="someone"):
    """Helper building a Document straight from text"""
    return Document.from_text(title, author, text)


@pytest.fixture
def corpus_files(tmp_path):
    """
    Fixture writing text files plus a manifest into `tmp_path`.

    Called with `(relative path, title, author, content)` tuples; `content`
    may be str (written as UTF-8) or bytes.
    """

    def write(rows, header=("path", "title", "author", "date", "source")):
        manifest = tmp_path / "manifest.csv"
        with open(manifest, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for rel_path, title, author, content in rows:
                text_path = tmp_path / rel_path
                text_path.parent.mkdir(parents=True, exist_ok=True)
                if isinstance(content, str):
                    content = content.encode("utf-8")
                text_path.write_bytes(content)
                writer.writerow([rel_path, title, author, "", ""][: len(header)])
        return manifest

    return write


@pytest.fixture(scope="session")
def desk_texts():
    return desk_corpus(DEFAULT_SEED)


@pytest.fixture(scope="session")
def desk_docs(desk_texts):
    return to_corpus(desk_texts)


@pytest.fixture(scope="session")
def near_duplicate_docs():
    return to_corpus(near_duplicate_corpus(DEFAULT_SEED))


@pytest.fixture(scope="session")
def desk_manifest(tmp_path_factory, desk_texts):
    """Manifest of the desk corpus on disk, shared by the CLI tests"""
    return write_corpus(desk_texts, tmp_path_factory.mktemp("desk"))
