"""Dataset ingestion and vocabulary files.

The distributed corpora are CSV files: every field double-quoted with
embedded quotes doubled, the first field a 1-based class index, the
remaining fields text (title, body, ...) that may contain the literal
two-character sequence backslash-n.  The loader concatenates the text
fields with a single space; labels stay 1-based in records and are
converted to 0-based at encoding time.

Vocabulary files are plain text: a ``kind=`` header line, then one
``token<TAB>frequency`` line per id, in id order.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from swcnn.errors import DataError
from swcnn.textpipe import NGRAM123, WORD, Vocabulary, tokenize


@dataclass(frozen=True)
class DatasetRecord:
    label: int  # 1-based, as distributed
    text: str


def load_csv(path) -> list[DatasetRecord]:
    try:
        stream = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open dataset: {exc}") from exc
    records = []
    with stream:
        reader = csv.reader(stream)
        try:
            for row in reader:
                if not row:
                    raise DataError(f"{path}: line {reader.line_num}: empty record")
                try:
                    label = int(row[0])
                except ValueError:
                    raise DataError(
                        f"{path}: line {reader.line_num}: label {row[0]!r} is not an integer"
                    ) from None
                if label < 1:
                    raise DataError(
                        f"{path}: line {reader.line_num}: label must be >= 1, got {label}"
                    )
                records.append(DatasetRecord(label=label, text=" ".join(row[1:])))
        except csv.Error as exc:
            raise DataError(f"{path}: line {reader.line_num}: {exc}") from exc
    return records


def to_samples(records) -> list[tuple[list[str], int]]:
    """Tokenized (tokens, 0-based label) pairs for training/evaluation."""
    return [(tokenize(r.text), r.label - 1) for r in records]


def n_classes_of(records) -> int:
    if not records:
        raise DataError("empty dataset")
    return max(r.label for r in records)


def save_vocab(vocab: Vocabulary, path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as out:
            out.write(f"kind={vocab.kind}\n")
            for token, freq in vocab.entries:
                out.write(f"{token}\t{freq}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_vocab(path) -> Vocabulary:
    try:
        stream = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open vocabulary: {exc}") from exc
    with stream:
        header = stream.readline().rstrip("\n")
        if not header.startswith("kind="):
            raise DataError(f"{path}: missing kind= header")
        kind = header[len("kind=") :]
        if kind not in (WORD, NGRAM123):
            raise DataError(f"{path}: unknown vocabulary kind {kind!r}")
        entries = []
        for lineno, line in enumerate(stream, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            token, sep, freq = line.rpartition("\t")
            if not sep:
                raise DataError(f"{path}: line {lineno}: expected token<TAB>frequency")
            try:
                entries.append((token, int(freq)))
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad frequency {freq!r}") from None
    return Vocabulary(kind=kind, entries=tuple(entries))
