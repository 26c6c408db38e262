"""The mutable morpheme lexicon: entries, unit-norm embedding rows, retrieval.

Row 0 is always the end-of-sequence entry, embedded from a reserved prompt
through the same morpheme encoder.  The lexicon is append-only (indices are
stable) and bound to the encoder that produced it by a 32-byte fingerprint;
mutation through a stale encoder is refused.  Because decoding can only
return lexicon indices, every decoded (segment, gloss) pair is attested or
user-provided — unattested morpheme types cannot be emitted.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .encoder import EncoderModel, corpus_morpheme_types
from .igt import Corpus, Morpheme
from .validation import check_unit_vector

LEXICON_MAGIC = b"MGLX"
LEXICON_VERSION = 1

PROVENANCES = ("train", "user", "eval_oracle")
_PROVENANCE_BYTE = {"train": 0, "user": 1, "eval_oracle": 2}
_BYTE_PROVENANCE = {v: k for k, v in _PROVENANCE_BYTE.items()}

EOS_INDEX = 0


class FingerprintMismatchError(RuntimeError):
    """The lexicon was built by a different encoder than the one supplied."""


class LexiconFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LexiconEntry:
    """One retrievable unit: a morpheme (or the EOS marker) plus provenance."""

    morpheme: Optional[Morpheme]  # None marks the EOS entry
    provenance: str
    row: int

    @property
    def is_eos(self) -> bool:
        return self.morpheme is None


class LexiconView:
    """Immutable prefix snapshot of a lexicon at some version."""

    def __init__(self, entries: tuple[LexiconEntry, ...], matrix: np.ndarray,
                 encoder_fingerprint: bytes, version: int):
        self.entries = entries
        self.matrix = matrix
        self.encoder_fingerprint = encoder_fingerprint
        self.version = version

    def __len__(self) -> int:
        return len(self.entries)

    def morpheme_at(self, index: int) -> Optional[Morpheme]:
        return self.entries[index].morpheme


def row_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Per-row dot products with a shape-independent reduction.

    Each row is reduced on its own in float64, so appending rows can never
    perturb the score of an existing row (exact score immutability).
    """
    return (matrix.astype(np.float64) * query.astype(np.float64)).sum(axis=1)


def nearest_k(
    lexicon: Union["Lexicon", LexiconView], query: np.ndarray, k: int
) -> list[tuple[int, float]]:
    """Exact top-k by dot product over all rows, ties broken by lowest index."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    query = check_unit_vector(query)
    matrix = lexicon.matrix if isinstance(lexicon, LexiconView) else lexicon._matrix_view()
    sims = row_scores(matrix, query)
    k = min(k, len(sims))
    order = np.lexsort((np.arange(len(sims)), -sims))[:k]
    return [(int(i), float(sims[i])) for i in order]


class Lexicon:
    """Ordered entries plus the embedding matrix (one unit-norm row each)."""

    def __init__(self, entries: Sequence[LexiconEntry], matrix: np.ndarray,
                 encoder_fingerprint: bytes):
        if len(entries) != matrix.shape[0]:
            raise ValueError("entry count does not match matrix rows")
        if not entries or not entries[0].is_eos:
            raise ValueError("entry 0 must be the EOS entry")
        if sum(e.is_eos for e in entries) != 1:
            raise ValueError("exactly one EOS entry allowed")
        if len(encoder_fingerprint) != 32:
            raise ValueError("encoder fingerprint must be 32 bytes")
        self._entries: list[LexiconEntry] = list(entries)
        self._matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self._capacity = self._matrix.shape[0]
        self.encoder_fingerprint = bytes(encoder_fingerprint)
        self.version = 0
        self._index: dict[tuple[str, str], int] = {}
        for entry in self._entries:
            if not entry.is_eos:
                if entry.morpheme.key in self._index:
                    raise ValueError(f"duplicate lexicon key {entry.morpheme.key}")
                self._index[entry.morpheme.key] = entry.row

    # -- read side -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def embedding_dim(self) -> int:
        return self._matrix.shape[1]

    @property
    def entries(self) -> tuple[LexiconEntry, ...]:
        return tuple(self._entries)

    def _matrix_view(self) -> np.ndarray:
        return self._matrix[: len(self._entries)]

    @property
    def matrix(self) -> np.ndarray:
        view = self._matrix_view()
        view.flags.writeable = False
        return view

    def morpheme_at(self, index: int) -> Optional[Morpheme]:
        return self._entries[index].morpheme

    def key_index(self, m: Morpheme) -> Optional[int]:
        return self._index.get(m.key)

    def __contains__(self, m: Morpheme) -> bool:
        return m.key in self._index

    def keys(self) -> set[tuple[str, str]]:
        return set(self._index)

    def snapshot(self) -> LexiconView:
        count = len(self._entries)
        matrix = self._matrix[:count]
        matrix.flags.writeable = False
        return LexiconView(tuple(self._entries), matrix, self.encoder_fingerprint, self.version)

    # -- write side (append-only) ---------------------------------------------

    def _check_encoder(self, encoder: EncoderModel) -> None:
        if encoder.fingerprint() != self.encoder_fingerprint:
            raise FingerprintMismatchError(
                "lexicon is bound to a different encoder checkpoint"
            )

    def _append_row(self, vector: np.ndarray) -> None:
        count = len(self._entries)
        if count >= self._capacity:
            grown = np.empty((max(8, self._capacity * 2), self.embedding_dim), dtype=np.float32)
            grown[: self._capacity] = self._matrix
            self._matrix = grown
            self._capacity = grown.shape[0]
        self._matrix[count] = vector

    def add_entry(self, m: Morpheme, provenance: str, encoder: EncoderModel) -> tuple[int, bool]:
        """Append a morpheme embedded by the bound encoder.

        Idempotent: an existing key returns its index unchanged.  Returns
        (index, added).  Pre-existing rows are never touched.
        """
        if provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        self._check_encoder(encoder)
        existing = self._index.get(m.key)
        if existing is not None:
            return existing, False
        row = len(self._entries)
        self._append_row(encoder.embed_morpheme(m))
        self._entries.append(LexiconEntry(m, provenance, row))
        self._index[m.key] = row
        self.version += 1
        return row, True

    def extend_with_oracle(self, eval_corpus: Corpus, encoder: EncoderModel) -> int:
        """Add every eval-corpus morpheme missing from the lexicon.

        Oracle expansion for the extended-lexicon evaluation setting only;
        never used by training.  Returns the number of entries added.
        """
        self._check_encoder(encoder)
        missing = [m for m in corpus_morpheme_types(eval_corpus) if m.key not in self._index]
        if missing:
            vectors = encoder.embed_morphemes(missing)
            for m, vector in zip(missing, vectors):
                row = len(self._entries)
                self._append_row(vector)
                self._entries.append(LexiconEntry(m, "eval_oracle", row))
                self._index[m.key] = row
                self.version += 1
        return len(missing)

    def copy(self) -> "Lexicon":
        clone = Lexicon(self._entries, self._matrix_view().copy(), self.encoder_fingerprint)
        clone.version = self.version
        return clone

    # -- persistence -----------------------------------------------------------

    def save_bytes(self) -> bytes:
        count = len(self._entries)
        out = bytearray()
        out += LEXICON_MAGIC
        out += struct.pack("<III", LEXICON_VERSION, count, self.embedding_dim)
        out += self.encoder_fingerprint
        for entry in self._entries:
            segment = b"" if entry.is_eos else entry.morpheme.segment.encode("utf-8")
            gloss = b"" if entry.is_eos else entry.morpheme.gloss.encode("utf-8")
            out += struct.pack("<I", len(segment)) + segment
            out += struct.pack("<I", len(gloss)) + gloss
            out += struct.pack("<B", _PROVENANCE_BYTE.get(entry.provenance, 0))
        out += np.ascontiguousarray(self._matrix_view(), dtype="<f4").tobytes(order="C")
        return bytes(out)

    def save(self, path) -> None:
        with open(path, "wb") as handle:
            handle.write(self.save_bytes())

    @classmethod
    def load_bytes(cls, blob: bytes) -> "Lexicon":
        if blob[:4] != LEXICON_MAGIC:
            raise LexiconFormatError(f"bad lexicon magic {blob[:4]!r}")
        try:
            version, count, dim = struct.unpack_from("<III", blob, 4)
        except struct.error as exc:
            raise LexiconFormatError("truncated lexicon header") from exc
        if version != LEXICON_VERSION:
            raise LexiconFormatError(f"unsupported lexicon version {version}")
        offset = 16
        fingerprint = blob[offset : offset + 32]
        if len(fingerprint) != 32:
            raise LexiconFormatError("missing encoder fingerprint")
        offset += 32
        entries = []
        try:
            for row in range(count):
                (seg_len,) = struct.unpack_from("<I", blob, offset)
                offset += 4
                segment = blob[offset : offset + seg_len].decode("utf-8")
                offset += seg_len
                (gloss_len,) = struct.unpack_from("<I", blob, offset)
                offset += 4
                gloss = blob[offset : offset + gloss_len].decode("utf-8")
                offset += gloss_len
                (prov,) = struct.unpack_from("<B", blob, offset)
                offset += 1
                if row == 0:
                    if segment or gloss:
                        raise LexiconFormatError("entry 0 is not an EOS entry")
                    entries.append(LexiconEntry(None, "train", 0))
                else:
                    entries.append(
                        LexiconEntry(Morpheme(segment, gloss), _BYTE_PROVENANCE[prov], row)
                    )
        except (struct.error, KeyError) as exc:
            raise LexiconFormatError(f"truncated or corrupt entry table: {exc}") from exc
        expected = count * dim * 4
        data = blob[offset:]
        if len(data) < expected:
            raise LexiconFormatError("truncated embedding matrix")
        matrix = np.frombuffer(data[:expected], dtype="<f4").reshape(count, dim).copy()
        return cls(entries, matrix, fingerprint)

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path, "rb") as handle:
            return cls.load_bytes(handle.read())

    def to_tsv(self) -> str:
        """Human-readable export: segment<TAB>gloss<TAB>provenance per entry."""
        lines = []
        for entry in self._entries:
            if entry.is_eos:
                lines.append("<EOS>\t<EOS>\teos")
            else:
                lines.append(
                    f"{entry.morpheme.segment}\t{entry.morpheme.gloss}\t{entry.provenance}"
                )
        return "\n".join(lines) + "\n"


def build_lexicon(encoder: EncoderModel, train_corpus: Corpus) -> Lexicon:
    """One entry per distinct training (segment, gloss) pair, plus EOS at row 0.

    Entries follow first-occurrence order; embeddings come from the frozen
    encoder, so rebuilding from the same encoder and corpus is bit-identical.
    """
    morphemes = corpus_morpheme_types(train_corpus)
    dim = encoder.embedding_dim
    matrix = np.empty((1 + len(morphemes), dim), dtype=np.float32)
    matrix[EOS_INDEX] = encoder.embed_eos()
    if morphemes:
        matrix[1:] = encoder.embed_morphemes(morphemes)
    entries = [LexiconEntry(None, "train", EOS_INDEX)]
    entries += [LexiconEntry(m, "train", i + 1) for i, m in enumerate(morphemes)]
    return Lexicon(entries, matrix, encoder.fingerprint())
