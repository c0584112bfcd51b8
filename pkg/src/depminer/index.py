"""Project-wide identifier index with a versioned binary on-disk format."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .frontend.base import (
    CLASSIFY_DECLARATION,
    CLASSIFY_USAGE,
    FrontEndDescriptor,
    ParseResult,
    classify,
)

MAGIC = b"DMIX"
VERSION = 1

OCCURRENCE_CODES = {"other": 0, "declaration": 1, "usage": 2}
OCCURRENCE_NAMES = {v: k for k, v in OCCURRENCE_CODES.items()}


class IndexFormatError(Exception):
    pass


class NotAnIndexError(IndexFormatError):
    """The byte stream does not start with the index magic."""


class VersionMismatchError(IndexFormatError):
    """The index was written by an unsupported format version."""


class CorruptIndexError(IndexFormatError):
    """The payload is truncated or internally inconsistent."""


@dataclass(frozen=True)
class FileFingerprint:
    hash: int
    byte_length: int


@dataclass(frozen=True)
class TokenPosting:
    file_ordinal: int
    line: int
    occurrence: str

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (self.file_ordinal, self.line, OCCURRENCE_CODES[self.occurrence])


@dataclass(frozen=True)
class TokenIndex:
    file_table: Tuple[Tuple[str, FileFingerprint], ...]
    postings: Dict[str, Tuple[TokenPosting, ...]]

    def __eq__(self, other):
        if not isinstance(other, TokenIndex):
            return NotImplemented
        return (
            self.file_table == other.file_table and self.postings == other.postings
        )

    def ordinal_of(self, path: str) -> Optional[int]:
        for i, (p, _) in enumerate(self.file_table):
            if p == path:
                return i
        return None


def fingerprint(content: bytes) -> FileFingerprint:
    """FNV-1a 64-bit digest plus byte length; stable across runs/platforms."""
    h = 0xCBF29CE484222325
    for b in content:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return FileFingerprint(h, len(content))


def extract_occurrences(
    tree: ParseResult, descriptor: FrontEndDescriptor
) -> Set[Tuple[str, int, str]]:
    """All (token, line, occurrence) triples of one parsed file, deduplicated.

    Postings are line-granular, so repeated occurrences of a token on one line
    with the same occurrence kind collapse into a single triple.
    """
    occurrences: Set[Tuple[str, int, str]] = set()
    for node in tree.root.walk():
        if node.identifier is None:
            continue
        role = classify(node, descriptor)
        if role in (CLASSIFY_DECLARATION, CLASSIFY_USAGE):
            occurrences.add((node.identifier, node.span.start_line, role))
        else:
            occurrences.add((node.identifier, node.span.start_line, "other"))
    return occurrences


def build_index(
    entries: Iterable[Tuple[str, FileFingerprint, Set[Tuple[str, int, str]]]]
) -> TokenIndex:
    """Assemble an index from per-file occurrence sets.

    `entries` holds (path, fingerprint, occurrences); the result is identical
    regardless of input order.
    """
    items = sorted(entries, key=lambda e: e[0])
    file_table = tuple((path, fp) for path, fp, _ in items)
    postings: Dict[str, List[TokenPosting]] = {}
    for ordinal, (_, _, occurrences) in enumerate(items):
        for token, line, occ in occurrences:
            postings.setdefault(token, []).append(TokenPosting(ordinal, line, occ))
    return TokenIndex(
        file_table,
        {
            token: tuple(sorted(plist, key=lambda p: p.sort_key))
            for token, plist in postings.items()
        },
    )


def query(index: TokenIndex, token: str) -> Tuple[TokenPosting, ...]:
    return index.postings.get(token, ())


def serialize_index(index: TokenIndex) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    out += struct.pack("<I", len(index.file_table))
    for path, fp in index.file_table:
        encoded = path.encode("utf-8")
        out += struct.pack("<I", len(encoded))
        out += encoded
        out += struct.pack("<QQ", fp.hash, fp.byte_length)
    tokens = sorted(index.postings, key=lambda t: t.encode("utf-8"))
    out += struct.pack("<I", len(tokens))
    for token in tokens:
        encoded = token.encode("utf-8")
        out += struct.pack("<I", len(encoded))
        out += encoded
        plist = index.postings[token]
        out += struct.pack("<I", len(plist))
        for posting in plist:
            out += struct.pack(
                "<IIB",
                posting.file_ordinal,
                posting.line,
                OCCURRENCE_CODES[posting.occurrence],
            )
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptIndexError("corrupt index: truncated payload")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def u8(self) -> int:
        return self.take(1)[0]


def deserialize_index(data: bytes) -> TokenIndex:
    if data[:4] != MAGIC:
        raise NotAnIndexError("not an index file")
    reader = _Reader(data)
    reader.take(4)
    version = reader.u32()
    if version != VERSION:
        raise VersionMismatchError("version mismatch: got %d, support %d" % (version, VERSION))
    file_count = reader.u32()
    file_table = []
    for _ in range(file_count):
        path = reader.take(reader.u32()).decode("utf-8")
        file_table.append((path, FileFingerprint(reader.u64(), reader.u64())))
    token_count = reader.u32()
    postings: Dict[str, Tuple[TokenPosting, ...]] = {}
    for _ in range(token_count):
        token = reader.take(reader.u32()).decode("utf-8")
        plist = []
        for _ in range(reader.u32()):
            ordinal = reader.u32()
            line = reader.u32()
            occ = reader.u8()
            if ordinal >= file_count or occ not in OCCURRENCE_NAMES:
                raise CorruptIndexError("corrupt index: invalid posting")
            plist.append(TokenPosting(ordinal, line, OCCURRENCE_NAMES[occ]))
        postings[token] = tuple(plist)
    if reader.pos != len(data):
        raise CorruptIndexError("corrupt index: trailing bytes")
    return TokenIndex(tuple(file_table), postings)
