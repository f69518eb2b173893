"""DNA alphabet handling: 2-bit packed sequences, k-mers, FASTA/FASTQ ingestion.

Encoding is fixed as A=00, C=01, G=10, T=11 with base index 0 in the most
significant bit pair, so that the complement of a base is the bitwise NOT of
its code and lexicographic order of sequences equals numeric order of their
packed words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

import numpy as np

FASTA_TAG = "Fasta format"
FASTQ_TAG = "Fastq format"

FASTA_LINE_WIDTH = 80

MAX_K = 63

_BASES = "ACGT"
_BASE_BYTES = np.frombuffer(b"ACGT", dtype=np.uint8)

# char -> 2-bit code; 255 marks anything outside {ACGTacgt}
_ENCODE_LUT = np.full(256, 255, dtype=np.uint8)
for _i, _b in enumerate(_BASES):
    _ENCODE_LUT[ord(_b)] = _i
    _ENCODE_LUT[ord(_b.lower())] = _i

# packed byte -> its four 2-bit codes, most significant pair first
_UNPACK_LUT = np.empty((256, 4), dtype=np.uint8)
for _v in range(256):
    _UNPACK_LUT[_v] = [(_v >> 6) & 3, (_v >> 4) & 3, (_v >> 2) & 3, _v & 3]

# packed byte -> its four bases as ASCII, for one-gather decoding
_STR_LUT = np.empty((256, 4), dtype=np.uint8)
for _v in range(256):
    _STR_LUT[_v] = [ord("ACGT"[(_v >> _s) & 3]) for _s in (6, 4, 2, 0)]

# packed byte -> complement of the byte with its four codes reversed, so a
# byte-order reversal completes a full packed reverse complement
_RC_PACK_LUT = np.empty(256, dtype=np.uint8)
for _v in range(256):
    _c = ~_v & 0xFF
    _RC_PACK_LUT[_v] = (
        ((_c & 0x03) << 6) | ((_c & 0x0C) << 2) | ((_c & 0x30) >> 2) | ((_c & 0xC0) >> 6)
    )


class InvalidBase(ValueError):
    """A character outside {A,C,G,T,a,c,g,t} was passed to encode()."""

    def __init__(self, position: int, char: str):
        self.position = position
        self.char = char
        super().__init__(f"invalid base {char!r} at position {position}")


class BadK(ValueError):
    """k is out of range or even."""


class UnknownFormat(ValueError):
    """Input is neither FASTA nor FASTQ."""


class MalformedRecord(ValueError):
    """A truncated FASTQ quartet or a FASTA header with an empty body."""

    def __init__(self, line_number: int, message: str = "malformed record"):
        self.line_number = line_number
        super().__init__(f"{message} at line {line_number}")


def check_k(k: int) -> None:
    if not isinstance(k, int) or k <= 1 or k > MAX_K or k % 2 == 0:
        raise BadK(f"k must be odd and 1 < k <= {MAX_K}, got {k!r}")


def _pack_codes(codes: np.ndarray) -> bytes:
    n = codes.size
    pad = (-n) % 4
    if pad:
        codes = np.concatenate([codes, np.zeros(pad, dtype=np.uint8)])
    q = codes.reshape(-1, 4)
    # Horner form keeps every intermediate within uint8
    packed = np.left_shift(q[:, 0], 2)
    np.bitwise_or(packed, q[:, 1], out=packed)
    np.left_shift(packed, 2, out=packed)
    np.bitwise_or(packed, q[:, 2], out=packed)
    np.left_shift(packed, 2, out=packed)
    np.bitwise_or(packed, q[:, 3], out=packed)
    return packed.tobytes()


class PackedSeq:
    """An immutable DNA sequence stored at 2 bits per base."""

    __slots__ = ("_length", "_data")

    def __init__(self, length: int, data: bytes):
        if len(data) != (length + 3) // 4:
            raise ValueError("payload size does not match declared length")
        self._length = length
        self._data = data

    @classmethod
    def from_codes(cls, codes: np.ndarray) -> "PackedSeq":
        codes = np.ascontiguousarray(codes, dtype=np.uint8)
        return cls(int(codes.size), _pack_codes(codes))

    @property
    def payload_bytes(self) -> int:
        """Number of bytes of packed payload, always ceil(length/4)."""
        return len(self._data)

    def codes(self) -> np.ndarray:
        """The per-base 2-bit codes as a uint8 array of length len(self)."""
        raw = np.frombuffer(self._data, dtype=np.uint8)
        return _UNPACK_LUT[raw].reshape(-1)[: self._length]

    def reverse_complement(self) -> "PackedSeq":
        n = self._length
        raw = np.frombuffer(self._data, dtype=np.uint8)
        rb = np.ascontiguousarray(_RC_PACK_LUT[raw][::-1])
        pad = (-n) % 4
        if pad:
            # the complemented padding codes lead the reversed stream;
            # shift the whole 2-bit stream left to drop them
            out = np.left_shift(rb, np.uint8(2 * pad))
            out[:-1] |= rb[1:] >> np.uint8(8 - 2 * pad)
            # and zero the padding that now trails the final byte
            out[-1] &= np.uint8((0xFF << (2 * pad)) & 0xFF)
            rb = out
        return PackedSeq(n, rb.tobytes())

    def __len__(self) -> int:
        return self._length

    def __str__(self) -> str:
        raw = np.frombuffer(self._data, dtype=np.uint8)
        return _STR_LUT[raw].reshape(-1)[: self._length].tobytes().decode("ascii")

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 40:
            s = s[:40] + "..."
        return f"PackedSeq({len(self)}, {s!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PackedSeq):
            return NotImplemented
        return self._length == other._length and self._data == other._data

    def __hash__(self) -> int:
        return hash((self._length, self._data))


def encode(s: str) -> PackedSeq:
    """Pack a DNA string; lowercase is accepted and uppercased."""
    raw = np.frombuffer(s.encode("latin-1", "replace"), dtype=np.uint8)
    codes = _ENCODE_LUT[raw]
    bad = np.flatnonzero(codes == 255)
    if bad.size:
        pos = int(bad[0])
        raise InvalidBase(pos, s[pos])
    return PackedSeq(len(s), _pack_codes(codes))


def decode(p: PackedSeq) -> str:
    return str(p)


def reverse_complement(p: PackedSeq) -> PackedSeq:
    return p.reverse_complement()


def _word_to_str(word: int, k: int) -> str:
    return "".join(_BASES[(word >> (2 * (k - 1 - i))) & 3] for i in range(k))


def _rc_word(word: int, k: int) -> int:
    out = 0
    for _ in range(k):
        out = (out << 2) | (3 - (word & 3))
        word >>= 2
    return out


@dataclass(frozen=True, order=True)
class Kmer:
    """A fixed-length k-mer packed into an integer, first base most significant."""

    k: int = field(compare=False)
    word: int

    @classmethod
    def from_string(cls, s: str) -> "Kmer":
        check_k(len(s))
        p = encode(s)
        word = 0
        for c in p.codes().tolist():
            word = (word << 2) | c
        return cls(len(s), word)

    def reverse_complement(self) -> "Kmer":
        return Kmer(self.k, _rc_word(self.word, self.k))

    def canonical(self) -> "Kmer":
        rc = _rc_word(self.word, self.k)
        return self if self.word <= rc else Kmer(self.k, rc)

    def is_canonical(self) -> bool:
        return self.word <= _rc_word(self.word, self.k)

    def __str__(self) -> str:
        return _word_to_str(self.word, self.k)

    def __repr__(self) -> str:
        return f"Kmer({str(self)!r})"


def canonical(x: Kmer) -> Kmer:
    return x.canonical()


def kmers(p: PackedSeq, k: int) -> Iterator[Kmer]:
    """All k-length windows of ``p`` left to right, computed by shifting in
    one base at a time rather than re-packing each window."""
    check_k(k)
    n = len(p)
    if n < k:
        return
    mask = (1 << (2 * k)) - 1
    word = 0
    for i, c in enumerate(p.codes().tolist()):
        word = ((word << 2) | c) & mask
        if i >= k - 1:
            yield Kmer(k, word)


@dataclass(frozen=True)
class Read:
    """One input sequence record. The quality string, when present, is kept
    verbatim and unused downstream."""

    id: str
    seq: PackedSeq
    quality: Optional[str] = None

    def __post_init__(self):
        if self.quality is not None and len(self.quality) != len(self.seq):
            raise ValueError(
                f"quality length {len(self.quality)} != sequence length {len(self.seq)}"
            )


RawRecord = tuple  # (id: str, sequence: str, quality: Optional[str])


def _line_iter(stream: IO) -> Iterator[tuple[int, str]]:
    for i, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield i, line.rstrip("\r\n")


def scan_records(stream: IO) -> tuple[Iterator[RawRecord], str]:
    """Detect FASTA vs FASTQ and lazily yield raw (id, sequence, quality)
    records without validating the alphabet."""
    lines = _line_iter(stream)
    first = None
    for num, text in lines:
        if text.strip():
            first = (num, text)
            break
    if first is None:
        raise UnknownFormat("empty input")
    lead = first[1].lstrip()[0]
    if lead == ">":
        return _scan_fasta(first, lines), FASTA_TAG
    if lead == "@":
        return _scan_fastq(first, lines), FASTQ_TAG
    raise UnknownFormat(f"first record byte {lead!r} is neither '>' nor '@'")


def _scan_fasta(first: tuple[int, str], lines: Iterator[tuple[int, str]]) -> Iterator[RawRecord]:
    header_num, header = first
    rec_id = header.lstrip()[1:].strip()
    body: list[str] = []
    for num, text in lines:
        stripped = text.strip()
        if stripped.startswith(">"):
            if not body:
                raise MalformedRecord(header_num, "FASTA header with empty body")
            yield (rec_id, "".join(body), None)
            header_num, rec_id, body = num, stripped[1:].strip(), []
        elif stripped:
            body.append(stripped)
    if not body:
        raise MalformedRecord(header_num, "FASTA header with empty body")
    yield (rec_id, "".join(body), None)


def _scan_fastq(first: tuple[int, str], lines: Iterator[tuple[int, str]]) -> Iterator[RawRecord]:
    pending: Optional[tuple[int, str]] = first
    while pending is not None:
        header_num, header = pending
        if not header.lstrip().startswith("@"):
            raise MalformedRecord(header_num, "expected '@' header")
        rec_id = header.lstrip()[1:].strip()
        quartet = []
        for num, text in lines:
            quartet.append((num, text))
            if len(quartet) == 3:
                break
        if len(quartet) < 3:
            raise MalformedRecord(header_num, "truncated FASTQ quartet")
        (seq_num, seq), (plus_num, plus), (qual_num, qual) = quartet
        if not plus.strip().startswith("+"):
            raise MalformedRecord(plus_num, "expected '+' separator")
        if len(qual) != len(seq):
            raise MalformedRecord(qual_num, "quality length != sequence length")
        yield (rec_id, seq, qual)
        pending = None
        for num, text in lines:
            if text.strip():
                pending = (num, text)
                break


def read_sequences(stream: IO) -> tuple[Iterator[Read], str]:
    """Lazily parse FASTA or FASTQ records into Reads, with a detected
    format tag ("Fasta format" or "Fastq format")."""
    raw, tag = scan_records(stream)

    def gen() -> Iterator[Read]:
        for rec_id, seq, qual in raw:
            yield Read(rec_id, encode(seq), qual)

    return gen(), tag


def write_fasta(records: Iterable, out: IO[str], width: int = FASTA_LINE_WIDTH) -> None:
    """Write (id, PackedSeq) pairs or Reads as wrapped FASTA."""
    for rec in records:
        if isinstance(rec, Read):
            rec_id, seq = rec.id, rec.seq
        else:
            rec_id, seq = rec
        out.write(f">{rec_id}\n")
        s = str(seq)
        for i in range(0, len(s), width):
            out.write(s[i : i + width] + "\n")
