"""Canonical k-mer de Bruijn graph: construction from reads, coverage,
tip detection and unambiguous path extraction.

Nodes are canonical k-mers (the lexicographic minimum of a k-mer and its
reverse complement); edges are oriented and closed under reverse-complement
symmetry, so the graph is strand-agnostic. For k <= 31 construction is
vectorised over numpy uint64 words; larger (odd) k up to 63 falls back to a
plain-integer path with identical results.

Internally nodes are dense ids into a sorted word table. An oriented node is
``node_id * 2 + orientation`` with FORWARD = 0, REVERSE = 1; the mirror of an
oriented node is obtained by XOR-ing 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .seq import BadK, Kmer, PackedSeq, Read, check_k, encode, _rc_word

FORWARD = 0
REVERSE = 1

COVERAGE_CAP = 2**32 - 1

_MASK31 = np.uint64((1 << 31) - 1)


class UnknownNode(KeyError):
    pass


class BadParam(ValueError):
    pass


def _window_words(codes: np.ndarray, k: int) -> np.ndarray:
    """uint64 values of every length-k window of ``codes`` (first base most
    significant), built by doubling window lengths rather than per-base loops."""
    n = codes.size
    m = n - k + 1
    # Only pieces at set bits of k survive into the combine step below; the
    # rest are doubling intermediates whose buffers can be recycled to keep
    # the number of large allocations constant.
    needed = {1 << i for i in range(k.bit_length()) if k & (1 << i)}
    pieces = {1: codes.astype(np.uint64)}
    free: list[np.ndarray] = []
    w = 1
    while w * 2 <= k:
        a = pieces[w]
        size = a.size - w
        if free and free[-1].size >= size:
            r = free.pop()[:size]
        else:
            r = np.empty(size, dtype=np.uint64)
        np.left_shift(a[:size], np.uint64(2 * w), out=r)
        np.bitwise_or(r, a[w:], out=r)
        pieces[w * 2] = r
        if w not in needed:
            base = pieces.pop(w)
            free.append(base.base if base.base is not None else base)
        w *= 2
    res = None
    covered = 0
    for p in sorted(pieces, reverse=True):
        if covered + p > k:
            continue
        seg = pieces[p][covered : covered + m]
        if res is None:
            res = seg if seg.size == pieces[p].size else seg.copy()
        else:
            res <<= np.uint64(2 * p)
            np.bitwise_or(res, seg, out=res)
        covered += p
    return res


# byte -> complement of the byte with its four 2-bit fields reversed
_RC_BYTE_LUT = np.empty(256, dtype=np.uint8)
for _v in range(256):
    _c = ~_v & 0xFF
    _RC_BYTE_LUT[_v] = (
        ((_c & 0x03) << 6) | ((_c & 0x0C) << 2) | ((_c & 0x30) >> 2) | ((_c & 0xC0) >> 6)
    )


def _rc_words(words: np.ndarray, k: int) -> np.ndarray:
    """Vectorised reverse complement of packed k-mer words (k <= 32).

    One table lookup reverses and complements the 2-bit fields within each
    byte; a byteswap then reverses the bytes, completing the full reversal.
    """
    words = np.ascontiguousarray(words)
    x = _RC_BYTE_LUT[words.view(np.uint8)].view(np.uint64)
    x.byteswap(inplace=True)  # freshly written, safe to flip in place
    np.right_shift(x, np.uint64(64 - 2 * k), out=x)
    return x


# Chain walking is a sequential pointer chase that the interpreter handles
# poorly on multi-million-node graphs. When numba is available, large graphs
# use a compiled walker with identical semantics; small graphs (and
# numba-less installs) use the plain Python loop.
_JIT_THRESHOLD = 200_000
_jit_walk_fn = None
_jit_tried = False


def _jit_walker():
    global _jit_walk_fn, _jit_tried
    if not _jit_tried:
        _jit_tried = True
        try:
            from numba import njit
        except Exception:
            return None

        @njit(cache=True)
        def walk(link: np.ndarray, starts: np.ndarray):
            m = link.size
            order = np.empty(m, dtype=np.int64)
            bounds = np.empty(starts.size + 1, dtype=np.int64)
            skip = np.zeros(m, dtype=np.uint8)
            pos = 0
            nchains = 0
            bounds[0] = 0
            for i in range(starts.size):
                u = starts[i]
                if skip[u]:
                    continue
                begin = pos
                order[pos] = u
                pos += 1
                v = link[u]
                while v >= 0:
                    order[pos] = v
                    pos += 1
                    v = link[v]
                tail = order[pos - 1]
                if tail ^ 1 == u:
                    pos = begin + (pos - begin) // 2
                else:
                    skip[tail ^ 1] = 1
                nchains += 1
                bounds[nchains] = pos
            return order[:pos].copy(), bounds[: nchains + 1].copy()

        _jit_walk_fn = walk
    return _jit_walk_fn


def _read_codes(read) -> np.ndarray:
    if isinstance(read, Read):
        return read.seq.codes()
    if isinstance(read, PackedSeq):
        return read.codes()
    if isinstance(read, str):
        return encode(read).codes()
    raise TypeError(f"cannot ingest {type(read).__name__} as a read")


def _pack_edge_keys(fid: np.ndarray, tid: np.ndarray, fo: np.ndarray, to: np.ndarray) -> np.ndarray:
    return (
        (fid.astype(np.uint64) << np.uint64(33))
        | (tid.astype(np.uint64) << np.uint64(2))
        | (fo.astype(np.uint64) << np.uint64(1))
        | to.astype(np.uint64)
    )


def _mirror_keys(keys: np.ndarray) -> np.ndarray:
    fid = keys >> np.uint64(33)
    tid = (keys >> np.uint64(2)) & _MASK31
    fo = (keys >> np.uint64(1)) & np.uint64(1)
    to = keys & np.uint64(1)
    return _pack_edge_keys(tid, fid, to ^ np.uint64(1), fo ^ np.uint64(1))


class DeBruijnGraph:
    """Immutable canonical k-mer graph with per-node coverage counts."""

    def __init__(
        self,
        k: int,
        words: np.ndarray,
        coverage: np.ndarray,
        edge_keys: np.ndarray,
        total_kmers: int,
        skipped_reads: int,
    ):
        self.k = k
        self._words = words  # sorted ascending
        self._cov = coverage.astype(np.int64)
        self._edge_keys = edge_keys  # sorted uint64, rc-symmetric closure
        self.total_kmers = int(total_kmers)
        self.skipped_reads = int(skipped_reads)
        self.coverage_saturated = bool((self._cov > COVERAGE_CAP).any())
        self._csr = None

    # -- node access -----------------------------------------------------

    @property
    def node_count(self) -> int:
        return int(self._words.size)

    @property
    def coverage(self) -> np.ndarray:
        """Per-node coverage by node id, saturating at a 32-bit bound."""
        return np.minimum(self._cov, COVERAGE_CAP)

    def node_id(self, node: Union[Kmer, str, int]) -> int:
        word = self._canonical_word(node)
        idx = int(np.searchsorted(self._words, word))
        if idx >= self.node_count or int(self._words[idx]) != word:
            raise UnknownNode(node)
        return idx

    def _canonical_word(self, node: Union[Kmer, str, int]) -> int:
        if isinstance(node, str):
            node = Kmer.from_string(node)
        if isinstance(node, Kmer):
            if node.k != self.k:
                raise UnknownNode(node)
            return node.canonical().word
        return int(node)

    def kmer_at(self, node_id: int) -> Kmer:
        return Kmer(self.k, int(self._words[node_id]))

    def has_node(self, node: Union[Kmer, str, int]) -> bool:
        try:
            self.node_id(node)
            return True
        except UnknownNode:
            return False

    def coverage_of(self, node: Union[Kmer, str, int]) -> int:
        return int(self.coverage[self.node_id(node)])

    def nodes(self) -> Iterator[tuple[Kmer, int]]:
        cov = self.coverage
        for i in range(self.node_count):
            yield self.kmer_at(i), int(cov[i])

    # -- edge access -----------------------------------------------------

    @property
    def adjacency_count(self) -> int:
        """Number of undirected adjacencies (rc-mirrored edge pairs count once)."""
        if self._edge_keys.size == 0:
            return 0
        self_mirror = int(np.count_nonzero(self._edge_keys == _mirror_keys(self._edge_keys)))
        return (int(self._edge_keys.size) + self_mirror) // 2

    @property
    def oriented_edge_count(self) -> int:
        return int(self._edge_keys.size)

    def edges(self) -> Iterator[tuple[tuple[Kmer, int], tuple[Kmer, int]]]:
        keys = self._edge_keys
        fid = (keys >> np.uint64(33)).astype(np.int64)
        tid = ((keys >> np.uint64(2)) & _MASK31).astype(np.int64)
        fo = ((keys >> np.uint64(1)) & np.uint64(1)).astype(np.int64)
        to = (keys & np.uint64(1)).astype(np.int64)
        for i in range(keys.size):
            yield (self.kmer_at(fid[i]), int(fo[i])), (self.kmer_at(tid[i]), int(to[i]))

    # -- oriented adjacency ----------------------------------------------

    def _oriented(self):
        """CSR over oriented nodes: (out_count, starts, sorted from/succ arrays).

        Sorting a packed (from << 32 | to) key replaces the argsort+gather a
        permutation would need; both oriented ids fit 32 bits because node
        ids are below 2**31 by construction of the edge keys.
        """
        if self._csr is None:
            keys = self._edge_keys
            ufrom = ((keys >> np.uint64(33)) << np.uint64(1)) | (
                (keys >> np.uint64(1)) & np.uint64(1)
            )
            uto = (((keys >> np.uint64(2)) & _MASK31) << np.uint64(1)) | (keys & np.uint64(1))
            packed = (ufrom << np.uint64(32)) | uto
            packed.sort()
            ufs = (packed >> np.uint64(32)).astype(np.int64)
            succ = (packed & np.uint64(0xFFFFFFFF)).astype(np.int64)
            m = 2 * self.node_count
            counts = np.bincount(ufs, minlength=m)
            starts = np.concatenate(([0], np.cumsum(counts)))
            self._csr = (counts, starts, succ, ufs)
        return self._csr

    def _successors(self, u: int) -> np.ndarray:
        counts, starts, succ, _ = self._oriented()
        return succ[starts[u] : starts[u + 1]]

    def degrees(self, node: Union[Kmer, str, int], orientation: int) -> tuple[int, int]:
        """(in-degree, out-degree) of a node viewed in the given orientation."""
        nid = self.node_id(node)
        counts, _, _, _ = self._oriented()
        u = nid * 2 + orientation
        return int(counts[u ^ 1]), int(counts[u])

    # -- subgraph link structure -------------------------------------------

    def _links(self, alive: np.ndarray):
        """For the node subgraph ``alive``: per-oriented-node out-degree, the
        unique successor where out-degree is 1, and the chain link relation
        (mutual unambiguous successor)."""
        m = 2 * self.node_count
        counts, _, succ, ufs_all = self._oriented()
        if ufs_all.size and alive.all():
            # whole-graph case: the CSR arrays are already the filtered view
            ufs, uts = ufs_all, succ
            out_count = counts
        elif ufs_all.size:
            keep = alive[ufs_all >> 1] & alive[succ >> 1]
            ufs, uts = ufs_all[keep], succ[keep]  # still sorted by source
            out_count = np.bincount(ufs, minlength=m)
        else:
            ufs = uts = np.empty(0, dtype=np.int64)
            out_count = np.zeros(m, dtype=np.int64)
        succ1 = np.full(m, -1, dtype=np.int64)
        link = np.full(m, -1, dtype=np.int64)
        if ufs.size:
            firsts = np.flatnonzero(np.concatenate(([True], ufs[1:] != ufs[:-1])))
            uniq = ufs[firsts]
            single = out_count[uniq] == 1
            sources = uniq[single]
            targets = uts[firsts][single]
            succ1[sources] = targets
            # in_count[v] == out_count[v ^ 1]: swap the orientation pairs
            in_count = out_count.reshape(-1, 2)[:, ::-1].reshape(-1)
            ok = in_count[targets] == 1
            link[sources[ok]] = targets[ok]
        return out_count, succ1, link

    def _chains(self, alive: np.ndarray):
        """Partition the alive subgraph into maximal unambiguous chains of
        oriented nodes. Each alive node appears in exactly one chain; a chain
        and its mirror are returned once. Cycles with no entry point are broken
        at their minimum canonical k-mer."""
        n = self.node_count
        out_count, succ1, link = self._links(alive)
        linkl = None
        has_in = np.zeros(2 * n, dtype=bool)
        tgt = link[link >= 0]
        has_in[tgt] = True
        alive2 = np.repeat(alive, 2)
        starts = np.flatnonzero(alive2 & ~has_in)
        # Walk each chain with the tightest possible loop (no per-step visited
        # check). Maximal link paths are vertex-disjoint as oriented nodes, so
        # a node id can only repeat within a chain when the chain is its own
        # mirror; such chains are truncated to their first half afterwards,
        # which is exactly where a per-step visited check would have stopped.
        # The mirror of the chain ending at tail t starts at t^1, so recording
        # t^1 skips each mirror without walking it.
        chains: list = []
        walker = _jit_walker() if n >= _JIT_THRESHOLD else None
        if walker is not None:
            order, bounds = walker(link, starts)
            chains.extend(
                order[bounds[i] : bounds[i + 1]] for i in range(bounds.size - 1)
            )
        else:
            linkl = link.tolist()
            skip: set[int] = set()
            for u in starts.tolist():
                if u in skip:
                    continue
                chain = [u]
                append = chain.append
                v = linkl[u]
                while v >= 0:
                    append(v)
                    v = linkl[v]
                tail = chain[-1]
                if tail ^ 1 == u:
                    chain = chain[: len(chain) // 2]
                else:
                    skip.add(tail ^ 1)
                chains.append(chain)
        visited = np.zeros(n, dtype=bool)
        for chain in chains:
            visited[np.asarray(chain, dtype=np.int64) >> 1] = True
        leftovers = np.flatnonzero(alive & ~visited)
        if leftovers.size:
            if linkl is None:
                linkl = link.tolist()
            seen = bytearray(visited.view(np.uint8).tobytes())
            for nid in leftovers.tolist():
                if seen[nid]:
                    continue
                u = nid * 2 + FORWARD
                seen[nid] = 1
                chain = [u]
                append = chain.append
                v = linkl[u]
                while v >= 0 and not seen[v >> 1]:
                    seen[v >> 1] = 1
                    append(v)
                    v = linkl[v]
                chains.append(chain)
        return chains, out_count, succ1, link

    # -- spelling ----------------------------------------------------------

    def _oriented_word(self, node_id: int, orientation: int) -> int:
        w = int(self._words[node_id])
        return w if orientation == FORWARD else _rc_word(w, self.k)

    def _spell_codes(self, node_ids: np.ndarray, orients: np.ndarray) -> np.ndarray:
        k = self.k
        w0 = self._oriented_word(int(node_ids[0]), int(orients[0]))
        first = np.array([(w0 >> (2 * (k - 1 - j))) & 3 for j in range(k)], dtype=np.uint8)
        if node_ids.size == 1:
            return first
        ws = self._words[node_ids[1:]]
        if ws.dtype == np.uint64:
            lbf = (ws & np.uint64(3)).astype(np.uint8)
            lbr = (np.uint64(3) - (ws >> np.uint64(2 * (k - 1)))).astype(np.uint8)
        else:
            lbf = np.array([int(w) & 3 for w in ws], dtype=np.uint8)
            lbr = np.array([3 - (int(w) >> (2 * (k - 1))) for w in ws], dtype=np.uint8)
        rest = np.where(np.asarray(orients[1:]) == FORWARD, lbf, lbr)
        return np.concatenate([first, rest])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeBruijnGraph):
            return NotImplemented
        return (
            self.k == other.k
            and self._words.size == other._words.size
            and bool(np.all(self._words == other._words))
            and bool(np.all(self._cov == other._cov))
            and np.array_equal(self._edge_keys, other._edge_keys)
        )

    def __repr__(self) -> str:
        return f"DeBruijnGraph(k={self.k}, nodes={self.node_count}, edges={self.adjacency_count})"


@dataclass(frozen=True)
class Path:
    """An unambiguous oriented walk; consecutive nodes overlap by k-1 bases."""

    graph: DeBruijnGraph
    node_ids: np.ndarray
    orients: np.ndarray

    def __len__(self) -> int:
        return int(self.node_ids.size)

    def nodes(self) -> list[tuple[Kmer, int]]:
        return [
            (self.graph.kmer_at(int(n)), int(o))
            for n, o in zip(self.node_ids, self.orients)
        ]

    @property
    def mean_coverage(self) -> float:
        return float(self.graph.coverage[self.node_ids].mean())


def spell(path: Path) -> PackedSeq:
    """Spell the path's sequence: k bases from the first oriented k-mer, then
    one base per additional node. Length is always len(path) + k - 1."""
    codes = path.graph._spell_codes(path.node_ids, path.orients)
    return PackedSeq.from_codes(codes)


def build_graph(
    reads: Iterable,
    k: int,
    batch_bases: int = 16_000_000,
) -> DeBruijnGraph:
    """Build the canonical k-mer graph over all reads.

    Coverage pools both strands; edges record observed adjacencies between
    consecutive read k-mers plus their reverse-complement mirrors. Reads are
    ingested in batches whose partial results merge commutatively, so the
    result is independent of read order.
    """
    check_k(k)
    if k <= 31:
        return _build_numpy(reads, k, batch_bases)
    return _build_python(reads, k)


def _assemble_batch(strings: list, arrays: list) -> tuple[np.ndarray, np.ndarray]:
    """Turn one ingestion batch into a single code array plus read lengths.

    String reads are encoded in one pass over their concatenation; an invalid
    character is reported at its position within the offending read.
    """
    from .seq import _ENCODE_LUT, InvalidBase

    parts: list[np.ndarray] = []
    lengths: list[int] = []
    if strings:
        joined = "".join(strings)
        raw = np.frombuffer(joined.encode("latin-1"), dtype=np.uint8)
        codes = _ENCODE_LUT[raw]
        bad = np.flatnonzero(codes == 255)
        if bad.size:
            pos = int(bad[0])
            starts = np.cumsum([0] + [len(s) for s in strings])
            i = int(np.searchsorted(starts, pos, side="right")) - 1
            raise InvalidBase(pos - int(starts[i]), joined[pos])
        parts.append(codes)
        lengths.extend(len(s) for s in strings)
    for arr in arrays:
        parts.append(arr)
        lengths.append(arr.size)
    all_codes = np.concatenate(parts) if len(parts) > 1 else parts[0]
    return all_codes, np.asarray(lengths, dtype=np.int64)


def _build_numpy(reads: Iterable, k: int, batch_bases: int) -> DeBruijnGraph:
    """Vectorised construction for k <= 31.

    Each batch is reduced to two sorted uint64 tables: distinct canonical
    k-mers with counts, and distinct canonical (k+1)-mers. A (k+1)-mer is
    exactly one observed adjacency between consecutive read k-mers, and for
    k <= 31 it fits a single uint64, so edge deduplication never leaves the
    integer fast path. Batch results merge commutatively, which also makes
    the build independent of read order.
    """
    kp = k + 1
    shift2 = np.uint64(2)
    mask2k = np.uint64((1 << (2 * k)) - 1)
    node_words: list[np.ndarray] = []
    node_counts: list[np.ndarray] = []
    edge_words: list[np.ndarray] = []
    skipped = 0
    total = 0

    buf_strs: list[str] = []
    buf_arrs: list[np.ndarray] = []
    buf_bases = 0

    def flush():
        nonlocal buf_strs, buf_arrs, buf_bases, total
        if not (buf_strs or buf_arrs):
            return
        codes, lens = _assemble_batch(buf_strs, buf_arrs)
        buf_strs, buf_arrs, buf_bases = [], [], 0
        total += int((lens - k + 1).sum())
        offsets = np.concatenate(([0], np.cumsum(lens)[:-1]))

        full = lens >= kp
        exact = lens == k
        n_edge = int((lens[full] - k).sum()) if full.any() else 0
        n_exact = int(np.count_nonzero(exact))
        # one k-window per (k+1)-window prefix, plus per-read final suffixes
        n_kw = n_edge + (int(np.count_nonzero(full)) if full.any() else 0) + n_exact
        kw = np.empty(n_kw, dtype=np.uint64)
        rkw = np.empty(n_kw, dtype=np.uint64)
        pos = 0
        if full.any():
            allw = _window_words(codes, kp)
            cnt = lens[full] - k  # (k+1)-windows per read
            cum = np.concatenate(([0], np.cumsum(cnt)))
            widx = np.arange(n_edge, dtype=np.int64) - np.repeat(cum[:-1], cnt)
            gstart = np.repeat(offsets[full], cnt) + widx
            e_fwd = allw[gstart]
            rc_e = _rc_words(e_fwd, kp)
            # the k-windows are the (k+1)-window prefixes plus, per read,
            # the suffix of its final (k+1)-window; their reverse complements
            # are the low/high 2k bits of the (k+1)-window reverse complement
            np.right_shift(e_fwd, shift2, out=kw[:n_edge])
            np.bitwise_and(rc_e, mask2k, out=rkw[:n_edge])
            tail = allw[offsets[full] + cnt - 1] & mask2k
            pos = n_edge + tail.size
            kw[n_edge:pos] = tail
            rkw[n_edge:pos] = _rc_words(tail, k)
            canon_e = np.minimum(e_fwd, rc_e, out=rc_e)
            del e_fwd, rc_e
            canon_e.sort()
            keep = np.concatenate(([True], canon_e[1:] != canon_e[:-1]))
            edge_words.append(canon_e[keep])
            del canon_e
        if exact.any():
            offs = offsets[exact]
            w = np.zeros(offs.size, dtype=np.uint64)
            for j in range(k):
                w = (w << shift2) | codes[offs + j].astype(np.uint64)
            kw[pos:] = w
            rkw[pos:] = _rc_words(w, k)

        canon_k = np.minimum(kw, rkw, out=kw)
        del kw, rkw
        canon_k.sort()
        firsts = np.flatnonzero(np.concatenate(([True], canon_k[1:] != canon_k[:-1])))
        node_words.append(canon_k[firsts])
        node_counts.append(np.diff(np.concatenate((firsts, [canon_k.size]))).astype(np.int64))

    for read in reads:
        if isinstance(read, str):
            if len(read) < k:
                skipped += 1
                continue
            buf_strs.append(read)
            buf_bases += len(read)
        else:
            arr = _read_codes(read)
            if arr.size < k:
                skipped += 1
                continue
            buf_arrs.append(arr)
            buf_bases += arr.size
        if buf_bases >= batch_bases:
            flush()
    flush()

    if not node_words:
        empty64 = np.empty(0, dtype=np.uint64)
        return DeBruijnGraph(k, empty64, np.empty(0, np.int64), empty64, 0, skipped)

    allw = np.concatenate(node_words)
    allc = np.concatenate(node_counts)
    order = np.argsort(allw, kind="stable")
    ws, cs = allw[order], allc[order]
    firsts = np.flatnonzero(np.concatenate(([True], ws[1:] != ws[:-1])))
    words = ws[firsts]
    coverage = np.add.reduceat(cs, firsts).astype(np.int64)

    if edge_words:
        e = np.unique(np.concatenate(edge_words)) if len(edge_words) > 1 else edge_words[0]
        fw = e >> shift2
        tw = e & mask2k
        rce = _rc_words(e, kp)
        fc = np.minimum(fw, rce & mask2k)
        tc = np.minimum(tw, rce >> shift2)
        fo = (fw != fc).astype(np.uint64)
        to = (tw != tc).astype(np.uint64)
        fid = np.searchsorted(words, fc)
        tid = np.searchsorted(words, tc)
        keys = _pack_edge_keys(fid, tid, fo, to)
        edge_keys = np.unique(np.concatenate([keys, _mirror_keys(keys)]))
    else:
        edge_keys = np.empty(0, dtype=np.uint64)

    return DeBruijnGraph(k, words, coverage, edge_keys, total, skipped)


def _build_python(reads: Iterable, k: int) -> DeBruijnGraph:
    """Plain-integer construction for 31 < k <= 63."""
    counts: dict[int, int] = {}
    adjacencies: set[tuple[int, int, int, int]] = set()
    skipped = 0
    total = 0
    mask = (1 << (2 * k)) - 1
    shift = 2 * (k - 1)
    for read in reads:
        codes = _read_codes(read).tolist()
        if len(codes) < k:
            skipped += 1
            continue
        word = 0
        rc = 0
        prev = None
        for i, c in enumerate(codes):
            word = ((word << 2) | c) & mask
            rc = (rc >> 2) | ((3 - c) << shift)
            if i < k - 1:
                continue
            canon = min(word, rc)
            orient = 0 if canon == word else 1
            counts[canon] = counts.get(canon, 0) + 1
            total += 1
            if prev is not None:
                adjacencies.add((prev[0], canon, prev[1], orient))
            prev = (canon, orient)
    if not counts:
        empty64 = np.empty(0, dtype=np.uint64)
        return DeBruijnGraph(k, np.empty(0, dtype=object), np.empty(0, np.int64), empty64, 0, skipped)
    sorted_words = sorted(counts)
    ids = {w: i for i, w in enumerate(sorted_words)}
    words = np.empty(len(sorted_words), dtype=object)
    words[:] = sorted_words
    coverage = np.array([counts[w] for w in sorted_words], dtype=np.int64)
    keys = set()
    for fw, tw, fo, to in adjacencies:
        fid, tid = ids[fw], ids[tw]
        keys.add((fid << 33) | (tid << 2) | (fo << 1) | to)
        keys.add((tid << 33) | (fid << 2) | ((to ^ 1) << 1) | (fo ^ 1))
    edge_keys = np.array(sorted(keys), dtype=np.uint64)
    return DeBruijnGraph(k, words, coverage, edge_keys, total, skipped)


def degrees(g: DeBruijnGraph, node, orientation: int) -> tuple[int, int]:
    return g.degrees(node, orientation)


@dataclass(frozen=True)
class CoverageStats:
    """Histogram of node coverages plus the mean; empty graphs report mean 0."""

    histogram: dict
    mean: float
    empty: bool

    def to_dict(self) -> dict:
        return {
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "mean": self.mean,
            "empty": self.empty,
        }


def coverage_histogram(g: DeBruijnGraph) -> CoverageStats:
    if g.node_count == 0:
        return CoverageStats({}, 0.0, True)
    values, counts = np.unique(g.coverage, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    mean = float(g.coverage.sum() / g.node_count)
    return CoverageStats(hist, mean, False)


def _tips_to_mask(g: DeBruijnGraph, tips) -> np.ndarray:
    mask = np.zeros(g.node_count, dtype=bool)
    if not tips:
        return mask
    for t in tips:
        try:
            mask[g.node_id(t)] = True
        except UnknownNode:
            continue
    return mask


def extract_paths(g: DeBruijnGraph, cut: int = 0, tips=None) -> list[Path]:
    """All maximal unambiguous paths over the subgraph that excludes nodes
    with coverage < cut and tip nodes. Every surviving node lands in exactly
    one path; each path is emitted once, oriented so its spelled sequence is
    lexicographically <= its reverse complement."""
    if cut < 0:
        raise BadParam("cut must be >= 0")
    alive = np.asarray(g.coverage >= cut) & ~_tips_to_mask(g, tips)
    if g.node_count == 0 or not alive.any():
        return []
    chains, _, _, _ = g._chains(alive)
    paths = []
    for chain in chains:
        arr = np.asarray(chain, dtype=np.int64)
        node_ids = arr >> 1
        orients = (arr & 1).astype(np.uint8)
        codes = g._spell_codes(node_ids, orients)
        rc_codes = (3 - codes)[::-1]
        diff = np.flatnonzero(codes != rc_codes)
        if diff.size and codes[diff[0]] > rc_codes[diff[0]]:
            node_ids = node_ids[::-1].copy()
            orients = (orients[::-1] ^ 1).astype(np.uint8)
        paths.append(Path(g, node_ids, orients))
    return paths


def find_tips(g: DeBruijnGraph, max_tip_len: Optional[int] = None) -> set:
    """Detect short dead-end chains hanging off junctions.

    A chain is a tip candidate when exactly one of its ends is a dead end, it
    is at most ``max_tip_len`` nodes long, and its live end hangs off a
    branching node. Where every branch at a junction is a candidate, the best
    one (longest, then highest coverage, then lexicographically smallest
    spelling) is kept as the continuation and only the others become tips.
    Isolated chains with no junction are never tips.
    """
    if max_tip_len is None:
        max_tip_len = 2 * g.k
    if not isinstance(max_tip_len, int) or max_tip_len < 1:
        raise BadParam(f"maxTipLen must be >= 1, got {max_tip_len!r}")
    n = g.node_count
    if n == 0:
        return set()
    alive = np.ones(n, dtype=bool)
    chains, out_count, succ1, _ = g._chains(alive)
    chain_of = np.full(n, -1, dtype=np.int64)
    for idx, ch in enumerate(chains):
        chain_of[np.asarray(ch, dtype=np.int64) >> 1] = idx

    spell_cache: dict[int, str] = {}

    def chain_metrics(idx: int) -> tuple[int, int]:
        ch = np.asarray(chains[idx], dtype=np.int64)
        cov = int(g._cov[ch >> 1].sum())
        return int(ch.size), cov

    def chain_spelling(idx: int) -> str:
        if idx not in spell_cache:
            ch = np.asarray(chains[idx], dtype=np.int64)
            codes = g._spell_codes(ch >> 1, (ch & 1).astype(np.uint8))
            rc = (3 - codes)[::-1]
            s = bytes(codes)
            r = bytes(rc)
            spell_cache[idx] = (s if s <= r else r).hex()
        return spell_cache[idx]

    def oriented_chain(idx: int, head: int):
        ch = chains[idx]
        if ch[0] == head:
            return ch
        if ch[-1] ^ 1 == head:
            return [u ^ 1 for u in reversed(ch)]
        return None  # head is mid-chain: a strong continuation

    tips: set[Kmer] = set()
    for idx, ch in enumerate(chains):
        dead_head = out_count[ch[0] ^ 1] == 0
        dead_tail = out_count[ch[-1]] == 0
        if dead_head == dead_tail:
            continue  # isolated (both dead) or pass-through (neither)
        lst = ch if dead_tail else [u ^ 1 for u in reversed(ch)]
        if len(lst) > max_tip_len:
            continue
        head = lst[0]
        if out_count[head ^ 1] != 1:
            continue  # fed by several branches: a stem, not a hanging branch
        pred = int(succ1[head ^ 1]) ^ 1
        my_key = chain_metrics(idx)
        is_tip = False
        for s in g._successors(pred).tolist():
            sidx = int(chain_of[s >> 1])
            if sidx == idx:
                continue
            other = oriented_chain(sidx, s)
            if other is None:
                is_tip = True
                break
            o_dead = out_count[other[-1]] == 0
            o_attached = out_count[other[0] ^ 1] == 1
            weak = o_dead and o_attached and len(other) <= max_tip_len
            if not weak:
                is_tip = True
                break
            o_key = chain_metrics(sidx)
            if o_key > my_key or (o_key == my_key and chain_spelling(sidx) < chain_spelling(idx)):
                is_tip = True
                break
        if is_tip:
            for u in ch:
                tips.add(g.kmer_at(u >> 1))
    return tips
