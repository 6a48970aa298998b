"""Byte-level byte-pair encoding: train, encode, decode.

The base vocabulary is the 256 byte values (ids 0..255). Training repeatedly
merges the most frequent adjacent id pair into a fresh id until the target
size is reached or no pair occurs at least twice; ids mint densely in training
order. Ties on frequency break to the lexicographically smallest (id, id)
pair so training is deterministic.

Encoding applies merges exhaustively in training-priority order (lowest merge
index first), which here is implemented as repeatedly merging the present pair
with the best rank. The two are equivalent because a merge's output id did not
exist when earlier merges were learned, so no earlier rule can ever consume it.

No pre-tokenization and no special tokens: pure bytes in, pure bytes out.
"""

import json
from dataclasses import dataclass, field

VOCAB_FILE_VERSION = 1

_BASE = 256


@dataclass
class Vocabulary:
    merges: list          # [(left_id, right_id, new_id)] in training order
    target_size: int
    exhausted: bool = False   # training stopped early: no pair occurred twice
    _ranks: dict = field(default_factory=dict, repr=False)
    _bytes: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._bytes = [bytes([i]) for i in range(_BASE)]
        self._ranks = {}
        for rank, (left, right, new_id) in enumerate(self.merges):
            if new_id != _BASE + rank:
                raise ValueError("merge ids must be dense and increasing")
            if left >= new_id or right >= new_id:
                raise ValueError("merge references an id that did not exist yet")
            self._bytes.append(self._bytes[left] + self._bytes[right])
            self._ranks[(left, right)] = (rank, new_id)

    @property
    def size(self) -> int:
        return _BASE + len(self.merges)

    def token_bytes(self, token_id: int) -> bytes:
        if not (0 <= token_id < self.size):
            raise ValueError(f"unknown token id {token_id}")
        return self._bytes[token_id]


def _pair_counts(ids) -> dict:
    counts = {}
    for pair in zip(ids, ids[1:]):
        counts[pair] = counts.get(pair, 0) + 1
    return counts


def _merge_pass(ids, left: int, right: int, new_id: int) -> list:
    """One greedy left-to-right pass replacing (left, right) with new_id."""
    out = []
    i = 0
    n = len(ids)
    while i < n:
        if i + 1 < n and ids[i] == left and ids[i + 1] == right:
            out.append(new_id)
            i += 2
        else:
            out.append(ids[i])
            i += 1
    return out


def train(corpus: bytes, target_size: int) -> Vocabulary:
    """Learn merges from raw bytes until target_size or frequencies die out."""
    if target_size < _BASE:
        raise ValueError(f"target_size must be >= {_BASE}")
    if not corpus:
        raise ValueError("corpus must be non-empty")
    ids = list(corpus)
    merges = []
    exhausted = False
    while _BASE + len(merges) < target_size:
        counts = _pair_counts(ids)
        if not counts:
            exhausted = True
            break
        best_count = max(counts.values())
        if best_count < 2:
            exhausted = True
            break
        best_pair = min(p for p, c in counts.items() if c == best_count)
        new_id = _BASE + len(merges)
        merges.append((best_pair[0], best_pair[1], new_id))
        ids = _merge_pass(ids, best_pair[0], best_pair[1], new_id)
    return Vocabulary(merges=merges, target_size=target_size, exhausted=exhausted)


def encode(vocab: Vocabulary, text: str) -> list:
    """UTF-8 bytes of text with every applicable merge applied."""
    ids = list(text.encode("utf-8"))
    return encode_bytes(vocab, ids)


def encode_bytes(vocab: Vocabulary, ids) -> list:
    ids = list(ids)
    ranks = vocab._ranks
    if not ranks:
        return ids
    while len(ids) >= 2:
        best = None
        for pair in zip(ids, ids[1:]):
            hit = ranks.get(pair)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = (hit[0], pair, hit[1])
        if best is None:
            break
        _, (left, right), new_id = best
        ids = _merge_pass(ids, left, right, new_id)
    return ids


def decode(vocab: Vocabulary, ids) -> str:
    """Token byte payloads concatenated, decoded as UTF-8.

    Invalid byte boundaries decode lossily with the replacement character;
    use decode_ex when the caller needs that flagged.
    """
    return decode_ex(vocab, ids)[0]


def decode_ex(vocab: Vocabulary, ids):
    """(text, valid_utf8): the flag is False when replacement was needed."""
    payload = b"".join(vocab.token_bytes(i) for i in ids)
    try:
        return payload.decode("utf-8"), True
    except UnicodeDecodeError:
        return payload.decode("utf-8", errors="replace"), False


# ---------------------------------------------------------------------------
# vocabulary file: JSON-lines, header first, then one merge per line


def save_vocab(path: str, vocab: Vocabulary) -> None:
    with open(path, "w") as fh:
        header = {
            "version": VOCAB_FILE_VERSION,
            "target_size": vocab.target_size,
            "exhausted": vocab.exhausted,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for left, right, new_id in vocab.merges:
            fh.write(json.dumps([left, right, new_id]) + "\n")


def load_vocab(path: str) -> Vocabulary:
    with open(path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if not lines:
        raise ValueError(f"empty vocabulary file: {path}")
    header = json.loads(lines[0])
    if not isinstance(header, dict) or header.get("version") != VOCAB_FILE_VERSION:
        raise ValueError(f"unsupported vocabulary file header in {path}")
    merges = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        if not (isinstance(rec, list) and len(rec) == 3):
            raise ValueError(f"malformed merge line in {path}: {ln!r}")
        merges.append((int(rec[0]), int(rec[1]), int(rec[2])))
    return Vocabulary(
        merges=merges,
        target_size=int(header["target_size"]),
        exhausted=bool(header.get("exhausted", False)),
    )
