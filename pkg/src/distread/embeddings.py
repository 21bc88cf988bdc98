"""Word-vector tables, orthogonal Procrustes alignment and CSLS retrieval."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputError
from .linalg import svd


class EmbeddingTable:
    """Immutable token -> vector table backed by one dense matrix."""

    def __init__(self, tokens, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise InputError("embedding matrix must be 2-D")
        tokens = list(tokens)
        if len(tokens) != matrix.shape[0]:
            raise InputError(f"{len(tokens)} tokens for {matrix.shape[0]} rows")
        vocab = {}
        for i, tok in enumerate(tokens):
            if tok in vocab:
                raise InputError(f"duplicate token {tok!r}")
            vocab[tok] = i
        self.tokens = tokens
        self.vocab = vocab
        self.matrix = matrix
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token.lower() in self.vocab

    def lookup(self, token):
        """Row for ``token`` (lowercased) or ``None`` when out of vocabulary."""
        idx = self.vocab.get(token.lower())
        return None if idx is None else self.matrix[idx]

    def embed(self, tokens):
        """Stack vectors of the in-vocabulary tokens; OOV tokens are skipped."""
        rows = [self.vocab[t.lower()] for t in tokens if t.lower() in self.vocab]
        return self.matrix[rows]

    def normalize_rows(self) -> "EmbeddingTable":
        norms = np.linalg.norm(self.matrix, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            raise InputError(f"cannot normalize zero vector for {self.tokens[zero[0]]!r}")
        return EmbeddingTable(self.tokens, self.matrix / norms[:, None])

    def merge(self, other: "EmbeddingTable") -> "EmbeddingTable":
        """Union of two tables in the same space; rows already present win."""
        if other.dim != self.dim:
            raise InputError(f"cannot merge dim {other.dim} into dim {self.dim}")
        extra = [i for i, t in enumerate(other.tokens) if t not in self.vocab]
        return EmbeddingTable(
            self.tokens + [other.tokens[i] for i in extra],
            np.vstack([self.matrix, other.matrix[extra]]),
        )


def lookup(table: EmbeddingTable, token: str):
    return table.lookup(token)


def load_embeddings(stream) -> EmbeddingTable:
    """Parse the text vector format.

    The first line may be a ``"N D"`` header; without it, the dimension is
    taken from the first row.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    try:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError("embedding file is not valid UTF-8") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    expected_n = None
    start = 0
    if lines:
        head = lines[0].split()
        if len(head) == 2 and all(h.isdigit() for h in head):
            expected_n, dim = int(head[0]), int(head[1])
            start = 1
        else:
            dim = len(head) - 1
    tokens, rows = [], []
    seen = set()
    for lineno in range(start, len(lines)):
        parts = lines[lineno].rstrip("\r").split(" ")
        parts = [p for p in parts if p != ""]
        if not parts:
            continue
        tok, values = parts[0], parts[1:]
        if len(values) != dim:
            raise InputError(
                f"line {lineno + 1}: expected {dim} values for {tok!r}, got {len(values)}"
            )
        if tok in seen:
            raise InputError(f"line {lineno + 1}: duplicate token {tok!r}")
        seen.add(tok)
        try:
            rows.append([float(v) for v in values])
        except ValueError as exc:
            raise InputError(f"line {lineno + 1}: {exc}") from exc
        tokens.append(tok)
    if expected_n is not None and expected_n != len(tokens):
        raise InputError(f"header declares {expected_n} rows, file has {len(tokens)}")
    if not tokens and expected_n is None:
        raise InputError("embedding file is empty")
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingTable(tokens, matrix)


def read_embeddings(path) -> EmbeddingTable:
    try:
        with open(path, "rb") as fh:
            return load_embeddings(fh)
    except OSError as exc:
        raise InputError(f"cannot read embeddings {path}: {exc.strerror}") from exc


def write_embeddings(table: EmbeddingTable, stream):
    """Write ``table`` in the text format, with header, using ``repr`` floats."""
    stream.write(f"{len(table)} {table.dim}\n")
    for tok, row in zip(table.tokens, table.matrix):
        stream.write(tok + " " + " ".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class OrthogonalMap:
    W: np.ndarray
    source_lang: str = "unknown"
    target_lang: str = "unknown"

    def apply(self, vectors):
        """Map row vectors: each ``x`` becomes ``W @ x``."""
        return np.asarray(vectors) @ self.W.T

    def apply_table(self, table: EmbeddingTable) -> EmbeddingTable:
        return EmbeddingTable(table.tokens, self.apply(table.matrix))

    def residual(self) -> float:
        """Max-abs deviation of ``W.T @ W`` from the identity."""
        return float(np.max(np.abs(self.W.T @ self.W - np.eye(self.W.shape[0]))))


def load_dictionary(stream):
    """Read ``source target`` pairs, one per line, dropping duplicates."""
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    pairs, seen = [], set()
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise InputError(f"dictionary line {lineno}: expected 2 tokens, got {len(parts)}")
        pair = (parts[0], parts[1])
        if pair not in seen:
            seen.add(pair)
            pairs.append(pair)
    return pairs


def dictionary_matrices(pairs, source: EmbeddingTable, target: EmbeddingTable):
    """Paired rows ``(X, Y)`` for the dictionary entries present in both tables."""
    src, trg = [], []
    for s, t in pairs:
        if s in source.vocab and t in target.vocab:
            src.append(source.vocab[s])
            trg.append(target.vocab[t])
    return source.matrix[src], target.matrix[trg]


def procrustes_align(X, Y, source_lang="unknown", target_lang="unknown") -> OrthogonalMap:
    """Orthogonal ``W`` minimizing ``sum ||W x_i - y_i||^2`` over paired rows.

    With ``Y.T @ X = U S V.T`` the optimum is ``W = U V.T``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape != Y.shape:
        raise InputError(f"paired rows differ in shape: {X.shape} vs {Y.shape}")
    if X.shape[0] < 1:
        raise InputError("procrustes needs at least one dictionary pair")
    M = Y.T @ X
    U, s, V = svd(M)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateError("dictionary spans nothing: cross-covariance has rank 0")
    return OrthogonalMap(U @ V.T, source_lang, target_lang)


def csls_scores(query, table: EmbeddingTable, k: int = 10, source: EmbeddingTable | None = None):
    """CSLS of one query vector against every row of ``table``.

    ``2 cos(x, y) - r_T(y) - r_S(x)``: ``r_S(x)`` is the mean cosine of the
    query to its ``k`` nearest table rows, ``r_T(y)`` the mean cosine of a
    table row to its ``k`` nearest rows of the query space ``source``
    (``table`` itself when not given). All rows are assumed unit length.
    """
    if len(table) == 0:
        raise InputError("csls over an empty table")
    if k < 1:
        raise InputError("csls neighborhood size must be >= 1")
    source = table if source is None else source
    x = np.asarray(query, dtype=np.float64)
    x = x / np.linalg.norm(x)
    cos = table.matrix @ x
    r_s = _mean_topk(cos[None, :], k)[0]
    r_t = _mean_topk(table.matrix @ source.matrix.T, k)
    return 2.0 * cos - r_t - r_s


def _mean_topk(sims, k):
    k = min(k, sims.shape[1])
    part = np.partition(sims, sims.shape[1] - k, axis=1)[:, -k:]
    return part.mean(axis=1)


def csls_neighbors(query, table: EmbeddingTable, k: int = 10, source=None, top=None):
    """Table tokens ranked by CSLS to ``query``; ties fall back to token order."""
    scores = csls_scores(query, table, k, source)
    order = sorted(range(len(table)), key=lambda i: (-scores[i], table.tokens[i]))
    ranked = [table.tokens[i] for i in order]
    return ranked if top is None else ranked[:top]
