"""Ingestion of time-stamped short texts: parsing, tokenizing, language tagging."""

from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

from .errors import InputError

LANGS = ("en", "de", "es")
UNKNOWN = "unknown"
FIELDS = ("id", "text", "created_at", "lang")

_URL_RE = re.compile(r"https?://\S*", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
# letters/digits, optionally joined by internal apostrophes
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    timestamp: int
    created_at: str
    lang: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass
class Corpus:
    records: list[TweetRecord] = field(default_factory=list)
    dedup_dropped: int = 0
    errors: list[RowError] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def lang_counts(self) -> dict[str, int]:
        counts = {lang: 0 for lang in (*LANGS, UNKNOWN)}
        for rec in self.records:
            counts[rec.lang] += 1
        return counts


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase word tokens.

    URLs and @-mentions are dropped, hashtags keep their body, and
    numbers survive (dates such as "2019" are meaningful terms).

    >>> tokenize("#FilmFest2019 is GREAT! http://t.co/x @fan")
    ['filmfest2019', 'is', 'great']
    """
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    return _TOKEN_RE.findall(text.lower())


def load_stopwords(lang: str) -> frozenset[str]:
    """Bundled stopword list for ``lang`` (one token per line)."""
    if lang not in LANGS:
        return frozenset()
    raw = resources.files("distread").joinpath(f"data/stopwords.{lang}.txt").read_text("utf-8")
    return frozenset(line.strip() for line in raw.splitlines() if line.strip())


def bundled_stopwords() -> dict[str, frozenset[str]]:
    return {lang: load_stopwords(lang) for lang in LANGS}


_STOPWORDS: dict[str, frozenset[str]] | None = None


def detect_language(tokens, tag: str | None = None) -> tuple[str, float]:
    """Return ``(lang, confidence)`` for a token list.

    An explicit ``tag`` always wins with confidence 1.0. Otherwise the
    language whose stopword list gets the most hits is chosen, with ties
    resolved in the order en, de, es.
    """
    if tag:
        tag = tag.strip().lower()
        return (tag if tag in LANGS else UNKNOWN), 1.0
    global _STOPWORDS
    if _STOPWORDS is None:
        _STOPWORDS = bundled_stopwords()
    tokens = list(tokens)
    if not tokens:
        return UNKNOWN, 0.0
    best, best_hits = UNKNOWN, 0
    for lang in LANGS:
        hits = sum(1 for tok in tokens if tok in _STOPWORDS[lang])
        if hits > best_hits:
            best, best_hits = lang, hits
    if best_hits == 0:
        return UNKNOWN, 0.0
    return best, best_hits / len(tokens)


def parse_timestamp(value: str) -> int:
    """ISO-8601 with explicit offset (or Z) to integer UTC epoch seconds."""
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(s)
    except ValueError as exc:
        raise ValueError(f"invalid ISO-8601 timestamp {value!r}") from exc
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return int(dt.astimezone(timezone.utc).timestamp())


def normalize_text(text: str) -> str:
    """Text key used for duplicate detection."""
    return _WS_RE.sub(" ", unicodedata.normalize("NFC", text)).strip()


def _make_record(row: dict) -> TweetRecord:
    text = row.get("text")
    created_at = row.get("created_at")
    if text is None or not isinstance(text, str):
        raise ValueError("missing text")
    if not created_at or not isinstance(created_at, str):
        raise ValueError("missing created_at")
    rid = row.get("id")
    if rid is None or rid == "":
        raise ValueError("missing id")
    ts = parse_timestamp(created_at)
    tokens = tokenize(text)
    lang, _ = detect_language(tokens, row.get("lang") or None)
    return TweetRecord(str(rid), text, ts, created_at, lang, tuple(tokens))


def _iter_rows(text: str, fmt: str):
    if fmt == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, None, f"invalid JSON: {exc.msg}"
                continue
            if not isinstance(row, dict):
                yield lineno, None, "row is not a JSON object"
                continue
            yield lineno, row, None
    elif fmt == "csv":
        reader = csv.DictReader(io.StringIO(text, newline=""))
        if reader.fieldnames is None:
            return
        missing = {"id", "text", "created_at"} - set(reader.fieldnames)
        if missing:
            raise InputError(f"csv header lacks columns: {', '.join(sorted(missing))}")
        for row in reader:
            yield reader.line_num, row, None
    else:
        raise InputError(f"unknown corpus format {fmt!r} (expected jsonl or csv)")


def parse_tweets(data: bytes, fmt: str = "jsonl", dedup: bool = True) -> Corpus:
    """Parse a JSONL or CSV byte stream into a time-sorted :class:`Corpus`.

    Rows that fail the schema land in ``Corpus.errors``; malformed UTF-8
    or an unknown format raise :class:`InputError`.
    """
    if fmt not in ("jsonl", "csv"):
        raise InputError(f"unknown corpus format {fmt!r} (expected jsonl or csv)")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"corpus is not valid UTF-8 (byte offset {exc.start})") from exc
    if text.startswith("﻿"):
        text = text[1:]

    records, errors = [], []
    for lineno, row, problem in _iter_rows(text, fmt):
        if problem is None:
            try:
                records.append(_make_record(row))
                continue
            except ValueError as exc:
                problem = str(exc)
        errors.append(RowError(lineno, problem))

    records.sort(key=lambda r: (r.timestamp, r.id))
    dropped = 0
    if dedup:
        seen, kept = set(), []
        for rec in records:
            key = normalize_text(rec.text)
            if key in seen:
                dropped += 1
                continue
            seen.add(key)
            kept.append(rec)
        records = kept
    return Corpus(records, dropped, errors)


def serialize_tweets(corpus: Corpus, fmt: str = "jsonl") -> bytes:
    """Inverse of :func:`parse_tweets` for the retained records."""
    rows = [
        {"id": r.id, "text": r.text, "created_at": r.created_at, "lang": r.lang}
        for r in corpus.records
    ]
    if fmt == "jsonl":
        return "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows).encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO(newline="")
        writer = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue().encode("utf-8")
    raise InputError(f"unknown corpus format {fmt!r} (expected jsonl or csv)")


def read_corpus(path, dedup: bool = True) -> Corpus:
    """Read a corpus file, choosing the format from its extension."""
    path = str(path)
    fmt = "csv" if path.lower().endswith(".csv") else "jsonl"
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc.strerror}") from exc
    return parse_tweets(data, fmt, dedup=dedup)
