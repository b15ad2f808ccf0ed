"""Bibliographic records: the canonical JSONL format and a simplified dblp XML reader."""

from __future__ import annotations

import gzip
import html.entities
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator
from xml.parsers import expat

from coauthorcast.errors import ParseError

log = logging.getLogger(__name__)

DEFAULT_MAX_AUTHORS = 80


@dataclass(frozen=True)
class Publication:
    """One bibliographic record.

    Attributes
    ----------
    id : str
        Opaque record identifier.
    year : int
        Calendar year of publication.
    authors : tuple of str
        Author identifiers, in byline order, without duplicates.
    venue : str, optional
        Journal or proceedings name.
    line : int, optional
        Source line (JSONL) or byte offset (XML); not part of equality.
    """

    id: str
    year: int
    authors: tuple[str, ...]
    venue: str | None = None
    line: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Diagnostic:
    location: int | None
    message: str
    record_id: str | None = None

    def __str__(self):
        where = f"{self.location}: " if self.location is not None else ""
        rid = f" [{self.record_id}]" if self.record_id else ""
        return f"{where}{self.message}{rid}"


@dataclass
class IngestReport:
    """Counts collected while reading and filtering a corpus."""

    parsed: int = 0
    rejected: int = 0
    filtered: int = 0
    out_of_window: int = 0
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def note(self, location, message, record_id=None):
        diag = Diagnostic(location, message, record_id)
        self.diagnostics.append(diag)
        log.warning("%s", diag)

    def to_dict(self, max_diagnostics: int = 50) -> dict:
        return {
            "parsed": self.parsed,
            "rejected": self.rejected,
            "filtered": self.filtered,
            "out_of_window": self.out_of_window,
            "diagnostics": [str(d) for d in self.diagnostics[:max_diagnostics]],
            "diagnostics_total": len(self.diagnostics),
        }


def _normalize_authors(raw, location, record_id, report):
    authors = []
    seen = set()
    for name in raw:
        name = name.strip()
        if not name:
            raise ValueError("blank author identifier")
        if name in seen:
            if report is not None:
                report.note(location, f"duplicate author {name!r} dropped", record_id)
            continue
        seen.add(name)
        authors.append(name)
    return tuple(authors)


def _reject(message, location, record_id, *, strict, report, line_based=True):
    if strict:
        if line_based:
            raise ParseError(message, line=location)
        raise ParseError(message, offset=location)
    if report is not None:
        report.rejected += 1
        report.note(location, message, record_id)


def _lines(stream) -> Iterator[bytes | str]:
    if isinstance(stream, (str, Path)):
        path = Path(stream)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "rb") as fh:
            yield from fh
    else:
        yield from stream


def parse_jsonl(
    stream: IO[bytes] | Iterable[bytes | str] | str | Path,
    *,
    strict: bool = False,
    report: IngestReport | None = None,
    year_bounds: tuple[int, int] | None = None,
) -> list[Publication]:
    """Read canonical JSONL records.

    Bad lines raise :class:`ParseError` in strict mode; in lenient mode they
    are skipped and recorded in ``report``.
    """
    pubs = []
    for lineno, raw in enumerate(_lines(stream), start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError:
                _reject("invalid UTF-8", lineno, None, strict=strict, report=report)
                continue
        text = raw.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            _reject(f"malformed JSON ({exc.msg})", lineno, None, strict=strict, report=report)
            continue
        if not isinstance(obj, dict):
            _reject("record is not a JSON object", lineno, None, strict=strict, report=report)
            continue
        missing = [k for k in ("id", "year", "authors") if k not in obj]
        if missing:
            _reject(f"missing required field(s): {', '.join(missing)}", lineno,
                    obj.get("id"), strict=strict, report=report)
            continue
        rid, year, authors, venue = obj["id"], obj["year"], obj["authors"], obj.get("venue")
        if not isinstance(rid, str):
            _reject("field 'id' must be a string", lineno, None, strict=strict, report=report)
            continue
        if not isinstance(year, int) or isinstance(year, bool):
            _reject("field 'year' must be an integer", lineno, rid, strict=strict, report=report)
            continue
        if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
            _reject("field 'authors' must be an array of strings", lineno, rid,
                    strict=strict, report=report)
            continue
        if venue is not None and not isinstance(venue, str):
            _reject("field 'venue' must be a string", lineno, rid, strict=strict, report=report)
            continue
        try:
            authors = _normalize_authors(authors, lineno, rid, report)
        except ValueError as exc:
            _reject(str(exc), lineno, rid, strict=strict, report=report)
            continue
        if not authors:
            _reject("empty author list", lineno, rid, strict=strict, report=report)
            continue
        if year_bounds is not None and not year_bounds[0] <= year <= year_bounds[1]:
            _reject(f"year {year} outside corpus bounds {year_bounds[0]}-{year_bounds[1]}",
                    lineno, rid, strict=strict, report=report)
            continue
        pubs.append(Publication(rid, year, authors, venue, line=lineno))
    if report is not None:
        report.parsed += len(pubs)
    return pubs


def serialize_jsonl(pubs: Iterable[Publication]) -> bytes:
    """Canonical JSONL encoding (field order id, year, authors, venue)."""
    out = io.StringIO()
    for p in pubs:
        obj = {"id": p.id, "year": p.year, "authors": list(p.authors)}
        if p.venue is not None:
            obj["venue"] = p.venue
        out.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
        out.write("\n")
    return out.getvalue().encode("utf-8")


_RECORD_TAGS = ("article", "inproceedings")
_VENUE_TAGS = ("journal", "booktitle")


class _DblpHandler:
    def __init__(self, parser, tags, strict, report, sink):
        self.parser = parser
        self.tags = tags
        self.strict = strict
        self.report = report
        self.sink = sink
        self.depth = 0
        self.record = None  # (key, offset, depth)
        self.field = None
        self.text = []
        self.authors = []
        self.year = None
        self.venue = None

    def start(self, name, attrs):
        self.depth += 1
        if self.record is None:
            if name in self.tags:
                self.record = (attrs.get("key", ""), self.parser.CurrentByteIndex, self.depth)
                self.authors, self.year, self.venue = [], None, None
            return
        if self.depth == self.record[2] + 1 and name in ("author", "year") + _VENUE_TAGS:
            self.field = name
            self.text = []

    def chars(self, data):
        if self.field is not None:
            self.text.append(data)

    def skipped_entity(self, name, is_parameter_entity):
        if is_parameter_entity or self.field is None:
            return
        cp = html.entities.name2codepoint.get(name)
        if cp is None:
            self.text.append(f"&{name};")
        else:
            self.text.append(chr(cp))

    def end(self, name):
        if self.record is not None:
            if self.field is not None and name == self.field and self.depth == self.record[2] + 1:
                value = "".join(self.text).strip()
                if name == "author":
                    self.authors.append(value)
                elif name == "year":
                    self.year = value
                elif self.venue is None:
                    self.venue = value or None
                self.field = None
            elif self.depth == self.record[2]:
                self._emit()
                self.record = None
        self.depth -= 1

    def _emit(self):
        key, offset, _ = self.record
        if self.year is None:
            _reject("record has no <year>", offset, key, strict=self.strict,
                    report=self.report, line_based=False)
            return
        try:
            year = int(self.year)
        except ValueError:
            _reject(f"non-integer year {self.year!r}", offset, key, strict=self.strict,
                    report=self.report, line_based=False)
            return
        try:
            authors = _normalize_authors(self.authors, offset, key, self.report)
        except ValueError as exc:
            _reject(str(exc), offset, key, strict=self.strict, report=self.report,
                    line_based=False)
            return
        if not authors:
            _reject("empty author list", offset, key, strict=self.strict,
                    report=self.report, line_based=False)
            return
        self.sink.append(Publication(key, year, authors, self.venue, line=offset))


def parse_dblp_xml(
    stream: IO[bytes] | str | Path,
    *,
    strict: bool = False,
    report: IngestReport | None = None,
    tags: tuple[str, ...] = _RECORD_TAGS,
    chunk_size: int = 1 << 16,
) -> list[Publication]:
    """Stream ``article``/``inproceedings`` records out of dblp-style XML.

    Other elements (``www``, ``phdthesis``, ...) are skipped silently. Named
    HTML entities that the document's DTD would define (``&uuml;``) are
    decoded even though the DTD itself is never loaded. Malformed XML is
    fatal in both modes and reports the byte offset of the error.
    """
    if isinstance(stream, (str, Path)):
        path = Path(stream)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "rb") as fh:
            return parse_dblp_xml(fh, strict=strict, report=report, tags=tags,
                                  chunk_size=chunk_size)

    parser = expat.ParserCreate()
    parser.buffer_text = True
    parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
    pubs: list[Publication] = []
    handler = _DblpHandler(parser, tags, strict, report, pubs)
    parser.StartElementHandler = handler.start
    parser.EndElementHandler = handler.end
    parser.CharacterDataHandler = handler.chars
    parser.SkippedEntityHandler = handler.skipped_entity
    # Entity references are only "skipped" (not errors) when an external DTD
    # subset is declared; documents without a DOCTYPE get them as errors.
    try:
        while True:
            chunk = stream.read(chunk_size)
            if not chunk:
                parser.Parse(b"", True)
                break
            parser.Parse(chunk, False)
    except expat.ExpatError as exc:
        raise ParseError(f"invalid XML: {expat.ErrorString(exc.code)}",
                         offset=parser.ErrorByteIndex) from None
    if report is not None:
        report.parsed += len(pubs)
    return pubs


def filter_publications(pubs: Iterable[Publication], max_authors: int = DEFAULT_MAX_AUTHORS,
                        *, report: IngestReport | None = None) -> list[Publication]:
    """Drop publications with more than ``max_authors`` authors."""
    if max_authors < 1:
        raise ValueError("max_authors must be >= 1")
    pubs = list(pubs)
    kept = [p for p in pubs if len(p.authors) <= max_authors]
    if report is not None:
        report.filtered += len(pubs) - len(kept)
    return kept
