"""Ingestion, per-researcher timelines, and dataset slicing."""

from coauthorcast.corpus.records import (
    DEFAULT_MAX_AUTHORS,
    Diagnostic,
    IngestReport,
    Publication,
    filter_publications,
    parse_dblp_xml,
    parse_jsonl,
    serialize_jsonl,
)
from coauthorcast.corpus.timeline import AuthorTimeline, Panel, build_timelines
from coauthorcast.corpus.window import ROLES, DatasetSlice, WindowSpec, slice_dataset

__all__ = [
    "DEFAULT_MAX_AUTHORS", "Diagnostic", "IngestReport", "Publication", "filter_publications",
    "parse_dblp_xml", "parse_jsonl", "serialize_jsonl", "AuthorTimeline", "Panel",
    "build_timelines", "ROLES", "DatasetSlice", "WindowSpec", "slice_dataset",
]
