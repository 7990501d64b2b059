"""Corpus statistics, BoW-fidelity metrics, and two-corpus comparison.

The statistics table has nine rows: set count, per-set word/line/section
averages, corpus-global unique unigram/bigram/trigram counts, and the
abstract/concrete lexicon ratios. N-gram sets follow the line-local window
rule from :mod:`lyrecon.analysis`; the lexicon ratios pool every token in
the corpus into one stream rather than averaging per set.

Fidelity metrics tie generated text back to its BoW source: coverage is
the fraction of a track's vocabulary whose words appear among the stemmed
document tokens, and frequency fidelity is the Spearman rank correlation
(average ranks for ties) between BoW counts and stemmed-token counts over
the covered intersection.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from lyrecon.analysis import Lexicon, LyricDoc, lexicon_ratio, ngrams, stem
from lyrecon.bow import TrackBow, VocabTable
from lyrecon.errors import LyreconError

__all__ = [
    "ComparisonReport",
    "CorpusStats",
    "EmptyCorpus",
    "InsufficientOverlap",
    "RowDelta",
    "STAT_ROWS",
    "bow_coverage",
    "compare",
    "corpus_stats",
    "frequency_fidelity",
    "render_comparison_text",
    "render_comparison_tsv",
    "render_stats_text",
]


class EmptyCorpus(LyreconError):
    pass


class InsufficientOverlap(LyreconError):
    pass


@dataclass(frozen=True)
class CorpusStats:
    lyric_set_count: int
    avg_words_per_set: float
    avg_lines_per_set: float
    avg_sections_per_set: float
    unique_unigrams: int
    unique_bigrams: int
    unique_trigrams: int
    abstract_ratio: float
    concrete_ratio: float


# (field, report row label, integer-valued) in fixed report order.
STAT_ROWS: tuple[tuple[str, str, bool], ...] = (
    ("lyric_set_count", "Total Count of Lyrics Sets", True),
    ("avg_words_per_set", "Average Word Count per Set", False),
    ("avg_lines_per_set", "Average Line Count per Set", False),
    ("avg_sections_per_set", "Average Section Count per Set", False),
    ("unique_unigrams", "Total Count of Unique Unigrams", True),
    ("unique_bigrams", "Total Count of Unique Bigrams", True),
    ("unique_trigrams", "Total Count of Unique Trigrams", True),
    ("abstract_ratio", "Abstract Words Ratio", False),
    ("concrete_ratio", "Concrete Words Ratio", False),
)


def corpus_stats(
    docs: Sequence[LyricDoc], abstract_lex: Lexicon, concrete_lex: Lexicon
) -> CorpusStats:
    """The nine-row statistics for one corpus of lyric sets."""
    if not docs:
        raise EmptyCorpus("no lyric sets to evaluate")
    unigrams: set[str] = set()
    bigrams: set[tuple[str, ...]] = set()
    trigrams: set[tuple[str, ...]] = set()
    pooled_tokens: list[str] = []
    for doc in docs:
        for line in doc.tokens:
            unigrams.update(line)
            bigrams.update(ngrams(line, 2))
            trigrams.update(ngrams(line, 3))
            pooled_tokens.extend(line)
    n = len(docs)
    return CorpusStats(
        lyric_set_count=n,
        avg_words_per_set=sum(d.word_count for d in docs) / n,
        avg_lines_per_set=sum(d.line_count for d in docs) / n,
        avg_sections_per_set=sum(d.section_count for d in docs) / n,
        unique_unigrams=len(unigrams),
        unique_bigrams=len(bigrams),
        unique_trigrams=len(trigrams),
        abstract_ratio=lexicon_ratio(pooled_tokens, abstract_lex),
        concrete_ratio=lexicon_ratio(pooled_tokens, concrete_lex),
    )


def _doc_stem_counts(doc: LyricDoc) -> Counter[str]:
    return Counter(stem(tok) for tok in doc.token_stream())


def bow_coverage(doc: LyricDoc, track: TrackBow, vocab: VocabTable) -> float:
    """Fraction of the track's vocabulary found among stemmed doc tokens."""
    stems = set(_doc_stem_counts(doc))
    words = [vocab.word(index) for index in track.counts]
    covered = sum(1 for w in words if w in stems)
    return covered / len(words)


def _average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks, ties averaged."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    n = len(rx)
    mean_x = sum(rx) / n
    mean_y = sum(ry) / n
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(rx, ry))
    var_x = sum((a - mean_x) ** 2 for a in rx)
    var_y = sum((b - mean_y) ** 2 for b in ry)
    if var_x == 0.0 or var_y == 0.0:
        raise InsufficientOverlap("rank correlation undefined: constant ranks")
    return cov / (var_x * var_y) ** 0.5


def frequency_fidelity(doc: LyricDoc, track: TrackBow, vocab: VocabTable) -> float:
    """Spearman correlation of BoW counts vs stemmed-token counts.

    Computed over the vocabulary words that actually occur in the doc;
    fewer than two such words leaves the correlation undefined.
    """
    doc_counts = _doc_stem_counts(doc)
    bow_counts: list[float] = []
    text_counts: list[float] = []
    for index, count in track.counts.items():
        word = vocab.word(index)
        if doc_counts[word] > 0:
            bow_counts.append(float(count))
            text_counts.append(float(doc_counts[word]))
    if len(bow_counts) < 2:
        raise InsufficientOverlap(
            f"only {len(bow_counts)} vocabulary word(s) appear in the doc"
        )
    return _spearman(bow_counts, text_counts)


@dataclass(frozen=True)
class RowDelta:
    label: str
    left: float
    right: float
    abs_delta: float
    rel_delta: float | None  # None flags an undefined delta (right == 0)
    integer: bool


@dataclass(frozen=True)
class ComparisonReport:
    left: CorpusStats
    right: CorpusStats
    rows: tuple[RowDelta, ...]


def compare(left: CorpusStats, right: CorpusStats) -> ComparisonReport:
    """Per-row absolute and relative deltas; right is the denominator."""
    rows = []
    for field_name, label, integer in STAT_ROWS:
        lv = getattr(left, field_name)
        rv = getattr(right, field_name)
        rows.append(
            RowDelta(
                label=label,
                left=lv,
                right=rv,
                abs_delta=lv - rv,
                rel_delta=(lv - rv) / rv if rv != 0 else None,
                integer=integer,
            )
        )
    return ComparisonReport(left=left, right=right, rows=tuple(rows))


def _fmt(value: float, integer: bool) -> str:
    return f"{int(value):,}" if integer else f"{value:.2f}"


def render_stats_text(stats: CorpusStats, label: str = "Corpus") -> str:
    """One corpus as an aligned two-column table."""
    rows = [(row_label, _fmt(getattr(stats, field_name), integer))
            for field_name, row_label, integer in STAT_ROWS]
    name_width = max(len("Item"), max(len(r[0]) for r in rows))
    val_width = max(len(label), max(len(r[1]) for r in rows))
    lines = [f"{'Item':<{name_width}}  {label:>{val_width}}"]
    for name, value in rows:
        lines.append(f"{name:<{name_width}}  {value:>{val_width}}")
    return "\n".join(lines) + "\n"


def render_comparison_text(
    report: ComparisonReport,
    left_label: str = "Reconstructed",
    right_label: str = "Original",
) -> str:
    """Aligned three-column table: Item / left / right."""
    rows = [
        (row.label, _fmt(row.left, row.integer), _fmt(row.right, row.integer))
        for row in report.rows
    ]
    name_width = max(len("Item"), max(len(r[0]) for r in rows))
    lw = max(len(left_label), max(len(r[1]) for r in rows))
    rw = max(len(right_label), max(len(r[2]) for r in rows))
    lines = [f"{'Item':<{name_width}}  {left_label:>{lw}}  {right_label:>{rw}}"]
    for name, lv, rv in rows:
        lines.append(f"{name:<{name_width}}  {lv:>{lw}}  {rv:>{rw}}")
    return "\n".join(lines) + "\n"


def render_comparison_tsv(report: ComparisonReport) -> str:
    """Machine-readable rows: row, left, right, abs_delta, rel_delta."""
    lines = ["row\tleft\tright\tabs_delta\trel_delta"]
    for row in report.rows:
        if row.integer:
            left, right = str(int(row.left)), str(int(row.right))
            abs_delta = str(int(row.abs_delta))
        else:
            left, right = f"{row.left:.6f}", f"{row.right:.6f}"
            abs_delta = f"{row.abs_delta:.6f}"
        rel = "n/a" if row.rel_delta is None else f"{row.rel_delta:.6f}"
        lines.append(f"{row.label}\t{left}\t{right}\t{abs_delta}\t{rel}")
    return "\n".join(lines) + "\n"
