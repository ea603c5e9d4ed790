"""Ground-truth alignment, detection categories and correction metrics."""

from __future__ import annotations

import bisect
import io
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .candidates import levenshtein
from .errors import UsageError
from .features import ScoringResources, candidates_for, feature_top_k, score_matrix
from .text import PUNCTUATION, Token, span_text

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
FALSE_POSITIVE = "false_positive"
MISSED = "missed"

DEFAULT_NS = (1, 3, 5, 10)
REPORT_CATEGORIES = ("bounded", "unbounded", "true_positive", "false_positive", "total")

MAX_BLOCK = 3
RESYNC_START = 8
RESYNC_WINDOW = 48
ANCHOR = 3


@dataclass(frozen=True)
class GroundTruthError:
    """A mismatch between OCR text and ground truth.

    ``start``/``end`` locate the observed text in the OCR source;
    ``ocr_tokens`` and ``truth_tokens`` are half-open index ranges.
    """

    intended: str
    observed: str
    start: int
    end: int
    distance: int
    ocr_tokens: tuple = (0, 0)
    truth_tokens: tuple = (0, 0)

    @property
    def span(self):
        return (self.start, self.end)


# --- alignment -------------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def _block_cost(t_surf, o_surf):
    if not o_surf:
        return sum(len(s) for s in t_surf)
    if not t_surf:
        return sum(len(s) for s in o_surf)
    return levenshtein("".join(t_surf), "".join(o_surf))


def _cheap_cost(t_surf, o_surf):
    """Length-difference lower bound of :func:`_block_cost` (at least 1 for a mismatch)."""
    if t_surf == o_surf:
        return 0
    return max(1, abs(sum(map(len, t_surf)) - sum(map(len, o_surf))))


def _align_gap(t_surf, o_surf, cost=_block_cost, free_end=False):
    """Minimum-cost segmentation of a mismatch gap into blocks of at most
    MAX_BLOCK tokens per side.  Equal costs prefer more, smaller blocks.

    With ``free_end`` the path may stop once either side is used up.
    """
    T, O = len(t_surf), len(o_surf)
    inf = (float("inf"), 0)
    best = [[inf] * (O + 1) for _ in range(T + 1)]
    back = [[None] * (O + 1) for _ in range(T + 1)]
    best[0][0] = (0, 0)
    for i in range(T + 1):
        for j in range(O + 1):
            if i == 0 and j == 0:
                continue
            for a in range(min(i, MAX_BLOCK) + 1):
                for b in range(min(j, MAX_BLOCK) + 1):
                    if a == 0 and b == 0:
                        continue
                    prev = best[i - a][j - b]
                    if prev[0] == float("inf"):
                        continue
                    c = cost(tuple(t_surf[i - a:i]), tuple(o_surf[j - b:j]))
                    cand = (prev[0] + c, prev[1] - 1)
                    if cand < best[i][j]:
                        best[i][j] = cand
                        back[i][j] = (a, b)
    i, j = T, O
    if free_end:
        ends = [(T, y) for y in range(O + 1)] + [(x, O) for x in range(T)]
        i, j = min(ends, key=lambda e: best[e[0]][e[1]])
    blocks = []
    while i or j:
        a, b = back[i][j]
        blocks.append((i - a, i, j - b, j))
        i, j = i - a, j - b
    return blocks[::-1]


def _resync(t_surf, o_surf, i, j):
    """(di, dj) spanning the mismatch gap that starts at (i, j).

    The next ``w`` tokens of each stream are aligned with the block DP
    under a cheap length-based cost, and the gap ends where that alignment first
    settles into ANCHOR consecutive matches; the window doubles until such
    a run shows up.
    """
    T, O = len(t_surf), len(o_surf)
    w = RESYNC_START
    while True:
        ti, oj = min(T, i + w), min(O, j + w)
        blocks = _align_gap(t_surf[i:ti], o_surf[j:oj], _cheap_cost, free_end=True)
        run = 0
        for k, (a0, a1, b0, b1) in enumerate(blocks):
            same = a1 - a0 == 1 and b1 - b0 == 1 and t_surf[i + a0] == o_surf[j + b0]
            run = run + 1 if same else 0
            if run == ANCHOR and k + 1 > ANCHOR:
                g = blocks[k - ANCHOR + 1]
                return g[0], g[2]
        if (ti == T and oj == O) or w >= RESYNC_WINDOW:
            return ti - i, oj - j
        w *= 2


def align(ocr_tokens: Sequence[Token], truth_tokens: Sequence[Token]) -> list:
    """Align two token streams and report each mismatch block.

    Matching runs are taken greedily; each mismatch gap is segmented by a
    small DP whose blocks may be substitutions, splits, merges, insertions
    or deletions (up to three tokens per side), costed by character-level
    Levenshtein distance of the concatenated surfaces.  Blocks made only
    of punctuation are not reported.
    """
    if not truth_tokens:
        raise UsageError("ground-truth token stream is empty")
    t_surf = [t.surface for t in truth_tokens]
    o_surf = [t.surface for t in ocr_tokens]
    T, O = len(t_surf), len(o_surf)
    blocks = []
    i = j = 0
    while i < T or j < O:
        if i < T and j < O and t_surf[i] == o_surf[j]:
            i += 1
            j += 1
            continue
        if i >= T or j >= O:
            di, dj = T - i, O - j
        else:
            di, dj = _resync(t_surf, o_surf, i, j)
        for a0, a1, b0, b1 in _align_gap(t_surf[i:i + di], o_surf[j:j + dj]):
            blocks.append((i + a0, i + a1, j + b0, j + b1))
        i += di
        j += dj

    errors = []
    for a0, a1, b0, b1 in blocks:
        tt, oo = truth_tokens[a0:a1], ocr_tokens[b0:b1]
        if [t.surface for t in tt] == [o.surface for o in oo]:
            continue
        if all(t.kind == PUNCTUATION for t in list(tt) + list(oo)):
            continue
        intended, observed = span_text(tt), span_text(oo)
        if oo:
            start, end = oo[0].start, oo[-1].end
        else:
            pos = ocr_tokens[b0 - 1].end if b0 > 0 else 0
            start = end = pos
        errors.append(GroundTruthError(intended, observed, start, end,
                                       levenshtein(intended, observed), (b0, b1), (a0, a1)))
    return errors


# --- detection outcomes ----------------------------------------------------

@dataclass
class DetectionOutcome:
    category: str
    truth: Optional[GroundTruthError] = None
    detected: object = None
    counted: bool = True

    @property
    def intended(self):
        if self.category == FALSE_POSITIVE:
            return self.detected.surface
        return self.truth.intended


def _overlaps(a, b):
    return a[0] < b[1] and b[0] < a[1]


def categorize(detections: Sequence, truth: Sequence[GroundTruthError]) -> list:
    """Assign every detection and every ground-truth error one outcome.

    A detection whose span equals a truth span is *bounded*; one that only
    overlaps a truth span is *unbounded* (only the first unbounded
    detection of an error without a bounded one is ``counted``); one that
    overlaps nothing is a *false positive*.  Truth errors with no counted
    detection are *missed*.
    """
    truth = list(truth)
    order = sorted(range(len(truth)), key=lambda k: truth[k].span)
    starts = [truth[k].start for k in order]
    ends_max = np.maximum.accumulate([truth[k].end for k in order]) if order else []

    def overlapping(span):
        hits = []
        hi = bisect.bisect_left(starts, span[1])
        for pos in range(hi - 1, -1, -1):
            if ends_max[pos] <= span[0]:
                break
            k = order[pos]
            if _overlaps(truth[k].span, span):
                hits.append(k)
        return sorted(hits, key=lambda k: truth[k].span)

    det_hits = [overlapping(d.span) for d in detections]
    has_bounded = set()
    for d, hits in zip(detections, det_hits):
        for k in hits:
            if truth[k].span == d.span:
                has_bounded.add(k)

    outcomes = []
    claimed = set()
    for d, hits in zip(detections, det_hits):
        exact = [k for k in hits if truth[k].span == d.span]
        if exact:
            outcomes.append(DetectionOutcome(BOUNDED, truth[exact[0]], d))
        elif hits:
            k = hits[0]
            counted = k not in has_bounded and k not in claimed
            if counted:
                claimed.add(k)
            outcomes.append(DetectionOutcome(UNBOUNDED, truth[k], d, counted))
        else:
            outcomes.append(DetectionOutcome(FALSE_POSITIVE, None, d))
    for k, err in enumerate(truth):
        if k not in has_bounded and k not in claimed:
            outcomes.append(DetectionOutcome(MISSED, err, None))
    return outcomes


def count_correct_words(ocr_tokens: Sequence[Token], truth: Sequence[GroundTruthError]) -> int:
    """Non-punctuation OCR tokens that overlap no ground-truth error."""
    spans = sorted(t.span for t in truth if t.end > t.start)
    starts = [s for s, _ in spans]
    n = 0
    for tok in ocr_tokens:
        if tok.kind == PUNCTUATION:
            continue
        k = bisect.bisect_left(starts, tok.end)
        if k > 0 and spans[k - 1][1] > tok.start:
            continue
        n += 1
    return n


@dataclass
class DetectionSummary:
    bounded: int
    unbounded: int
    false_positive: int
    missed: int
    correct_words: int

    @property
    def n_truth(self):
        return self.bounded + self.unbounded + self.missed

    @property
    def confusion(self):
        """[[error detected, error missed], [correct detected, correct passed]]."""
        return [[self.bounded + self.unbounded, self.missed],
                [self.false_positive, self.correct_words - self.false_positive]]

    def _rate(self, k):
        return k / self.n_truth if self.n_truth else 0.0

    @property
    def recall(self):
        return self._rate(self.bounded + self.unbounded)

    @property
    def bounded_recall(self):
        return self._rate(self.bounded)

    @property
    def unbounded_recall(self):
        return self._rate(self.unbounded)


def summarize_detection(outcomes: Sequence[DetectionOutcome], correct_words: int) -> DetectionSummary:
    c = {BOUNDED: 0, UNBOUNDED: 0, FALSE_POSITIVE: 0, MISSED: 0}
    for o in outcomes:
        if o.counted:
            c[o.category] += 1
    return DetectionSummary(c[BOUNDED], c[UNBOUNDED], c[FALSE_POSITIVE], c[MISSED], correct_words)


# --- correction metrics ----------------------------------------------------

def precision_at(ranked: Sequence[Sequence[str]], intended: Sequence[str], ns=DEFAULT_NS) -> dict:
    """Fraction of errors whose intended word is in the top ``n`` candidates."""
    if len(ranked) != len(intended):
        raise UsageError("ranked lists and intended words differ in length")
    total = len(intended)
    out = {}
    for n in ns:
        hits = sum(1 for r, w in zip(ranked, intended) if w in list(r)[:n])
        out[n] = hits / total if total else 0.0
    return out


def category_groups(categories: Sequence[str]) -> dict:
    """Indices per report category (true_positive = bounded + unbounded)."""
    groups = {c: [] for c in REPORT_CATEGORIES}
    for i, c in enumerate(categories):
        groups[c].append(i)
        if c in (BOUNDED, UNBOUNDED):
            groups["true_positive"].append(i)
        groups["total"].append(i)
    return groups


def precision_by_category(ranked, intended, categories, ns=DEFAULT_NS) -> dict:
    out = {}
    for cat, idx in category_groups(categories).items():
        out[cat] = (len(idx), precision_at([ranked[i] for i in idx], [intended[i] for i in idx], ns))
    return out


class _ErrorView:
    """Scores of an error's full candidate set, computed once."""

    def __init__(self, item, resources, top_k):
        cands = candidates_for(item.error.surface, resources)
        self.terms = cands.terms
        self.matrix = score_matrix(item.error, cands, resources)
        self.per_feature = feature_top_k(self.terms, self.matrix, top_k)
        self.in_scope = levenshtein(item.intended, item.error.surface) <= resources.delta

    @property
    def pool(self):
        return set().union(*self.per_feature) if self.per_feature else set()


def coverage_upper_bound(labeled: Sequence, resources: ScoringResources, top_k: int = 10) -> dict:
    """Per category: (located, fraction of all errors, fraction of in-scope errors).

    An error is located when its intended word lies in the union of every
    feature's top-k candidates; in scope means the intended word is within
    ``delta`` edits of the error surface.
    """
    views = [_ErrorView(item, resources, top_k) for item in labeled]
    located = [item.intended in v.pool for item, v in zip(labeled, views)]
    out = {}
    for cat, idx in category_groups([item.category for item in labeled]).items():
        n_loc = sum(located[i] for i in idx)
        scope = [i for i in idx if views[i].in_scope]
        out[cat] = (n_loc, n_loc / len(idx) if idx else 0.0,
                    sum(located[i] for i in scope) / len(scope) if scope else 0.0)
    return out


def feature_distinctiveness(labeled: Sequence, resources: ScoringResources, top_k: int = 10) -> dict:
    """Per category, a (features x features) count table.

    ``table[f, c - 1]`` counts errors whose intended word is in feature
    ``f``'s top-k and in the top-k of exactly ``c`` features overall.
    """
    names = resources.feature_names
    F = len(names)
    views = [_ErrorView(item, resources, top_k) for item in labeled]
    out = {}
    for cat, idx in category_groups([item.category for item in labeled]).items():
        table = np.zeros((F, F), dtype=np.int64)
        for i in idx:
            hit = [labeled[i].intended in s for s in views[i].per_feature]
            c = sum(hit)
            for f in range(F):
                if hit[f]:
                    table[f, c - 1] += 1
        out[cat] = table
    return out


def distinctiveness_tsv(tables: dict, names: Sequence[str]) -> str:
    buf = io.StringIO()
    F = len(names)
    buf.write("category\tfeature\t" + "\t".join(f"located_by_{c}" for c in range(1, F + 1)) + "\n")
    for cat, table in tables.items():
        for f, name in enumerate(names):
            buf.write(f"{cat}\t{name}\t" + "\t".join(str(int(v)) for v in table[f]) + "\n")
    return buf.getvalue()


@dataclass
class MetricsReport:
    detection: DetectionSummary
    correction: dict = field(default_factory=dict)
    coverage: dict = field(default_factory=dict)
    ns: tuple = DEFAULT_NS

    def to_tsv(self) -> str:
        d = self.detection
        lines = ["section\tkey\tvalue"]
        lines += [
            f"detection\terror_detected\t{d.confusion[0][0]}",
            f"detection\terror_missed\t{d.confusion[0][1]}",
            f"detection\tcorrect_detected\t{d.confusion[1][0]}",
            f"detection\tcorrect_passed\t{d.confusion[1][1]}",
            f"detection\tbounded\t{d.bounded}",
            f"detection\tunbounded\t{d.unbounded}",
            f"detection\trecall_total\t{d.recall:.6f}",
            f"detection\trecall_bounded\t{d.bounded_recall:.6f}",
            f"detection\trecall_unbounded\t{d.unbounded_recall:.6f}",
        ]
        for cat, (count, pn) in self.correction.items():
            lines.append(f"correction\t{cat}.count\t{count}")
            for n in self.ns:
                lines.append(f"correction\t{cat}.P@{n}\t{pn[n]:.6f}")
        for cat, (n_loc, all_pct, scope_pct) in self.coverage.items():
            lines.append(f"coverage\t{cat}.located\t{n_loc}")
            lines.append(f"coverage\t{cat}.among_all\t{all_pct:.6f}")
            lines.append(f"coverage\t{cat}.in_scope\t{scope_pct:.6f}")
        return "\n".join(lines) + "\n"

    def format_text(self) -> str:
        d = self.detection
        c = d.confusion
        out = [
            "Detection confusion (rows: actual, columns: model)",
            f"{'':>10} {'error':>9} {'correct':>9} {'total':>9}",
            f"{'error':>10} {c[0][0]:>9} {c[0][1]:>9} {sum(c[0]):>9}",
            f"{'correct':>10} {c[1][0]:>9} {c[1][1]:>9} {sum(c[1]):>9}",
            f"recall: total {d.recall:.4f}  bounded {d.bounded_recall:.4f}  unbounded {d.unbounded_recall:.4f}",
        ]
        if self.correction:
            out.append("")
            out.append(f"{'category':<15} {'count':>6} " + " ".join(f"{'P@' + str(n):>7}" for n in self.ns))
            for cat, (count, pn) in self.correction.items():
                out.append(f"{cat:<15} {count:>6} " + " ".join(f"{pn[n]:>7.4f}" for n in self.ns))
        if self.coverage:
            out.append("")
            out.append(f"{'category':<15} {'located':>8} {'all':>8} {'in-scope':>9}")
            for cat, (n_loc, a, s) in self.coverage.items():
                out.append(f"{cat:<15} {n_loc:>8} {a:>8.2%} {s:>9.2%}")
        return "\n".join(out) + "\n"
