"""Context-window extraction around term and phrase occurrences.

A window spans n tokens either side of an occurrence (2n+1 tokens for a
single term, 2n+len(phrase) for a phrase), clipped at document boundaries.
Every occurrence yields its own window; duplicates are kept.  The center
tokens count toward the window's content, so sum(counts.values()) == size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import PositionalIndex, phrase_occurrences


@dataclass(frozen=True)
class ContextWindow:
    """One occurrence's surrounding token bag.

    counts holds the full token multiset including the center occurrence;
    size is the clipped token span length (M_i in weighting formulas).
    """

    doc_id: str
    position: int
    counts: Dict[str, int]
    size: int

    def __post_init__(self):
        # Clipping can only shrink a window, never let counts drift from size.
        assert sum(self.counts.values()) == self.size


@dataclass
class WindowStats:
    """Aggregate statistics over one target's extracted windows.

    n_windows is N, windows_containing[t] is n(t), av_m the mean window
    size, max_f[i] the peak frequency inside window i, window_cf[t] the
    total count of t across windows, total_mass the grand token total G.
    """

    n_windows: int
    av_m: float
    max_f: List[int]
    windows_containing: Dict[str, int]
    window_cf: Dict[str, int]
    total_mass: int


@dataclass
class WindowSet:
    """Windows for one target term or phrase plus their cached statistics."""

    target: Tuple[str, ...]
    windows: List[ContextWindow]
    stats: WindowStats = field(init=False)
    _containing_ids: Dict[str, List[int]] = field(init=False, default_factory=dict)

    def __post_init__(self):
        containing: Dict[str, int] = {}
        cf: Dict[str, int] = {}
        max_f: List[int] = []
        total = 0
        for i, w in enumerate(self.windows):
            max_f.append(max(w.counts.values()) if w.counts else 0)
            total += w.size
            for term, c in w.counts.items():
                containing[term] = containing.get(term, 0) + 1
                cf[term] = cf.get(term, 0) + c
                self._containing_ids.setdefault(term, []).append(i)
        n = len(self.windows)
        self.stats = WindowStats(
            n_windows=n,
            av_m=(total / n) if n else 0.0,
            max_f=max_f,
            windows_containing=containing,
            window_cf=cf,
            total_mass=total,
        )

    @property
    def vocabulary(self) -> List[str]:
        return sorted(self.stats.windows_containing)

    def windows_for(self, term: str) -> List[int]:
        """Indices of windows containing `term`, in extraction order."""
        return self._containing_ids.get(term, [])


def extract_windows(
    index: PositionalIndex,
    target: Sequence[str],
    n: int = 5,
    max_windows: Optional[int] = None,
) -> WindowSet:
    """Collect the context windows of every occurrence of `target`.

    target is a term (length 1) or an exact ordered phrase.  Windows are
    gathered in document ingestion order, positions ascending within a
    document.  max_windows, when set, truncates after that many windows.
    """
    if not target:
        raise ValueError("extract_windows requires a non-empty target")
    if n < 0:
        raise ValueError("window half-width must be >= 0")
    target = tuple(target)
    span = len(target)
    windows: List[ContextWindow] = []
    if span == 1:
        plists = index.postings.get(target[0], [])
        occurrences = [(doc_id, p) for doc_id, positions in plists for p in positions]
    else:
        per_doc = phrase_occurrences(index, target)
        occurrences = []
        first = index.postings.get(target[0], [])
        position_of = {doc_id: positions for doc_id, positions in first}
        for doc_id in (d for d, _ in first):
            if doc_id not in per_doc:
                continue
            tokens = index.doc_tokens[doc_id]
            for p in position_of[doc_id]:
                if tuple(tokens[p : p + span]) == target:
                    occurrences.append((doc_id, p))
    for doc_id, p in occurrences:
        tokens = index.doc_tokens[doc_id]
        lo = max(0, p - n)
        hi = min(len(tokens), p + span + n)
        counts: Dict[str, int] = {}
        for t in tokens[lo:hi]:
            counts[t] = counts.get(t, 0) + 1
        windows.append(ContextWindow(doc_id=doc_id, position=p, counts=counts, size=hi - lo))
        if max_windows is not None and len(windows) >= max_windows:
            break
    return WindowSet(target=target, windows=windows)
