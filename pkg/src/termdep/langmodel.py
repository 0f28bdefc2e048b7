"""Smoothed unigram language models, model combination, and KL divergence.

Two smoothers: add-one (Laplace) and Simple Good-Turing via the
Gale-Sampson procedure.  A phrase's model is the combination of its
per-term models under one of four rules; query and perturbation models
share the union vocabulary of both phrases' context windows, so every
divergence is computed over a common, strictly positive event space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

SMOOTHINGS = ("laplace", "sgt")
COMBINATIONS = ("qsum", "qavg", "mult", "median")


@dataclass
class SmoothedLM:
    """A probability distribution over a vocabulary plus an unseen reserve.

    prob covers the model's vocabulary and sums, together with
    unseen_mass, to 1.  unseen_prob is the probability handed to a single
    out-of-vocabulary word; for the Good-Turing model the reserve is split
    evenly over however many unseen words a comparison introduces, so
    callers use prob_of(word, n_unseen) during alignment.
    """

    method: str
    prob: Dict[str, float]
    unseen_mass: float
    unseen_prob: float
    diagnostics: List[str] = field(default_factory=list)

    @property
    def vocabulary(self) -> Set[str]:
        return set(self.prob)

    def prob_of(self, word: str, n_unseen: int = 1) -> float:
        p = self.prob.get(word)
        if p is not None:
            return p
        if self.method == "sgt" and n_unseen > 0:
            return self.unseen_mass / n_unseen
        return self.unseen_prob


@dataclass(frozen=True)
class FreqOfFreq:
    """Frequency-of-frequencies table: ff[r] counts terms occurring r times."""

    ff: Dict[int, int]
    c_q: int

    @property
    def ff_1(self) -> int:
        return self.ff.get(1, 0)


def freq_of_freq(counts: Dict[str, int]) -> FreqOfFreq:
    ff: Dict[int, int] = {}
    total = 0
    for c in counts.values():
        if c < 1:
            raise ValueError(f"counts must be >= 1, got {c}")
        ff[c] = ff.get(c, 0) + 1
        total += c
    return FreqOfFreq(ff=ff, c_q=total)


def laplace_lm(counts: Dict[str, int], vocabulary: Iterable[str]) -> SmoothedLM:
    """Add-one estimates over `vocabulary`: P(w) = (c_w + 1)/(C + V).

    The vocabulary must cover the counts' support; its size V makes the
    distribution sum to exactly 1 over the vocabulary, and any word beyond
    it gets unseen_prob = 1/(C + V).
    """
    vocab = set(vocabulary)
    if not vocab:
        raise ValueError("laplace_lm requires a non-empty vocabulary")
    missing = set(counts) - vocab
    if missing:
        raise ValueError(f"vocabulary must cover counts; missing {sorted(missing)[:3]}")
    c = sum(counts.values())
    denom = c + len(vocab)
    prob = {w: (counts.get(w, 0) + 1) / denom for w in vocab}
    return SmoothedLM(
        method="laplace", prob=prob, unseen_mass=0.0, unseen_prob=1.0 / denom
    )


def _gale_sampson_smoother(ff: Dict[int, int]):
    """Fit S(r) = exp(a + b ln r) to the Z-transformed ff table.

    Z averages each N_r over the gap to its neighbouring occupied ranks
    (first rank's lower neighbour is 0; the last rank's upper neighbour is
    mirrored as 2r - q).  A single occupied rank leaves the slope
    unidentifiable; it degrades to the constant fit b = 0.
    """
    ranks = sorted(ff)
    zs: List[float] = []
    for idx, r in enumerate(ranks):
        q = ranks[idx - 1] if idx > 0 else 0
        t = ranks[idx + 1] if idx + 1 < len(ranks) else 2 * r - q
        zs.append(ff[r] / (0.5 * (t - q)))
    xs = [math.log(r) for r in ranks]
    ys = [math.log(z) for z in zs]
    n = len(ranks)
    if n == 1:
        a, b = ys[0], 0.0
    else:
        mean_x = math.fsum(xs) / n
        mean_y = math.fsum(ys) / n
        sxx = math.fsum((x - mean_x) ** 2 for x in xs)
        if sxx == 0.0:
            a, b = mean_y, 0.0
        else:
            b = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sxx
            a = mean_y - b * mean_x
    return lambda r: math.exp(a + b * math.log(r))


def sgt_lm(counts: Dict[str, int], vocabulary: Optional[Iterable[str]] = None) -> SmoothedLM:
    """Simple Good-Turing estimates from a count multiset.

    Expected counts come from the Turing estimates (r+1)N_{r+1}/N_r until
    they stop differing significantly (1.96 sigma) from the fitted
    (r+1)S(r+1)/S(r), or N_{r+1} hits zero; after the switch only the fit
    is used.  Raw seen probabilities r*/C and the raw unseen reserve
    ff_1/C are then renormalized over their common total so everything
    sums to 1.  Without hapaxes the unseen reserve would be zero, so the
    model falls back to Laplace (with a diagnostic) over `vocabulary` or,
    failing that, the counts' own support.
    """
    if not counts:
        raise ValueError("sgt_lm requires at least one nonzero count")
    table = freq_of_freq(counts)
    if table.ff_1 == 0:
        vocab = set(vocabulary) if vocabulary is not None else set(counts)
        lm = laplace_lm(counts, vocab | set(counts))
        lm.diagnostics.append("sgt: no hapax legomena; fell back to laplace")
        return lm
    ff = table.ff
    smoother = _gale_sampson_smoother(ff)
    r_star: Dict[int, float] = {}
    switched = False
    for r in sorted(ff):
        n_r = ff[r]
        n_r1 = ff.get(r + 1, 0)
        lgt = (r + 1) * smoother(r + 1) / smoother(r)
        if not switched and n_r1 > 0:
            turing = (r + 1) * n_r1 / n_r
            sigma = math.sqrt((r + 1) ** 2 * (n_r1 / n_r**2) * (1.0 + n_r1 / n_r))
            if abs(turing - lgt) > 1.96 * sigma:
                r_star[r] = turing
                continue
        switched = True
        r_star[r] = lgt
    c_q = table.c_q
    raw = {w: r_star[c] / c_q for w, c in counts.items()}
    raw_unseen = table.ff_1 / c_q
    total = raw_unseen + math.fsum(raw.values())
    prob = {w: v / total for w, v in raw.items()}
    unseen_mass = raw_unseen / total
    return SmoothedLM(
        method="sgt", prob=prob, unseen_mass=unseen_mass, unseen_prob=unseen_mass
    )


def aligned_probs(model: SmoothedLM, vocabulary: Sequence[str]) -> List[float]:
    """Model probabilities over an ordered comparison vocabulary.

    Out-of-vocabulary words share the model's unseen reserve (split evenly
    for the Good-Turing reserve, per-word add-one mass for Laplace); the
    aligned vector is renormalized so it is a proper distribution over
    exactly this vocabulary.
    """
    n_unseen = sum(1 for w in vocabulary if w not in model.prob)
    values = [model.prob_of(w, n_unseen) for w in vocabulary]
    total = math.fsum(values)
    if total <= 0.0:
        raise ValueError("aligned model has no probability mass")
    return [v / total for v in values]


def _quantile_band(values: Sequence[float]) -> Tuple[float, float]:
    """Inclusive [Q1, Q3] with linear interpolation between order stats."""
    s = sorted(values)
    n = len(s)

    def at(q: float) -> float:
        pos = q * (n - 1)
        lo = int(math.floor(pos))
        hi = int(math.ceil(pos))
        if lo == hi:
            return s[lo]
        frac = pos - lo
        return s[lo] * (1.0 - frac) + s[hi] * frac

    return at(0.25), at(0.75)


def combine_term_lms(
    models: Sequence[SmoothedLM],
    method: str,
    vocabulary: Optional[Iterable[str]] = None,
) -> SmoothedLM:
    """Merge per-term models into one distribution over a shared vocabulary.

    qsum / qavg: a model contributes a word's value only when that value
    lies inside the model's own interquartile band (outlier suppression);
    per-word contributions are summed or averaged, and words left with no
    contributor get the smallest positive combined value.  mult multiplies
    per-word values; median takes the per-word median.  The result is
    renormalized to sum to 1.
    """
    if not models:
        raise ValueError("combine_term_lms requires at least one model")
    if method not in COMBINATIONS:
        raise ValueError(f"unknown combination method {method!r}")
    if vocabulary is None:
        vocab_set: Set[str] = set()
        for m in models:
            vocab_set |= m.vocabulary
        vocab = sorted(vocab_set)
    else:
        vocab = sorted(set(vocabulary))
    if not vocab:
        raise ValueError("combination vocabulary is empty")
    columns = [aligned_probs(m, vocab) for m in models]
    n_words = len(vocab)
    if method == "mult":
        combined = [math.prod(col[i] for col in columns) for i in range(n_words)]
    elif method == "median":
        combined = []
        for i in range(n_words):
            vals = sorted(col[i] for col in columns)
            mid = len(vals) // 2
            combined.append(
                vals[mid] if len(vals) % 2 else (vals[mid - 1] + vals[mid]) / 2.0
            )
    else:
        bands = [_quantile_band(col) for col in columns]
        combined = []
        for i in range(n_words):
            contribs = [
                col[i]
                for col, (q1, q3) in zip(columns, bands)
                if q1 <= col[i] <= q3
            ]
            if not contribs:
                combined.append(0.0)
            elif method == "qsum":
                combined.append(math.fsum(contribs))
            else:
                combined.append(math.fsum(contribs) / len(contribs))
        positive = [v for v in combined if v > 0.0]
        if not positive:
            raise ValueError("quantile combination produced no contributions")
        floor = min(positive)
        combined = [v if v > 0.0 else floor for v in combined]
    total = math.fsum(combined)
    prob = {w: v / total for w, v in zip(vocab, combined)}
    floor_prob = min(prob.values())
    return SmoothedLM(
        method=models[0].method, prob=prob, unseen_mass=0.0, unseen_prob=floor_prob
    )


def kld(p: SmoothedLM, q: SmoothedLM, vocabulary: Optional[Iterable[str]] = None) -> float:
    """Kullback-Leibler divergence sum_w P(w) log(P(w)/Q(w)), natural log.

    Both models are aligned on the given vocabulary (default: union of
    their vocabularies) so every event has positive probability on both
    sides.
    """
    if vocabulary is None:
        vocab = sorted(p.vocabulary | q.vocabulary)
    else:
        vocab = sorted(set(vocabulary))
    pp = aligned_probs(p, vocab)
    qq = aligned_probs(q, vocab)
    for name, vals in (("p", pp), ("q", qq)):
        for v in vals:
            if v <= 0.0:
                raise ValueError(f"{name} assigns non-positive probability")
    return math.fsum(a * math.log(a / b) for a, b in zip(pp, qq))
