"""Character n-gram naive-Bayes language identifier.

Multinomial naive Bayes with add-alpha smoothing over character n-grams
(orders 1-3 by default), one multinomial per n-gram order.  Each line is
wrapped in a single boundary marker on both sides so word-initial and final
cues are captured.  Per order, the denominator reserves one smoothed slot
for unseen n-grams:

    P(g | lang) = (count(lang, g) + alpha) / (N_lang + alpha * (V + 1))

where V is the number of distinct n-grams of that order observed across all
languages, so observed probabilities plus the single unseen floor sum to 1
exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import ALL_LANGS, SentencePair, TARGET_LANG
from .errors import ConfigError, DataError
from .textnorm import DropReason, FilterDecision

BOUNDARY = "\x02"  # control character; stripped from corpus text by cleaning
DEFAULT_ORDERS = (1, 2, 3)


def extract_ngrams(text: str, orders: tuple[int, ...]) -> list[str]:
    padded = BOUNDARY + text + BOUNDARY
    grams = []
    for n in orders:
        grams.extend(padded[i : i + n] for i in range(len(padded) - n + 1))
    return grams


@dataclass(frozen=True)
class LangIdModel:
    languages: tuple[str, ...]
    orders: tuple[int, ...]
    alpha: float
    line_counts: dict[str, int]
    ngram_counts: dict[str, dict[str, int]]
    # derived tables
    _log_priors: dict[str, float] = field(init=False, repr=False, compare=False)
    _log_smoothed: dict[str, dict[str, float]] = field(init=False, repr=False, compare=False)
    _log_floors: dict[tuple[str, int], float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        total_lines = sum(self.line_counts.values())
        log_priors = {
            lang: math.log(self.line_counts[lang] / total_lines) for lang in self.languages
        }
        vocab_sizes = {n: len({g for c in self.ngram_counts.values() for g in c if len(g) == n})
                       for n in self.orders}
        log_smoothed: dict[str, dict[str, float]] = {}
        log_floors = {}
        for lang in self.languages:
            counts = self.ngram_counts[lang]
            log_denoms = {}
            for n in self.orders:
                n_total = sum(c for g, c in counts.items() if len(g) == n)
                log_denoms[n] = math.log(n_total + self.alpha * (vocab_sizes[n] + 1))
                log_floors[(lang, n)] = math.log(self.alpha) - log_denoms[n]
            log_smoothed[lang] = {
                g: math.log(c + self.alpha) - log_denoms[len(g)] for g, c in counts.items()
            }
        object.__setattr__(self, "_log_priors", log_priors)
        object.__setattr__(self, "_log_smoothed", log_smoothed)
        object.__setattr__(self, "_log_floors", log_floors)

    def log_likelihood(self, lang: str, gram: str) -> float:
        hit = self._log_smoothed[lang].get(gram)
        if hit is not None:
            return hit
        return self._log_floors[(lang, len(gram))]


def langid_train(
    labeled_lines: Iterable[tuple[str, str]],
    languages: tuple[str, ...] = ALL_LANGS,
    orders: tuple[int, ...] = DEFAULT_ORDERS,
    alpha: float = 1.0,
) -> LangIdModel:
    """Count n-grams per language and build the smoothed model."""
    if alpha <= 0:
        raise ConfigError(f"smoothing alpha must be positive, got {alpha}")
    orders = tuple(sorted(set(orders)))
    line_counts = {lang: 0 for lang in languages}
    ngram_counts: dict[str, dict[str, int]] = {lang: {} for lang in languages}
    for text, lang in labeled_lines:
        if lang not in line_counts:
            raise DataError(f"training line labeled with unsupported language {lang!r}")
        line_counts[lang] += 1
        counts = ngram_counts[lang]
        for gram in extract_ngrams(text, orders):
            counts[gram] = counts.get(gram, 0) + 1
    missing = [lang for lang in languages if line_counts[lang] == 0]
    if missing:
        raise DataError(f"no training lines for language(s): {', '.join(missing)}")
    return LangIdModel(tuple(languages), orders, alpha, line_counts, ngram_counts)


def langid_predict(model: LangIdModel, text: str) -> tuple[str, float]:
    """Most probable language and its log-posterior margin over the runner-up.

    Empty text falls back to the priors.  Ties break on the model's fixed
    language ordering; a single-language model has infinite margin.
    """
    grams = extract_ngrams(text, model.orders) if text else []
    scores = []
    for lang in model.languages:
        table = model._log_smoothed[lang]
        floors = model._log_floors
        s = model._log_priors[lang]
        for gram in grams:
            hit = table.get(gram)
            s += hit if hit is not None else floors[(lang, len(gram))]
        scores.append(s)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    best = order[0]
    if len(order) == 1:
        return model.languages[best], math.inf
    return model.languages[best], scores[best] - scores[order[1]]


def langid_filter(
    pair: SentencePair,
    model: LangIdModel,
    min_margin: float = 0.0,
    check_source: bool = True,
    check_target: bool = True,
) -> FilterDecision:
    """Drop pairs whose predicted language disagrees with the declared one."""
    if pair.source_lang not in model.languages:
        raise DataError(f"declared language {pair.source_lang!r} unsupported by the model")
    if check_target and TARGET_LANG not in model.languages:
        raise DataError(f"model does not cover the target language {TARGET_LANG!r}")
    if check_source:
        predicted, margin = langid_predict(model, pair.source_text)
        if predicted != pair.source_lang or margin < min_margin:
            return FilterDecision(False, DropReason.LANGID_SOURCE)
    if check_target:
        predicted, margin = langid_predict(model, pair.target_text)
        if predicted != TARGET_LANG or margin < min_margin:
            return FilterDecision(False, DropReason.LANGID_TARGET)
    return FilterDecision(True)


MODEL_HEADER = "#nmtprep-langid v1"


def write_langid_model(model: LangIdModel, path: str | os.PathLike) -> None:
    """Persist counts (not probabilities) so retraining and merging stay exact."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(MODEL_HEADER + "\n")
        f.write("#languages\t" + ",".join(model.languages) + "\n")
        f.write("#orders\t" + ",".join(str(n) for n in model.orders) + "\n")
        f.write(f"#alpha\t{model.alpha!r}\n")
        for lang in model.languages:
            f.write(f"#lines\t{lang}\t{model.line_counts[lang]}\n")
        for lang in model.languages:
            for gram in sorted(model.ngram_counts[lang]):
                f.write(f"{lang}\t{gram}\t{model.ngram_counts[lang][gram]}\n")


def read_langid_model(path: str | os.PathLike) -> LangIdModel:
    path = Path(path)
    languages: tuple[str, ...] | None = None
    orders: tuple[int, ...] | None = None
    alpha = 1.0
    line_counts: dict[str, int] = {}
    ngram_counts: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != MODEL_HEADER:
            raise DataError(f"{path}: not a langid model file")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "#languages":
                languages = tuple(fields[1].split(","))
                ngram_counts = {lang: {} for lang in languages}
            elif fields[0] == "#orders":
                orders = tuple(int(n) for n in fields[1].split(","))
            elif fields[0] == "#alpha":
                alpha = float(fields[1])
            elif fields[0] == "#lines":
                line_counts[fields[1]] = int(fields[2])
            elif len(fields) == 3:
                lang, gram, count = fields
                if lang not in ngram_counts:
                    raise DataError(f"{path}, line {lineno}: unknown language {lang!r}")
                ngram_counts[lang][gram] = int(count)
            else:
                raise DataError(f"{path}, line {lineno}: malformed model line")
    if languages is None or orders is None:
        raise DataError(f"{path}: model header is incomplete")
    return LangIdModel(languages, orders, alpha, line_counts, ngram_counts)
