"""Domain tagging, biomedical oversampling, and temperature-based epochs.

An epoch plan assigns each language a draw count proportional to its
effective corpus size raised to 1/T, rounded by largest remainder so the
counts sum exactly to the epoch size.  Oversampling inflates the medical
supply before temperature is applied (the default basis; a flag exposes the
pre-oversampling alternative).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import CorpusManifest, Domain, SOURCE_LANGS, SentencePair, stream_pairs
from .errors import ConfigError, DataError
from .rng import SplitMix64, derive_seed
from .specials import BT_TAG, MEDICAL_TAG


@dataclass(frozen=True)
class SamplingPolicy:
    epoch_size: int
    temperature: float = 5.0
    medical_oversample: int = 2
    seed: int = 0
    temperature_basis: str = "post"  # "post" or "pre" oversampling sizes

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")
        if self.medical_oversample < 1:
            raise ConfigError("medical_oversample must be a positive integer factor")
        if self.epoch_size < 1:
            raise ConfigError("epoch_size must be >= 1")
        if self.temperature_basis not in ("post", "pre"):
            raise ConfigError(f"unknown temperature basis {self.temperature_basis!r}")


@dataclass(frozen=True)
class DomainSizes:
    general: int = 0
    bt: int = 0
    medical: int = 0

    def total(self) -> int:
        return self.general + self.bt + self.medical

    def effective(self, medical_oversample: int) -> int:
        return self.general + self.bt + medical_oversample * self.medical


@dataclass(frozen=True)
class EpochPlan:
    per_language_draws: dict[str, int]
    probabilities: dict[str, float]
    effective_sizes: dict[str, int]
    policy: SamplingPolicy


def sizes_from_manifest(manifest: CorpusManifest) -> dict[str, DomainSizes]:
    acc: dict[str, dict[str, int]] = {}
    for e in manifest.entries:
        by_domain = acc.setdefault(e.source_lang, {"general": 0, "bt": 0, "medical": 0})
        key = {Domain.GENERAL: "general", Domain.BACK_TRANSLATED: "bt", Domain.MEDICAL: "medical"}
        by_domain[key[e.domain]] += e.line_count
    return {lang: DomainSizes(**counts) for lang, counts in acc.items()}


def _language_order(languages) -> list[str]:
    known = [lang for lang in SOURCE_LANGS if lang in languages]
    extra = sorted(set(languages) - set(known))
    return known + extra


def plan_epoch(language_sizes: dict[str, DomainSizes], policy: SamplingPolicy) -> EpochPlan:
    """Compute per-language probabilities and exact draw counts for one epoch."""
    order = _language_order(language_sizes)
    effective = {lang: language_sizes[lang].effective(policy.medical_oversample) for lang in order}
    basis = (
        effective
        if policy.temperature_basis == "post"
        else {lang: language_sizes[lang].total() for lang in order}
    )
    if all(v == 0 for v in basis.values()):
        raise DataError("cannot plan an epoch: all language sizes are zero")
    weights = {lang: basis[lang] ** (1.0 / policy.temperature) for lang in order}
    total_weight = math.fsum(weights.values())
    probs = {lang: weights[lang] / total_weight for lang in order}

    # largest-remainder rounding: floors first, then the largest fractional
    # remainders get one extra draw each until the epoch size is exact
    quotas = {lang: probs[lang] * policy.epoch_size for lang in order}
    draws = {lang: math.floor(quotas[lang]) for lang in order}
    shortfall = policy.epoch_size - sum(draws.values())
    by_remainder = sorted(order, key=lambda lang: (-(quotas[lang] - draws[lang]), order.index(lang)))
    for lang in by_remainder[:shortfall]:
        draws[lang] += 1
    return EpochPlan(draws, probs, effective, policy)


def tag_record(pair: SentencePair) -> SentencePair:
    """Prepend the domain tag to the source token stream; never touches the target."""
    if pair.domain is Domain.MEDICAL:
        tag = MEDICAL_TAG
    elif pair.domain is Domain.BACK_TRANSLATED:
        tag = BT_TAG
    else:
        return pair
    tagged = tag + " " + pair.source_text if pair.source_text else tag
    return replace(pair, source_text=tagged)


def build_supply_pool(
    pairs: list[SentencePair], medical_oversample: int
) -> list[SentencePair]:
    """Supply pool for one language: medical records duplicated by the factor."""
    pool = []
    for pair in pairs:
        copies = medical_oversample if pair.domain is Domain.MEDICAL else 1
        pool.extend([pair] * copies)
    return pool


def materialize_epoch(
    manifest: CorpusManifest,
    plan: EpochPlan,
    seed: int,
    tag: bool = True,
) -> list[SentencePair]:
    """Draw one epoch of tagged pairs according to the plan.

    Per language: uniform draws without replacement while supply lasts, then
    wrap-around passes each with an independent reshuffle.  The combined
    epoch is globally shuffled.  Deterministic from the seed.
    """
    by_lang: dict[str, list[SentencePair]] = {}
    for pair in stream_pairs(manifest):
        by_lang.setdefault(pair.source_lang, []).append(pair)

    epoch: list[SentencePair] = []
    for lang in _language_order(plan.per_language_draws):
        want = plan.per_language_draws[lang]
        if want == 0:
            continue
        if lang not in by_lang:
            raise DataError(f"plan requires language {lang!r} absent from the manifest")
        pool = build_supply_pool(by_lang[lang], plan.policy.medical_oversample)
        rng = SplitMix64(derive_seed(seed, f"epoch:{lang}"))
        taken = 0
        while taken < want:
            batch = list(pool)
            rng.shuffle(batch)
            take = min(want - taken, len(batch))
            epoch.extend(batch[:take])
            taken += take
    if tag:
        epoch = [tag_record(pair) for pair in epoch]
    rng = SplitMix64(derive_seed(seed, "epoch:interleave"))
    rng.shuffle(epoch)
    return epoch


PLAN_HEADER = "#nmtprep-epoch-plan v1"


def write_plan(plan: EpochPlan, path: str | os.PathLike) -> None:
    policy = plan.policy
    with open(path, "w", encoding="utf-8") as f:
        f.write(PLAN_HEADER + "\n")
        f.write(f"#epoch-size\t{policy.epoch_size}\n")
        f.write(f"#temperature\t{policy.temperature!r}\n")
        f.write(f"#medical-oversample\t{policy.medical_oversample}\n")
        f.write(f"#seed\t{policy.seed}\n")
        f.write(f"#temperature-basis\t{policy.temperature_basis}\n")
        for lang in _language_order(plan.per_language_draws):
            f.write(f"#effective\t{lang}\t{plan.effective_sizes[lang]}\n")
        for lang in _language_order(plan.per_language_draws):
            f.write(f"{lang}\t{plan.probabilities[lang]!r}\t{plan.per_language_draws[lang]}\n")


def read_plan(path: str | os.PathLike) -> EpochPlan:
    path = Path(path)
    meta: dict[str, str] = {}
    effective: dict[str, int] = {}
    draws: dict[str, int] = {}
    probs: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != PLAN_HEADER:
            raise DataError(f"{path}: not an epoch plan file")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "#effective":
                effective[fields[1]] = int(fields[2])
            elif fields[0].startswith("#"):
                meta[fields[0][1:]] = fields[1]
            elif len(fields) == 3:
                probs[fields[0]] = float(fields[1])
                draws[fields[0]] = int(fields[2])
            else:
                raise DataError(f"{path}, line {lineno}: malformed plan line")
    try:
        policy = SamplingPolicy(
            epoch_size=int(meta["epoch-size"]),
            temperature=float(meta["temperature"]),
            medical_oversample=int(meta["medical-oversample"]),
            seed=int(meta["seed"]),
            temperature_basis=meta.get("temperature-basis", "post"),
        )
    except KeyError as exc:
        raise DataError(f"{path}: plan header is missing {exc}") from None
    return EpochPlan(draws, probs, effective, policy)
