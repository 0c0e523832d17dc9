"""Declarative end-to-end pipeline runner with resumable, deterministic stages.

Every stage writes its artifacts plus a sidecar metadata record holding the
digests of its inputs, its derived seed, and the digests of its outputs.
Rerunning with unchanged inputs skips completed stages after verifying the
artifacts; a digest mismatch is an error, never a silent overwrite.  All
randomness flows from one root seed expanded per stage by name, so each
stage is independently reproducible.  No artifact embeds wall-clock time or
absolute paths: two runs from the same config and inputs produce
byte-identical artifact trees.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from dataclasses import replace as _dc_replace

from . import langid as langid_mod
from .corpus import CorpusManifest, ManifestEntry, TARGET_LANG, ingest, stream_pairs, write_manifest
from .errors import ConfigError, DataError
from .inline_case import case_encode
from .rng import derive_seed
from .sampling import (
    EpochPlan,
    SamplingPolicy,
    materialize_epoch,
    plan_epoch,
    read_plan,
    sizes_from_manifest,
    tag_record,
    write_plan,
)
from .specials import UNK
from .subword import BpeLearnConfig, Segmenter, bpe_learn, read_merges, sample_training_lines, write_merges
from .textnorm import ApplyTo, FilterConfig, FilterReport, clean_pair, filter_pair
from .vocab import encode_ids, read_vocab, vocab_build, write_vocab

STAGE_ORDER = ("clean", "langid", "bpe", "vocab", "encode", "tag", "sample")


@dataclass(frozen=True)
class PipelineConfig:
    manifest_path: Path
    output_dir: Path
    stages: tuple[str, ...]
    seed: int
    filter_cfg: FilterConfig
    bpe_cfg: BpeLearnConfig | None
    policy: SamplingPolicy | None
    langid_model_path: Path | None
    langid_train_manifest: Path | None
    langid_min_margin: float
    langid_check_source: bool
    langid_check_target: bool


def load_config(path: str | os.PathLike) -> PipelineConfig:
    """Parse and validate a pipeline config file (INI format)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if "pipeline" not in parser:
        raise ConfigError(f"{path}: missing [pipeline] section")
    base = path.resolve().parent
    sec = parser["pipeline"]

    def _resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else (base / p).resolve()

    try:
        manifest_path = _resolve(sec["manifest"])
        output_dir = _resolve(sec["output_dir"])
        stages = tuple(sec["stages"].split())
    except KeyError as exc:
        raise ConfigError(f"{path}: [pipeline] section is missing {exc}") from None
    seed = sec.getint("seed", fallback=0)

    unknown = [s for s in stages if s not in STAGE_ORDER]
    if unknown:
        raise ConfigError(f"unknown stage(s): {', '.join(unknown)}")
    if not stages:
        raise ConfigError("no stages selected")
    positions = [STAGE_ORDER.index(s) for s in stages]
    if positions != sorted(positions) or len(set(positions)) != len(positions):
        raise ConfigError(
            "stages must respect dependency order "
            + " < ".join(STAGE_ORDER)
            + f", got: {' '.join(stages)}"
        )

    fsec = parser["filter"] if "filter" in parser else {}
    filter_cfg = FilterConfig(
        min_tokens=int(fsec.get("min_tokens", 1)),
        max_tokens=int(fsec.get("max_tokens", 200)),
        apply_to=ApplyTo(fsec.get("apply_to", "both")),
    )

    bpe_cfg = None
    if "bpe" in parser:
        bsec = parser["bpe"]
        bpe_cfg = BpeLearnConfig(
            merges_target=int(bsec.get("merges_target", 1000)),
            lines_per_language=int(bsec.get("lines_per_language", 100_000)),
            singleton_min_count=int(bsec.get("singleton_min_count", 20)),
            english_min_count=int(bsec.get("english_min_count", 20)),
            seed=derive_seed(seed, "stage:bpe"),
        )
    if any(s in stages for s in ("bpe", "vocab", "encode")) and bpe_cfg is None:
        raise ConfigError("stages bpe/vocab/encode require a [bpe] section")

    policy = None
    if "sampling" in parser:
        ssec = parser["sampling"]
        policy = SamplingPolicy(
            epoch_size=int(ssec.get("epoch_size", 1000)),
            temperature=float(ssec.get("temperature", 5.0)),
            medical_oversample=int(ssec.get("medical_oversample", 2)),
            seed=derive_seed(seed, "stage:sample"),
            temperature_basis=ssec.get("temperature_basis", "post"),
        )
    if "sample" in stages and policy is None:
        raise ConfigError("stage sample requires a [sampling] section")

    langid_model = langid_train = None
    min_margin = 0.0
    check_source = check_target = True
    if "langid" in parser:
        lsec = parser["langid"]
        if "model" in lsec:
            langid_model = _resolve(lsec["model"])
        if "train_manifest" in lsec:
            langid_train = _resolve(lsec["train_manifest"])
        min_margin = float(lsec.get("min_margin", 0.0))
        check_source = lsec.getboolean("check_source", fallback=True)
        check_target = lsec.getboolean("check_target", fallback=True)
    if "langid" in stages:
        if (langid_model is None) == (langid_train is None):
            raise ConfigError(
                "stage langid requires exactly one of [langid] model= or train_manifest="
            )

    return PipelineConfig(
        manifest_path=manifest_path,
        output_dir=output_dir,
        stages=stages,
        seed=seed,
        filter_cfg=filter_cfg,
        bpe_cfg=bpe_cfg,
        policy=policy,
        langid_model_path=langid_model,
        langid_train_manifest=langid_train,
        langid_min_margin=min_margin,
        langid_check_source=check_source,
        langid_check_target=check_target,
    )


@dataclass
class RunReport:
    stage_status: dict[str, str] = field(default_factory=dict)  # executed | skipped
    filter_reports: dict[str, FilterReport] = field(default_factory=dict)
    plan: EpochPlan | None = None

    def all_skipped(self) -> bool:
        return all(v == "skipped" for v in self.stage_status.values())


def _file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest_digest(manifest_path: Path) -> str:
    """Digest of a manifest plus every corpus file it references."""
    h = hashlib.sha256()
    h.update(_file_digest(manifest_path).encode())
    for entry in ingest(manifest_path).entries:
        h.update(_file_digest(entry.source_path).encode())
        h.update(_file_digest(entry.target_path).encode())
    return h.hexdigest()


class _StageRunner:
    """Digest bookkeeping shared by all stages."""

    def __init__(self, out_dir: Path, report: RunReport):
        self.out_dir = out_dir
        self.report = report

    def stage_dir(self, name: str) -> Path:
        return self.out_dir / name

    def run(self, name: str, inputs: dict[str, str], params: dict, seed: int, fn) -> None:
        """Run one stage, or skip it when inputs and artifacts are unchanged."""
        sdir = self.stage_dir(name)
        meta_path = sdir / "stage-meta.json"
        input_record = {"inputs": inputs, "params": params, "seed": seed}
        input_digest = hashlib.sha256(
            json.dumps(input_record, sort_keys=True).encode()
        ).hexdigest()
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            if meta.get("input_digest") != input_digest:
                raise DataError(
                    f"stage {name}: existing artifacts were produced from different "
                    "inputs or parameters; artifacts are append-only, remove "
                    f"{sdir} to rebuild"
                )
            for fname, digest in meta.get("outputs", {}).items():
                fpath = sdir / fname
                if not fpath.is_file() or _file_digest(fpath) != digest:
                    raise DataError(
                        f"stage {name}: artifact {fname} is missing or differs from "
                        "its recorded digest; remove the stage directory to rebuild"
                    )
            self.report.stage_status[name] = "skipped"
            return
        sdir.mkdir(parents=True, exist_ok=True)
        counts = fn(sdir) or {}
        outputs = {
            p.name: _file_digest(p)
            for p in sorted(sdir.iterdir())
            if p.is_file() and p.name != "stage-meta.json"
        }
        meta = {
            "stage": name,
            "input_digest": input_digest,
            "inputs": inputs,
            "params": params,
            "seed": seed,
            "outputs": outputs,
            "counts": counts,
        }
        meta_path.write_text(
            json.dumps(meta, sort_keys=True, indent=1, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        self.report.stage_status[name] = "executed"


def _write_pair_files(
    manifest: CorpusManifest,
    pairs_per_entry: list[list],
    sdir: Path,
    suffix_src: str = ".src",
    suffix_tgt: str = ".tgt",
) -> CorpusManifest:
    """Write per-entry parallel files plus a manifest referencing them."""
    entries = []
    for i, (entry, pairs) in enumerate(zip(manifest.entries, pairs_per_entry)):
        src_path = sdir / f"entry{i:03d}{suffix_src}"
        tgt_path = sdir / f"entry{i:03d}{suffix_tgt}"
        with open(src_path, "w", encoding="utf-8") as fs, open(
            tgt_path, "w", encoding="utf-8"
        ) as ft:
            for pair in pairs:
                fs.write(pair.source_text + "\n")
                ft.write(pair.target_text + "\n")
        entries.append(
            ManifestEntry(src_path, tgt_path, entry.source_lang, entry.domain, len(pairs))
        )
    out = CorpusManifest(tuple(entries))
    write_manifest(out, sdir / "manifest.tsv")
    return out


def run_pipeline(config: PipelineConfig) -> RunReport:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    lock = out / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        os.close(fd)
    except FileExistsError:
        raise ConfigError(
            f"output directory is locked by another run (stale lock? remove {lock})"
        ) from None
    try:
        return _run_pipeline_locked(config)
    finally:
        os.unlink(lock)


def _run_pipeline_locked(config: PipelineConfig) -> RunReport:
    report = RunReport()
    runner = _StageRunner(config.output_dir, report)
    text_manifest_path = config.manifest_path
    token_manifest_path: Path | None = None
    merges_path = runner.stage_dir("bpe") / "merges.txt"
    vocab_path = runner.stage_dir("vocab") / "vocab.txt"

    for stage in config.stages:
        if stage == "clean":
            in_digest = {"manifest": _manifest_digest(text_manifest_path)}
            params = {
                "min_tokens": config.filter_cfg.min_tokens,
                "max_tokens": config.filter_cfg.max_tokens,
                "apply_to": config.filter_cfg.apply_to.value,
            }
            src = text_manifest_path

            def _clean(sdir: Path, src=src) -> dict:
                manifest = ingest(src)
                freport = FilterReport()
                kept_per_entry: list[list] = [[] for _ in manifest.entries]
                for i, entry in enumerate(manifest.entries):
                    sub = CorpusManifest((entry,))
                    for pair in stream_pairs(sub):
                        cleaned = clean_pair(pair)
                        decision = filter_pair(cleaned, config.filter_cfg)
                        freport.record(decision)
                        if decision.keep:
                            kept_per_entry[i].append(cleaned)
                _write_pair_files(manifest, kept_per_entry, sdir)
                (sdir / "filter-report.txt").write_text(freport.to_text(), encoding="utf-8")
                report.filter_reports["clean"] = freport
                return {"input": freport.input_pairs, "kept": freport.kept}

            runner.run("clean", in_digest, params, derive_seed(config.seed, "stage:clean"), _clean)
            text_manifest_path = runner.stage_dir("clean") / "manifest.tsv"
            if report.stage_status["clean"] == "skipped":
                rpt = (runner.stage_dir("clean") / "filter-report.txt").read_text(encoding="utf-8")
                report.filter_reports["clean"] = FilterReport.from_text(rpt)

        elif stage == "langid":
            inputs = {"manifest": _manifest_digest(text_manifest_path)}
            if config.langid_model_path is not None:
                inputs["model"] = _file_digest(config.langid_model_path)
            else:
                inputs["train_manifest"] = _manifest_digest(config.langid_train_manifest)
            params = {
                "min_margin": config.langid_min_margin,
                "check_source": config.langid_check_source,
                "check_target": config.langid_check_target,
            }
            src = text_manifest_path

            def _langid(sdir: Path, src=src) -> dict:
                if config.langid_model_path is not None:
                    model = langid_mod.read_langid_model(config.langid_model_path)
                else:
                    train_manifest = ingest(config.langid_train_manifest)

                    def _labeled():
                        for pair in stream_pairs(train_manifest):
                            yield pair.source_text, pair.source_lang
                            yield pair.target_text, TARGET_LANG

                    model = langid_mod.langid_train(_labeled())
                langid_mod.write_langid_model(model, sdir / "model.txt")
                manifest = ingest(src)
                freport = FilterReport()
                kept_per_entry: list[list] = [[] for _ in manifest.entries]
                for i, entry in enumerate(manifest.entries):
                    sub = CorpusManifest((entry,))
                    for pair in stream_pairs(sub):
                        decision = langid_mod.langid_filter(
                            pair,
                            model,
                            config.langid_min_margin,
                            config.langid_check_source,
                            config.langid_check_target,
                        )
                        freport.record(decision)
                        if decision.keep:
                            kept_per_entry[i].append(pair)
                _write_pair_files(manifest, kept_per_entry, sdir)
                (sdir / "filter-report.txt").write_text(freport.to_text(), encoding="utf-8")
                report.filter_reports["langid"] = freport
                return {"input": freport.input_pairs, "kept": freport.kept}

            runner.run("langid", inputs, params, derive_seed(config.seed, "stage:langid"), _langid)
            text_manifest_path = runner.stage_dir("langid") / "manifest.tsv"
            if report.stage_status["langid"] == "skipped":
                rpt = (runner.stage_dir("langid") / "filter-report.txt").read_text(encoding="utf-8")
                report.filter_reports["langid"] = FilterReport.from_text(rpt)

        elif stage == "bpe":
            cfg = config.bpe_cfg
            inputs = {"manifest": _manifest_digest(text_manifest_path)}
            params = {
                "merges_target": cfg.merges_target,
                "lines_per_language": cfg.lines_per_language,
            }
            src = text_manifest_path

            def _bpe(sdir: Path, src=src) -> dict:
                manifest = ingest(src)
                lines = sample_training_lines(manifest, config.bpe_cfg)
                merges = bpe_learn(lines, config.bpe_cfg)
                write_merges(merges, sdir / "merges.txt")
                return {"sampled_lines": len(lines), "merges": len(merges)}

            runner.run("bpe", inputs, params, config.bpe_cfg.seed, _bpe)

        elif stage == "vocab":
            cfg = config.bpe_cfg
            inputs = {
                "manifest": _manifest_digest(text_manifest_path),
                "merges": _file_digest(merges_path),
            }
            params = {
                "singleton_min_count": cfg.singleton_min_count,
                "english_min_count": cfg.english_min_count,
            }
            src = text_manifest_path

            def _vocab(sdir: Path, src=src) -> dict:
                manifest = ingest(src)
                merges = read_merges(merges_path)
                vocabulary = vocab_build(manifest, merges, config.bpe_cfg)
                write_vocab(vocabulary, sdir / "vocab.txt")
                return {
                    "size": len(vocabulary),
                    "english_block_size": vocabulary.english_block_size,
                }

            runner.run("vocab", inputs, params, derive_seed(config.seed, "stage:vocab"), _vocab)

        elif stage == "encode":
            inputs = {
                "manifest": _manifest_digest(text_manifest_path),
                "merges": _file_digest(merges_path),
                "vocab": _file_digest(vocab_path),
            }
            src = text_manifest_path

            def _encode(sdir: Path, src=src) -> dict:
                manifest = ingest(src)
                merges = read_merges(merges_path)
                vocabulary = read_vocab(vocab_path)
                segmenter = Segmenter(merges)
                encoded_per_entry: list[list] = []
                target_unk = 0
                for entry in manifest.entries:
                    sub = CorpusManifest((entry,))
                    encoded = []
                    for pair in stream_pairs(sub):
                        src_tokens = case_encode(pair.source_text, merges, segmenter)
                        tgt_tokens = case_encode(pair.target_text, merges, segmenter)
                        ids = encode_ids(vocabulary, tgt_tokens, target_side=True)
                        target_unk += sum(1 for t, i in zip(tgt_tokens, ids) if i == 0 and t != "<unk>")
                        encoded.append(
                            pair.__class__(
                                " ".join(src_tokens),
                                " ".join(tgt_tokens),
                                pair.source_lang,
                                pair.domain,
                                pair.origin,
                            )
                        )
                    encoded_per_entry.append(encoded)
                _write_pair_files(manifest, encoded_per_entry, sdir, ".src.tok", ".tgt.tok")
                return {"target_unk_tokens": target_unk}

            runner.run("encode", inputs, params if False else {}, derive_seed(config.seed, "stage:encode"), _encode)
            token_manifest_path = runner.stage_dir("encode") / "manifest.tsv"

        elif stage == "tag":
            if token_manifest_path is None:
                token_manifest_path = runner.stage_dir("encode") / "manifest.tsv"
            inputs = {"manifest": _manifest_digest(token_manifest_path)}
            src = token_manifest_path

            def _tag(sdir: Path, src=src) -> dict:
                from .sampling import tag_record

                manifest = ingest(src)
                tagged_per_entry: list[list] = []
                n_tagged = 0
                for entry in manifest.entries:
                    sub = CorpusManifest((entry,))
                    tagged = []
                    for pair in stream_pairs(sub):
                        new = tag_record(pair)
                        if new.source_text != pair.source_text:
                            n_tagged += 1
                        tagged.append(new)
                    tagged_per_entry.append(tagged)
                _write_pair_files(manifest, tagged_per_entry, sdir, ".src.tok", ".tgt.tok")
                return {"tagged_records": n_tagged}

            runner.run("tag", inputs, {}, derive_seed(config.seed, "stage:tag"), _tag)
            token_manifest_path = runner.stage_dir("tag") / "manifest.tsv"

        elif stage == "sample":
            policy = config.policy
            source_manifest = token_manifest_path or text_manifest_path
            already_tagged = "tag" in config.stages
            inputs = {"manifest": _manifest_digest(source_manifest)}
            params = {
                "epoch_size": policy.epoch_size,
                "temperature": policy.temperature,
                "medical_oversample": policy.medical_oversample,
                "temperature_basis": policy.temperature_basis,
                "tagging": "upstream" if already_tagged else "inline",
            }
            src = source_manifest

            def _sample(sdir: Path, src=src) -> dict:
                manifest = ingest(src)
                plan = plan_epoch(sizes_from_manifest(manifest), config.policy)
                write_plan(plan, sdir / "epoch-plan.txt")
                epoch = materialize_epoch(
                    manifest, plan, config.policy.seed, tag=not already_tagged
                )
                with open(sdir / "epoch.src", "w", encoding="utf-8") as fs, open(
                    sdir / "epoch.tgt", "w", encoding="utf-8"
                ) as ft:
                    for pair in epoch:
                        fs.write(pair.source_text + "\n")
                        ft.write(pair.target_text + "\n")
                report.plan = plan
                return {"epoch_pairs": len(epoch)}

            runner.run("sample", inputs, params, config.policy.seed, _sample)
            if report.stage_status["sample"] == "skipped":
                report.plan = read_plan(runner.stage_dir("sample") / "epoch-plan.txt")

        else:  # pragma: no cover - guarded by config validation
            raise ConfigError(f"unknown stage {stage!r}")

    _write_run_report(config.output_dir, report)
    return report


def _write_run_report(out_dir: Path, report: RunReport) -> None:
    """Aggregate filter reports and the epoch plan; no statuses or timestamps."""
    lines = ["#nmtprep-run-report v1"]
    for stage in ("clean", "langid"):
        if stage in report.filter_reports:
            for line in report.filter_reports[stage].to_text().splitlines():
                key, _, value = line.partition("\t")
                lines.append(f"{stage}\t{key}\t{value}")
    if report.plan is not None:
        for lang in report.plan.per_language_draws:
            lines.append(
                f"sample\t{lang}\t{report.plan.probabilities[lang]!r}"
                f"\t{report.plan.per_language_draws[lang]}"
            )
    (out_dir / "run-report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def stats(manifest: CorpusManifest) -> str:
    """Per-language, per-domain pair counts in the layout of the paper's table."""
    sizes = sizes_from_manifest(manifest)
    order = [lang for lang in ("fr", "es", "de", "it", "ko") if lang in sizes]
    order += sorted(set(sizes) - set(order))
    header = f"{'language':<10}{'total':>14}{'general':>14}{'bt':>14}{'medical':>14}"
    rows = [header]
    tot = {"total": 0, "general": 0, "bt": 0, "medical": 0}
    for lang in order:
        s = sizes[lang]
        rows.append(
            f"{lang:<10}{s.total():>14}{s.general:>14}{s.bt:>14}{s.medical:>14}"
        )
        tot["total"] += s.total()
        tot["general"] += s.general
        tot["bt"] += s.bt
        tot["medical"] += s.medical
    rows.append(
        f"{'total':<10}{tot['total']:>14}{tot['general']:>14}{tot['bt']:>14}{tot['medical']:>14}"
    )
    return "\n".join(rows) + "\n"
