"""Command line front end.

Subcommands::

    screl train     fit an ensemble and write a checkpoint directory
    screl predict   label new data with a checkpoint
    screl evaluate  score a prediction file against gold, with figures
    screl augment   synthesize extra training data with an n-gram filter
    screl cv        document-grouped cross-validation
    screl sweep     vary one parameter, train, and score each setting

Every delimited artifact starts with a ``# config_hash=...`` comment so
runs can be told apart; figures land next to the tables they summarize.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import augment as augment_mod
from . import ngram_lm, pipeline, plots
from .config import Config, ConfigError, default_sweep_grid, derive_seed
from .corpus import (
    KINDS,
    Dataset,
    load_dataset,
    merge,
    serialize_relations,
)
from .ensemble import write_probabilities
from .evaluation import (
    extraction_machine_lines,
    extraction_score,
    format_extraction_report,
    format_report,
    machine_lines,
    prf,
)
from .features import (
    Vocabulary,
    build_vocab,
    load_embeddings,
    parse_pos_file,
)
from .model import load_model, save_model
from .model.cnn import CnnConfig
from .model.rnn import RnnConfig
from .model.base import EmbedSpec
from .features import POS_TAGSET, RELPOS_CLIP
from .postprocess import class_frequencies
from .preprocess import NONE_INDEX, SCHEME_SIZES
from .training import (
    PadIds,
    hash_examples,
    kfold,
    member_specs,
    train_ensemble,
    upsample,
)

logger = logging.getLogger(__name__)

TWELVE_CLASS_NAMES = [
    *(k.value for k in KINDS[:5]),
    *(f"{k.value}-REV" for k in KINDS[:5]),
    KINDS[5].value,
    "NONE",
]
SIX_CLASS_NAMES = [k.value for k in KINDS]


def _class_names(scheme: str) -> list[str]:
    return SIX_CLASS_NAMES if scheme == "six" else TWELVE_CLASS_NAMES


# -- config plumbing -----------------------------------------------------------


def _parse_override(raw: str) -> tuple[str, object]:
    if "=" not in raw:
        raise ConfigError(f"override {raw!r} is not of the form key=value")
    key, text = raw.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


def _load_config(args: argparse.Namespace) -> Config:
    data: dict = {}
    if getattr(args, "config", None):
        data = Config.from_file(args.config).to_dict()
    for raw in getattr(args, "set", None) or []:
        key, value = _parse_override(raw)
        data[key] = value
    for flag in ("subtask", "seed", "epochs", "ensemble_size", "batch_size",
                 "workers"):
        value = getattr(args, flag, None)
        if value is not None:
            data[flag] = value
    return Config.from_dict(data)


def _pads(vocab: Vocabulary) -> PadIds:
    return PadIds(word=vocab.pad_id, pos=0, relpos=0)


def _embed_spec(cfg: Config, vocab: Vocabulary) -> EmbedSpec:
    return EmbedSpec(
        vocab_size=len(vocab),
        pos_size=len(POS_TAGSET),
        relpos_size=2 * cfg.relpos_clip + 1,
        word_dim=cfg.word_dim,
        pos_dim=cfg.pos_dim,
        relpos_dim=cfg.relpos_dim,
        finetune_words=cfg.finetune_words,
    )


def _arch_configs(cfg: Config) -> tuple[CnnConfig, RnnConfig]:
    cnn = CnnConfig(
        filter_widths=cfg.cnn_widths,
        filters_per_width=cfg.cnn_filters,
        dropout_keep=cfg.dropout_keep,
        l2_lambda=cfg.l2_lambda,
    )
    rnn = RnnConfig(
        lstm_units=cfg.lstm_units,
        dropout_keep=cfg.dropout_keep,
        l2_lambda=cfg.l2_lambda,
    )
    return cnn, rnn


def _load_input(args, cfg: Config, *, allow_unlabeled: bool = False) -> Dataset:
    provenance = "subtask1.1" if cfg.subtask == "1" else "subtask2"
    ds = load_dataset(args.abstracts, getattr(args, "relations", None),
                      provenance=provenance, allow_unlabeled=allow_unlabeled)
    extra = getattr(args, "extra_abstracts", None) or []
    extra_rel = getattr(args, "extra_relations", None) or []
    if len(extra) != len(extra_rel):
        raise SystemExit(
            "--extra-abstracts and --extra-relations must be paired"
        )
    for abs_path, rel_path in zip(extra, extra_rel):
        ds = merge(ds, load_dataset(abs_path, rel_path, provenance="generated"))
    return ds


def _pos_map(args) -> Optional[dict[str, tuple[str, ...]]]:
    path = getattr(args, "pos", None)
    if not path:
        return None
    return parse_pos_file(Path(path).read_text(encoding="utf-8"))


def _dump_processed(path: str | Path, pairs, cfg: Config) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("e1\te2\tlabel\treversed\toriginal_length\ttokens\n")
        for inst, ex in pairs:
            label = "NONE" if ex.label is None else (
                f"{ex.label.kind.value}{'-REV' if ex.label.reverse else ''}"
            )
            fh.write(
                f"{inst.e1}\t{inst.e2}\t{label}\t{int(ex.reversed)}\t"
                f"{ex.original_length}\t{' '.join(ex.tokens)}\n"
            )


# -- train ---------------------------------------------------------------------


def _prepare_training(args, cfg: Config):
    """Shared by train/cv/sweep: dataset -> (vocab, encoded, pairs)."""
    dataset = _load_input(args, cfg)
    return _prepare_training_from(dataset, cfg, _pos_map(args))


def _prepare_training_from(dataset: Dataset, cfg: Config, pos_map=None):
    prepared_docs = pipeline.prepare_documents(
        dataset, pos_map=pos_map, pos_fallback=cfg.pos_fallback
    )
    if cfg.subtask == "1":
        pairs = pipeline.classification_examples(prepared_docs)
    else:
        pairs = pipeline.extraction_examples(prepared_docs, cfg.max_distance)
    vocab = build_vocab([ex for _, ex in pairs], min_count=cfg.min_count)
    encoded = pipeline.encode_examples(
        [ex for _, ex in pairs], vocab, cfg.scheme, relpos_clip=cfg.relpos_clip
    )
    return vocab, encoded, pairs


def _train_members(cfg: Config, vocab: Vocabulary, encoded, word_init=None):
    data = list(encoded)
    if cfg.subtask == "2":
        data = upsample(data, cfg.upsample_ratio,
                        derive_seed(cfg.seed, "upsample"), NONE_INDEX)
    cnn_cfg, rnn_cfg = _arch_configs(cfg)
    specs = member_specs(cfg.ensemble_size, cfg.seed)
    models, histories = train_ensemble(
        specs,
        _embed_spec(cfg, vocab),
        data,
        SCHEME_SIZES[cfg.scheme],
        epochs=cfg.resolved_epochs,
        batch_size=cfg.batch_size,
        pads=_pads(vocab),
        lr_initial=cfg.lr_initial,
        lr_halve_every=cfg.resolved_halve_every,
        cnn_config=cnn_cfg,
        rnn_config=rnn_cfg,
        word_init=word_init,
        dtype=np.dtype(cfg.dtype).type,
        workers=cfg.workers,
    )
    return specs, models, histories, data


def _word_init(args, cfg: Config, vocab: Vocabulary):
    path = getattr(args, "embeddings", None)
    if not path:
        return None
    rng = np.random.default_rng(derive_seed(cfg.seed, "embeddings"))
    return load_embeddings(path, vocab, cfg.word_dim, rng)


def _save_checkpoint(out_dir: Path, cfg: Config, vocab, specs, models,
                     histories, encoded, train_data) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = [ex.label for ex in train_data]
    counts = np.bincount(np.asarray(labels, dtype=np.int64),
                         minlength=SCHEME_SIZES[cfg.scheme])
    members = []
    for spec, model in zip(specs, models):
        fname = f"member_{spec.index:02d}.npz"
        save_model(out_dir / fname,
                   model, extra={"index": spec.index, "seed": spec.seed})
        members.append({"file": fname, "arch": spec.arch,
                        "seed": spec.seed, "index": spec.index})
    manifest = {
        "format": "screl-ensemble",
        "version": 1,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "scheme": cfg.scheme,
        "vocabulary": list(vocab.tokens),
        "vocab_hash": vocab.content_hash(),
        "data_hash": hash_examples(encoded),
        "train_hash": hash_examples(train_data),
        "class_counts": [int(c) for c in counts],
        "members": members,
    }
    (out_dir / "ensemble.json").write_text(
        json.dumps(manifest, indent=2), encoding="utf-8"
    )
    with open(out_dir / "history.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("member\tarch\tepoch\tloss\n")
        for spec, history in zip(specs, histories):
            for epoch, loss in enumerate(history, 1):
                fh.write(f"{spec.index}\t{spec.arch}\t{epoch}\t{loss:.6f}\n")
    if any(histories):
        plots.loss_figure(
            histories,
            [f"{spec.index:02d}-{spec.arch}" for spec in specs],
            out_dir / "loss.png",
            cfg.config_hash(),
        )


def cmd_train(args) -> int:
    cfg = _load_config(args)
    vocab, encoded, pairs = _prepare_training(args, cfg)
    if args.dump_processed:
        _dump_processed(args.dump_processed, pairs, cfg)
    word_init = _word_init(args, cfg, vocab)
    specs, models, histories, train_data = _train_members(
        cfg, vocab, encoded, word_init
    )
    out_dir = Path(args.out)
    _save_checkpoint(out_dir, cfg, vocab, specs, models, histories,
                     encoded, train_data)
    print(f"trained {len(models)} members on {len(train_data)} examples "
          f"-> {out_dir}")
    return 0


# -- predict -------------------------------------------------------------------


def _load_checkpoint(model_dir: Path):
    manifest_path = model_dir / "ensemble.json"
    if not manifest_path.exists():
        raise SystemExit(f"{model_dir}: no ensemble.json found")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != "screl-ensemble":
        raise SystemExit(f"{manifest_path}: not an ensemble manifest")
    cfg = Config.from_dict(manifest["config"])
    vocab = Vocabulary(manifest["vocabulary"])
    if vocab.content_hash() != manifest["vocab_hash"]:
        raise SystemExit(f"{manifest_path}: vocabulary hash mismatch")
    models = []
    for member in manifest["members"]:
        model, _ = load_model(model_dir / member["file"])
        models.append(model)
    return manifest, cfg, vocab, models


def _predict_dataset(dataset: Dataset, manifest, cfg: Config, vocab, models,
                     pos_map=None):
    prepared = pipeline.prepare(
        dataset, vocab, cfg.subtask,
        max_distance=cfg.max_distance,
        relpos_clip=cfg.relpos_clip,
        pos_map=pos_map,
        pos_fallback=cfg.pos_fallback,
    )
    probs = pipeline.predict_probs(models, prepared.encoded, _pads(vocab),
                                   batch_size=cfg.batch_size)
    if cfg.subtask == "1":
        predictions = pipeline.classification_predictions(prepared.pairs, probs)
    else:
        predictions = pipeline.extraction_predictions(
            prepared.pairs, probs,
            manifest["class_counts"],
            seed=derive_seed(cfg.seed, "conflicts"),
        )
    return prepared, probs, predictions


def cmd_predict(args) -> int:
    model_dir = Path(args.model_dir)
    manifest, cfg, vocab, models = _load_checkpoint(model_dir)
    dataset = _load_input(args, cfg, allow_unlabeled=True)
    if cfg.subtask == "1" and not dataset.instances:
        raise SystemExit(
            "classification needs a --relations file listing the pairs "
            "to label (use UNKNOWN(e1,e2[,REVERSE]) lines)"
        )
    prepared, probs, predictions = _predict_dataset(
        dataset, manifest, cfg, vocab, models, pos_map=_pos_map(args)
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(
        f"# config_hash={cfg.config_hash()}\n" + serialize_relations(predictions),
        encoding="utf-8",
    )
    if args.probs:
        write_probabilities(
            args.probs, probs, _class_names(cfg.scheme),
            [f"{inst.e1},{inst.e2}" for inst, _ in prepared.pairs],
            header_comment=f"config_hash={cfg.config_hash()}",
        )
    if args.dump_processed:
        _dump_processed(args.dump_processed, prepared.pairs, cfg)
    print(f"wrote {len(predictions)} relations -> {out}")
    return 0


# -- evaluate ------------------------------------------------------------------


def _score_classification(gold: Dataset, predicted_path: Path):
    from .corpus import parse_relations

    predicted = parse_relations(
        Path(predicted_path).read_text(encoding="utf-8")
    )
    pred_map = {inst.pair: inst for inst in predicted}
    gold_idx = []
    pred_idx = []
    missing = []
    for inst in gold.instances:
        if inst.label is None:
            raise SystemExit(f"gold instance {inst.pair} is unlabeled")
        hit = pred_map.get(inst.pair)
        if hit is None or hit.label is None:
            missing.append(inst.pair)
            continue
        gold_idx.append(KINDS.index(inst.label.kind))
        pred_idx.append(KINDS.index(hit.label.kind))
    if missing:
        raise SystemExit(
            f"{len(missing)} gold pair(s) not predicted, e.g. {missing[0]}"
        )
    return prf(gold_idx, pred_idx, SIX_CLASS_NAMES)


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    gold = _load_input(args, cfg)
    lines: list[str] = []
    if cfg.subtask == "1":
        scores = _score_classification(gold, args.predicted)
        report = format_report(scores, title="Classification results")
        lines.extend(machine_lines(scores))
        if not args.no_figures:
            plots.per_class_figure(scores, out_dir / "per_class.png",
                                   cfg.config_hash())
        headline = f"macro F1 = {scores.macro_f1:.4f}"
    else:
        from .corpus import parse_relations

        predicted = parse_relations(
            Path(args.predicted).read_text(encoding="utf-8")
        )
        ext = extraction_score(list(gold.instances), predicted)
        report = format_extraction_report(ext)
        lines.extend(extraction_machine_lines(ext))
        headline = f"combined F1 = {ext.combined_f1:.4f}"
    (out_dir / "report.txt").write_text(report + "\n", encoding="utf-8")
    with open(out_dir / "scores.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("metric\tvalue\n")
        fh.write("\n".join(lines) + "\n")
    print(report)
    print(f"\n{headline}; artifacts in {out_dir}")
    return 0


# -- augment -------------------------------------------------------------------


def cmd_augment(args) -> int:
    cfg = _load_config(args)
    dataset = _load_input(args, cfg)
    if not dataset.instances:
        raise SystemExit("augmentation needs labeled --relations input")
    lm_text = Path(args.lm_corpus).read_text(encoding="utf-8")
    lm = ngram_lm.train_lm(ngram_lm.sentences_from_text(lm_text),
                           order=cfg.lm_order)
    if args.save_lm:
        lm.save(args.save_lm)
    prepared_docs = pipeline.prepare_documents(
        dataset, pos_map=_pos_map(args), pos_fallback=cfg.pos_fallback
    )
    pairs = pipeline.classification_examples(prepared_docs)
    templates = [ex for _, ex in pairs if not ex.reversed]
    pool_source = dataset
    if args.pool_abstracts:
        pool_source = load_dataset(args.pool_abstracts, args.pool_relations,
                                   provenance=dataset.provenance,
                                   allow_unlabeled=True)
    pool = augment_mod.entity_pair_texts(pool_source)
    generated, trace = augment_mod.generate_with_scores(
        templates,
        pool,
        lm,
        threshold=cfg.lm_threshold,
        min_interior=cfg.min_interior,
        seed=derive_seed(cfg.seed, "augment"),
    )
    synthetic = augment_mod.to_dataset(generated)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .corpus import serialize_abstracts

    (out_dir / "generated_abstracts.txt").write_text(
        serialize_abstracts(synthetic.documents), encoding="utf-8"
    )
    (out_dir / "generated_relations.txt").write_text(
        f"# config_hash={cfg.config_hash()}\n"
        + serialize_relations(synthetic.instances),
        encoding="utf-8",
    )
    with open(out_dir / "scores.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("template\tscore\tkept\n")
        for t, score, kept in trace:
            fh.write(f"{t}\t{score:.4f}\t{int(kept)}\n")
    if not args.no_figures:
        plots.lm_score_figure(
            [s for _, s, k in trace if k],
            [s for _, s, k in trace if not k],
            cfg.lm_threshold,
            out_dir / "lm_scores.png",
            cfg.config_hash(),
        )
    print(f"kept {len(generated)} of {len(trace)} sampled sentences "
          f"({len(templates)} templates) -> {out_dir}")
    return 0


# -- cv ------------------------------------------------------------------------


def cmd_cv(args) -> int:
    cfg = _load_config(args)
    dataset = _load_input(args, cfg)
    pos_map = _pos_map(args)
    folds = kfold(dataset, args.folds, derive_seed(cfg.seed, "folds"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fold_scores: list[float] = []
    rows: list[str] = []
    for i, (train_ds, eval_ds) in enumerate(folds, 1):
        vocab, encoded, _ = _prepare_training_from(train_ds, cfg, pos_map)
        _, models, _, train_data = _train_members(cfg, vocab, encoded)
        labels = [ex.label for ex in train_data]
        manifest = {"class_counts": [int(c) for c in np.bincount(
            np.asarray(labels, dtype=np.int64),
            minlength=SCHEME_SIZES[cfg.scheme],
        )]}
        prepared, probs, predictions = _predict_dataset(
            eval_ds, manifest, cfg, vocab, models, pos_map=pos_map
        )
        if cfg.subtask == "1":
            gold_idx = [KINDS.index(inst.label.kind)
                        for inst in eval_ds.instances if inst.label is not None]
            pred_idx = [KINDS.index(inst.label.kind) for inst in predictions]
            scores = prf(gold_idx, pred_idx, SIX_CLASS_NAMES)
            fold_score = scores.macro_f1
        else:
            ext = extraction_score(
                [i for i in eval_ds.instances if i.label is not None],
                predictions,
            )
            fold_score = ext.combined_f1
        fold_scores.append(fold_score)
        rows.append(
            f"{i}\t{len(train_ds.documents)}\t{len(eval_ds.documents)}\t"
            f"{len(eval_ds.instances)}\t{fold_score:.6f}"
        )
        logger.info("fold %d/%d: score %.4f", i, len(folds), fold_score)
    mean = float(np.mean(fold_scores))
    spread = float(np.std(fold_scores))
    with open(out_dir / "cv.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("fold\ttrain_docs\teval_docs\teval_instances\tscore\n")
        fh.write("\n".join(rows) + "\n")
        fh.write(f"# mean\t{mean:.6f}\n# std\t{spread:.6f}\n")
    if not args.no_figures:
        plots.cv_figure(fold_scores, out_dir / "cv.png", cfg.config_hash())
    print(f"{args.folds}-fold score: {mean:.4f} +/- {spread:.4f} -> {out_dir}")
    return 0


# -- sweep ---------------------------------------------------------------------


def _parse_sweep_values(param: str, raw: Optional[str]):
    if raw is None:
        return default_sweep_grid(param)
    values = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        try:
            values.append(json.loads(chunk))
        except json.JSONDecodeError:
            values.append(chunk)
    if param == "cnn_widths":
        values = [tuple(v) if isinstance(v, list) else v for v in values]
    return values


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = _parse_sweep_values(args.param, args.values)
    dataset = _load_input(args, cfg)
    eval_ds = load_dataset(
        args.eval_abstracts, args.eval_relations,
        provenance="subtask1.1" if cfg.subtask == "1" else "subtask2",
    )
    pos_map = _pos_map(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[float] = []
    rows: list[str] = []
    for value in values:
        run_cfg = cfg.replace(**{args.param: value})
        vocab, encoded, _ = _prepare_training_from(dataset, run_cfg, pos_map)
        _, models, _, train_data = _train_members(run_cfg, vocab, encoded)
        labels = [ex.label for ex in train_data]
        manifest = {"class_counts": [int(c) for c in np.bincount(
            np.asarray(labels, dtype=np.int64),
            minlength=SCHEME_SIZES[run_cfg.scheme],
        )]}
        _, _, predictions = _predict_dataset(
            eval_ds, manifest, run_cfg, vocab, models, pos_map=pos_map
        )
        if run_cfg.subtask == "1":
            gold_idx = [KINDS.index(inst.label.kind)
                        for inst in eval_ds.instances if inst.label is not None]
            pred_idx = [KINDS.index(inst.label.kind) for inst in predictions]
            score = prf(gold_idx, pred_idx, SIX_CLASS_NAMES).macro_f1
        else:
            score = extraction_score(
                [i for i in eval_ds.instances if i.label is not None],
                predictions,
            ).combined_f1
        results.append(score)
        value_text = json.dumps(list(value)) if isinstance(value, tuple) else value
        rows.append(f"{value_text}\t{score:.6f}")
        logger.info("sweep %s=%r: score %.4f", args.param, value, score)
    with open(out_dir / "sweep.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write(f"{args.param}\tscore\n")
        fh.write("\n".join(rows) + "\n")
    if not args.no_figures:
        plots.sweep_figure(
            [str(v) if isinstance(v, tuple) else v for v in values],
            results, args.param, out_dir / "sweep.png", cfg.config_hash(),
            log_x=args.param == "lr_initial",
        )
    best = values[int(np.argmax(results))]
    print(f"best {args.param}: {best!r} (score {max(results):.4f}) -> {out_dir}")
    return 0


# -- argument wiring -----------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser, *, relations_required: bool) -> None:
    sub.add_argument("--abstracts", required=True,
                     help="annotated abstracts file")
    sub.add_argument("--relations", required=relations_required,
                     help="relation file aligned with --abstracts")
    sub.add_argument("--pos", help="optional doc_id<TAB>tags POS file")
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a single config key (repeatable)")
    sub.add_argument("--subtask", choices=("1", "2"))
    sub.add_argument("--seed", type=int)
    sub.add_argument("--epochs", type=int)
    sub.add_argument("--ensemble-size", type=int, dest="ensemble_size")
    sub.add_argument("--batch-size", type=int, dest="batch_size")
    sub.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screl",
        description="Relation classification and extraction over "
        "entity-annotated scientific abstracts.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="INFO-level logging")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="fit an ensemble")
    _add_common(train, relations_required=True)
    train.add_argument("--extra-abstracts", action="append",
                       help="additional abstracts (e.g. generated data)")
    train.add_argument("--extra-relations", action="append",
                       help="relations paired with --extra-abstracts")
    train.add_argument("--embeddings", help="pretrained word vectors (text)")
    train.add_argument("--out", required=True, help="checkpoint directory")
    train.add_argument("--dump-processed", metavar="TSV",
                       help="write the processed training examples")
    train.set_defaults(func=cmd_train)

    predict = commands.add_parser("predict", help="label new data")
    predict.add_argument("--abstracts", required=True)
    predict.add_argument("--relations",
                         help="pairs to label (classification); UNKNOWN "
                         "lines are accepted")
    predict.add_argument("--pos", help="optional doc_id<TAB>tags POS file")
    predict.add_argument("--model-dir", required=True, dest="model_dir")
    predict.add_argument("--out", required=True, help="relation output file")
    predict.add_argument("--probs", help="also write per-class probabilities")
    predict.add_argument("--dump-processed", metavar="TSV")
    predict.set_defaults(func=cmd_predict)

    evaluate = commands.add_parser("evaluate", help="score predictions")
    _add_common(evaluate, relations_required=True)
    evaluate.add_argument("--predicted", required=True,
                          help="relation file to score")
    evaluate.add_argument("--out", required=True, help="report directory")
    evaluate.add_argument("--no-figures", action="store_true")
    evaluate.set_defaults(func=cmd_evaluate)

    aug = commands.add_parser("augment", help="synthesize training data")
    _add_common(aug, relations_required=True)
    aug.add_argument("--lm-corpus", required=True, dest="lm_corpus",
                     help="plain text, one sentence per line")
    aug.add_argument("--save-lm", dest="save_lm",
                     help="persist the fitted language model (JSON)")
    aug.add_argument("--pool-abstracts", dest="pool_abstracts",
                     help="draw entity pairs from this dataset instead")
    aug.add_argument("--pool-relations", dest="pool_relations")
    aug.add_argument("--out", required=True, help="output directory")
    aug.add_argument("--no-figures", action="store_true")
    aug.set_defaults(func=cmd_augment)

    cv = commands.add_parser("cv", help="cross-validate")
    _add_common(cv, relations_required=True)
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--out", required=True, help="output directory")
    cv.add_argument("--no-figures", action="store_true")
    cv.set_defaults(func=cmd_cv)

    sweep = commands.add_parser("sweep", help="vary one parameter")
    _add_common(sweep, relations_required=True)
    sweep.add_argument("--param", required=True,
                       help="config key to vary")
    sweep.add_argument("--values",
                       help="comma-separated values (default: built-in grid)")
    sweep.add_argument("--eval-abstracts", required=True, dest="eval_abstracts")
    sweep.add_argument("--eval-relations", required=True, dest="eval_relations")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--no-figures", action="store_true")
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
