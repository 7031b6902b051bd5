"""File schemas: instance/graph/codec/corpus/encoder documents plus CSV emission.

JSON carries structured inputs and summaries, CSV carries tabular results.
All text output is UTF-8 with LF line endings and full-precision floats
(``repr``), so identical runs emit byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .distributions import DeterministicTranslator, FiniteDistribution, Sentence
from .errors import SchemaError
from .evaluation import PairEvalRecord, SweepRow
from .generative import (
    AffineCodec,
    AlignedCorpus,
    FunctionClassSpec,
    RandomizedCodec,
    TranslationGraph,
)
from .impossibility import BoundReport, ManyToManyInstance, TwoToOneInstance
from .trainer import EdgeRegressionResult, EncoderEstimate


def _read_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc


def _write_json(payload: dict, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Instances


def _sentence_entry(sentence: Sentence):
    if sentence.target_tag is None:
        return sentence.body
    return [sentence.target_tag, sentence.body]


def _parse_sentence(lang: str, entry) -> Sentence:
    if isinstance(entry, str):
        return Sentence(lang, entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return Sentence(lang, str(entry[1]), target_tag=str(entry[0]))
    raise SchemaError(f"sentence entry for {lang!r} must be an id or [target, id]: {entry!r}")


def _parse_pair_key(key: str) -> tuple[str, str]:
    if "->" not in key:
        raise SchemaError(f"translator key {key!r} must look like 'src->dst'")
    src, dst = key.split("->", 1)
    return src, dst


def instance_to_dict(instance) -> dict:
    if isinstance(instance, TwoToOneInstance):
        l0, l1 = instance.source_languages
        target = instance.target_language
        sentences = {
            l0: [s.body for s in instance.marginals[0].support],
            l1: [s.body for s in instance.marginals[1].support],
            target: [s.body for s in instance.target_sentences],
        }
        translators = {}
        for lang, f in zip(instance.source_languages, instance.translators):
            translators[f"{lang}->{target}"] = {
                s.body: f(s).body for s in f.domain
            }
        return {
            "languages": [l0, l1, target],
            "sentences": sentences,
            "marginals": {
                l0: [float(w) for w in instance.marginals[0].weights],
                l1: [float(w) for w in instance.marginals[1].weights],
            },
            "translators": translators,
        }
    if isinstance(instance, ManyToManyInstance):
        targets_of: dict[str, list[str]] = {}
        for (src, dst) in instance.pairs():
            targets_of.setdefault(src, []).append(dst)
        sentences: dict[str, list] = {lang: [] for lang in instance.languages}
        marginals: dict[str, list[float]] = {}
        for lang in instance.languages:
            weights = []
            share = 1.0 / len(targets_of[lang]) if lang in targets_of else 0.0
            for dst in sorted(targets_of.get(lang, [])):
                marginal = instance.source_marginal(lang, dst)
                for atom, w in marginal.items():
                    sentences[lang].append(_sentence_entry(atom))
                    weights.append(float(w) * share)
            for atom in instance.sentence_pool.get(lang, ()):
                sentences[lang].append(_sentence_entry(atom))
                weights.append(0.0)
            if lang in targets_of:
                marginals[lang] = weights
        translators = {
            f"{src}->{dst}": {
                x.body: instance.translators[(src, dst)](x).body
                for x in instance.source_marginal(src, dst).support
            }
            for (src, dst) in instance.pairs()
        }
        return {
            "languages": list(instance.languages),
            "sentences": sentences,
            "marginals": marginals,
            "translators": translators,
        }
    raise TypeError(f"unsupported instance type: {type(instance)!r}")


def instance_from_dict(payload: dict):
    try:
        languages = list(payload["languages"])
        raw_sentences = payload["sentences"]
        raw_marginals = payload.get("marginals", payload.get("distributions"))
        raw_translators = payload["translators"]
    except KeyError as exc:
        raise SchemaError(f"instance document missing key {exc}") from exc
    if raw_marginals is None:
        raise SchemaError("instance document missing key 'marginals'")

    sentences: dict[str, list[Sentence]] = {}
    for lang in languages:
        sentences[lang] = [
            _parse_sentence(lang, entry) for entry in raw_sentences.get(lang, [])
        ]
    pair_keys = sorted(_parse_pair_key(k) for k in raw_translators)
    for src, dst in pair_keys:
        if src not in languages or dst not in languages:
            raise SchemaError(f"translator pair {src}->{dst} references unknown language")

    targets = {dst for _src, dst in pair_keys}
    sources = {src for src, _dst in pair_keys}
    tagged = any(s.target_tag is not None for lang in languages for s in sentences[lang])
    two_to_one = (
        not tagged
        and len(targets) == 1
        and len(sources) == 2
        and set(raw_marginals) == sources
    )

    if two_to_one:
        target = targets.pop()
        l0, l1 = sorted(sources)
        marginals = []
        translators = []
        for lang in (l0, l1):
            atoms = sentences[lang]
            weights = raw_marginals[lang]
            if len(weights) != len(atoms):
                raise SchemaError(
                    f"marginal for {lang!r} has {len(weights)} weights for {len(atoms)} sentences"
                )
            marginals.append(FiniteDistribution(tuple(atoms), np.array(weights)))
            table = raw_translators[f"{lang}->{target}"]
            target_by_body = {s.body: s for s in sentences[target]}
            mapping = {}
            for atom in atoms:
                if atom.body not in table:
                    raise SchemaError(f"translator {lang}->{target} misses {atom.body!r}")
                image_body = table[atom.body]
                if image_body not in target_by_body:
                    raise SchemaError(
                        f"translator {lang}->{target} maps to unknown sentence {image_body!r}"
                    )
                mapping[atom] = target_by_body[image_body]
            translators.append(DeterministicTranslator(mapping))
        return TwoToOneInstance(
            source_languages=(l0, l1),
            target_language=target,
            marginals=tuple(marginals),
            translators=tuple(translators),
            target_sentences=tuple(sentences[target]),
        )

    # Many-to-many: per-language marginals over tagged sentences; conditioning
    # on the target tag recovers each ordered pair's source marginal.
    pool = {
        lang: tuple(s for s in sentences[lang] if s.target_tag is None)
        for lang in languages
    }
    pair_marginals = {}
    translators = {}
    for src, dst in pair_keys:
        weights = raw_marginals.get(src)
        if weights is None:
            raise SchemaError(f"no marginal for source language {src!r}")
        if len(weights) != len(sentences[src]):
            raise SchemaError(
                f"marginal for {src!r} has {len(weights)} weights for {len(sentences[src])} sentences"
            )
        atoms = [s for s in sentences[src] if s.target_tag == dst]
        if not atoms:
            raise SchemaError(f"no sentences of {src!r} tagged for target {dst!r}")
        index = {s: w for s, w in zip(sentences[src], weights)}
        mass = sum(index[a] for a in atoms)
        if mass <= 0:
            raise SchemaError(f"pair {src}->{dst} has zero marginal mass")
        pair_marginals[(src, dst)] = FiniteDistribution(
            tuple(atoms), np.array([index[a] / mass for a in atoms])
        )
        table = raw_translators[f"{src}->{dst}"]
        dst_by_body = {s.body: s for s in pool[dst]}
        mapping = {}
        for atom in atoms:
            if atom.body not in table:
                raise SchemaError(f"translator {src}->{dst} misses {atom.body!r}")
            image_body = table[atom.body]
            if image_body not in dst_by_body:
                raise SchemaError(
                    f"translator {src}->{dst} maps to unknown sentence {image_body!r}"
                )
            mapping[atom] = dst_by_body[image_body]
        translators[(src, dst)] = DeterministicTranslator(mapping)
    return ManyToManyInstance.from_marginals(
        languages, pair_marginals, translators, pool
    )


def load_instance(path):
    return instance_from_dict(_read_json(path))


def save_instance(instance, path) -> None:
    _write_json(instance_to_dict(instance), path)


# ---------------------------------------------------------------------------
# Graphs, codecs, corpora, encoders


def load_graph(path) -> TranslationGraph:
    payload = _read_json(path)
    try:
        return TranslationGraph.from_dict(payload)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed graph document: {exc}") from exc


def save_graph(graph: TranslationGraph, path) -> None:
    _write_json(graph.to_dict(), path)


def save_codecs(
    codecs: Mapping[str, object],
    spec: FunctionClassSpec,
    path,
    sigma: float = 0.0,
    nuisance_dim: int = 0,
) -> None:
    payload = {
        "spec": spec.to_dict(),
        "sigma": sigma,
        "nuisance_dim": nuisance_dim,
        "codecs": {
            lang: {"W": codec.W.tolist(), "b": codec.b.tolist()}
            for lang, codec in sorted(codecs.items())
        },
    }
    _write_json(payload, path)


def load_codecs(path) -> tuple[FunctionClassSpec, dict[str, object], float, int]:
    payload = _read_json(path)
    try:
        spec = FunctionClassSpec.from_dict(payload["spec"])
        sigma = float(payload.get("sigma", 0.0))
        nuisance = int(payload.get("nuisance_dim", 0))
        codecs: dict[str, object] = {}
        for lang, entry in payload["codecs"].items():
            W = np.array(entry["W"])
            b = np.array(entry["b"])
            if nuisance > 0 or sigma > 0:
                codecs[lang] = RandomizedCodec(W, b, nuisance, sigma)
            else:
                codecs[lang] = AffineCodec(W, b)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed codec document: {exc}") from exc
    return spec, codecs, sigma, nuisance


def save_corpus(corpus: AlignedCorpus, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        path,
        pairs=corpus.pairs,
        edge=np.array(list(corpus.edge)),
        meta=np.array(json.dumps(dict(corpus.meta), sort_keys=True)),
    )


def load_corpus(path) -> AlignedCorpus:
    with np.load(path, allow_pickle=False) as npz:
        try:
            pairs = np.array(npz["pairs"])
            edge = tuple(str(x) for x in npz["edge"])
            meta = json.loads(str(npz["meta"][()]))
        except KeyError as exc:
            raise SchemaError(f"{path}: malformed corpus file: {exc}") from exc
    return AlignedCorpus(edge, pairs, meta)


def corpus_filename(edge: tuple[str, str]) -> str:
    return f"corpus_{edge[0]}__{edge[1]}.npz"


def save_encoders(
    estimate: EncoderEstimate, path, spec: FunctionClassSpec | None = None
) -> None:
    payload = estimate.to_dict()
    payload["spec"] = None if spec is None else spec.to_dict()
    _write_json(payload, path)


def load_encoders(path) -> tuple[EncoderEstimate, FunctionClassSpec | None]:
    payload = _read_json(path)
    try:
        estimate = EncoderEstimate.from_dict(payload)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed encoder document: {exc}") from exc
    spec = payload.get("spec")
    return estimate, None if spec is None else FunctionClassSpec.from_dict(spec)


# ---------------------------------------------------------------------------
# CSV / JSON result emission


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header: Sequence[str], rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_bound_report_csv(reports: Sequence[BoundReport], path) -> None:
    header = [
        "instance_id",
        "epsilon",
        "tv_max",
        "bound_sum",
        "bound_max",
        "bound_avg",
        "bf_value",
        "holds",
    ]
    rows = [
        (
            r.instance_id,
            r.epsilon,
            r.tv_max,
            r.bound_sum,
            r.bound_max,
            r.bound_avg,
            r.bf_value,
            r.holds,
        )
        for r in reports
    ]
    _write_csv(path, header, rows)


def bound_report_to_dict(report: BoundReport) -> dict:
    return {
        "instance_id": report.instance_id,
        "epsilon": report.epsilon,
        "kind": report.kind,
        "pair_tvs": [
            {"target": t, "source_a": a, "source_b": b, "tv": tv}
            for t, a, b, tv in report.pair_tvs
        ],
        "tv_max": report.tv_max,
        "bound_sum": report.bound_sum,
        "bound_max": report.bound_max,
        "bound_avg": report.bound_avg,
        "bf_value": report.bf_value,
        "bf_objective": report.bf_objective,
        "holds": report.holds,
    }


def write_pair_eval_csv(records: Sequence[PairEvalRecord], path) -> None:
    header = [
        "src",
        "dst",
        "path_len",
        "path",
        "measured_loss",
        "mc_stderr",
        "rho_hat",
        "bound",
        "holds",
    ]
    rows = [
        (
            r.src,
            r.dst,
            r.path_len,
            "->".join(r.path),
            r.measured_loss,
            r.mc_stderr,
            r.rho_hat,
            r.bound,
            r.holds,
        )
        for r in records
    ]
    _write_csv(path, header, rows)


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    header = ["n", "trial", "empirical_loss", "population_loss", "gap"]
    _write_csv(
        path,
        header,
        [(r.n, r.trial, r.empirical_loss, r.population_loss, r.gap) for r in rows],
    )


def write_edge_loss_csv(results: Sequence[EdgeRegressionResult], path) -> None:
    header = ["edge_a", "edge_b", "n", "empirical_loss"]
    _write_csv(
        path,
        header,
        [(r.edge[0], r.edge[1], r.n, r.empirical_loss) for r in results],
    )


def write_summary_json(payload: dict, path) -> None:
    _write_json(payload, path)
