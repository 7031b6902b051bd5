"""Population losses, zero-shot composites, chained path bounds, and sample-size formulas.

Population losses are Monte-Carlo integrals against fresh seeded latent draws.
The measured loss of a learned composite is its squared gap to the ground-truth
composite on the source sentence distribution; in the randomized setting the
reference is the conditional-mean translation (nuisance noise decoded at its
mean seed), so a perfectly trained map scores zero in both settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .affine import AffineMap
from .errors import DomainError
from .generative import (
    AlignedCorpus,
    LatentSampler,
    RandomizedCodec,
    TranslationGraph,
    generate_corpus,
    randomized_generate,
)
from .seeding import derive_seed
from .trainer import EncoderEstimate, fit_edge


@dataclass(frozen=True)
class EvalConfig:
    samples: int = 10_000
    seed: int = 0
    mc_slack: float = 0.05

    def __post_init__(self):
        if self.samples < 1000:
            raise ValueError("need at least 1000 evaluation samples")
        if self.mc_slack < 0:
            raise ValueError("mc_slack must be nonnegative")


def _check_sampler(codec, sampler: LatentSampler) -> None:
    latent = codec.latent_dim if isinstance(codec, RandomizedCodec) else codec.dim
    if latent != sampler.dim:
        raise ValueError(
            f"sampler dimension {sampler.dim} does not match codec latent dimension {latent}"
        )


def _pair_samples(
    codecs: Mapping[str, object],
    src: str,
    dst: str,
    sampler: LatentSampler,
    m: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation inputs from the source language plus ground-truth references."""
    for lang in (src, dst):
        if lang not in codecs:
            raise DomainError(f"no codec for language {lang!r}")
    src_codec, dst_codec = codecs[src], codecs[dst]
    _check_sampler(src_codec, sampler)
    z = sampler.fork(seed, "pop", src, dst).sample(m)
    if isinstance(src_codec, RandomizedCodec):
        rng = np.random.default_rng(
            derive_seed(seed, "pop-noise", sampler.seed, src, dst)
        )
        r = src_codec.draw_decoder_seeds(rng, m)
        x = src_codec.decode(z, r)
        reference = dst_codec.mean_decode(src_codec.encode(x))
    else:
        x = src_codec.decode(z)
        reference = dst_codec.decode(src_codec.encode(x))
    return x, reference


def _population_loss_detail(
    estimate: EncoderEstimate,
    pair: tuple[str, str],
    codecs: Mapping[str, object],
    sampler: LatentSampler,
    m: int,
    seed: int,
) -> tuple[float, float]:
    src, dst = pair
    x, reference = _pair_samples(codecs, src, dst, sampler, m, seed)
    learned = estimate.composite(src, dst)(x)
    squared = np.sum((learned - reference) ** 2, axis=1)
    loss = float(squared.mean())
    stderr = float(squared.std(ddof=1) / math.sqrt(m))
    return loss, stderr


def population_loss(
    estimate: EncoderEstimate,
    pair: tuple[str, str],
    codecs: Mapping[str, object],
    sampler: LatentSampler,
    m: int,
    seed: int,
) -> float:
    """Monte-Carlo squared gap between the learned and ground-truth composites."""
    if m < 1000:
        raise ValueError("need at least 1000 samples")
    return _population_loss_detail(estimate, pair, codecs, sampler, m, seed)[0]


def compose_zero_shot(estimate: EncoderEstimate, pair: tuple[str, str]) -> AffineMap:
    """The single affine map translating pair[0] sentences into pair[1] sentences."""
    src, dst = pair
    return estimate.composite(src, dst)


def shortest_path_and_diameter(
    graph: TranslationGraph,
) -> tuple[dict[tuple[str, str], tuple[str, ...]], int]:
    """All-pairs BFS shortest paths (lexicographically smallest) and the diameter.

    Paths are keyed by sorted language pairs and run from the smaller id to the
    larger one.
    """
    graph.require_connected()
    langs = sorted(graph.languages)
    paths: dict[tuple[str, str], tuple[str, ...]] = {}
    diameter = 0
    for src in langs:
        dist = {src: 0}
        best: dict[str, tuple[str, ...]] = {src: (src,)}
        frontier = [src]
        level = 0
        while frontier:
            level += 1
            next_frontier = sorted(
                {
                    nb
                    for node in frontier
                    for nb in graph.neighbors(node)
                    if nb not in dist
                }
            )
            for node in next_frontier:
                dist[node] = level
                best[node] = min(
                    best[parent] + (node,)
                    for parent in graph.neighbors(node)
                    if dist.get(parent) == level - 1
                )
            frontier = next_frontier
        for dst in langs:
            if src < dst:
                paths[(src, dst)] = best[dst]
                diameter = max(diameter, dist[dst])
    return paths, diameter


def path_bound(
    edge_losses: Mapping[tuple[str, str], float],
    rho_hat: float,
    path: Sequence[str],
) -> float:
    """Chained bound along a path: 2 * rho_hat^2 * (sum of edge losses).

    Edge losses are looked up under the directed key first, then the reverse.
    """
    if rho_hat < 0:
        raise ValueError("rho_hat must be nonnegative")
    if len(path) < 2:
        raise ValueError("path needs at least two nodes")
    total = 0.0
    for a, b in zip(path, path[1:]):
        if (a, b) in edge_losses:
            total += edge_losses[(a, b)]
        elif (b, a) in edge_losses:
            total += edge_losses[(b, a)]
        else:
            raise DomainError(f"no edge loss for path step ({a!r}, {b!r})")
    return 2.0 * rho_hat**2 * total


@dataclass(frozen=True)
class PairEvalRecord:
    """Measured zero-shot loss and its chained path bound for one language pair."""

    src: str
    dst: str
    path: tuple[str, ...]
    path_len: int
    measured_loss: float
    mc_stderr: float
    edge_losses: tuple[float, ...]
    rho_hat: float
    bound: float
    holds: bool

    def __post_init__(self):
        if self.path[0] != self.src or self.path[-1] != self.dst:
            raise ValueError("path endpoints do not match the pair")
        if self.path_len != len(self.path) - 1:
            raise ValueError("path_len must count the edges of the path")
        recomputed = 2.0 * self.rho_hat**2 * sum(self.edge_losses)
        if abs(recomputed - self.bound) > 1e-9 * max(1.0, abs(self.bound)):
            raise ValueError("bound is not recomputable from rho_hat and edge losses")


def verify_chain_bound(
    estimate: EncoderEstimate,
    graph: TranslationGraph,
    codecs: Mapping[str, object],
    sampler: LatentSampler,
    config: EvalConfig,
) -> list[PairEvalRecord]:
    """Check the chained path bound for every unordered language pair.

    Edge losses entering the bound are measured population losses in the
    direction the path traverses them. rho_hat is the largest operator norm
    among the maps the chaining composes: the inverted destination encoder and
    the encoders of the path's nodes.
    """
    paths, _diam = shortest_path_and_diameter(graph)
    edge_loss_cache: dict[tuple[str, str], float] = {}

    def directed_edge_loss(a: str, b: str) -> float:
        if (a, b) not in edge_loss_cache:
            edge_loss_cache[(a, b)] = _population_loss_detail(
                estimate, (a, b), codecs, sampler, config.samples, config.seed
            )[0]
        return edge_loss_cache[(a, b)]

    records = []
    for (src, dst), path in sorted(paths.items()):
        losses = tuple(
            directed_edge_loss(a, b) for a, b in zip(path, path[1:])
        )
        rho_hat = max(
            1.0 / estimate.encoder(dst).smallest_gain(),
            max(estimate.encoder(node).operator_norm() for node in path),
        )
        bound = 2.0 * rho_hat**2 * sum(losses)
        measured, stderr = _population_loss_detail(
            estimate, (src, dst), codecs, sampler, config.samples, config.seed
        )
        holds = measured <= bound * (1.0 + config.mc_slack) + 1e-9
        records.append(
            PairEvalRecord(
                src=src,
                dst=dst,
                path=path,
                path_len=len(path) - 1,
                measured_loss=measured,
                mc_stderr=stderr,
                edge_losses=losses,
                rho_hat=rho_hat,
                bound=bound,
                holds=holds,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Sample-size formulas


def required_sample_size(
    eps: float, delta: float, n_languages: int, n_params: int, sup_bound: float
) -> int:
    """Aligned pairs per edge sufficient for the union-bounded concentration step.

    Solves 2 * N(eps/16M) * exp(-n eps^2 / 16 M^4) = delta / K^2 for n, using
    the finite-dimensional covering count log N = p * ln(16 M / eps) (clamped
    below at zero, since a covering number is at least one).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if n_languages < 2:
        raise ValueError("need at least two languages")
    if n_params < 1:
        raise ValueError("n_params must be at least 1")
    if sup_bound <= 0:
        raise ValueError("sup_bound must be positive")
    constant = 16.0 * sup_bound**4
    log_cover = max(0.0, n_params * math.log(16.0 * sup_bound / eps))
    log_union = math.log(n_languages**2 / delta)
    n = math.ceil(constant / eps**2 * (log_cover + log_union))
    return max(n, 1)


def concentration_bound(n: int, eps: float, sup_bound: float, log_cover: float) -> float:
    """Failure-probability bound 2 * exp(log_cover - n eps^2 / 16 M^4), capped at 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if sup_bound <= 0:
        raise ValueError("sup_bound must be positive")
    exponent = log_cover - n * eps**2 / (16.0 * sup_bound**4)
    return min(1.0, 2.0 * math.exp(exponent))


# ---------------------------------------------------------------------------
# Generalization-gap sweep


class SweepRow(NamedTuple):
    n: int
    trial: int
    empirical_loss: float
    population_loss: float
    gap: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    slope: float | None
    degenerate: bool

    def median_gaps(self) -> dict[int, float]:
        by_n: dict[int, list[float]] = {}
        for row in self.rows:
            by_n.setdefault(row.n, []).append(row.gap)
        return {n: float(np.median(g)) for n, g in sorted(by_n.items())}


def _make_corpus(edge, codecs, n, sampler, seed) -> AlignedCorpus:
    kinds = {isinstance(codecs[lang], RandomizedCodec) for lang in edge}
    if kinds == {True}:
        return randomized_generate(edge, codecs, n, sampler, seed)
    if kinds == {False}:
        return generate_corpus(edge, codecs, n, sampler, seed)
    raise ValueError("edge endpoints mix randomized and deterministic codecs")


def sample_complexity_sweep(
    edge: tuple[str, str],
    codecs: Mapping[str, object],
    n_list: Sequence[int],
    trials: int,
    sampler: LatentSampler,
    seed: int,
    ridge: float = 1e-10,
    population_samples: int = 100_000,
) -> SweepResult:
    """Fit one edge at increasing corpus sizes and track the generalization gap.

    For each (n, trial): fit on a fresh corpus, record the in-sample loss and
    the loss on a large fresh sample, and their absolute gap. The log-log slope
    of the median gap against n is fitted by least squares. A run where every
    gap is below 1e-10 (the noiseless realizable regime) is flagged degenerate
    and gets no slope.
    """
    if len(n_list) < 2:
        raise ValueError("n_list needs at least two sizes")
    if list(n_list) != sorted(set(n_list)):
        raise ValueError("n_list must be strictly ascending")
    if trials < 5:
        raise ValueError("need at least 5 trials per size")
    rows = []
    for n in n_list:
        for trial in range(trials):
            train = _make_corpus(
                edge, codecs, n, sampler, derive_seed(seed, "sweep-train", n, trial)
            )
            fitted = fit_edge(train, ridge)
            fresh = _make_corpus(
                edge,
                codecs,
                population_samples,
                sampler,
                derive_seed(seed, "sweep-pop", n, trial),
            )
            residual = fitted.transform(fresh.source_points) - fresh.target_points
            pop = float(np.mean(np.sum(residual**2, axis=1)))
            gap = abs(pop - fitted.empirical_loss)
            rows.append(SweepRow(int(n), trial, fitted.empirical_loss, pop, gap))
    result = SweepResult(tuple(rows), None, False)
    medians = result.median_gaps()
    if max(medians.values()) <= 1e-10:
        return SweepResult(tuple(rows), None, True)
    ns = np.array(sorted(medians))
    meds = np.array([medians[n] for n in sorted(medians)])
    slope = float(np.polyfit(np.log(ns), np.log(np.maximum(meds, 1e-300)), 1)[0])
    return SweepResult(tuple(rows), slope, False)
