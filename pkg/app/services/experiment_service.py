"""
Seeded Monte Carlo experiments over PSL2(K) and the abstract tree.

Every trial draws from its own SeedSequence substream, so a trial can be
replayed alone and the output does not depend on the worker count.
"""

from functools import partial
from multiprocessing import Pool
from typing import Callable, List, TextIO, Tuple

import numpy as np

from app.exceptions import LabError
from app.models.experiment_models import (
    DensityTrialRecord,
    ExperimentConfig,
    ExperimentKind,
    ExperimentSummary,
    NormalizeTrialRecord,
    TreeautTrialRecord,
    TupleFamily,
)
from app.services import density, nielsen, psl2, treeaut
from app.services.nielsen import MarkedTuple
from app.utils.helpers import fraction, trial_rng, trial_seed, write_json_lines
from app.utils.logger import get_logger

logger = get_logger(__name__)


def _error_text(error: LabError) -> str:
    return f"{type(error).__name__}: {error.message}"


# ---------------------------------------------------------------------------
# Tuple families
# ---------------------------------------------------------------------------

def sample_density_tuple(config: ExperimentConfig, rng: np.random.Generator) -> MarkedTuple:
    """A hyperbolic entry followed by elliptic ones, optionally pushed into F_p((t^m))."""
    spec = config.field
    entries = [psl2.sample_hyperbolic(spec, rng, config.length_law, max_translation=config.max_translation)]
    entries.extend(psl2.sample_elliptic(spec, rng) for _ in range(config.k - 1))
    if config.family is TupleFamily.SUBFIELD:
        entries = [psl2.embed_subfield(g, config.subfield_power) for g in entries]
    return MarkedTuple(tuple(entries))


def sample_normalize_tuple(config: ExperimentConfig, rng: np.random.Generator) -> MarkedTuple:
    """
    A k-tuple containing at least one elliptic entry.

    elliptic: all entries elliptic.  mixed: elliptic, hyperbolic, then either.
    constructed: an elliptic pair at distance 1..3 padded with rotations.
    generic: each entry hyperbolic or elliptic with probability 1/2, one forced elliptic.
    """
    spec = config.field
    k = config.k

    def hyperbolic():
        return psl2.sample_hyperbolic(spec, rng, config.length_law, max_translation=config.max_translation)

    if config.family is TupleFamily.ELLIPTIC:
        entries = [psl2.sample_elliptic(spec, rng) for _ in range(k)]
    elif config.family is TupleFamily.MIXED:
        entries = [psl2.sample_elliptic(spec, rng), hyperbolic()]
        entries.extend(psl2.sample_elliptic(spec, rng) if rng.random() < 0.5 else hyperbolic() for _ in range(k - 2))
    elif config.family is TupleFamily.CONSTRUCTED:
        distance = int(rng.integers(1, 4))
        entries = list(psl2.elliptic_pair(spec, rng, distance))
        entries.extend(psl2.sample_rotation(spec, rng) for _ in range(k - 2))
    else:
        forced = int(rng.integers(k))
        entries = [
            psl2.sample_elliptic(spec, rng) if i == forced or rng.random() < 0.5 else hyperbolic() for i in range(k)
        ]
    return MarkedTuple(tuple(entries))


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

def density_trial(config: ExperimentConfig, trial: int) -> DensityTrialRecord:
    rng = trial_rng(config.seed, trial)
    record = DensityTrialRecord(trial=trial, seed=trial_seed(config.seed, trial), status="error")
    try:
        t = sample_density_tuple(config, rng)
        certificate = density.certify_dense(t, config.word_length, config.nd_level)
    except LabError as e:
        record.error = _error_text(e)
        return record
    record.status = certificate.status.value
    record.reasons = [r.value for r in certificate.reasons]
    if certificate.unbounded:
        record.unbounded = certificate.unbounded.word
    if certificate.nondiscrete:
        record.nondiscrete = f"{certificate.nondiscrete.word} ^{certificate.nondiscrete.exponent}"
    if certificate.zariski:
        record.zariski = list(certificate.zariski.words)
    if certificate.trace_field:
        tf = certificate.trace_field
        record.trace_field = "automatic" if tf.automatic else " ; ".join(
            f"({w}){'*' if s else ''}^{e}" for w, s, e in zip(tf.words, tf.shifted, tf.exponents)
        )
    record.verified = density.verify_certificate(t, certificate)
    return record


def normalize_trial(config: ExperimentConfig, trial: int) -> NormalizeTrialRecord:
    rng = trial_rng(config.seed, trial)
    record = NormalizeTrialRecord(trial=trial, seed=trial_seed(config.seed, trial), family=config.family.value)
    try:
        t = sample_normalize_tuple(config, rng)
        reduce_word = nielsen.reduce_to_elliptic(t, config.reduction_budget)
        record.reduce_word = nielsen.format_word(reduce_word)
        reduced = nielsen.apply_word(reduce_word, t)
        normalize_word = nielsen.normalize_to_O(reduced, config.scan_radius)
        record.normalize_word = nielsen.format_word(normalize_word)
        word = reduce_word + normalize_word
        record.word = nielsen.format_word(word)
        record.in_O = nielsen.membership_O(nielsen.apply_word(word, t), 1, 2)
        record.verified = record.in_O and reduced[1].classify().is_elliptic
    except LabError as e:
        record.error = _error_text(e)
    return record


def treeaut_trial(config: ExperimentConfig, trial: int) -> TreeautTrialRecord:
    """
    One sample of the portrait side: a hyperbolic portrait with its power law,
    and an elliptic pair at distance 1..3 whose product must translate by twice
    the distance.
    """
    rng = trial_rng(config.seed, trial)
    q, depth = config.tree.q, config.tree.depth
    record = TreeautTrialRecord(trial=trial, seed=trial_seed(config.seed, trial))
    try:
        g = treeaut.sample_hyperbolic_portrait(
            q, rng, depth, config.length_law, max_translation=config.max_translation
        )
        length = g.classify().translation_length
        record.translation_length = length
        try:
            record.power_law = g.compose(g).classify().translation_length == 2 * length
        except LabError:
            record.power_law = None
        distance = 1 + trial % 3
        first, second = treeaut.elliptic_pair(q, rng, depth, distance)
        record.pair_distance = distance
        record.pair_length = first.compose(second).classify().translation_length
        t = MarkedTuple((first, second) + tuple(treeaut.sample_rotation(q, rng, depth) for _ in range(config.k - 2)))
        word = nielsen.normalize_to_O(t, min(config.scan_radius, depth))
        record.normalize_word = nielsen.format_word(word)
        record.in_O = nielsen.membership_O(nielsen.apply_word(word, t), 1, 2)
    except LabError as e:
        record.error = _error_text(e)
    return record


_TRIALS: dict = {
    ExperimentKind.DENSITY: density_trial,
    ExperimentKind.NORMALIZE: normalize_trial,
    ExperimentKind.TREEAUT: treeaut_trial,
}


def _success(config: ExperimentConfig, record) -> bool:
    if config.kind is ExperimentKind.DENSITY:
        return record.status == "Certified" and record.verified
    if config.kind is ExperimentKind.NORMALIZE:
        return record.verified
    return record.error is None and record.pair_length == 2 * record.pair_distance and record.in_O


class ExperimentService:
    """Runs seeded experiments and emits JSON lines in trial order."""

    def run_trials(self, config: ExperimentConfig) -> List:
        trial_fn: Callable = partial(_TRIALS[config.kind], config)
        indices = range(config.trials)
        if config.workers > 1 and config.trials > 1:
            with Pool(config.workers) as pool:
                return pool.map(trial_fn, indices)
        return [trial_fn(i) for i in indices]

    def summarize(self, config: ExperimentConfig, records: List) -> ExperimentSummary:
        successes = sum(1 for r in records if _success(config, r))
        errors = sum(1 for r in records if r.error is not None)
        return ExperimentSummary(
            kind=config.kind,
            family=config.family,
            trials=len(records),
            successes=successes,
            errors=errors,
            success_fraction=fraction(successes, len(records)),
            seed=config.seed,
        )

    def run(self, config: ExperimentConfig, stream: TextIO) -> Tuple[List, ExperimentSummary]:
        """
        Run every trial and write the records followed by the summary row.

        Args:
            config: Validated experiment configuration
            stream: Destination of the JSON lines

        Returns:
            The trial records and the summary
        """
        logger.info(
            "experiment started",
            kind=config.kind.value,
            family=config.family.value,
            trials=config.trials,
            seed=config.seed,
            workers=config.workers,
        )
        records = self.run_trials(config)
        summary = self.summarize(config, records)
        write_json_lines(list(records) + [summary], stream)
        logger.info(
            "experiment finished",
            kind=config.kind.value,
            successes=summary.successes,
            errors=summary.errors,
            fraction=summary.success_fraction,
        )
        return records, summary


# Global service instance
experiment_service = ExperimentService()
