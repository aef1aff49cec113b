"""Seeded event-level simulation of the coincidence experiment.

Each trial is one coincidence window: a creation event (single pair or double
pair), photon arrivals, detection with efficiency d, dark counts with
probability gamma, fourfold-coincidence conditioning, and the spin product of
the three signal detectors.  Statistics are compared against the closed-form
model in :mod:`ghzdet.detector`.

Single-pair windows follow the additive-channel convention of the closed-form
aggregate: the ten arrival combinations act as independent rare channels, so
the per-window fourfold probability is 1 - prod_i(1 - q_i) ~= sum_i q_i, the
sum the analytic model uses.  (Drawing a single combination per window and
averaging would undercount the aggregate tenfold relative to that model.)

Reproducibility: trials are processed in fixed-size chunks; chunk c uses an
independent generator seeded from (master_seed, c).  Tallies are merged by
addition in chunk order, so results are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Optional

import numpy as np

from . import detector, quantum
from .detector import DetectorParams
from .quantum import ghz_state, validate_setting

ARRIVAL_TAGS = (
    "TD1", "TD2", "TD3", "D1D2", "D1D3", "D2D3", "D1D1", "D2D2", "D3D3", "TT",
)
# Photon count at (T, D1, D2, D3) for each arrival combination.
ARRIVAL_COUNTS = np.array(
    [
        [1, 1, 0, 0],
        [1, 0, 1, 0],
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1, 0, 1],
        [0, 0, 1, 1],
        [0, 2, 0, 0],
        [0, 0, 2, 0],
        [0, 0, 0, 2],
        [2, 0, 0, 0],
    ],
    dtype=np.int64,
)
_SAME_DETECTOR = ARRIVAL_COUNTS.max(axis=1) == 2

Z_FLAG_THRESHOLD = 4.0


@dataclass(frozen=True)
class RunConfig:
    params: DetectorParams
    setting: str
    n_trials: int
    master_seed: int
    arrival_weights: Optional[tuple[float, ...]] = None
    chunk_size: int = 1_000_000
    n_workers: int = 1

    def __post_init__(self):
        validate_setting(self.setting)
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")
        if self.arrival_weights is not None:
            if len(self.arrival_weights) != 10:
                raise ValueError("arrival_weights must have 10 entries")
            if any(w < 0.0 for w in self.arrival_weights):
                raise ValueError("arrival_weights must be nonnegative")
            if sum(self.arrival_weights) <= 0.0:
                raise ValueError("arrival_weights must sum to a positive value")


@dataclass(frozen=True)
class TrialOutcome:
    creation: str  # "pair" or "twopair"
    arrival: str  # arrival tag ("TD1", ..., "TT", or "TD1D2D3" for double pairs)
    fired: tuple[bool, bool, bool, bool]  # (T, D1, D2, D3)
    dark_flags: tuple[bool, bool, bool, bool]
    classified_ghz: bool
    product: Optional[int]  # ±1 when all four fired, else None

    def __post_init__(self):
        if (self.product is not None) != all(self.fired):
            raise ValueError("product must be present exactly for fourfold trials")


@dataclass(frozen=True)
class RunStats:
    n_trials: int
    n_fourfold: int
    n_ghz_fourfold: int
    e_hat: Optional[float]  # None when no coincidence was observed
    std_err: Optional[float]
    p4_hat: float

    @property
    def no_coincidences(self) -> bool:
        return self.n_fourfold == 0


@dataclass(frozen=True)
class ComparisonReport:
    comparable: bool
    analytic_e: float
    analytic_p4: float
    z_correlation: Optional[float]
    z_fourfold: float
    flagged: bool


def _channel_multiplicities(cfg: RunConfig) -> np.ndarray:
    """Per-channel multiplicity, normalized so the default weights give 1 each.

    Channel i contributes m_i * q_i to the single-pair fourfold probability;
    with the default (equal) weights the total is the plain sum over the ten
    combinations, matching the closed-form aggregate.
    """
    if cfg.arrival_weights is None:
        return np.ones(10)
    w = np.asarray(cfg.arrival_weights, dtype=float)
    return 10.0 * w / w.sum()


def _pair_channel_probs(cfg: RunConfig) -> np.ndarray:
    """m_i * P(fourfold | pair at channel i) for the ten channels."""
    p = cfg.params
    per_channel = np.where(
        _SAME_DETECTOR,
        detector.p4_pair_same(p.d, p.gamma),
        detector.p4_pair_distinct(p.d, p.gamma),
    )
    return np.minimum(1.0, _channel_multiplicities(cfg) * per_channel)


@dataclass
class _Tally:
    n_trials: int = 0
    n_fourfold: int = 0
    n_ghz: int = 0
    sum_products: int = 0

    def merge(self, other: "_Tally") -> None:
        self.n_trials += other.n_trials
        self.n_fourfold += other.n_fourfold
        self.n_ghz += other.n_ghz
        self.sum_products += other.sum_products


def _chunk_rng(master_seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, chunk_index]))


def _simulate_chunk(cfg: RunConfig, chunk_index: int, n: int) -> _Tally:
    """Vectorized simulation of one chunk of n trials."""
    rng = _chunk_rng(cfg.master_seed, chunk_index)
    p = cfg.params
    tally = _Tally(n_trials=n)

    twopair = rng.random(n) < p.p_twopair
    n_pair = int(n - twopair.sum())
    n_two = n - n_pair

    # Single-pair windows: fourfold iff any of the ten rare channels fires.
    q = _pair_channel_probs(cfg)
    p_any = 1.0 - np.prod(1.0 - q)
    pair_fourfold = rng.random(n_pair) < p_any
    k_pair = int(pair_fourfold.sum())
    if k_pair:
        # Uncorrelated spins: the product is ±1 with equal probability.
        products = rng.integers(0, 2, size=k_pair) * 2 - 1
        tally.sum_products += int(products.sum())
    tally.n_fourfold += k_pair

    # Double-pair windows: one photon per detector.
    if n_two:
        real = rng.random((n_two, 4)) < p.d
        dark = ~real & (rng.random((n_two, 4)) < p.gamma)
        fired = real | dark
        fourfold = fired.all(axis=1)
        # Correlated quadruple: all three signal photons detected, trigger
        # fired on a real photon or a dark count.
        ghz = real[:, 1:].all(axis=1) & fired[:, 0]
        k_ghz = int(ghz.sum())
        k_bkg = int((fourfold & ~ghz).sum())
        if k_ghz:
            signs = quantum.sample_many(ghz_state(), cfg.setting, k_ghz, rng)
            tally.sum_products += int(signs.prod(axis=1).sum())
        if k_bkg:
            products = rng.integers(0, 2, size=k_bkg) * 2 - 1
            tally.sum_products += int(products.sum())
        tally.n_fourfold += k_ghz + k_bkg
        tally.n_ghz += k_ghz
    return tally


def _chunk_worker(args: tuple[RunConfig, int, int]) -> _Tally:
    return _simulate_chunk(*args)


def simulate_trial(cfg: RunConfig, rng: np.random.Generator) -> TrialOutcome:
    """Simulate one coincidence window at full event-level detail.

    Used for the per-trial event log and for inspection; :func:`run` uses a
    vectorized path with the same event distribution.
    """
    p = cfg.params
    if rng.random() < p.p_twopair:
        real = rng.random(4) < p.d
        dark = ~real & (rng.random(4) < p.gamma)
        fired = real | dark
        fourfold = bool(fired.all())
        ghz = bool(real[1:].all() and fired[0])
        product = None
        if fourfold:
            if ghz:
                outcome = quantum.sample_outcomes(ghz_state(), cfg.setting, rng)
                product = outcome.product()
            else:
                product = int(rng.integers(0, 2)) * 2 - 1
        return TrialOutcome(
            creation="twopair",
            arrival="TD1D2D3",
            fired=tuple(bool(f) for f in fired),
            dark_flags=tuple(bool(f) for f in dark),
            classified_ghz=ghz and fourfold,
            product=product,
        )

    # Single pair: simulate each of the ten channels independently (the
    # additive-channel convention); the window is a fourfold if any channel
    # produces one.  Channels with multiplicity m < 1 are gated to probability
    # m; m > 1 is not representable event-by-event and is capped at 1.
    mult = _channel_multiplicities(cfg)
    states = []
    hit = None
    for i in range(10):
        counts = ARRIVAL_COUNTS[i]
        if _SAME_DETECTOR[i]:
            # Two photons at one detector: one count credited with
            # probability d(1-d); with probability d^2 the window is vetoed
            # for this channel (no credited count, no dark fill-in), leaving
            # (1-d)^2 for the dark channel.  Matches the closed-form term.
            u = rng.random()
            real = np.zeros(4, dtype=bool)
            real[counts == 2] = u < p.d * (1.0 - p.d)
            vetoed = p.d * (1.0 - p.d) <= u < p.d * (1.0 - p.d) + p.d * p.d
            dark = ~real & (rng.random(4) < p.gamma)
            if vetoed:
                dark[counts == 2] = False
        else:
            real = (counts == 1) & (rng.random(4) < p.d)
            dark = ~real & (rng.random(4) < p.gamma)
        fired = real | dark
        gated = mult[i] > 0.0 and rng.random() < min(1.0, mult[i])
        states.append((real, dark, fired))
        if hit is None and gated and fired.all():
            hit = i
    if hit is not None:
        _, dark, _ = states[hit]
        return TrialOutcome(
            creation="pair",
            arrival=ARRIVAL_TAGS[hit],
            fired=(True, True, True, True),
            dark_flags=tuple(bool(f) for f in dark),
            classified_ghz=False,
            product=int(rng.integers(0, 2)) * 2 - 1,
        )
    # No fourfold: tag the window with a weight-drawn channel that did not
    # fire all four (one always exists here except under m < 1 gating).
    weights = mult / mult.sum()
    order = list(rng.permutation(10))
    candidates = [i for i in order if not states[i][2].all()] or order
    weight_of = {i: weights[i] for i in candidates}
    total = sum(weight_of.values())
    u = rng.random() * total
    acc = 0.0
    chosen = candidates[-1]
    for i in candidates:
        acc += weight_of[i]
        if u < acc:
            chosen = i
            break
    real, dark, fired = states[chosen]
    # Pathological fallback (all ten channels fourfold but gated out): keep
    # the fourfold so the outcome invariant holds.
    product = int(rng.integers(0, 2)) * 2 - 1 if fired.all() else None
    return TrialOutcome(
        creation="pair",
        arrival=ARRIVAL_TAGS[chosen],
        fired=tuple(bool(f) for f in fired),
        dark_flags=tuple(bool(f) for f in dark),
        classified_ghz=False,
        product=product,
    )


def format_event(outcome: TrialOutcome) -> str:
    """One trial as a log line: creation, arrival, fired bits, dark bits, spins."""
    bits = "".join("1" if f else "0" for f in outcome.fired)
    dark = "".join("1" if f else "0" for f in outcome.dark_flags)
    product = "" if outcome.product is None else f"{outcome.product:+d}"
    ghz = "ghz" if outcome.classified_ghz else "-"
    return f"{outcome.creation},{outcome.arrival},{bits},{dark},{ghz},{product}"


def _stats_from_tally(tally: _Tally) -> RunStats:
    if tally.n_fourfold == 0:
        return RunStats(
            n_trials=tally.n_trials,
            n_fourfold=0,
            n_ghz_fourfold=0,
            e_hat=None,
            std_err=None,
            p4_hat=0.0,
        )
    e_hat = tally.sum_products / tally.n_fourfold
    std_err = detector.sigma_of_correlation(e_hat) / math.sqrt(tally.n_fourfold)
    return RunStats(
        n_trials=tally.n_trials,
        n_fourfold=tally.n_fourfold,
        n_ghz_fourfold=tally.n_ghz,
        e_hat=e_hat,
        std_err=std_err,
        p4_hat=tally.n_fourfold / tally.n_trials,
    )


def run(cfg: RunConfig, event_stream: Optional[IO[str]] = None) -> RunStats:
    """Execute cfg.n_trials independent trials and aggregate the tallies.

    With an event_stream the simulation switches to the scalar per-trial path
    and writes one log line per trial (debugging aid; same seed derivation per
    chunk, but a different draw order than the vectorized path).
    """
    chunks = [
        (i, min(cfg.chunk_size, cfg.n_trials - i * cfg.chunk_size))
        for i in range((cfg.n_trials + cfg.chunk_size - 1) // cfg.chunk_size)
    ]

    if event_stream is not None:
        tally = _Tally()
        for index, size in chunks:
            rng = _chunk_rng(cfg.master_seed, index)
            for _ in range(size):
                outcome = simulate_trial(cfg, rng)
                event_stream.write(format_event(outcome) + "\n")
                tally.n_trials += 1
                if outcome.product is not None:
                    tally.n_fourfold += 1
                    tally.sum_products += outcome.product
                    if outcome.classified_ghz:
                        tally.n_ghz += 1
        return _stats_from_tally(tally)

    tally = _Tally()
    if cfg.n_workers == 1 or len(chunks) == 1:
        for index, size in chunks:
            tally.merge(_simulate_chunk(cfg, index, size))
    else:
        jobs = [(cfg, index, size) for index, size in chunks]
        with ProcessPoolExecutor(max_workers=cfg.n_workers) as pool:
            for part in pool.map(_chunk_worker, jobs):
                tally.merge(part)
    return _stats_from_tally(tally)


def compare_analytic(stats: RunStats, params: DetectorParams, setting: str = "XYY") -> ComparisonReport:
    """z-scores of the empirical statistics against the closed-form model.

    The analytic correlation is the exact-mode corrected correlation times the
    ideal product expectation of the chosen setting (±1 for the four standard
    settings, 0 otherwise).
    """
    ideal = quantum.operator_expectation(ghz_state(), setting)
    try:
        analytic_e = ideal * detector.corrected_correlation(params, mode="exact")
    except ValueError:
        # Degenerate source (no quadruples, or no way to register any): the
        # conditional correlation is undefined, only the rate can be compared.
        analytic_e = None
    analytic_p4 = detector.fourfold_probability(params)
    p4_se = math.sqrt(analytic_p4 * (1.0 - analytic_p4) / stats.n_trials)
    z_fourfold = (stats.p4_hat - analytic_p4) / p4_se if p4_se > 0.0 else 0.0
    if stats.no_coincidences:
        return ComparisonReport(
            comparable=False,
            analytic_e=analytic_e,
            analytic_p4=analytic_p4,
            z_correlation=None,
            z_fourfold=z_fourfold,
            flagged=abs(z_fourfold) > Z_FLAG_THRESHOLD,
        )
    if analytic_e is None:
        return ComparisonReport(
            comparable=False,
            analytic_e=None,
            analytic_p4=analytic_p4,
            z_correlation=None,
            z_fourfold=z_fourfold,
            flagged=abs(z_fourfold) > Z_FLAG_THRESHOLD,
        )
    se = stats.std_err if stats.std_err and stats.std_err > 0.0 else None
    if se is None:
        # Degenerate spread (|e_hat| = 1): fall back to the analytic sigma.
        se = detector.sigma_of_correlation(analytic_e) / math.sqrt(stats.n_fourfold)
    z_corr = (stats.e_hat - analytic_e) / se if se > 0.0 else 0.0
    flagged = abs(z_corr) > Z_FLAG_THRESHOLD or abs(z_fourfold) > Z_FLAG_THRESHOLD
    return ComparisonReport(
        comparable=True,
        analytic_e=analytic_e,
        analytic_p4=analytic_p4,
        z_correlation=z_corr,
        z_fourfold=z_fourfold,
        flagged=flagged,
    )
