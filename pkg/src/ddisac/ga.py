"""Penalty-based real-coded genetic search over precoder chromosomes.

The objective is max-min fairness on the private rates, with three soft
constraints folded into the fitness as penalties: the common rate floor and
the two estimation-bound ceilings. Rate gaps enter in bits/s/Hz; the bound
gaps are normalized by their thresholds so all penalties live on comparable
scales. One GA run optimizes a single frozen frame context (channel
estimates, symbol draw, target); the optimizer never sees the true channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelEstimate
from .comm import ImpairmentConfig, evaluate_comm
from .grid import DDGrid
from .precoding import DegeneratePrecoderError, PrecoderSet, StreamSymbols, decode_chromosome
from .sensing import SensingTarget, SingularFimError, sensing_for_precoders

__all__ = [
    "QosThresholds",
    "FrameContext",
    "GaConfig",
    "FitnessBreakdown",
    "GaRunFailed",
    "fitness",
    "run_ga",
]


@dataclass(frozen=True)
class QosThresholds:
    r_c_req: float = 0.1      # common-rate floor, bits/s/Hz
    eps_tau: float = 2.0e-11  # delay-bound ceiling, s^2
    eps_nu: float = 5.0e3     # Doppler-bound ceiling, Hz^2


@dataclass
class FrameContext:
    """Everything one fitness evaluation needs, fixed for a whole GA run."""

    estimates: list[ChannelEstimate]
    target: SensingTarget
    imp: ImpairmentConfig
    symbols: StreamSymbols
    grid: DDGrid
    alpha: float
    p_max: float
    qos: QosThresholds = field(default_factory=QosThresholds)

    @property
    def num_users(self) -> int:
        return len(self.estimates)

    @property
    def num_genes(self) -> int:
        return 2 * self.grid.n_dd * (self.num_users + 1)


@dataclass
class GaConfig:
    population: int = 100
    generations: int = 125
    crossover_rate: float = 0.9
    mutation_rate: float | None = None   # None resolves to 1/num_genes
    mutation_sigma: float = 0.1
    tournament_size: int = 3
    elitism: int = 2
    lambda_c: float = 10.0
    lambda_tau: float = 10.0
    lambda_nu: float = 10.0
    seed: object = 0                     # int or numpy SeedSequence

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be at least 1")
        if not 0 <= self.elitism < self.population:
            raise ValueError("elitism must be in [0, population)")


@dataclass
class FitnessBreakdown:
    r_min: float
    penalty_c: float
    penalty_tau: float
    penalty_nu: float
    fitness: float
    feasible: bool            # all penalties exactly zero
    rc_met: bool              # recorded even when the common penalty is off
    crb_tau: float
    crb_nu: float
    rate_c: np.ndarray
    rate_p: np.ndarray


class GaRunFailed(RuntimeError):
    """No individual in the run produced a finite fitness."""


def fitness(genes: np.ndarray, ctx: FrameContext,
            weights: tuple[float, float, float] = (10.0, 10.0, 10.0)) -> FitnessBreakdown:
    """Score one chromosome against the frame context.

    The objective is the minimum private rate; violations subtract
    ``lambda * gap`` where the common-rate gap is in rate units and the two
    bound gaps are threshold-relative. At ``alpha == 0`` there is no common
    stream, so the common-rate penalty is disabled (its floor is structurally
    unreachable) while ``rc_met`` still records the factual outcome.
    """
    lam_c, lam_tau, lam_nu = weights
    k = ctx.num_users
    try:
        p = decode_chromosome(genes, ctx.grid.n_dd, k, ctx.alpha, ctx.p_max)
    except DegeneratePrecoderError:
        return FitnessBreakdown(
            r_min=-np.inf, penalty_c=0.0, penalty_tau=0.0, penalty_nu=0.0,
            fitness=-np.inf, feasible=False, rc_met=False,
            crb_tau=np.inf, crb_nu=np.inf,
            rate_c=np.zeros(k), rate_p=np.zeros(k))

    m = evaluate_comm(ctx.estimates, p, ctx.imp, ctx.qos.r_c_req)
    try:
        f = sensing_for_precoders(p, ctx.symbols, ctx.target, ctx.grid)
        crb_tau, crb_nu = f.crb_tau, f.crb_nu
    except SingularFimError:
        crb_tau = crb_nu = np.inf

    if ctx.alpha == 0.0:
        penalty_c = 0.0
    else:
        penalty_c = lam_c * max(0.0, ctx.qos.r_c_req - float(m.rate_c.min()))
    penalty_tau = lam_tau * max(0.0, (crb_tau - ctx.qos.eps_tau) / ctx.qos.eps_tau)
    penalty_nu = lam_nu * max(0.0, (crb_nu - ctx.qos.eps_nu) / ctx.qos.eps_nu)

    total = m.r_min - penalty_c - penalty_tau - penalty_nu
    return FitnessBreakdown(
        r_min=m.r_min,
        penalty_c=penalty_c,
        penalty_tau=penalty_tau,
        penalty_nu=penalty_nu,
        fitness=total,
        feasible=(penalty_c == 0.0 and penalty_tau == 0.0 and penalty_nu == 0.0),
        rc_met=m.rc_met,
        crb_tau=crb_tau,
        crb_nu=crb_nu,
        rate_c=m.rate_c,
        rate_p=m.rate_p,
    )


def run_ga(config: GaConfig, ctx: FrameContext
           ) -> tuple[PrecoderSet, FitnessBreakdown, np.ndarray]:
    """Evolve precoders for one frame; deterministic given the config seed.

    Tournament selection, per-gene arithmetic blend crossover, Gaussian
    per-gene mutation, and elitism. The generator is a counter-based Philox
    stream keyed by ``config.seed`` so runs reproduce across platforms.
    Returns the best decoded precoder set, its fitness breakdown, and the
    per-generation best-fitness trace.
    """
    rng = np.random.Generator(np.random.Philox(config.seed))
    n_genes = ctx.num_genes
    pop_size = config.population
    weights = (config.lambda_c, config.lambda_tau, config.lambda_nu)
    mut_rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / n_genes

    pop = rng.normal(size=(pop_size, n_genes))
    scores = np.array([fitness(ind, ctx, weights).fitness for ind in pop])
    trace = np.empty(config.generations)

    for gen in range(config.generations):
        order = np.argsort(scores)[::-1]
        trace[gen] = scores[order[0]]

        elites = pop[order[: config.elitism]].copy()
        elite_scores = scores[order[: config.elitism]].copy()

        def pick():
            # Tournament: best of a uniformly drawn subset.
            idx = rng.integers(0, pop_size, size=config.tournament_size)
            return pop[idx[np.argmax(scores[idx])]]

        children = np.empty((pop_size - config.elitism, n_genes))
        for c in range(0, children.shape[0], 2):
            p1, p2 = pick(), pick()
            if rng.random() < config.crossover_rate:
                u = rng.random(n_genes)
                c1 = u * p1 + (1.0 - u) * p2
                c2 = (1.0 - u) * p1 + u * p2
            else:
                c1, c2 = p1.copy(), p2.copy()
            children[c] = c1
            if c + 1 < children.shape[0]:
                children[c + 1] = c2

        mask = rng.random(children.shape) < mut_rate
        children = children + mask * rng.normal(0.0, config.mutation_sigma,
                                                size=children.shape)

        child_scores = np.array([fitness(ind, ctx, weights).fitness for ind in children])
        pop = np.vstack([elites, children])
        scores = np.concatenate([elite_scores, child_scores])

    best_idx = int(np.argmax(scores))
    if not np.isfinite(scores[best_idx]):
        raise GaRunFailed("every individual scored non-finite fitness")
    best = fitness(pop[best_idx], ctx, weights)
    best_p = decode_chromosome(pop[best_idx], ctx.grid.n_dd, ctx.num_users,
                               ctx.alpha, ctx.p_max)
    return best_p, best, trace
