"""Monte-Carlo campaign runner: frame pipeline, alpha sweep, aggregation.

Each frame draws fresh channels for every user, corrupts the estimates,
draws stream symbols, runs one GA, and records the winner's metrics. Frames
are seeded individually from (master seed, alpha index, frame index), so any
subset can be recomputed in isolation and the campaign result is invariant
to worker count and scheduling order.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import PathConfig, apply_icsi, gen_paths
from .comm import ImpairmentConfig
from .ga import FrameContext, GaConfig, GaRunFailed, QosThresholds, run_ga
from .grid import DDGrid
from .precoding import draw_symbols
from .sensing import SensingTarget, default_target

__all__ = [
    "CampaignConfig",
    "FrameResult",
    "SummaryRow",
    "CampaignSummary",
    "CdfResult",
    "compute_cdf",
    "make_frame_context",
    "reduced_ga_config",
    "full_ga_config",
    "run_frame",
    "run_campaign",
    "write_csvs",
]

DEFAULT_ALPHAS = (0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0)
CDF_METRICS = ("r_min", "crb_tau", "crb_nu")


def reduced_ga_config() -> GaConfig:
    """Short search budget for CI-scale campaigns.

    Larger mutation steps compensate for the small generation count; the
    full-scale defaults anneal more gently over three times as many
    generations.
    """
    return GaConfig(population=40, generations=40, mutation_sigma=0.2)


def full_ga_config() -> GaConfig:
    return GaConfig()


@dataclass
class CampaignConfig:
    grid: DDGrid = field(default_factory=DDGrid)
    paths: PathConfig = field(default_factory=PathConfig)
    num_users: int = 2
    p_max: float = 1.0
    comm_snr_db: float = 25.0    # sets the AWGN floor relative to p_max
    icsi_db: float = -25.0       # channel-estimate error variance in dB
    theta: float = 0.03
    theta_in_filter: bool = True
    echo_snr_db: float = 10.0
    target: SensingTarget | None = None   # None: reference target at p_max
    qos: QosThresholds = field(default_factory=QosThresholds)
    alpha_list: tuple = DEFAULT_ALPHAS
    n_mc: int = 100
    ga: GaConfig = field(default_factory=reduced_ga_config)
    master_seed: int = 0

    def __post_init__(self):
        if self.n_mc < 1:
            raise ValueError("n_mc must be at least 1")
        if self.num_users < 1:
            raise ValueError("num_users must be at least 1")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_list):
            raise ValueError(f"alpha values must lie in [0, 1]: {self.alpha_list}")

    @property
    def sigma_n2(self) -> float:
        return self.p_max / 10.0 ** (self.comm_snr_db / 10.0)

    @property
    def sigma_e2(self) -> float:
        return 10.0 ** (self.icsi_db / 10.0)

    def resolved_target(self) -> SensingTarget:
        if self.target is not None:
            return self.target
        return default_target(p_max=self.p_max, echo_snr_db=self.echo_snr_db)

    def impairments(self) -> ImpairmentConfig:
        return ImpairmentConfig(sigma_n2=self.sigma_n2, sigma_e2=self.sigma_e2,
                                p_tot=self.p_max, theta=self.theta,
                                theta_in_filter=self.theta_in_filter)


@dataclass
class FrameResult:
    alpha: float
    frame: int
    r_min: float
    rate_c: np.ndarray
    rate_p: np.ndarray
    crb_tau: float
    crb_nu: float
    rc_met: bool
    crb_tau_met: bool
    crb_nu_met: bool
    fitness: float
    feasible: bool
    wall_ms: float
    failed: bool = False


def _frame_rngs(cfg: CampaignConfig, alpha_index: int, frame_index: int):
    """Independent draw and search streams for one (alpha, frame) cell."""
    draw_seq = np.random.SeedSequence(cfg.master_seed,
                                      spawn_key=(alpha_index, frame_index, 0))
    ga_seq = np.random.SeedSequence(cfg.master_seed,
                                    spawn_key=(alpha_index, frame_index, 1))
    return np.random.Generator(np.random.Philox(draw_seq)), ga_seq


def make_frame_context(cfg: CampaignConfig, alpha: float,
                       frame_index: int) -> FrameContext:
    """Draw the channel/symbol realization for one frame, seeded by position."""
    alpha_index = cfg.alpha_list.index(alpha)
    rng, _ = _frame_rngs(cfg, alpha_index, frame_index)
    estimates = []
    for _ in range(cfg.num_users):
        paths = gen_paths(cfg.grid, cfg.paths, rng)
        _, est = apply_icsi(paths, cfg.sigma_e2, rng, cfg.grid)
        estimates.append(est)
    symbols = draw_symbols(cfg.num_users, rng)
    return FrameContext(estimates=estimates, target=cfg.resolved_target(),
                        imp=cfg.impairments(), symbols=symbols, grid=cfg.grid,
                        alpha=alpha, p_max=cfg.p_max, qos=cfg.qos)


def run_frame(cfg: CampaignConfig, alpha: float, frame_index: int,
              return_detail: bool = False):
    """One complete frame: draw, optimize, record the winner's metrics.

    ``alpha`` must be a member of ``cfg.alpha_list`` (the seed derivation is
    keyed by its position). With ``return_detail`` the winning precoder set
    and the frame context are returned alongside the result for spot checks.
    """
    alpha_index = cfg.alpha_list.index(alpha)
    _, ga_seq = _frame_rngs(cfg, alpha_index, frame_index)
    ctx = make_frame_context(cfg, alpha, frame_index)
    ga_cfg = dataclasses.replace(cfg.ga, seed=ga_seq)

    start = time.perf_counter()
    try:
        best_p, best, _trace = run_ga(ga_cfg, ctx)
    except GaRunFailed:
        wall = 1e3 * (time.perf_counter() - start)
        nan = float("nan")
        result = FrameResult(alpha=alpha, frame=frame_index, r_min=nan,
                             rate_c=np.full(cfg.num_users, nan),
                             rate_p=np.full(cfg.num_users, nan),
                             crb_tau=nan, crb_nu=nan, rc_met=False,
                             crb_tau_met=False, crb_nu_met=False, fitness=nan,
                             feasible=False, wall_ms=wall, failed=True)
        return (result, None, ctx) if return_detail else result
    wall = 1e3 * (time.perf_counter() - start)

    result = FrameResult(
        alpha=alpha, frame=frame_index,
        r_min=best.r_min, rate_c=best.rate_c, rate_p=best.rate_p,
        crb_tau=best.crb_tau, crb_nu=best.crb_nu,
        rc_met=best.rc_met,
        crb_tau_met=bool(best.crb_tau <= cfg.qos.eps_tau),
        crb_nu_met=bool(best.crb_nu <= cfg.qos.eps_nu),
        fitness=best.fitness, feasible=best.feasible, wall_ms=wall,
    )
    return (result, best_p, ctx) if return_detail else result


@dataclass
class CdfResult:
    values: np.ndarray   # sorted ascending

    def quantile(self, q: float) -> float:
        """Nearest-rank order statistic for q in [0, 1]."""
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile level must lie in [0, 1], got {q}")
        n = len(self.values)
        rank = max(1, int(np.ceil(q * n)))
        return float(self.values[rank - 1])


def compute_cdf(samples) -> CdfResult:
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("cannot build a CDF from zero samples")
    return CdfResult(values=np.sort(samples))


@dataclass
class SummaryRow:
    alpha: float
    avg_r_min: float
    avg_crb_tau: float
    avg_crb_nu: float
    rc_met_pct: float
    feasible_pct: float
    n_frames: int
    # Average over feasible frames only, to bracket the all-frames figure.
    avg_r_min_feasible: float = float("nan")


@dataclass
class CampaignSummary:
    rows: list
    frames: list
    n_failed: int
    cdf: dict      # metric name -> {alpha: CdfResult}

    def row_for(self, alpha: float) -> SummaryRow:
        for row in self.rows:
            if row.alpha == alpha:
                return row
        raise KeyError(f"no summary row for alpha={alpha}")


def _run_frame_job(args):
    cfg, alpha, frame_index = args
    return run_frame(cfg, alpha, frame_index)


def run_campaign(cfg: CampaignConfig, workers: int = 1,
                 out_dir=None) -> CampaignSummary:
    """Sweep every (alpha, frame) cell and aggregate.

    Results are ordered by (alpha position, frame index) regardless of
    worker scheduling; each cell reseeds itself, so the numbers are identical
    for any worker count. Failed frames are dropped from every aggregate and
    counted in ``n_failed``.
    """
    jobs = [(cfg, alpha, fi) for alpha in cfg.alpha_list for fi in range(cfg.n_mc)]
    if workers <= 1:
        results = [_run_frame_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_frame_job, jobs, chunksize=4))
    results.sort(key=lambda r: (cfg.alpha_list.index(r.alpha), r.frame))

    rows = []
    cdf = {metric: {} for metric in CDF_METRICS}
    n_failed = 0
    for alpha in cfg.alpha_list:
        ok = [r for r in results if r.alpha == alpha and not r.failed]
        n_failed += sum(1 for r in results if r.alpha == alpha and r.failed)
        if not ok:
            rows.append(SummaryRow(alpha=alpha, avg_r_min=float("nan"),
                                   avg_crb_tau=float("nan"), avg_crb_nu=float("nan"),
                                   rc_met_pct=0.0, feasible_pct=0.0, n_frames=0))
            continue
        r_mins = np.array([r.r_min for r in ok])
        taus = np.array([r.crb_tau for r in ok])
        nus = np.array([r.crb_nu for r in ok])
        feas = np.array([r.feasible for r in ok])
        rows.append(SummaryRow(
            alpha=alpha,
            avg_r_min=float(r_mins.mean()),
            avg_crb_tau=float(taus.mean()),
            avg_crb_nu=float(nus.mean()),
            rc_met_pct=100.0 * float(np.mean([r.rc_met for r in ok])),
            feasible_pct=100.0 * float(feas.mean()),
            n_frames=len(ok),
            avg_r_min_feasible=float(r_mins[feas].mean()) if feas.any() else float("nan"),
        ))
        cdf["r_min"][alpha] = compute_cdf(r_mins)
        cdf["crb_tau"][alpha] = compute_cdf(taus)
        cdf["crb_nu"][alpha] = compute_cdf(nus)

    summary = CampaignSummary(rows=rows, frames=results, n_failed=n_failed, cdf=cdf)
    if out_dir is not None:
        write_csvs(summary, cfg, out_dir)
    return summary


# -- CSV output ---------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def frames_header(num_users: int) -> list[str]:
    head = ["alpha", "frame", "r_min"]
    head += [f"rate_c_{k + 1}" for k in range(num_users)]
    head += [f"rate_p_{k + 1}" for k in range(num_users)]
    head += ["crb_tau", "crb_nu", "rc_met", "crb_tau_met", "crb_nu_met",
             "fitness", "feasible", "wall_ms"]
    return head


def render_frames_csv(summary: CampaignSummary, num_users: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(frames_header(num_users))
    for r in summary.frames:
        if r.failed:
            continue
        row = [_fmt(r.alpha), str(r.frame), _fmt(r.r_min)]
        row += [_fmt(v) for v in r.rate_c]
        row += [_fmt(v) for v in r.rate_p]
        row += [_fmt(r.crb_tau), _fmt(r.crb_nu), _fmt(r.rc_met),
                _fmt(r.crb_tau_met), _fmt(r.crb_nu_met), _fmt(r.fitness),
                _fmt(r.feasible), _fmt(r.wall_ms)]
        w.writerow(row)
    return buf.getvalue()


def render_summary_csv(summary: CampaignSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "avg_r_min", "avg_crb_tau", "avg_crb_nu",
                "rc_met_pct", "feasible_pct", "n_frames"])
    for row in summary.rows:
        w.writerow([_fmt(row.alpha), _fmt(row.avg_r_min), _fmt(row.avg_crb_tau),
                    _fmt(row.avg_crb_nu), _fmt(row.rc_met_pct),
                    _fmt(row.feasible_pct), str(row.n_frames)])
    return buf.getvalue()


def render_cdf_csv(summary: CampaignSummary, metric: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "value"])
    for alpha, cdf in summary.cdf[metric].items():
        for v in cdf.values:
            w.writerow([_fmt(alpha), _fmt(v)])
    return buf.getvalue()


def write_csvs(summary: CampaignSummary, cfg: CampaignConfig, out_dir) -> dict:
    """Write frames/summary/CDF files; returns {name: path}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    files = {"frames.csv": render_frames_csv(summary, cfg.num_users),
             "summary.csv": render_summary_csv(summary)}
    for metric in CDF_METRICS:
        files[f"cdf_{metric}.csv"] = render_cdf_csv(summary, metric)
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        paths[name] = path
    return paths
