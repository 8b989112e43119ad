"""Monte Carlo engine tying the pipeline stages into authentication trials.

One trial walks the full protocol: measure the legitimate user's channel in
the presence of the interference floor, derive side information, advance the
world by one slot (user and interferer channels all take a Gauss-Markov
step), measure either the same user (H0) or an independent impersonator (H1)
under the evolved interference, reconcile against the enrollment record, and
compare the Hamming statistic to the calibrated threshold.  Each of the M
samples in a feature vector rides an independent fading realization, so the
statistic sees the full antenna-times-sample diversity.  Per-trial RNG
streams are derived from the master seed by counter, so results are
independent of execution order and reproduce byte-for-byte.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .authenticator import (
    BinomialModel,
    calibrate_threshold,
    closed_form_pd,
    closed_form_pfa,
    hamming_distance,
    pmf_vector,
)
from .channel import (
    ScenarioConfig,
    auth_measurement,
    build_feature_vector,
    gauss_markov_step,
    sample_channel,
    snr_db_to_sigma_z2,
)
from .polar import construct_code, extract_side_info, scl_decode
from .quantizer import design_codebook, quantize

H0 = "h0"
H1 = "h1"

# Stream tags for the counter-based seed split.
_EVAL_H0, _EVAL_H1, _CHANNEL_P, _CAL_H0, _CAL_H1 = range(5)

# Calibrated crossover estimates are clamped into the open interval the
# decoder accepts; a measured rate of exactly 0 or >= 0.5 would otherwise
# produce infinite or sign-flipped LLRs.
_CHANNEL_P_MIN = 1e-4
_CHANNEL_P_MAX = 0.499

SWEEP_PARAMETERS = ("snr_db", "beta", "alpha", "code_rate", "quant_bits")


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario plus code, detector and budget parameters for one run."""

    scenario: ScenarioConfig = ScenarioConfig()
    quant_bits: int = 2
    code_rate: float = 0.01
    list_size: int = 2
    crc_len: int | None = None
    target_pfa: float = 1e-3
    trials: int = 1000
    calibration_trials: int = 1000
    channel_p_override: float | None = None

    def __post_init__(self):
        if self.quant_bits < 1:
            raise ValueError("quant_bits must be >= 1")
        if not 0.0 < self.code_rate < 1.0:
            raise ValueError("code_rate must lie in (0, 1)")
        if not 0.0 < self.target_pfa < 1.0:
            raise ValueError("target_pfa must lie in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.calibration_trials < 1:
            raise ValueError("calibration_trials must be >= 1")

    @property
    def block_len(self) -> int:
        return self.quant_bits * self.scenario.n_features


@dataclass(frozen=True)
class TrialRecord:
    hypothesis: str
    eta: int
    decided_h0: bool
    seed: int


@dataclass(frozen=True)
class RocPoint:
    """One operating point: empirical rates plus the binomial-model rates."""

    pfa: float
    pd: float
    eta_th: int
    pfa_model: float = 0.0
    pd_model: float = 0.0

    def __post_init__(self):
        for name in ("pfa", "pd", "pfa_model", "pd_model"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def trial_rng(master_seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for (stream, index) under one master seed."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(stream, index))
    )


class Simulator:
    """Caches the designed quantizer and code for one configuration.

    Calibration (crossover estimate, p0/p1 fits, threshold) runs lazily the
    first time something needs it and is itself fully seeded.
    """

    def __init__(self, cfg: ExperimentConfig):
        block_len = cfg.block_len
        if block_len & (block_len - 1):
            raise ValueError(
                f"quant_bits * 2 * m_samples * n_b = {block_len} "
                "must be a power of two"
            )
        self.cfg = cfg
        sc = cfg.scenario
        # Both phases share one codebook, designed for the noisier
        # authentication-phase component statistics.
        comp_var = (
            sc.sigma_h2 * (1.0 + sc.u_interferers * sc.alpha**2) + sc.sigma_z2
        ) / 2.0
        self.codebook = design_codebook(cfg.quant_bits, mu=0.0, sigma=math.sqrt(comp_var))
        self.code = construct_code(
            block_len, cfg.code_rate, crc_len=cfg.crc_len, list_size=cfg.list_size
        )
        self.channel_p: float | None = None
        self.p0: float | None = None
        self.p1: float | None = None
        self.eta_th: int | None = None
        self._cal_etas: dict[str, np.ndarray] = {}

    # -- pipeline pieces -------------------------------------------------
    #
    # Every sample of a feature vector rides its own fading realization, so
    # the M per-sample channel vectors are drawn as one long gain vector and
    # evolved elementwise (the Gauss-Markov step is i.i.d. per gain).  The
    # interference floor is present whenever Bob measures: the enrollment
    # pass sees the same U weighted interferers as the authentication pass,
    # one slot earlier, which is what lets a heavy interference floor mask
    # the user's own signature at large alpha.

    def _quantized(self, meas):
        sc = self.cfg.scenario
        samples = list(meas.reshape(sc.m_samples, sc.n_b))
        return quantize(build_feature_vector(samples), self.codebook)

    def _enroll(self, rng):
        sc = self.cfg.scenario
        n = sc.m_samples * sc.n_b
        h_a = sample_channel(n, sc.sigma_h2, rng)
        interferers = [
            sample_channel(n, sc.sigma_h2, rng) for _ in range(sc.u_interferers)
        ]
        meas = auth_measurement(h_a, interferers, sc.alpha, sc.sigma_z2, rng)
        return (h_a, interferers), self._quantized(meas)

    def _auth_vector(self, world, hypothesis, rng):
        sc = self.cfg.scenario
        h_a, interferers = world
        # The legitimate chain always advances, whichever hypothesis holds,
        # keeping the H0/H1 random streams aligned draw for draw.
        h_next = gauss_markov_step(h_a, sc.beta, sc.sigma_h2, rng)
        ints_next = [
            gauss_markov_step(h_i, sc.beta, sc.sigma_h2, rng) for h_i in interferers
        ]
        if hypothesis == H0:
            h_u = h_next
        elif hypothesis == H1:
            h_u = sample_channel(h_a.size, sc.sigma_h2, rng)
        else:
            raise ValueError(f"hypothesis must be '{H0}' or '{H1}', got {hypothesis!r}")
        return self._quantized(
            auth_measurement(h_u, ints_next, sc.alpha, sc.sigma_z2, rng)
        )

    def _trial_bits(self, hypothesis, rng):
        """One end-to-end trial; returns (r_enroll, r_decoded, q_flip_rate)."""
        world, q_a = self._enroll(rng)
        r_a, side = extract_side_info(q_a, self.code)
        q_u = self._auth_vector(world, hypothesis, rng)
        r_u = scl_decode(q_u, side, self.code, self._channel_p())
        return r_a, r_u, float(np.mean(q_a != q_u))

    # -- calibration -----------------------------------------------------

    def _channel_p(self) -> float:
        if self.channel_p is None:
            cfg = self.cfg
            if cfg.channel_p_override is not None:
                p = cfg.channel_p_override
            else:
                # Quantize-only pass: mean flip rate between consecutive-slot
                # legitimate vectors, no decoding involved.
                total = 0.0
                pairs = cfg.calibration_trials
                for i in range(pairs):
                    rng = trial_rng(cfg.scenario.rng_seed, _CHANNEL_P, i)
                    world, q_a = self._enroll(rng)
                    q_next = self._auth_vector(world, H0, rng)
                    total += float(np.mean(q_a != q_next))
                p = total / pairs
            self.channel_p = min(max(p, _CHANNEL_P_MIN), _CHANNEL_P_MAX)
        return self.channel_p

    def calibrate(self):
        """Estimate p0, p1 and the threshold from seeded decode batches."""
        if self.eta_th is not None:
            return
        cfg = self.cfg
        k = self.code.k_info
        n_cal = cfg.calibration_trials
        for hyp, stream in ((H0, _CAL_H0), (H1, _CAL_H1)):
            etas = np.empty(n_cal, dtype=int)
            for i in range(n_cal):
                rng = trial_rng(cfg.scenario.rng_seed, stream, i)
                r_a, r_u, _ = self._trial_bits(hyp, rng)
                etas[i] = hamming_distance(r_a, r_u)
            self._cal_etas[hyp] = etas
        # Mean per-bit disagreement, pooling all payload bits of the batch.
        # An all-zero H0 batch only bounds p0, so floor it at one error in
        # the whole batch rather than claiming an exact zero.
        floor = 1.0 / (k * n_cal)
        self.p0 = max(float(self._cal_etas[H0].sum()) / (k * n_cal), floor)
        self.p1 = float(self._cal_etas[H1].sum()) / (k * n_cal)
        self.eta_th = calibrate_threshold(k, self.p0, cfg.target_pfa)

    # -- experiment surfaces ----------------------------------------------

    def run_trial(self, hypothesis: str, rng, seed_label: int = -1) -> TrialRecord:
        self.calibrate()
        r_a, r_u, _ = self._trial_bits(hypothesis, rng)
        eta = hamming_distance(r_a, r_u)
        return TrialRecord(
            hypothesis=hypothesis,
            eta=eta,
            decided_h0=eta <= self.eta_th,
            seed=seed_label,
        )

    def run_batch(self, hypothesis: str, n_trials: int, stream: int | None = None) -> np.ndarray:
        """Disagreement statistics for n_trials independent trials."""
        self.calibrate()
        if stream is None:
            stream = _EVAL_H0 if hypothesis == H0 else _EVAL_H1
        etas = np.empty(n_trials, dtype=int)
        for i in range(n_trials):
            rng = trial_rng(self.cfg.scenario.rng_seed, stream, i)
            r_a, r_u, _ = self._trial_bits(hypothesis, rng)
            etas[i] = hamming_distance(r_a, r_u)
        return etas

    def roc_table(self, trials: int | None = None):
        """Empirical and closed-form ROC, one row per threshold value."""
        self.calibrate()
        n = trials if trials is not None else self.cfg.trials
        etas0 = self.run_batch(H0, n)
        etas1 = self.run_batch(H1, n)
        k = self.code.k_info
        rows = []
        for t in range(k + 1):
            rows.append(
                {
                    "eta_th": t,
                    "pfa_emp": float(np.mean(etas0 > t)),
                    "pd_emp": float(np.mean(etas1 > t)),
                    "pfa_model": closed_form_pfa(k, self.p0, t),
                    "pd_model": closed_form_pd(k, self.p1, t),
                }
            )
        return rows

    def pdf_table(self, trials: int | None = None):
        """Histogram of eta under both hypotheses next to the binomial fit."""
        self.calibrate()
        n = trials if trials is not None else self.cfg.trials
        etas0 = self.run_batch(H0, n)
        etas1 = self.run_batch(H1, n)
        k = self.code.k_info
        bins = np.arange(k + 2)
        h0_counts = np.histogram(etas0, bins=bins)[0]
        h1_counts = np.histogram(etas1, bins=bins)[0]
        m0 = pmf_vector(BinomialModel(k, self.p0))
        m1 = pmf_vector(BinomialModel(k, self.p1))
        return [
            {
                "eta": t,
                "h0_count": int(h0_counts[t]),
                "h1_count": int(h1_counts[t]),
                "h0_model_pmf": float(m0[t]),
                "h1_model_pmf": float(m1[t]),
            }
            for t in range(k + 1)
        ]

    def summary(self) -> dict:
        self.calibrate()
        k = self.code.k_info
        return {
            "k_info": k,
            "channel_p": self.channel_p,
            "p0": self.p0,
            "p1": self.p1,
            "eta_th": self.eta_th,
            "pfa_model": closed_form_pfa(k, self.p0, self.eta_th),
            "pd_model": closed_form_pd(k, self.p1, self.eta_th),
            "pfa_emp": float(np.mean(self._cal_etas[H0] > self.eta_th)),
            "pd_emp": float(np.mean(self._cal_etas[H1] > self.eta_th)),
        }

    def metadata(self) -> dict:
        cfg = self.cfg
        sc = cfg.scenario
        meta = {
            "schema": 1,
            "version": f"csipla-{__version__}",
            "n_b": sc.n_b,
            "beta": sc.beta,
            "sigma_h2": sc.sigma_h2,
            "sigma_z2": sc.sigma_z2,
            "snr_db": sc.snr_db if sc.sigma_z2 > 0 else None,
            "u_interferers": sc.u_interferers,
            "alpha": sc.alpha,
            "m_samples": sc.m_samples,
            "seed": sc.rng_seed,
            "quant_bits": cfg.quant_bits,
            "code_rate": cfg.code_rate,
            "block_len": cfg.block_len,
            "k_info": self.code.k_info,
            "crc_len": self.code.crc_len,
            "list_size": cfg.list_size,
            "target_pfa": cfg.target_pfa,
            "trials": cfg.trials,
            "calibration_trials": cfg.calibration_trials,
        }
        if self.eta_th is not None:
            meta.update(
                channel_p=self.channel_p, p0=self.p0, p1=self.p1, eta_th=self.eta_th
            )
        return meta


def run_trial(cfg: ExperimentConfig, hypothesis: str, rng) -> TrialRecord:
    """One-shot convenience wrapper (calibrates on first use)."""
    return Simulator(cfg).run_trial(hypothesis, rng)


def estimate_roc(cfg: ExperimentConfig, trials: int | None = None):
    """ROC as a list of RocPoint (threshold ascending 0..K) plus metadata."""
    sim = Simulator(cfg)
    points = [
        RocPoint(
            pfa=row["pfa_emp"],
            pd=row["pd_emp"],
            eta_th=row["eta_th"],
            pfa_model=row["pfa_model"],
            pd_model=row["pd_model"],
        )
        for row in sim.roc_table(trials)
    ]
    return points, sim.metadata()


def eta_distribution(cfg: ExperimentConfig, trials: int | None = None):
    sim = Simulator(cfg)
    rows = sim.pdf_table(trials)
    return rows, sim.metadata()


def _apply_sweep_value(cfg: ExperimentConfig, parameter: str, value) -> ExperimentConfig:
    sc = cfg.scenario
    if parameter == "snr_db":
        sc = dataclasses.replace(sc, sigma_z2=snr_db_to_sigma_z2(value, sc.sigma_h2))
        return dataclasses.replace(cfg, scenario=sc)
    if parameter == "beta":
        return dataclasses.replace(cfg, scenario=dataclasses.replace(sc, beta=value))
    if parameter == "alpha":
        return dataclasses.replace(cfg, scenario=dataclasses.replace(sc, alpha=value))
    if parameter == "code_rate":
        return dataclasses.replace(cfg, code_rate=value)
    if parameter == "quant_bits":
        return dataclasses.replace(cfg, quant_bits=int(value))
    raise ValueError(
        f"unknown sweep parameter {parameter!r}; valid: {', '.join(SWEEP_PARAMETERS)}"
    )


def sweep(cfg: ExperimentConfig, parameter: str, values):
    """Recalibrate per value and report operating points at the target PFA."""
    rows = []
    for value in values:
        sub = Simulator(_apply_sweep_value(cfg, parameter, value))
        sub.calibrate()
        row = {"parameter": parameter, "value": value}
        row.update(sub.summary())
        row["trials"] = sub.cfg.calibration_trials
        rows.append(row)
    meta = Simulator(cfg).metadata()
    meta["sweep_parameter"] = parameter
    return rows, meta


# -- output rendering ----------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def render_csv(columns, rows, metadata) -> str:
    """Deterministic CSV text: schema and metadata comments, then the table."""
    lines = ["# schema=1"]
    lines.append("# meta=" + json.dumps(metadata, sort_keys=True, default=str))
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def write_results(out_base: str, columns, rows, metadata) -> None:
    """Write <base>.csv plus a pretty-printed <base>.meta.json sidecar."""
    with open(out_base + ".csv", "w") as fh:
        fh.write(render_csv(columns, rows, metadata))
    with open(out_base + ".meta.json", "w") as fh:
        json.dump(metadata, fh, sort_keys=True, indent=2, default=str)
        fh.write("\n")
