"""Experiment dispatch: one runner per config kind, each returning a ReportRecord."""

from __future__ import annotations

import math

import numpy as np

from . import rng as rngmod
from .attacks import (
    HAMMING_7_4,
    AttackIConfig,
    Bb84AttackConfig,
    attack_i,
    bb84_attack,
    copies_condition,
    grover_report,
    heterodyne_collective_attack,
    keygen_yield,
    orthogonality_curve,
    resource_report,
)
from .cipher import AlphaEtaParams, LfsrSpec, build_cipher_model, lfsr_bit_period, map_to_state, paper_period, running_key_stream
from .config import RunConfig, resolved_trials
from .entropy import (
    distance_report,
    enumerate_joint,
    entropy_report,
    fresh_key_check,
    proposition_a_check,
    security_profile,
    trajectory,
    verify_identities,
)
from .measurement import amplifier_moments, analytic_ber, exact_ber, monte_carlo_ber
from .reports import ReportRecord

PAPER_ORDERS_S7 = {"optimal": 1e-12, "heterodyne": 1e-3, "phase": 1e-6}


def _echo(cfg: RunConfig) -> dict:
    d = cfg.model_dump(mode="json")
    d["trials"] = resolved_trials(cfg)
    return d


def _record(cfg, rows, summary=None, notes=()) -> ReportRecord:
    return ReportRecord(cfg.kind, _echo(cfg), rows, summary or {}, list(notes))


def run_constellation(cfg) -> ReportRecord:
    p = AlphaEtaParams(cfg.M, cfg.photons)
    pts = p.constellation()
    rows = []
    for m in range(p.M):
        l = m % (p.M // 2)
        bit = int(map_to_state(l, 1, p.M) == m)
        rows.append({"m": m, "angle": float(p.angle(m)), "re": pts[m].real, "im": pts[m].imag, "basis": l, "bit": bit})
    spec = LfsrSpec(cfg.keylen, 1)
    summary = {
        "M": p.M,
        "photons": p.S,
        "bits_per_qumode": p.bits_per_qumode,
        "keylen": cfg.keylen,
        "lfsr_bit_period": lfsr_bit_period(spec) if cfg.keylen <= 24 else (1 << cfg.keylen) - 1,
        "paper_period": paper_period(cfg.keylen, p.M),
        "paper_period_floor": math.floor(paper_period(cfg.keylen, p.M)),
        "running_key_seed1": running_key_stream(spec, cfg.qumodes, p.M),
    }
    notes = [
        "state m sits at angle 2*pi*m/M with amplitude sqrt(S); bit is the logical value of m in basis m mod M/2",
        "paper_period is 2**keylen / log2(M); lfsr_bit_period is the true bit period of the running-key generator",
    ]
    return _record(cfg, rows, summary, notes)


def run_ber(cfg) -> ReportRecord:
    S = cfg.photons
    rows = []
    for model in ("optimal", "heterodyne", "phase"):
        row = {"model": model, "photons": S, "analytic": analytic_ber(model, S), "exact": exact_ber(model, S)}
        if S == 7:
            row["paper_order"] = PAPER_ORDERS_S7[model]
            row["log10_ratio"] = math.log10(row["analytic"] / row["paper_order"])
        rows.append(row)
    trials = resolved_trials(cfg)
    for mode in cfg.monte_carlo:
        est = monte_carlo_ber(mode, S, trials, cfg.seed)
        rows.append(
            {"model": f"mc/{mode}", "photons": S, "trials": trials, "errors": est.errors, "rate": est.rate,
             "exact": est.reference, "z_score": est.z_score}
        )
    if cfg.amplifier_gain is not None:
        mom = amplifier_moments(math.sqrt(S), cfg.amplifier_gain, trials, cfg.seed)
        z = mom.z_scores()
        rows.append(
            {"model": f"mc/amplifier/G={cfg.amplifier_gain!r}", "photons": S, "trials": trials,
             "mean_re": mom.mean.real, "mean_im": mom.mean.imag, "var_re": mom.var_re, "var_im": mom.var_im,
             "expected_mean_re": mom.expected_mean.real, "expected_var": mom.expected_var,
             **{f"z_{k}": v for k, v in z.items()}}
        )
    notes = [
        "analytic: optimal exp(-4S)/4, heterodyne exp(-S)/2, phase exp(-2S)/2",
        "exact: Helstrom bound for the antipodal pair and erfc(sqrt S)/2 for heterodyne; none known for phase",
        "paper_order gives the order-of-magnitude figures quoted for S=7",
    ]
    return _record(cfg, rows, notes=notes)


def _cipher(cfg):
    kwargs = dict(key_bits=cfg.keylen, length=cfg.length, M=cfg.M, photons=cfg.photons, noiseless=cfg.noiseless,
                  alphabet=cfg.alphabet, randomization=cfg.randomization, redundant=cfg.redundant)
    if cfg.cipher == "random-table":
        kwargs["rng"] = rngmod.block_rng(cfg.seed, "cipher-table", 0)
    return build_cipher_model(cfg.cipher, **kwargs)


def run_entropy(cfg) -> ReportRecord:
    c = _cipher(cfg)
    t = enumerate_joint(c, cfg.plaintext_dist, cfg.n)
    r = entropy_report(t)
    a1, a2 = verify_identities(r)
    fk = fresh_key_check(t)
    row = {**r.as_dict(), "identity_a1_residual": a1, "identity_a2_residual": a2, "shannon_slack": r.shannon_slack,
           "fresh_key_bits_per_symbol": fk.per_symbol, "fresh_key_verdict": fk.verdict}
    notes = [
        "all entropies in bits over the exact joint table of key, plaintext block and ciphertext block",
        "identity residuals compare the two chain-rule decompositions of the key equivocation",
    ]
    return _record(cfg, [row], {"table_entries": len(t)}, notes)


def run_distances(cfg) -> ReportRecord:
    c = _cipher(cfg)
    d = distance_report(c, cfg.n_max)
    rows = []
    for r in trajectory(c, cfg.n_max, cfg.plaintext_dist):
        rows.append({"n": r.n, "H_Y_given_X": r.H_Y_given_X, "H_K_given_XY": r.H_K_given_XY,
                     "H_X_given_Y": r.H_X_given_Y, "H_K_given_Y": r.H_K_given_Y, "H_X_given_KY": r.H_X_given_KY})
    summary = {"n_d": d.n_d, "n_1": d.n_1, "n_max": d.n_max, "nonrandom": c.is_nonrandom, "H_K": c.key_entropy}
    if c.is_nonrandom:
        summary["n_1_equals_n_d"] = proposition_a_check(c, cfg.n_max).holds
    prof = security_profile(c, cfg.n_max, cfg.plaintext_dist)
    summary.update(lambda1=prof.lambda1, lambda2=prof.lambda2)
    notes = [
        "n_d: first n with H(Y_n|X_n) = H(K) under uniform plaintext; n_1: first n with H(K|X_n Y_n) = 0",
        "lambda1, lambda2: searched infima of H(X_n|Y_n)/H(K) and H(K|X_n Y_n)/H(K)",
    ]
    return _record(cfg, rows, summary, notes)


def run_attack_i(cfg) -> ReportRecord:
    copies = cfg.copies if cfg.copies is not None else 1 << cfg.keylen
    ac = AttackIConfig(key_bits=cfg.keylen, M=cfg.M, S=cfg.photons, eta=cfg.eta, copies=copies,
                       known_length=cfg.known_length, trials=resolved_trials(cfg), rule=cfg.rule,
                       copy_mode=cfg.copy_mode, quantum=cfg.quantum)
    rep = attack_i(ac, cfg.seed)
    summary = {"empirical_n1": rep.empirical_n1, "keys": 1 << cfg.keylen, "eve_photons_per_copy": ac.eve_photons,
               "survivors": rep.survivors}
    notes = [
        "each candidate key decides every qumode by the homodyne sign rule on its own tapped copy",
        "survivors at s=0 are all keys; empirical_n1 is the first s with a unique survivor in at least half the trials",
    ]
    return _record(cfg, rep.rows(), summary, notes)


def run_grover(cfg) -> ReportRecord:
    g = grover_report(cfg.keylen, cfg.marked, cfg.t)
    row = {"keylen": g.keylen, "marked": g.marked, "iterations": g.iterations, "t_star": str(g.t_star),
           "t_star_log10": g.t_star_log10, "t_star_scale": g.t_star_scale, "t_star_scientific": g.t_star_scientific,
           "success": g.success}
    notes = ["success is sin^2((2t+1) theta) with theta = asin(sqrt(marked / 2**keylen)); oracle construction cost not modeled"]
    return _record(cfg, [row], notes=notes)


def _plaintext(cfg) -> np.ndarray:
    if cfg.plaintext is not None:
        return np.array(cfg.plaintext, dtype=np.int64)
    n = max(cfg.lengths, default=0)
    return rngmod.block_rng(cfg.seed, "ortho-plaintext", 0).integers(0, 2, size=n)


def run_ortho_curve(cfg) -> ReportRecord:
    pt = _plaintext(cfg)
    c = orthogonality_curve(cfg.keylen, cfg.M, cfg.photons, pt, cfg.lengths)
    rows = [{"n": p.n, "epsilon": p.epsilon, "pgm_error": p.error} for p in c.points]
    notes = ["epsilon: largest overlap between ciphertext states of distinct keys; pgm_error: square-root measurement key error, uniform prior"]
    return _record(cfg, rows, {"plaintext": pt, "blind_guess": 1 - 2.0**-cfg.keylen}, notes)


def run_bb84(cfg) -> ReportRecord:
    gen = HAMMING_7_4 if cfg.generator == "hamming74" else np.array(cfg.generator)
    rows = []
    for m in cfg.repetitions:
        rep = bb84_attack(Bb84AttackConfig(gen, cfg.photons, cfg.eta, cfg.delta, m))
        rows.append({"repetition": m, "epsilon": rep.epsilon, "distance": rep.distance, "epsilon_d": rep.epsilon_d,
                     "pairwise_bound": rep.pairwise_bound, "pgm_error": rep.error, "blind_guess": rep.blind_guess,
                     "max_entry_deviation": rep.max_entry_deviation})
    notes = ["epsilon = exp(-2(1-eta)S) is the overlap of Eve's antipodal tapped states; Gram entries are epsilon**hamming_distance"]
    return _record(cfg, rows, notes=notes)


def run_resources(cfg) -> ReportRecord:
    r = resource_report(cfg.keylen, cfg.fiber_loss_db_per_km, cfg.copies)
    row = {"keylen": r.keylen, "copies": r.copies, "dB": r.loss_db, "km": r.fiber_km, "exact_dB": r.exact_loss_db,
           "data_volume": r.data_volume, "data_volume_log10": r.data_volume_log10}
    if cfg.eta is not None:
        cc = copies_condition(cfg.copies, cfg.eta, cfg.keylen)
        row.update(copies_condition=cc.status, copies_margin=str(cc.margin) if cc.margin.denominator == 1 else float(cc.margin))
    notes = ["dB = 10 log10(2**keylen / copies); km at the given fiber loss; data volume counts 2**keylen copies"]
    return _record(cfg, [row], notes=notes)


def run_keygen_yield(cfg) -> ReportRecord:
    rows = []
    for model in cfg.eve_models:
        for acc in cfg.accounting:
            y = keygen_yield(cfg.photons, cfg.n, model, acc)
            rows.append({"eve_model": model, "accounting": acc, "photons": y.photons, "n": y.bits_sent, "eve_ber": y.eve_ber,
                         "gross": y.gross, "bob_errors": y.bob_errors, "net": y.net,
                         "bob_overhead_significant": y.bob_overhead_significant})
    notes = ["accounting=paper: n * BER of Eve's receiver; accounting=entropy: n * h2(BER)"]
    return _record(cfg, rows, notes=notes)


def _paper_row(quantity, paper, computed, log_scale=False):
    # on log10-scale rows both columns hold exponents, so the ratio compares exponents
    ratio = computed / paper
    return {"quantity": quantity, "paper": paper, "computed": computed, "ratio": ratio,
            "scale": "log10" if log_scale else "linear", "within_one_order": 0.1 <= ratio <= 10}


def run_paper_numbers(cfg) -> ReportRecord:
    S = 7.0
    res = resource_report(2000)
    gro = grover_report(2000)
    rows = [
        _paper_row("P_b optimal (S=7)", 1e-12, analytic_ber("optimal", S)),
        _paper_row("P_b heterodyne (S=7)", 1e-3, analytic_ber("heterodyne", S)),
        _paper_row("P_b phase (S=7)", 1e-6, analytic_ber("phase", S)),
        _paper_row("loss dB (|K|=2000, r=1)", 6e3, res.loss_db),
        _paper_row("fiber km at 0.2 dB/km", 3e4, res.fiber_km),
        _paper_row("data volume exponent (r=2^|K|)", 600.0, float(res.data_volume_digits), log_scale=True),
        _paper_row("yield heterodyne (S=7, n=1e9)", 1e6, keygen_yield(S, 1e9, "heterodyne").gross),
        _paper_row("yield phase (S=7, n=1e9)", 1e3, keygen_yield(S, 1e9, "phase").gross),
        _paper_row("Grover iterations log2 (|K|=2000)", 1000.0, gro.t_star_log10 / math.log10(2), log_scale=True),
    ]
    notes = [
        "the reference column holds published order-of-magnitude figures; ratio = computed / reference",
        "log10-scale rows compare exponents rather than the raw numbers",
    ]
    flagged = [r["quantity"] for r in rows if not r["within_one_order"]]
    return _record(cfg, rows, {"flagged": flagged}, notes)


def run_collective(cfg) -> ReportRecord:
    trials = resolved_trials(cfg)
    r = heterodyne_collective_attack(cfg.M, cfg.photons, trials, cfg.seed)
    row = {"M": r.M, "photons": r.S, "trials": r.trials, "errors": r.errors, "ber": r.ber, "ber_exact": r.ber_reference,
           "ber_z": (r.ber - r.ber_reference) / r.ber_sigma if r.ber_sigma > 0 else None,
           "H_X_given_YK_mc": r.posterior_entropy, "H_X_given_YK_quad": r.posterior_entropy_oracle,
           "H_sector_given_KX_mc": r.sector_entropy, "H_sector_given_KX_quad": r.sector_entropy_oracle,
           "random_cipher": r.random_cipher}
    notes = ["Eve heterodynes every qumode and is granted the key afterwards; entropies are per qumode in bits"]
    return _record(cfg, [row], notes=notes)


RUNNERS = {
    "constellation": run_constellation,
    "ber": run_ber,
    "entropy": run_entropy,
    "distances": run_distances,
    "attack-i": run_attack_i,
    "grover": run_grover,
    "ortho-curve": run_ortho_curve,
    "bb84-attack": run_bb84,
    "resources": run_resources,
    "keygen-yield": run_keygen_yield,
    "paper-numbers": run_paper_numbers,
    "collective-attack": run_collective,
}


def run(cfg: RunConfig) -> ReportRecord:
    return RUNNERS[cfg.kind](cfg)
