"""Monte Carlo driver: config parsing, worker splitting, CSV/manifest output.

Runs are reproducible by construction: trials are consumed in fixed blocks
keyed by (seed, block index), workers get a round-robin share of the blocks,
and integer counts are summed, so the output files are byte-identical for
any worker count.
"""

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds as bounds_mod
from . import cf as cf_mod
from . import codes, crcopt, lattices, pud, retry
from ._rng import BLOCK, n_blocks, split_blocks
from .embed import CrcSpec

__version__ = "0.1.0"


class ConfigError(ValueError):
    """Bad or missing run configuration."""


def parse_config(path):
    """key = value text file; '#' starts a comment; later keys win."""
    out = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected 'key = value'" % (path, ln))
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


class SimConfig:
    """Typed view over the raw key-value dict."""

    def __init__(self, raw):
        self.raw = dict(raw)

    def get(self, key, cast=str, default=None, required=False):
        if key not in self.raw:
            if required:
                raise ConfigError("missing required key '%s'" % key)
            return default
        try:
            return cast(self.raw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError("bad value for '%s': %s" % (key, exc)) from exc

    def get_list(self, key, cast=float, default=None, required=False):
        txt = self.get(key, str, None, required)
        if txt is None:
            return default
        try:
            return [cast(tok) for tok in txt.replace(",", " ").split()]
        except ValueError as exc:
            raise ConfigError("bad list for '%s': %s" % (key, exc)) from exc


def awgn_channel(X, sigma2, rng):
    """X plus iid N(0, sigma2) noise."""
    return X + rng.normal(0.0, np.sqrt(sigma2), size=np.shape(X))


# -- construction from config -------------------------------------------------

_PRESETS = {
    "e8-r2": codes.e8_code_r2,
    "bw16-r2.25": codes.bw16_code_r2p25,
}


def build_code(cfg):
    preset = cfg.get("code")
    if preset is not None:
        if preset not in _PRESETS:
            raise ConfigError("unknown code preset '%s' (have: %s)" % (preset, ", ".join(sorted(_PRESETS))))
        return _PRESETS[preset]()
    name = cfg.get("lattice", required=True)
    moduli = cfg.get_list("moduli", int, required=True)
    return codes.NestedLatticeCode(_build_lattice(cfg, name), moduli)


def _build_lattice(cfg, name):
    name = name.lower()
    if name == "zn":
        return lattices.zn(cfg.get("dim", int, required=True))
    if name == "a2":
        return lattices.a2()
    if name == "e8":
        return lattices.e8()
    if name == "bw16":
        return lattices.bw16()
    raise ConfigError("unknown lattice '%s'" % name)


def build_crc(cfg, lattice=None):
    """CRC from 'crc' (hex polynomial) or 'crc_len' (kissing-optimal search)."""
    hx = cfg.get("crc")
    if hx is not None:
        try:
            return CrcSpec.from_hex(hx, cfg.get("crc_len", int))
        except ValueError as exc:
            raise ConfigError("bad CRC polynomial: %s" % exc) from exc
    l = cfg.get("crc_len", int)
    if l is None:
        return None
    if lattice is None:
        raise ConfigError("crc_len without a lattice to search over")
    spec, _ = pud.crc_poly_search(l, lattice)
    return spec


# -- worker splitting ---------------------------------------------------------

def run_split(call, trials, workers, block=BLOCK):
    """Run `call(block_indices)` once per worker and return the partial results.

    The partials cover disjoint round-robin block sets; summing the counts in
    any order reproduces the single-worker run exactly.
    """
    workers = max(1, int(workers))
    if workers == 1:
        return [call(None)]
    parts = [p for p in split_blocks(n_blocks(trials, block), workers) if p]
    with ThreadPoolExecutor(max_workers=len(parts)) as ex:
        return list(ex.map(call, parts))


def _sum_pairs(parts):
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def _sum_dicts(parts):
    out = dict(parts[0])
    for p in parts[1:]:
        for k, v in p.items():
            out[k] = out[k] + v
    return out


# -- subcommand runners -------------------------------------------------------

def run_simulate_su(cfg):
    code = build_code(cfg)
    snrs = cfg.get_list("snr_db", float, required=True)
    trials = cfg.get("trials", int, required=True)
    seed = cfg.get("seed", int, 0)
    workers = cfg.get("workers", int, 1)
    mode = cfg.get("mode", str, "oneshot")
    rows = []
    if mode == "oneshot":
        for snr in snrs:
            parts = run_split(
                lambda idx, s=snr: retry.simulate_oneshot(code, s, trials, seed, block_indices=idx),
                trials, workers,
            )
            errs, n = _sum_pairs(parts)
            lo, hi = retry.wilson_ci(errs, n)
            rows.append({"snr_db": snr, "trials": n, "errors": errs,
                         "wer": errs / n, "wer_lo": lo, "wer_hi": hi})
        return ["snr_db", "trials", "errors", "wer", "wer_lo", "wer_hi"], rows
    if mode == "genie":
        bnds = (cfg.get("alpha_min", float, required=True), cfg.get("alpha_max", float, required=True))
        n_cand = cfg.get("n_candidates", int, required=True)
        for snr in snrs:
            parts = run_split(
                lambda idx, s=snr: retry.simulate_exhaustive_genie(
                    code, s, bnds, n_cand, trials, seed, block_indices=idx),
                trials, workers,
            )
            errs, n = _sum_pairs(parts)
            lo, hi = retry.wilson_ci(errs, n)
            rows.append({"snr_db": snr, "trials": n, "errors": errs,
                         "wer": errs / n, "wer_lo": lo, "wer_hi": hi})
        return ["snr_db", "trials", "errors", "wer", "wer_lo", "wer_hi"], rows
    if mode != "retry":
        raise ConfigError("mode must be oneshot, retry, or genie")
    crcspec = build_crc(cfg, code.lattice)
    fields = None
    for snr in snrs:
        alist = _candidates_for(cfg, code, snr, seed)
        parts = run_split(
            lambda idx, s=snr, al=alist: retry.simulate_retry(
                code, s, al, trials, seed, crcspec=crcspec, block_indices=idx),
            trials, workers,
        )
        log = _sum_dicts(parts)
        n = log["trials"]
        row = {
            "snr_db": snr,
            "trials": n,
            "errors": log["total_errors"],
            "wer": log["total_errors"] / n,
            "undetected": log["undetected"],
            "failures": log["failures"],
            "p_e1": log["level_errors"][0] / n,
        }
        for i in range(2, len(log["level_errors"]) + 1):
            try:
                row["p_re_%d" % i] = crcopt.measure_p_re(log, i)
            except ZeroDivisionError:
                row["p_re_%d" % i] = float("nan")
        for i, (e, a) in enumerate(zip(log["level_errors"], log["level_active"]), 1):
            row["level%d_errors" % i] = int(e)
            row["level%d_active" % i] = int(a)
        if fields is None:
            fields = list(row)
        rows.append(row)
    return fields, rows


def _candidates_for(cfg, code, snr, seed):
    path = cfg.get("candidates_csv")
    if path is not None:
        return retry.AlphaCandidateList.load(path)
    return retry.search_candidates(
        code,
        snr,
        cfg.get("levels", int, 2),
        (cfg.get("alpha_min", float, required=True), cfg.get("alpha_max", float, required=True)),
        seed=cfg.get("search_seed", int, seed + 1),
        pool_level1=cfg.get("pool_level1", int, 100_000),
        conditioned_floor=cfg.get("conditioned_floor", int, 2000),
    )


def run_search_alpha(cfg):
    code = build_code(cfg)
    snrs = cfg.get_list("snr_db", float, required=True)
    seed = cfg.get("seed", int, 0)
    out_prefix = cfg.get("out", str, "alpha")
    rows = []
    for snr in snrs:
        alist = _candidates_for(cfg, code, snr, seed)
        path = "%s_snr%g.csv" % (out_prefix, snr)
        alist.save(path)
        for li, (lv, cond) in enumerate(zip(alist.levels, alist.conditionals), 1):
            for j, (a, p) in enumerate(zip(lv, cond), 1):
                rows.append({"snr_db": snr, "level": li, "index": j,
                             "alpha": a, "conditional_success": p, "file": path})
    return ["snr_db", "level", "index", "alpha", "conditional_success", "file"], rows


def run_simulate_cf(cfg):
    code = build_code(cfg)
    snrs = cfg.get_list("snr_db", float, required=True)
    trials = cfg.get("trials", int, required=True)
    seed = cfg.get("seed", int, 0)
    workers = cfg.get("workers", int, 1)
    n_cand = cfg.get("n_candidates", int, 2)
    users = cfg.get("users", int, 2)
    crcspec = build_crc(cfg, code.lattice)
    rows = []
    for snr in snrs:
        parts = run_split(
            lambda idx, s=snr: cf_mod.simulate_relay(
                code, s, trials, seed, n_candidates=n_cand, crcspec=crcspec,
                L=users, block_indices=idx),
            trials, workers, block=512,
        )
        log = _sum_dicts(parts)
        n = log["trials"]
        lo1, hi1 = retry.wilson_ci(log["err_oneshot"], n)
        lo2, hi2 = retry.wilson_ci(log["err_retry"], n)
        rows.append({
            "snr_db": snr, "trials": n,
            "err_oneshot": log["err_oneshot"], "eer_oneshot": log["err_oneshot"] / n,
            "eer_oneshot_lo": lo1, "eer_oneshot_hi": hi1,
            "err_retry": log["err_retry"], "eer_retry": log["err_retry"] / n,
            "eer_retry_lo": lo2, "eer_retry_hi": hi2,
            "mean_attempts": log["attempts"] / n,
        })
    return list(rows[0]), rows


def run_bound(cfg):
    code = build_code(cfg)
    snrs = cfg.get_list("snr_db", float, required=True)
    lat = code.lattice
    P = code.average_power()
    r_pack = 0.5 * np.sqrt(lattices.minimal_norm2(lat))
    rows = []
    for snr in snrs:
        s2 = code.sigma2_for_snr(snr)
        rows.append({
            "snr_db": snr,
            "sigma2": s2,
            "bound_packing": bounds_mod.cone_bound(lat.N, P, s2, r_pack),
            "estimate_effective": bounds_mod.effective_estimate(lat.N, P, s2, lat),
        })
    return ["snr_db", "sigma2", "bound_packing", "estimate_effective"], rows


def run_pud(cfg):
    code = build_code(cfg)
    snr = cfg.get("snr_db", float, required=True)
    lengths = cfg.get_list("crc_lengths", int, required=True)
    trials = cfg.get("trials", int, required=True)
    seed = cfg.get("seed", int, 0)
    rows = []
    for r in pud.pud_table(code, snr, lengths, trials, seed):
        rows.append({
            "l": r.l,
            "polynomial": r.polynomial,
            "p_ud_mc": r.monte_carlo,
            "p_ud_mc_lo": r.mc_ci[0],
            "p_ud_mc_hi": r.mc_ci[1],
            "p_ud_kissing": float(r.kissing_estimate),
            "kissing_fraction": "%d/%d" % (r.kissing_estimate.numerator, r.kissing_estimate.denominator),
            "p_ud_parity": float(r.parity_estimate),
            "snr_db": r.snr_db,
        })
    return list(rows[0]), rows


def run_optimize_crc(cfg):
    code = build_code(cfg)
    path = cfg.get("model_csv", str, required=True)
    target = cfg.get("target", float, required=True)
    l_lo = cfg.get("l_min", int, 1)
    l_hi = cfg.get("l_max", int, required=True)
    pud_mode = cfg.get("pud", str, "kissing")
    models = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            p_re = []
            i = 2
            while "p_re_%d" % i in rec and rec["p_re_%d" % i] not in ("", "nan"):
                p_re.append(float(rec["p_re_%d" % i]))
                i += 1
            if not p_re:
                raise ConfigError("%s: no p_re_i columns; need a retry-mode sweep" % path)
            models[float(rec["snr_db"])] = crcopt.RetryErrorModel(float(rec["p_e1"]), p_re)
    l_range = list(range(l_lo, l_hi + 1))
    pud_map, polys = None, {}
    if pud_mode == "kissing":
        pud_map = {}
        for l in l_range:
            spec, frac = pud.crc_poly_search(l, code.lattice)
            pud_map[l] = frac
            polys[l] = str(spec)
    elif pud_mode != "parity":
        raise ConfigError("pud must be 'kissing' or 'parity'")
    rep = crcopt.optimize_crc_length(
        models, target, l_range, code.N, code.rate, pud_map=pud_map, polys=polys
    )
    rows = [{
        "l": r.l, "p_ud": r.p_ud, "snr_at_target": r.snr_at_target,
        "penalty_db": r.penalty_db, "gain_db": r.gain_db,
        "polynomial": r.polynomial,
        "is_best": int(rep.best_l == r.l),
    } for r in rep.rows]
    extra = {"target": rep.target, "best_l": rep.best_l,
             "best_gain_db": rep.best_gain_db, "genie_gain_db": rep.genie_gain_db}
    return list(rows[0]), rows, extra


RUNNERS = {
    "simulate-su": run_simulate_su,
    "search-alpha": run_search_alpha,
    "simulate-cf": run_simulate_cf,
    "bound": run_bound,
    "pud": run_pud,
    "optimize-crc": run_optimize_crc,
}


def write_results(out_prefix, command, cfg, fields, rows, extra=None, elapsed=None):
    """<prefix>.csv with the rows plus <prefix>.manifest.json for provenance."""
    csv_path = out_prefix + ".csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    manifest = {
        "command": command,
        "config": cfg.raw,
        "csv": csv_path,
        "rows": len(rows),
        "package_version": __version__,
        "elapsed_s": elapsed,
    }
    if extra:
        manifest["summary"] = extra
    man_path = out_prefix + ".manifest.json"
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")
    return csv_path, man_path


def run(command, raw_config, out_prefix=None):
    """Execute one subcommand; returns (csv_path, manifest_path)."""
    if command not in RUNNERS:
        raise ConfigError("unknown command '%s'" % command)
    cfg = raw_config if isinstance(raw_config, SimConfig) else SimConfig(raw_config)
    t0 = time.time()
    result = RUNNERS[command](cfg)
    fields, rows = result[0], result[1]
    extra = result[2] if len(result) > 2 else None
    prefix = out_prefix or cfg.get("out", str, command.replace("-", "_"))
    return write_results(prefix, command, cfg, fields, rows, extra, time.time() - t0)
