"""Experiment harness and the ``crp`` command line interface.

Subcommands::

    crp offline   --config cfg.json [--out DIR] [--seed N]
    crp run       --config cfg.json [--out DIR] [--seed N]
    crp phi       --config cfg.json [--out DIR] [--seed N]
    crp adversary --config cfg.json [--out DIR] [--seed N]

Configs are strict JSON (unknown keys rejected).  Reports are UTF-8 CSV with
a header row plus JSON summaries; numbers are always '.'-decimal with 12
significant digits, so identical configs and seeds produce byte-identical
CSV files.  Exit codes: 0 ok, 2 malformed config or input, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import adversary as adv
from . import offline, online
from .revenue import InputSequence, load_sequence

__all__ = ["main", "ConfigError"]


class ConfigError(Exception):
    """Malformed configuration or input file (exit code 2)."""


class VerificationError(Exception):
    """A verification step failed on otherwise valid input (exit code 3)."""


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _round12(obj):
    """Round floats to 12 significant digits for stable JSON output."""
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(_round12(payload), indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _check_keys(cfg: dict, required, optional, where: str) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where}: expected an object, got {type(cfg).__name__}")
    for key in required:
        if key not in cfg:
            raise ConfigError(f"{where}: missing required key {key!r}")
    allowed = set(required) | set(optional)
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _critical_from_cfg(cfg: dict) -> InputSequence:
    _check_keys(cfg, ["m", "M", "n", "delta"], [], "critical")
    try:
        spec = adv.CriticalSequenceSpec(
            m=float(cfg["m"]), M=float(cfg["M"]), n=int(cfg["n"]), delta=float(cfg["delta"])
        )
    except ValueError as exc:
        raise ConfigError(f"critical: {exc}") from exc
    return adv.critical_sequence(spec)


_RANDOM_KEYS_REQ = ["family", "T", "seed", "delta", "m", "M"]
_RANDOM_KEYS_OPT = ["count", "p_range", "alpha_range", "beta_range"]


def _random_from_cfg(cfg: dict, seed, index: int) -> InputSequence:
    kwargs = {}
    for key in ("p_range", "alpha_range", "beta_range"):
        if key in cfg:
            kwargs[key] = tuple(float(x) for x in cfg[key])
    try:
        return adv.random_sequence(
            (int(seed), index),
            int(cfg["T"]),
            str(cfg["family"]),
            delta=float(cfg["delta"]),
            m=float(cfg["m"]),
            M=float(cfg["M"]),
            **kwargs,
        )
    except ValueError as exc:
        raise ConfigError(f"random: {exc}") from exc


def _sequence_from_file(path: str) -> InputSequence:
    try:
        return load_sequence(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"sequence file not found: {path}") from exc
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed sequence file {path}: {exc}") from exc


def _resolve_rule(rule, theta: float):
    """Map a config rule to (name, pursued ratio or None for adaptive)."""
    if isinstance(rule, (int, float)) and not isinstance(rule, bool):
        pi = float(rule)
        if pi < 1.0:
            raise ConfigError(f"explicit ratio must be >= 1, got {pi}")
        return f"pi:{pi:.12g}", pi
    if rule == "one-way":
        return "one-way", online.ratio_one_way(theta)
    if rule == "elasticity":
        return "elasticity", online.ratio_elasticity(theta)
    if rule == "adaptive":
        return "adaptive", None
    if isinstance(rule, str) and rule.startswith("general:"):
        try:
            c = float(rule.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"malformed rule {rule!r}") from exc
        if c < 1.0:
            raise ConfigError(f"family factor must be >= 1, got {c}")
        return rule, online.ratio_general(theta, c)
    raise ConfigError(f"unknown ratio rule {rule!r}")


# -- offline -------------------------------------------------------------------


def cmd_offline(cfg: dict, out: Path, seed) -> int:
    _check_keys(cfg, ["sequence"], [], "offline config")
    seq = _sequence_from_file(cfg["sequence"])
    sol = offline.solve(seq)
    kkt = offline.verify_kkt(seq, sol)
    payload = sol.to_dict()
    payload["active"] = sol.active
    payload["kkt"] = kkt.to_dict()
    _write_json(out / "offline.json", payload)
    return 0 if kkt.passed else 3


# -- run -----------------------------------------------------------------------


def _summarize_pursuit(seq: InputSequence, state: online.PursuitState) -> dict:
    eta_opt = offline.solve(seq).revenue
    cr = eta_opt / state.online_revenue if state.online_revenue > 0.0 else math.inf
    return {
        "eta_opt": eta_opt,
        "online_revenue": state.online_revenue,
        "empirical_cr": cr,
        "total_sold": state.inventory_used,
        "feasible": state.feasible,
        "breach_time": state.breach_time,
    }


def _run_single_member(args):
    cfg, base_seed, index, rule = args
    seq = _random_from_cfg(cfg, base_seed, index)
    name, pi = _resolve_rule(rule, seq.theta())
    if pi is None:
        try:
            result = online.run_adaptive(seq)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        eta_opt = offline.solve(seq).revenue
        rev = result.online_revenue
        cr = eta_opt / rev if rev > 0.0 else math.inf
        return {
            "index": index,
            "T": len(seq),
            "pi": result.final_pi,
            "eta_opt": eta_opt,
            "online_revenue": rev,
            "empirical_cr": cr,
            "total_sold": result.inventory_used,
            "feasible": result.inventory_used <= seq.delta * (1.0 + 1e-9),
        }
    state = online.run_pursuit(seq, pi)
    row = _summarize_pursuit(seq, state)
    row.pop("breach_time")
    row.update({"index": index, "T": len(seq), "pi": pi})
    return row


def cmd_run(cfg: dict, out: Path, seed) -> int:
    _check_keys(cfg, ["rule"], ["sequence", "critical", "random", "workers"], "run config")
    sources = [k for k in ("sequence", "critical", "random") if k in cfg]
    if len(sources) != 1:
        raise ConfigError(f"run config needs exactly one source, got {sources}")
    started = time.perf_counter()

    if sources[0] == "random":
        rcfg = cfg["random"]
        _check_keys(rcfg, _RANDOM_KEYS_REQ, _RANDOM_KEYS_OPT, "random")
        count = int(rcfg.get("count", 1))
        base_seed = int(seed if seed is not None else rcfg["seed"])
        if count > 1:
            return _run_ensemble(cfg, rcfg, base_seed, count, out, started)
        seq = _random_from_cfg(rcfg, base_seed, 0)
    elif sources[0] == "critical":
        seq = _critical_from_cfg(cfg["critical"])
    else:
        seq = _sequence_from_file(cfg["sequence"])

    name, pi = _resolve_rule(cfg["rule"], seq.theta())
    if pi is None:
        try:
            result = online.run_adaptive(seq)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        _write_adaptive_trace(out / "trace.csv", seq, result)
        eta_opt = offline.solve(seq).revenue
        rev = result.online_revenue
        summary = {
            "rule": name,
            "pi": result.final_pi,
            "theoretical_ratio": online.ratio_one_way(seq.theta()),
            "eta_opt": eta_opt,
            "online_revenue": rev,
            "empirical_cr": eta_opt / rev if rev > 0.0 else math.inf,
            "total_sold": result.inventory_used,
            "feasible": result.inventory_used <= seq.delta * (1.0 + 1e-9),
            "slots": len(seq),
            "runtime_seconds": time.perf_counter() - started,
        }
        _write_json(out / "summary.json", summary)
        return 0

    state = online.run_pursuit(seq, pi)
    _write_csv(
        out / "trace.csv",
        ["t", "p_t", "increment", "v_bar", "inventory_used", "online_revenue", "eta_opt", "breach_flag"],
        [
            (r.t, r.base_price, r.increment, r.v_bar, r.inventory_used, r.online_revenue, r.eta_opt, r.breach)
            for r in state.trace
        ],
    )
    summary = {"rule": name, "pi": pi, "theoretical_ratio": pi, "slots": len(seq)}
    summary.update(_summarize_pursuit(seq, state))
    summary["runtime_seconds"] = time.perf_counter() - started
    _write_json(out / "summary.json", summary)
    return 0


def _write_adaptive_trace(path: Path, seq: InputSequence, result) -> None:
    rows = []
    best = 0.0
    prev_eta = 0.0
    for row in result.trace:
        best = max(best, row.price)
        eta = seq.delta * best
        rows.append(
            (row.t, row.price, eta - prev_eta, row.v, row.inventory_used, row.online_revenue, eta, False)
        )
        prev_eta = eta
    _write_csv(
        path,
        ["t", "p_t", "increment", "v_bar", "inventory_used", "online_revenue", "eta_opt", "breach_flag"],
        rows,
    )


def _run_ensemble(cfg, rcfg, base_seed, count, out: Path, started) -> int:
    workers = int(cfg.get("workers", 1))
    tasks = [(rcfg, base_seed, i, cfg["rule"]) for i in range(count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_single_member, tasks, chunksize=64))
    else:
        rows = [_run_single_member(t) for t in tasks]
    header = ["index", "T", "pi", "eta_opt", "online_revenue", "empirical_cr", "total_sold", "feasible"]
    _write_csv(out / "members.csv", header, [[r[k] for k in header] for r in rows])
    feasible_count = sum(1 for r in rows if r["feasible"])
    summary = {
        "rule": cfg["rule"] if isinstance(cfg["rule"], str) else float(cfg["rule"]),
        "count": count,
        "seed": base_seed,
        "feasible_count": feasible_count,
        "all_feasible": feasible_count == count,
        "max_total_sold": max(r["total_sold"] for r in rows),
        "max_cr_deviation": max(
            abs(r["empirical_cr"] - r["pi"]) for r in rows if math.isfinite(r["empirical_cr"])
        ),
        "runtime_seconds": time.perf_counter() - started,
    }
    _write_json(out / "summary.json", summary)
    return 0


# -- phi -----------------------------------------------------------------------


def cmd_phi(cfg: dict, out: Path, seed) -> int:
    _check_keys(cfg, ["pis"], ["sequence", "critical"], "phi config")
    pis = cfg["pis"]
    if not isinstance(pis, list) or not pis:
        raise ConfigError("phi config needs a non-empty 'pis' grid")
    pis = [float(p) for p in pis]
    sources = [k for k in ("sequence", "critical") if k in cfg]
    if len(sources) != 1:
        raise ConfigError(f"phi config needs exactly one source, got {sources}")
    closed_form = None
    if sources[0] == "critical":
        seq = _critical_from_cfg(cfg["critical"])
        theta = seq.theta()
        closed_form = lambda pi: seq.delta * (1.0 + math.log(theta)) / pi
    else:
        seq = _sequence_from_file(cfg["sequence"])
    try:
        curve = adv.phi_curve(pis, seq)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if closed_form is not None:
        header = ["pi", "phi", "closed_form"]
        rows = [(pi, phi, closed_form(pi)) for pi, phi in curve]
    else:
        header = ["pi", "phi"]
        rows = curve
    _write_csv(out / "phi.csv", header, rows)
    return 0


# -- adversary -----------------------------------------------------------------


def cmd_adversary(cfg: dict, out: Path, seed) -> int:
    _check_keys(cfg, ["pi_ref"], ["baseline", "baselines", "sequence", "critical"], "adversary config")
    names = cfg.get("baselines", [cfg["baseline"]] if "baseline" in cfg else None)
    if not names:
        raise ConfigError("adversary config needs 'baseline' or 'baselines'")
    sources = [k for k in ("sequence", "critical") if k in cfg]
    if len(sources) != 1:
        raise ConfigError(f"adversary config needs exactly one source, got {sources}")
    if sources[0] == "critical":
        seq = _critical_from_cfg(cfg["critical"])
    else:
        seq = _sequence_from_file(cfg["sequence"])
    pi_ref = float(cfg["pi_ref"])
    rows = []
    for name in names:
        try:
            algorithm = adv.make_baseline(str(name))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        report = adv.stopper(algorithm, seq, pi_ref)
        r = report.to_row()
        rows.append((r["algorithm"], r["tau"], r["alg_revenue"], r["eta_opt"], r["ratio"]))
    _write_csv(out / "stopper.csv", ["algorithm", "tau", "alg_revenue", "eta_opt", "ratio"], rows)
    return 0


# -- entry point ----------------------------------------------------------------

_COMMANDS = {
    "offline": cmd_offline,
    "run": cmd_run,
    "phi": cmd_phi,
    "adversary": cmd_adversary,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crp",
        description="Inventory-constrained online revenue experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
