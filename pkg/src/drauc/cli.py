"""Command-line entry point.

Subcommands: gen-data, train, eval, attack-oracle, verify, grad-check.
Exit codes: 0 success, 1 validation failure, 2 usage or I/O error.

Settings resolve as: command-line flags, then a key=value --config file,
then built-in defaults.  The DRAUC_SEED environment variable is the
fallback seed when neither a flag nor the config file provides one.
Config keys are the flag names with dashes replaced by underscores
(eta-z -> eta_z, steps-K -> steps_K).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .checkpoint import (CHECKPOINT_VERSION, Checkpoint, format_report,
                         load_checkpoint, save_checkpoint)
from .data import corrupt, gen_synthetic, load_csv, make_long_tailed, save_csv
from .errors import ConfigError, DraucError
from .gradcheck import grad_check
from .losses import AuxParams, auc_mann_whitney
from .model import init_model, parse_arch, score, ScoringModel
from .robust import (AttackConfig, barycenter_attack, brute_force_worst_case,
                     estimate_robust_auc, min_cost_flip_search)
from .training import TrainConfig, train_aucm_baseline, train_da, train_df
from .verification import run_all

TRAIN_DEFAULTS = {
    "variant": "df",
    "arch": "mlp1-tanh-sigmoid(8)",
    "eps": 0.0,
    "k": 1.0,
    "eta_z": 0.05,
    "eta_lambda": 0.1,
    "eta_w": 0.1,
    "eta_alpha": 0.1,
    "steps_K": 10,
    "iters_T": 500,
    "batch": 64,
    "ratio": None,
    "seed": None,
    "lambda0": 1.0,
    "lambda_max": 1e3,
    "n": 2000,
    "d": 2,
    "mu_pos": 0.65,
    "mu_neg": 0.35,
    "sigma": 0.15,
    "data": None,
    "out": "checkpoint.txt",
    "report": None,
    "report_sigmas": "0.2",
    "report_eps": "0.1",
}

_VARIANT_ALIASES = {"df": "df", "da": "da", "aucm": "aucm-baseline",
                    "aucm-baseline": "aucm-baseline"}


def _read_config_file(path):
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return cfg


def _convert(value: str, like):
    if like is None or isinstance(like, str):
        return value
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def _resolve(args, defaults):
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = _read_config_file(args.config)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            out[key] = flag_value
        elif key in file_cfg:
            out[key] = _convert(file_cfg[key], default if default is not None else "")
            if key in ("seed", "steps_K", "iters_T", "batch", "n", "d"):
                out[key] = int(out[key])
            elif key in ("eps", "k", "eta_z", "eta_lambda", "eta_w", "eta_alpha",
                         "ratio", "lambda0", "lambda_max", "mu_pos", "mu_neg", "sigma"):
                out[key] = float(out[key])
        else:
            out[key] = default
    if out.get("seed") is None:
        env = os.environ.get("DRAUC_SEED")
        out["seed"] = int(env) if env else 0
    return out


def _float_list(text: str):
    return [float(p) for p in text.split(",") if p.strip() != ""]


def _emit(lines, out_path=None):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ----------------------------------------------------------- subcommands

def _cmd_gen_data(args) -> int:
    resolved = _resolve(args, {
        "n": 2000, "d": 2, "mu_pos": 0.65, "mu_neg": 0.35, "sigma": 0.15,
        "seed": None, "ratio": None, "out": "data.csv",
    })
    ds = gen_synthetic(resolved["n"], resolved["d"], resolved["mu_pos"],
                       resolved["mu_neg"], resolved["sigma"], resolved["seed"])
    if resolved["ratio"] is not None:
        ds = make_long_tailed(ds, resolved["ratio"], resolved["seed"])
    save_csv(ds, resolved["out"])
    print(f"wrote {resolved['out']}: n={ds.n} d={ds.d} p_hat={ds.p_hat:.6g}")
    return 0


def _train_state(resolved, dataset, model):
    cfg = TrainConfig(
        variant=_VARIANT_ALIASES[resolved["variant"]],
        iters=resolved["iters_T"],
        batch_size=resolved["batch"],
        eta_z=resolved["eta_z"],
        eta_lambda=resolved["eta_lambda"],
        eta_w=resolved["eta_w"],
        eta_alpha=resolved["eta_alpha"],
        steps=resolved["steps_K"],
        eps=resolved["eps"],
        k_split=resolved["k"],
        lambda0=resolved["lambda0"],
        seed=resolved["seed"],
        lambda_max=resolved["lambda_max"],
    )
    runner = {"df": train_df, "da": train_da,
              "aucm-baseline": train_aucm_baseline}[cfg.variant]
    return cfg, runner(dataset, cfg, model)


def _cmd_train(args) -> int:
    resolved = _resolve(args, TRAIN_DEFAULTS)
    if resolved["variant"] not in _VARIANT_ALIASES:
        raise ConfigError(f"unknown variant {resolved['variant']!r}")
    started = time.perf_counter()
    if resolved["data"]:
        dataset = load_csv(resolved["data"])
    else:
        dataset = gen_synthetic(resolved["n"], resolved["d"], resolved["mu_pos"],
                                resolved["mu_neg"], resolved["sigma"],
                                resolved["seed"])
    if resolved["ratio"] is not None:
        dataset = make_long_tailed(dataset, resolved["ratio"], resolved["seed"])
    parse_arch(resolved["arch"])  # fail fast on a bad descriptor
    model = init_model(resolved["arch"], dataset.d, resolved["seed"])
    cfg, state = _train_state(resolved, dataset, model)

    dual = state.dual
    ck = Checkpoint(
        format_version=CHECKPOINT_VERSION,
        arch=state.model.arch_descriptor,
        input_dim=dataset.d,
        theta=state.model.params,
        a=state.aux.a, b=state.aux.b, alpha=state.aux.alpha,
        variant=cfg.variant,
        lambda_max=cfg.lambda_max,
        lam=dual.lam, eps=dual.eps,
        lam_pos=dual.lam_pos, lam_neg=dual.lam_neg,
        eps_pos=dual.eps_pos, eps_neg=dual.eps_neg,
        scaler_min=dataset.scaler_min, scaler_max=dataset.scaler_max,
        seed=resolved["seed"], iteration=state.iteration,
        cfg={k: str(v) for k, v in sorted(resolved.items())
             if k not in ("out", "report", "data")},
    )
    save_checkpoint(ck, resolved["out"])

    scores = score(state.model, dataset.features)
    pos, neg = scores[dataset.labels == 1], scores[dataset.labels == 0]
    metrics = {"final_nominal_auc": auc_mann_whitney(pos, neg)}
    for sig in _float_list(resolved["report_sigmas"]):
        cds = corrupt(dataset, sig, resolved["seed"])
        cs = score(state.model, cds.features)
        metrics[f"corrupted_auc_{sig:g}"] = auc_mann_whitney(
            cs[cds.labels == 1], cs[cds.labels == 0])
    for eps in _float_list(resolved["report_eps"]):
        metrics[f"robust_auc_{eps:g}"] = estimate_robust_auc(
            state.model, dataset, eps, state.aux,
            AttackConfig(steps=cfg.steps, step_size=max(cfg.eta_z, 1e-3)),
            lambda_max=cfg.lambda_max)
    metrics["wall_clock_seconds"] = time.perf_counter() - started

    report_path = resolved["report"] or resolved["out"] + ".report"
    config_snapshot = {k: v for k, v in resolved.items() if v is not None}
    with open(report_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_report(config_snapshot, metrics, state.history))
    print(f"checkpoint={resolved['out']}")
    print(f"report={report_path}")
    for key, value in metrics.items():
        print(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")
    return 0


def _cmd_eval(args) -> int:
    ck = load_checkpoint(args.ckpt)
    model = ck.model()
    dataset = load_csv(args.data)
    if dataset.d != ck.input_dim:
        raise ConfigError(
            f"data dimension {dataset.d} does not match checkpoint {ck.input_dim}")
    seed = args.seed if args.seed is not None else 0
    scores = score(model, dataset.features)
    pos, neg = scores[dataset.labels == 1], scores[dataset.labels == 0]
    lines = [f"nominal_auc={auc_mann_whitney(pos, neg):.17g}"]
    for sig in _float_list(args.sigmas):
        cds = corrupt(dataset, sig, seed)
        cs = score(model, cds.features)
        lines.append(f"corrupted_auc_{sig:g}="
                     f"{auc_mann_whitney(cs[cds.labels == 1], cs[cds.labels == 0]):.17g}")
    atk = AttackConfig(steps=args.attack_steps, step_size=args.attack_step_size)
    for eps in _float_list(args.eps):
        val = estimate_robust_auc(model, dataset, eps, ck.aux(), atk,
                                  lambda_max=ck.lambda_max)
        lines.append(f"robust_auc_{eps:g}={val:.17g}")
    _emit(lines, args.out)
    return 0


def _cmd_attack_oracle(args) -> int:
    lines = []
    if args.preset == "two-point":
        from .data import Dataset
        ds = Dataset.from_arrays(np.array([[0.0], [1.0]]), np.array([0, 0]))
        scorer = ScoringModel("linear-identity-clamped", np.array([1.0, 0.0]), 1)
        sup, positions = brute_force_worst_case(
            ds, args.eps if args.eps is not None else 0.125, args.grid,
            AuxParams(0.0, 0.0, 0.0), 0.5, scorer)
        lines.append(f"worst_case_mean_loss={sup!r}")
        lines.append("worst_positions=" + ",".join(repr(p) for p in positions))
    else:
        if args.preset == "example1":
            x_pos, x_neg, n_pos, n_neg = 0.99, 0.01, 1, 99
        else:
            if None in (args.x_pos, args.x_neg, args.n_pos, args.n_neg):
                raise ConfigError(
                    "custom instance needs --x-pos, --x-neg, --n-pos, --n-neg")
            x_pos, x_neg, n_pos, n_neg = args.x_pos, args.x_neg, args.n_pos, args.n_neg
        atk = barycenter_attack(x_pos, x_neg, n_pos, n_neg)
        min_cost, t_pos, t_neg = min_cost_flip_search(
            x_pos, x_neg, n_pos, n_neg, args.grid)
        strict = auc_mann_whitney([atk.target] * n_pos, [atk.target] * n_neg, "strict")
        lines += [
            f"target={atk.target!r}",
            f"cost={atk.cost!r}",
            f"bound={atk.bound!r}",
            f"min_grid_cost={min_cost!r}",
            f"grid_destinations={t_pos!r},{t_neg!r}",
            f"strict_auc_after_attack={strict!r}",
        ]
        if args.preset == "example1":
            lines.append(
                "note=a commonly quoted distance for this instance, 0.009702, "
                "matches the unsquared displacement p*(1-p)*|x_pos-x_neg|; the "
                f"squared-transport cost computed here is {atk.cost:.6g}")
    _emit(lines, args.out)
    return 0


def _cmd_verify(args) -> int:
    results = run_all("quick" if args.quick else "full")
    failed = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"[{tag}] {res.name}: {res.detail}")
        failed += not res.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def _cmd_grad_check(args) -> int:
    rep = grad_check(args.arch, trials=args.trials, h=args.h, tol=args.tol,
                     input_dim=args.input_dim, seed=args.seed or 0)
    print(f"arch={rep.arch}")
    print(f"trials={rep.trials}")
    print(f"max_rel_err={rep.max_rel_err:.6g}")
    print(f"tol={rep.tol:g}")
    print(f"worst={rep.worst}")
    print(f"passed={rep.passed}")
    return 0 if rep.passed else 1


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drauc",
        description="Distributionally robust AUC training and verification.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic CSV dataset")
    p.add_argument("--out", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--mu-pos", type=float, default=None)
    p.add_argument("--mu-neg", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--ratio", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(handler=_cmd_gen_data)

    p = sub.add_parser("train", help="train a variant, write checkpoint and report")
    p.add_argument("--variant", choices=sorted(_VARIANT_ALIASES), default=None)
    p.add_argument("--arch", default=None)
    p.add_argument("--data", default=None, help="training CSV; omit for synthetic")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--eta-z", type=float, default=None)
    p.add_argument("--eta-lambda", type=float, default=None)
    p.add_argument("--eta-w", type=float, default=None)
    p.add_argument("--eta-alpha", type=float, default=None)
    p.add_argument("--steps-K", type=int, default=None)
    p.add_argument("--iters-T", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--ratio", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambda0", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--mu-pos", type=float, default=None)
    p.add_argument("--mu-neg", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--report-sigmas", default=None)
    p.add_argument("--report-eps", default=None)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("eval", help="score a CSV with a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--sigmas", default="0.1,0.2")
    p.add_argument("--eps", default="0.05,0.1")
    p.add_argument("--attack-steps", type=int, default=10)
    p.add_argument("--attack-step-size", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("attack-oracle",
                       help="closed-form and brute-force attacks on tiny instances")
    p.add_argument("--preset", choices=["example1", "two-point", "custom"],
                   default="example1")
    p.add_argument("--x-pos", type=float, default=None)
    p.add_argument("--x-neg", type=float, default=None)
    p.add_argument("--n-pos", type=int, default=None)
    p.add_argument("--n-neg", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_attack_oracle)

    p = sub.add_parser("verify", help="run the full invariant suite")
    p.add_argument("--quick", action="store_true",
                   help="smaller sample sizes, same checks")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("grad-check", help="finite-difference gradient validation")
    p.add_argument("--arch", default="mlp1-tanh-sigmoid(8)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--input-dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=_cmd_grad_check)

    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.handler(args)
    except DraucError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
