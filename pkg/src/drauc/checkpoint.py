"""Text checkpoints and run reports.

Both formats are line-oriented ``key=value`` text (UTF-8, LF).  Floats are
written with 17 significant digits, which parse back to the identical
float64, so save followed by load is a bitwise identity.  Vector fields
are comma-joined.  Checkpoint keys are written in a fixed order and config
snapshot keys are sorted, so identical states produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CheckpointError
from .model import ScoringModel, param_count, parse_arch
from .losses import AuxParams
from .robust import DualState

CHECKPOINT_VERSION = 1

_SCALAR_FIELDS = ("a", "b", "alpha", "lambda_max")
_OPTIONAL_FIELDS = ("lam", "eps", "lam_pos", "lam_neg", "eps_pos", "eps_neg")


@dataclass
class Checkpoint:
    format_version: int
    arch: str                   # descriptor, e.g. "mlp1-tanh-sigmoid(8)"
    input_dim: int
    theta: np.ndarray
    a: float
    b: float
    alpha: float
    variant: str
    lambda_max: float
    scaler_min: np.ndarray
    scaler_max: np.ndarray
    seed: int
    iteration: int
    lam: float | None = None
    eps: float | None = None
    lam_pos: float | None = None
    lam_neg: float | None = None
    eps_pos: float | None = None
    eps_neg: float | None = None
    cfg: dict = field(default_factory=dict)

    def model(self) -> ScoringModel:
        name, width = parse_arch(self.arch)
        return ScoringModel(name, self.theta, self.input_dim, width)

    def aux(self) -> AuxParams:
        return AuxParams(self.a, self.b, self.alpha)

    def dual(self) -> DualState:
        return DualState(lambda_max=self.lambda_max, lam=self.lam, eps=self.eps,
                         lam_pos=self.lam_pos, lam_neg=self.lam_neg,
                         eps_pos=self.eps_pos, eps_neg=self.eps_neg)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_vec(v: np.ndarray) -> str:
    return ",".join(_fmt(x) for x in v)


def _parse_vec(s: str, key: str) -> np.ndarray:
    if s == "":
        return np.empty(0)
    try:
        return np.array([float(p) for p in s.split(",")])
    except ValueError:
        raise CheckpointError(f"field {key!r} contains a non-numeric entry") from None


def save_checkpoint(ck: Checkpoint, path) -> None:
    lines = [
        f"format_version={ck.format_version}",
        f"arch={ck.arch}",
        f"input_dim={ck.input_dim}",
        f"theta={_fmt_vec(ck.theta)}",
        f"a={_fmt(ck.a)}",
        f"b={_fmt(ck.b)}",
        f"alpha={_fmt(ck.alpha)}",
        f"variant={ck.variant}",
        f"lambda_max={_fmt(ck.lambda_max)}",
    ]
    for name in _OPTIONAL_FIELDS:
        value = getattr(ck, name)
        if value is not None:
            lines.append(f"{name}={_fmt(value)}")
    lines += [
        f"scaler_min={_fmt_vec(ck.scaler_min)}",
        f"scaler_max={_fmt_vec(ck.scaler_max)}",
        f"seed={ck.seed}",
        f"iteration={ck.iteration}",
    ]
    for key in sorted(ck.cfg):
        lines.append(f"cfg.{key}={ck.cfg[key]}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> Checkpoint:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        raw = fh.read().split("\n")
    fields: dict[str, str] = {}
    cfg: dict[str, str] = {}
    for line in raw:
        if not line:
            continue
        if "=" not in line:
            raise CheckpointError(f"malformed line {line!r}")
        key, value = line.split("=", 1)
        if key.startswith("cfg."):
            cfg[key[4:]] = value
        else:
            fields[key] = value

    def need(key: str) -> str:
        if key not in fields:
            raise CheckpointError(f"missing required field {key!r}")
        return fields[key]

    def need_int(key: str) -> int:
        try:
            return int(need(key))
        except ValueError:
            raise CheckpointError(f"field {key!r} is not an integer") from None

    def need_float(key: str) -> float:
        try:
            return float(need(key))
        except ValueError:
            raise CheckpointError(f"field {key!r} is not a number") from None

    version = need_int("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"format_version {version} does not match supported "
            f"version {CHECKPOINT_VERSION}")

    arch = need("arch")
    input_dim = need_int("input_dim")
    theta = _parse_vec(need("theta"), "theta")
    name, width = parse_arch(arch)
    expected = param_count(name, input_dim, width)
    if theta.shape != (expected,):
        raise CheckpointError(
            f"field 'theta' has length {theta.size}, expected {expected} "
            f"for {arch} with input_dim={input_dim}")
    scaler_min = _parse_vec(need("scaler_min"), "scaler_min")
    scaler_max = _parse_vec(need("scaler_max"), "scaler_max")
    if scaler_min.size != input_dim or scaler_max.size != input_dim:
        raise CheckpointError("scaler length does not match input_dim")

    optional = {}
    for key in _OPTIONAL_FIELDS:
        if key in fields:
            try:
                optional[key] = float(fields[key])
            except ValueError:
                raise CheckpointError(f"field {key!r} is not a number") from None

    return Checkpoint(
        format_version=version,
        arch=arch,
        input_dim=input_dim,
        theta=theta,
        a=need_float("a"),
        b=need_float("b"),
        alpha=need_float("alpha"),
        variant=need("variant"),
        lambda_max=need_float("lambda_max"),
        scaler_min=scaler_min,
        scaler_max=scaler_max,
        seed=need_int("seed"),
        iteration=need_int("iteration"),
        cfg=cfg,
        **optional,
    )


def format_report(config: dict, metrics: dict, history=None) -> str:
    """Machine-readable run report: one metric=value per line.

    ``config`` keys are prefixed with "config.", history records become
    "history.<iteration>.<field>" lines.
    """
    lines = []
    for key in sorted(config):
        lines.append(f"config.{key}={config[key]}")
    for key, value in metrics.items():
        lines.append(f"{key}={_fmt(value) if isinstance(value, float) else value}")
    for rec in history or []:
        t = rec["iteration"]
        for key, value in rec.items():
            if key in ("iteration", "theta"):
                continue
            if value is None:
                continue
            v = _fmt(value) if isinstance(value, float) else value
            lines.append(f"history.{t}.{key}={v}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    out = {}
    for line in text.split("\n"):
        if not line:
            continue
        key, value = line.split("=", 1)
        out[key] = value
    return out
