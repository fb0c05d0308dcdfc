"""Instance-wise minimax AUC surrogate and ranking metrics.

The pairwise square-loss AUC risk over positive scores f+ and negative
scores f-,

    R = E[(1 - (f+ - f-))^2],

admits an instance-wise decomposition with auxiliary variables (a, b,
alpha).  For an imbalance ratio p in (0, 1) and a scored example (f, y):

    g(a, b, alpha; p, f, y) =
          (1-p) * (f - a)^2          if y = 1
        + p     * (f - b)^2          if y = 0
        + 2 * (1 + alpha) * (p * f * [y=0] - (1-p) * f * [y=1])
        - p * (1-p) * alpha^2

The quadratic penalty on alpha sits outside the 2*(1+alpha) factor; this
is the placement under which the closed-form saddle

    a* = mean(f+),  b* = mean(f-),  alpha* = b* - a*

is exact, and it yields the identity (enforced by the test suite)

    min_{a,b} max_alpha E[g] = p * (1-p) * (R - 1).

With scores in [0, 1], the optimizers live in a, b in [0, 1] and
alpha in [-1, 1], so those boxes are the domains enforced here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AuxParams:
    """Auxiliary saddle variables; a, b in [0, 1], alpha in [-1, 1]."""

    a: float
    b: float
    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0 and 0.0 <= self.b <= 1.0):
            raise ValueError(f"a, b must lie in [0, 1], got a={self.a}, b={self.b}")
        if not -1.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [-1, 1], got {self.alpha}")


@dataclass(frozen=True)
class LabeledScore:
    """A score in [0, 1] paired with a binary label."""

    f: float
    y: int

    def __post_init__(self):
        if not 0.0 <= self.f <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.f}")
        if self.y not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.y}")


def _check_p_hat(p_hat: float) -> None:
    if not 0.0 < p_hat < 1.0:
        raise ValueError(f"p_hat must lie in (0, 1), got {p_hat}")


def surrogate_loss(aux: AuxParams, p_hat: float, f, y):
    """Evaluate g at a scored example; f and y may be scalars or arrays."""
    _check_p_hat(p_hat)
    f_arr = np.asarray(f, dtype=float)
    pos = np.asarray(y) == 1
    p = p_hat
    val = (
        (1.0 - p) * (f_arr - aux.a) ** 2 * pos
        + p * (f_arr - aux.b) ** 2 * (~pos)
        + 2.0 * (1.0 + aux.alpha) * (p * f_arr * (~pos) - (1.0 - p) * f_arr * pos)
        - p * (1.0 - p) * aux.alpha**2
    )
    return float(val) if val.ndim == 0 else val


def surrogate_loss_grads(aux: AuxParams, p_hat: float, f, y):
    """Partials of g: (d/df, d/da, d/db, d/dalpha), shapes matching f."""
    _check_p_hat(p_hat)
    f_arr = np.asarray(f, dtype=float)
    pos = np.asarray(y) == 1
    p = p_hat
    d_f = (
        2.0 * (1.0 - p) * (f_arr - aux.a) * pos
        + 2.0 * p * (f_arr - aux.b) * (~pos)
        + 2.0 * (1.0 + aux.alpha) * (p * (~pos) - (1.0 - p) * pos)
    )
    d_a = -2.0 * (1.0 - p) * (f_arr - aux.a) * pos
    d_b = -2.0 * p * (f_arr - aux.b) * (~pos)
    d_alpha = (
        2.0 * (p * f_arr * (~pos) - (1.0 - p) * f_arr * pos)
        - 2.0 * p * (1.0 - p) * aux.alpha
        + 0.0 * f_arr  # broadcast to the input shape
    )
    if np.asarray(f).ndim == 0 and np.asarray(y).ndim == 0:
        return float(d_f), float(d_a), float(d_b), float(d_alpha)
    return d_f, d_a, d_b, d_alpha


def closed_form_aux(pos_scores, neg_scores) -> AuxParams:
    """Optimal (a, b, alpha) for fixed scores: class means and their gap.

    With scores in [0, 1] the result is automatically inside the domains.
    """
    pos = np.asarray(pos_scores, dtype=float)
    neg = np.asarray(neg_scores, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be non-empty")
    a = float(pos.mean())
    b = float(neg.mean())
    return AuxParams(a, b, b - a)


def pairwise_sq_risk(pos_scores, neg_scores) -> float:
    """Mean over all (pos, neg) pairs of (1 - (f+ - f-))^2."""
    pos = np.asarray(pos_scores, dtype=float)
    neg = np.asarray(neg_scores, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be non-empty")
    margins = pos[:, None] - neg[None, :]
    return float(np.mean((1.0 - margins) ** 2))


def _split_scores(scores):
    fs, ys = [], []
    for item in scores:
        if isinstance(item, LabeledScore):
            fs.append(item.f)
            ys.append(item.y)
        else:
            f, y = item
            fs.append(float(f))
            ys.append(int(y))
    return np.asarray(fs, dtype=float), np.asarray(ys, dtype=int)


def saddle_value(scores) -> float:
    """min over (a, b) / max over alpha of the empirical mean of g.

    Accepts LabeledScore instances or (score, label) pairs; the imbalance
    ratio is computed from the labels.  Equals
    p*(1-p)*(pairwise_sq_risk - 1).
    """
    fs, ys = _split_scores(scores)
    n_pos = int((ys == 1).sum())
    n_neg = int((ys == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be present")
    p_hat = n_pos / (n_pos + n_neg)
    aux = closed_form_aux(fs[ys == 1], fs[ys == 0])
    return float(np.mean(surrogate_loss(aux, p_hat, fs, ys)))


def auc_mann_whitney(pos_scores, neg_scores, tie_policy: str = "half") -> float:
    """Fraction of (pos, neg) pairs ranked correctly.

    Ties count 1/2 under "half" and 0 under "strict".
    """
    if tie_policy not in ("half", "strict"):
        raise ValueError(f"tie_policy must be 'half' or 'strict', got {tie_policy!r}")
    pos = np.sort(np.asarray(pos_scores, dtype=float))
    neg = np.asarray(neg_scores, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both classes must be non-empty")
    n_le = np.searchsorted(pos, neg, side="right")  # pos <= neg_j
    wins = (pos.size - n_le).astype(float)          # pos >  neg_j
    if tie_policy == "half":
        n_lt = np.searchsorted(pos, neg, side="left")
        wins += 0.5 * (n_le - n_lt)
    return float(wins.sum() / (pos.size * neg.size))
