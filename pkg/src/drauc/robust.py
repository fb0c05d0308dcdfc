"""Worst-case inner maximization and its verification oracles.

The robust surrogate of an example z = (x, y) under multiplier lam >= 0 is

    phi_lam(z) = max_{x' in [0,1]^d} [ g(f(x'), y) - lam * ||x - x'||^2 ],

computed here by K-step projected gradient ascent started at x' = x.  The
returned value is the best penalized objective seen along the iterates
(including the start), so phi_lam(z) >= g(z) holds for every lam, and the
value collapses to g(z) as lam grows.  Perturbations never change labels:
the transport cost across labels is infinite.

Desk-scale oracles back the solver:

  * an exact 1-D maximizer over a dense grid (plus the point itself),
  * a brute-force search for the worst distribution of a tiny 1-D dataset
    under a mean-squared-transport budget, restricted to one destination
    per point, made exact up to grid resolution by Pareto-dominance
    pruning instead of raw enumeration,
  * the closed-form barycenter attack that collapses two point clusters
    onto their mass-weighted mean, driving strict AUC to zero at cost
    p*(1-p)*(x_pos - x_neg)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .losses import AuxParams, auc_mann_whitney, surrogate_loss, surrogate_loss_grads
from .model import ScoringModel, score, score_grad_input


@dataclass(frozen=True)
class AttackConfig:
    """Inner-ascent settings; the feasible box is always [0,1]^d."""

    steps: int = 10
    step_size: float = 0.05
    restarts: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.step_size <= 0.0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be >= 0, got {self.restarts}")


@dataclass
class DualState:
    """Multipliers and radii; single-budget runs set (lam, eps), per-class
    runs set (lam_pos, lam_neg, eps_pos, eps_neg)."""

    lambda_max: float = 1e3
    lam: float | None = None
    eps: float | None = None
    lam_pos: float | None = None
    lam_neg: float | None = None
    eps_pos: float | None = None
    eps_neg: float | None = None

    def __post_init__(self):
        if self.lambda_max <= 0.0:
            raise ValueError("lambda_max must be positive")
        for name in ("lam", "lam_pos", "lam_neg"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= self.lambda_max:
                raise ValueError(f"{name}={v} outside [0, {self.lambda_max}]")
        for name in ("eps", "eps_pos", "eps_neg"):
            v = getattr(self, name)
            if v is not None and v < 0.0:
                raise ValueError(f"{name} must be >= 0, got {v}")


def transport_cost(z, z_prime) -> float:
    """Squared Euclidean distance between features; inf across labels."""
    x, y = z
    xp, yp = z_prime
    xa = np.asarray(x, dtype=float).reshape(-1)
    xb = np.asarray(xp, dtype=float).reshape(-1)
    if xa.shape != xb.shape:
        raise ValueError(f"feature dimensions differ: {xa.shape} vs {xb.shape}")
    if int(y) != int(yp):
        return math.inf
    return float(((xa - xb) ** 2).sum())


def _penalized_values(model, aux, p_hat, lam, x_adv, x_orig, y):
    f = score(model, x_adv)
    g = surrogate_loss(aux, p_hat, f, y)
    return g - lam * ((x_adv - x_orig) ** 2).sum(axis=1)


def attack_batch(model: ScoringModel, aux: AuxParams, p_hat: float, lam: float,
                 x_batch: np.ndarray, y_batch, cfg: AttackConfig):
    """Ascent on the penalized objective for a batch sharing one multiplier.

    Returns (values, x_adv) where each row of x_adv is the best iterate
    seen for that example (the start point counts, so values >= g(z)).
    """
    if lam < 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    x0 = np.asarray(x_batch, dtype=float)
    if x0.min() < 0.0 or x0.max() > 1.0:
        raise ValueError("attack start must lie in [0, 1]^d")
    y_arr = np.broadcast_to(np.asarray(y_batch), (x0.shape[0],))
    best_x = x0.copy()
    best_val = _penalized_values(model, aux, p_hat, lam, x0, x0, y_arr)

    starts = [x0]
    if cfg.restarts:
        rng = np.random.default_rng(cfg.seed)
        starts += [rng.uniform(0.0, 1.0, size=x0.shape) for _ in range(cfg.restarts)]

    for start in starts:
        x_cur = start.copy()
        for _ in range(cfg.steps):
            f = score(model, x_cur)
            d_f = surrogate_loss_grads(aux, p_hat, f, y_arr)[0]
            grad = d_f[:, None] * score_grad_input(model, x_cur) \
                - 2.0 * lam * (x_cur - x0)
            x_cur = np.clip(x_cur + cfg.step_size * grad, 0.0, 1.0)
            vals = _penalized_values(model, aux, p_hat, lam, x_cur, x0, y_arr)
            improved = vals > best_val
            if improved.any():
                best_val = np.where(improved, vals, best_val)
                best_x[improved] = x_cur[improved]
    return best_val, best_x


def robust_surrogate(model: ScoringModel, aux: AuxParams, p_hat: float,
                     lam: float, z, cfg: AttackConfig):
    """phi_lam at a single example; returns (value, adversarial example)."""
    x, y = z
    x0 = np.asarray(x, dtype=float).reshape(1, -1)
    vals, x_adv = attack_batch(model, aux, p_hat, lam, x0, int(y), cfg)
    return float(vals[0]), (x_adv[0], int(y))


def robust_surrogate_exact_1d(model: ScoringModel, aux: AuxParams, p_hat: float,
                              lam: float, z, grid_resolution: int = 100_001):
    """Exact 1-D maximizer over a dense grid plus the point itself."""
    if model.input_dim != 1:
        raise ValueError("exact oracle requires a 1-D model")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2")
    x, y = z
    x0 = float(np.asarray(x, dtype=float).reshape(-1)[0])
    cand = np.append(np.linspace(0.0, 1.0, grid_resolution), x0)
    g = surrogate_loss(aux, p_hat, score(model, cand[:, None]), int(y))
    obj = g - lam * (cand - x0) ** 2
    i = int(np.argmax(obj))
    return float(obj[i]), (np.array([cand[i]]), int(y))


def lagrangian_objective(lam: float, eps: float, phi_values) -> float:
    """lam * eps + mean(phi_values)."""
    if lam < 0.0 or eps < 0.0:
        raise ValueError("lam and eps must be >= 0")
    vals = np.asarray(phi_values, dtype=float)
    if vals.size == 0:
        raise ValueError("phi_values must be non-empty")
    return float(lam * eps + vals.mean())


@dataclass(frozen=True)
class DualCurve:
    best_lambda: float
    best_value: float
    curve: np.ndarray


def _exact_phi_dataset(model, aux, p_hat, lam, features, labels, grid_resolution):
    """Exact 1-D phi for every example, vectorized over the shared grid."""
    grid = np.linspace(0.0, 1.0, grid_resolution)
    g_grid = {
        y: surrogate_loss(aux, p_hat, score(model, grid[:, None]), y)
        for y in (0, 1)
    }
    x = features[:, 0]
    g_own = surrogate_loss(aux, p_hat, score(model, features), labels)
    out = np.empty(x.size)
    for y in (0, 1):
        mask = labels == y
        if not mask.any():
            continue
        cost = (x[mask, None] - grid[None, :]) ** 2
        out[mask] = np.maximum((g_grid[y][None, :] - lam * cost).max(axis=1),
                               g_own[mask])
    return out


def dual_curve(model: ScoringModel, aux: AuxParams, p_hat: float,
               dataset: Dataset, eps: float, lambda_grid, *,
               grid_resolution: int = 1001,
               attack: AttackConfig | None = None) -> DualCurve:
    """Evaluate lam*eps + mean(phi_lam) on a multiplier grid.

    The inner maximization is the exact grid oracle when d = 1, and the
    ascent solver otherwise.  The curve is convex in lam under the exact
    oracle (pointwise max of functions affine in lam).
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda_grid must be non-empty")
    if (np.diff(grid) < 0).any() or grid[0] < 0.0:
        raise ValueError("lambda_grid must be sorted ascending and >= 0")
    curve = np.empty(grid.size)
    for i, lam in enumerate(grid):
        if dataset.d == 1:
            phis = _exact_phi_dataset(model, aux, p_hat, float(lam),
                                      dataset.features, dataset.labels,
                                      grid_resolution)
        else:
            phis, _ = attack_batch(model, aux, p_hat, float(lam),
                                   dataset.features, dataset.labels,
                                   attack or AttackConfig())
        curve[i] = lagrangian_objective(float(lam), eps, phis)
    best = int(np.argmin(curve))
    return DualCurve(float(grid[best]), float(curve[best]), curve)


def _pareto_prune(costs, gains):
    """Indices of entries not dominated by a cheaper-or-equal, better-or-equal one."""
    order = np.lexsort((-gains, costs))
    g_sorted = gains[order]
    running = np.maximum.accumulate(g_sorted)
    keep = np.empty(order.size, dtype=bool)
    keep[0] = True
    keep[1:] = g_sorted[1:] > running[:-1]
    return order[keep]


def brute_force_worst_case(dataset: Dataset, eps: float, grid_resolution: int,
                           aux: AuxParams, p_hat: float, model: ScoringModel):
    """Worst mean loss over per-point grid destinations within the budget.

    Maximizes mean_i g(f(x_i'), y_i) subject to
    (1/n) * sum_i (x_i - x_i')^2 <= eps, each x_i' drawn from the grid or
    staying put.  Same-label moves only; exact up to grid resolution.
    Refuses n > 6 or d > 1, where enumeration stops being meaningful.
    """
    if dataset.n > 6 or dataset.d > 1:
        raise ValueError(
            f"brute force oracle limited to n <= 6, d = 1 "
            f"(got n={dataset.n}, d={dataset.d})"
        )
    if grid_resolution < 101:
        raise ValueError(f"grid_resolution must be >= 101, got {grid_resolution}")
    if eps < 0.0:
        raise ValueError("eps must be >= 0")

    budget = dataset.n * eps
    slack = 1e-12 * max(1.0, budget)  # float rounding in cost sums only
    grid = np.linspace(0.0, 1.0, grid_resolution)

    # Per-point Pareto frontiers: destinations sorted by cost with strictly
    # increasing gain.  The point's own position is always a candidate, so
    # every frontier starts with a zero-cost entry.
    frontiers = []
    for i in range(dataset.n):
        xi = float(dataset.features[i, 0])
        yi = int(dataset.labels[i])
        cand = np.append(grid, xi)
        cand_cost = (cand - xi) ** 2
        cand_gain = surrogate_loss(aux, p_hat, score(model, cand[:, None]), yi)
        feasible = cand_cost <= budget + slack
        cand, cand_cost, cand_gain = cand[feasible], cand_cost[feasible], cand_gain[feasible]
        keep = _pareto_prune(cand_cost, cand_gain)  # cost-ascending order
        frontiers.append((cand[keep], cand_cost[keep], cand_gain[keep]))

    # Merge small frontiers first so the budget and bound prunes act before
    # the large ones multiply in; undo the permutation at the end.
    order = sorted(range(dataset.n), key=lambda i: frontiers[i][0].size)
    frontiers = [frontiers[i] for i in order]
    stay_gain = np.array([g[0] for _, _, g in frontiers])
    stay_pos = np.array([float(dataset.features[i, 0]) for i in order])
    max_gain = np.array([g[-1] for _, _, g in frontiers])
    max_cost = np.array([c[-1] for _, c, g in frontiers])
    if max_cost.sum() <= budget + slack:
        # Every point can afford its best destination outright.
        best_pos = np.array([cand[-1] for cand, _, _ in frontiers])
        out = np.empty(dataset.n)
        out[order] = best_pos
        return float(max_gain.sum() / dataset.n), out

    suffix_stay = np.concatenate([np.cumsum(stay_gain[::-1])[::-1][1:], [0.0]])

    best_total = stay_gain.sum()  # all-stay is always feasible
    best_positions = stay_pos.copy()

    total_costs = np.zeros(1)
    total_gains = np.zeros(1)
    positions = np.zeros((1, 0))
    for i, (cand, cand_cost, cand_gain) in enumerate(frontiers):
        comb_cost = (total_costs[:, None] + cand_cost[None, :]).ravel()
        comb_gain = (total_gains[:, None] + cand_gain[None, :]).ravel()
        ok = np.flatnonzero(comb_cost <= budget + slack)
        comb_cost, comb_gain = comb_cost[ok], comb_gain[ok]
        keep = _pareto_prune(comb_cost, comb_gain)
        flat = ok[keep]
        rows, cols = np.divmod(flat, cand.size)
        positions = np.hstack([positions[rows], cand[cols, None]])
        total_costs, total_gains = comb_cost[keep], comb_gain[keep]
        rest = range(i + 1, dataset.n)
        if not rest:
            break

        # Feasible completions of the current best partial raise the
        # incumbent: all-stay, or one remaining point upgraded to the best
        # destination the leftover budget affords.
        lead = int(np.argmax(total_gains))
        lead_budget = budget + slack - total_costs[lead]
        base = float(total_gains[lead] + suffix_stay[i])
        if base > best_total:
            best_total = base
            best_positions = np.concatenate([positions[lead], stay_pos[i + 1:]])
        for k in rest:
            cand_k, cost_k, gain_k = frontiers[k]
            j = int(np.searchsorted(cost_k, lead_budget, side="right")) - 1
            upgraded = base - stay_gain[k] + gain_k[j]
            if upgraded > best_total:
                best_total = float(upgraded)
                tail = stay_pos[i + 1:].copy()
                tail[k - i - 1] = cand_k[j]
                best_positions = np.concatenate([positions[lead], tail])

        # Bound prune: even giving every remaining point the best gain its
        # own leftover budget affords, a dead entry cannot beat the
        # incumbent (which is tracked separately, so ties may drop).
        upper = total_gains.copy()
        entry_budget = budget + slack - total_costs
        for k in rest:
            _, cost_k, gain_k = frontiers[k]
            idx = np.searchsorted(cost_k, entry_budget, side="right") - 1
            upper += gain_k[idx]
        alive = upper > best_total
        if not alive.all():
            total_costs = total_costs[alive]
            total_gains = total_gains[alive]
            positions = positions[alive]
        if total_gains.size == 0:
            break

    if total_gains.size:
        best = int(np.argmax(total_gains))
        if total_gains[best] > best_total:
            best_total = float(total_gains[best])
            best_positions = positions[best]
    out = np.empty(dataset.n)
    out[order] = best_positions
    return float(best_total / dataset.n), out


@dataclass(frozen=True)
class BarycenterAttack:
    target: float
    cost: float
    bound: float


def barycenter_attack(x_pos: float, x_neg: float, n_pos: int, n_neg: int) -> BarycenterAttack:
    """Collapse both clusters onto their mass-weighted mean.

    Moving every point of the two collapsed clusters to
    target = p*x_pos + (1-p)*x_neg makes every positive tie every negative,
    so strict AUC becomes 0, at mean squared cost exactly
    p*(1-p)*(x_pos - x_neg)^2.
    """
    if not (0.0 <= x_pos <= 1.0 and 0.0 <= x_neg <= 1.0):
        raise ValueError("cluster positions must lie in [0, 1]")
    if n_pos < 1 or n_neg < 1:
        raise ValueError("counts must be >= 1")
    p = n_pos / (n_pos + n_neg)
    target = p * x_pos + (1.0 - p) * x_neg
    cost = p * (x_pos - target) ** 2 + (1.0 - p) * (x_neg - target) ** 2
    bound = p * (1.0 - p) * (x_pos - x_neg) ** 2
    return BarycenterAttack(float(target), float(cost), float(bound))


def min_cost_flip_search(x_pos: float, x_neg: float, n_pos: int, n_neg: int,
                         grid_resolution: int = 1001):
    """Cheapest way to drive strict AUC to 0 for two collapsed clusters,
    searching destination pairs (t_pos <= t_neg) on a grid.

    Returns (min_cost, t_pos, t_neg).  The continuum optimum collapses both
    clusters to one point, so the grid minimum matches the closed-form
    bound up to grid resolution.
    """
    p = n_pos / (n_pos + n_neg)
    grid = np.linspace(0.0, 1.0, grid_resolution)
    cost_pos = p * (x_pos - grid) ** 2
    cost_neg = (1.0 - p) * (x_neg - grid) ** 2
    # For each t_pos, the best feasible t_neg >= t_pos is the suffix minimum.
    suffix_min = np.minimum.accumulate(cost_neg[::-1])[::-1]
    suffix_arg = np.empty(grid.size, dtype=int)
    best = grid.size - 1
    for j in range(grid.size - 1, -1, -1):
        if cost_neg[j] <= cost_neg[best]:
            best = j
        suffix_arg[j] = best
    totals = cost_pos + suffix_min
    i = int(np.argmin(totals))
    j = int(suffix_arg[i])
    return float(totals[i]), float(grid[i]), float(grid[j])


def _calibrate_multiplier(model, aux, p_hat, x0, y, radius, cfg, lambda_max,
                          iters: int = 60):
    """Largest-damage multiplier whose mean realized cost stays <= radius.

    Bisection keeps the feasible side: the returned lam always satisfies
    the budget on this data.
    """
    def mean_cost(lam):
        _, x_adv = attack_batch(model, aux, p_hat, lam, x0, y, cfg)
        return float(((x_adv - x0) ** 2).sum(axis=1).mean()), x_adv

    cost0, adv0 = mean_cost(0.0)
    if cost0 <= radius:
        return 0.0, adv0
    cost_hi, adv_hi = mean_cost(lambda_max)
    if cost_hi > radius:
        return lambda_max, adv_hi
    lo, hi = 0.0, lambda_max
    adv = adv_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        cost_mid, adv_mid = mean_cost(mid)
        if cost_mid <= radius:
            hi, adv = mid, adv_mid
        else:
            lo = mid
    return hi, adv


def estimate_robust_auc(model: ScoringModel, dataset: Dataset, eps,
                        aux: AuxParams, cfg: AttackConfig | None = None, *,
                        lambda_max: float = 1e3,
                        tie_policy: str = "half") -> float:
    """Empirical lower-bound robust AUC under a transport budget.

    ``eps`` is a single budget, or an (eps_pos, eps_neg) pair for per-class
    budgets.  Each attacked class uses a multiplier calibrated by bisection
    so the mean realized cost stays within its radius; a zero radius leaves
    the class untouched, so eps = 0 reproduces the nominal AUC exactly.
    """
    if dataset.n_pos == 0 or dataset.n_neg == 0:
        raise ValueError("both classes must be present")
    cfg = cfg or AttackConfig()
    feats = dataset.features
    labels = dataset.labels
    adv = feats.copy()
    if isinstance(eps, (tuple, list)):
        eps_pos, eps_neg = float(eps[0]), float(eps[1])
        for y, radius in ((1, eps_pos), (0, eps_neg)):
            mask = labels == y
            if radius > 0.0:
                _, adv[mask] = _calibrate_multiplier(
                    model, aux, dataset.p_hat, feats[mask], y, radius, cfg,
                    lambda_max)
    else:
        radius = float(eps)
        if radius < 0.0:
            raise ValueError("eps must be >= 0")
        if radius > 0.0:
            _, adv = _calibrate_multiplier(
                model, aux, dataset.p_hat, feats, labels, radius, cfg,
                lambda_max)
    scores = score(model, adv)
    return auc_mann_whitney(scores[labels == 1], scores[labels == 0], tie_policy)
