"""Independent reference implementations used only by the tests."""

from fractions import Fraction

import numpy as np
from cvxopt import matrix, solvers


def hinge_qp(X, s, upper):
    """Weighted hinge primal as a QP, solved by cvxopt's interior point method.

    Variables z = [w (D), b, xi (N)]:
        min 1/2 (|w|^2 + b^2) + sum upper_i xi_i
        s.t. s_i (w.x_i + b) >= 1 - xi_i,  xi_i >= 0
    Returns (w_aug, objective).
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    m = d + 1
    P = np.zeros((m + n, m + n))
    P[:m, :m] = np.eye(m)
    q = np.concatenate([np.zeros(m), upper])
    Xa = np.hstack([X, np.ones((n, 1))])
    G = np.zeros((2 * n, m + n))
    G[:n, :m] = -(s[:, None] * Xa)
    G[:n, m:] = -np.eye(n)
    G[n:, m:] = -np.eye(n)
    h = np.concatenate([-np.ones(n), np.zeros(n)])
    solvers.options.update({"show_progress": False, "abstol": 1e-11, "reltol": 1e-11,
                            "feastol": 1e-11, "maxiters": 200})
    sol = solvers.qp(matrix(P), matrix(q), matrix(G), matrix(h))
    z = np.array(sol["x"]).ravel()
    w = z[:m]
    margins = s * (Xa @ w)
    obj = 0.5 * w @ w + np.sum(upper * np.maximum(0.0, 1.0 - margins))
    return w, float(obj)


def random_problem(rng):
    n = int(rng.integers(10, 201))
    d = int(rng.integers(1, 6))
    X = rng.standard_normal((n, d))
    true_w = rng.standard_normal(d)
    s = np.where(X @ true_w + 0.5 * rng.standard_normal(n) > 0, 1.0, -1.0)
    if np.all(s == s[0]):
        s[0] = -s[0]
    C = float(10.0 ** rng.uniform(-2, 1))
    wpos = float(rng.uniform(0.5, 3.0))
    upper = C * np.where(s > 0, wpos, 1.0)
    return X, s, upper


def probe_grid(d, points=2000, seed=123):
    return np.random.default_rng(seed).uniform(-3, 3, size=(points, d))


def definitional_scores(conf):
    """UAR, WAR, macro F1 straight from the definitions, in exact arithmetic.

    Rows are true classes, columns predictions. UAR averages recall over classes
    with at least one true instance, and so does macro F1 (with 0/0 := 0).
    """
    k = len(conf)
    total = sum(sum(r) for r in conf)
    recalls, f1s = [], []
    for c in range(k):
        tp = conf[c][c]
        true_c = sum(conf[c])
        pred_c = sum(conf[r][c] for r in range(k))
        if not true_c:
            continue
        recalls.append(Fraction(tp, true_c))
        # 2PR/(P+R) simplifies to 2tp/(true + predicted)
        f1s.append(Fraction(2 * tp, true_c + pred_c))
    uar = sum(recalls, Fraction(0)) / len(recalls)
    war = Fraction(sum(conf[c][c] for c in range(k)), total)
    f1 = sum(f1s, Fraction(0)) / len(f1s)
    return float(uar), float(war), float(f1)
