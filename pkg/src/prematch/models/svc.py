"""Soft-margin SVC with a polynomial kernel, trained by SMO.

Pair selection follows the maximal-violating-pair rule: the working pair is
the one that most violates the KKT conditions, and training stops when the
violation gap falls within tolerance or the update budget runs out.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.special import expit


def polynomial_kernel(A: np.ndarray, B: np.ndarray, gamma: float, coef0: float, degree: int) -> np.ndarray:
    return (gamma * (A @ B.T) + coef0) ** degree


def scale_gamma(X: np.ndarray) -> float:
    """1 / (n_features * mean per-column variance); 1.0 for constant inputs."""
    mean_var = float(X.var(axis=0).mean())
    if mean_var <= 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * mean_var)


def _snap(a: float, C: float) -> float:
    # keep multipliers exactly on the box bounds so float slivers never
    # leave a phantom violating pair with no room to move
    if a < 1e-10:
        return 0.0
    if a > C - 1e-10:
        return C
    return a


class SvcModel:
    def __init__(self, spec, support_X, support_coef, intercept, gamma, converged, n_iter, seed):
        self.spec = spec
        self._support_X = support_X
        self._support_coef = support_coef  # alpha_i * y_i for each support vector
        self.intercept_ = intercept
        self.gamma_ = gamma
        self.converged_ = converged
        self.n_iter_ = n_iter
        self.seed = seed
        self.n_features_in_ = support_X.shape[1]

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        K = polynomial_kernel(X, self._support_X, self.gamma_, self.spec.coef0, self.spec.degree)
        return K @ self._support_coef + self.intercept_

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        from prematch.models.base import check_predict_input

        X, squeeze = check_predict_input(X, self.n_features_in_)
        proba = expit(self.decision_function(X))
        return float(proba[0]) if squeeze else proba

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        return (np.asarray(proba) >= 0.5).astype(int)


def fit_svc(spec, X: np.ndarray, y: np.ndarray, seed: int) -> SvcModel:
    """Solve the dual problem for labels mapped to {-1, +1}.

    Keeps 0 <= alpha_i <= C throughout; convergence when the largest KKT
    violation pair satisfies b_low - b_up <= 2 * tol. Hitting the update cap
    returns the best-so-far machine with ``converged_ = False``.
    """
    if spec.kernel != "poly":
        raise ValueError(f"only the polynomial kernel is implemented, got {spec.kernel!r}")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y01 = np.asarray(y, dtype=np.float64)
    y_pm = np.where(y01 > 0.5, 1.0, -1.0)
    n = X.shape[0]
    gamma = spec.gamma if isinstance(spec.gamma, (int, float)) else scale_gamma(X)
    K = polynomial_kernel(X, X, gamma, spec.coef0, spec.degree)
    C = spec.C
    tol = spec.tol

    alpha = np.zeros(n)
    F = -y_pm.copy()  # F_i = (sum_j alpha_j y_j K_ij) - y_i, bias excluded
    diag = np.diag(K).copy()
    y_pos = y_pm > 0

    def membership(idx: int) -> tuple[bool, bool]:
        a = alpha[idx]
        if y_pos[idx]:
            return a < C, a > 0.0
        return a > 0.0, a < C

    up = np.where(y_pos, alpha < C, alpha > 0.0)
    low = np.where(y_pos, alpha > 0.0, alpha < C)

    n_iter = 0
    converged = False
    while n_iter < spec.max_iter:
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmin(np.where(up, F, np.inf)))
        max_gap = float(np.max(np.where(low, F, -np.inf))) - F[i]
        if max_gap <= 2.0 * tol:
            converged = True
            break
        # second-order choice of j: maximize gap^2 / eta among violators
        diff = F - F[i]
        eta_row = diag[i] + diag - 2.0 * K[i]
        usable = low & (diff > 2.0 * tol) & (eta_row > 1e-12)
        usable[i] = False
        if not usable.any():
            break
        score = np.where(usable, diff * diff / np.where(eta_row > 1e-12, eta_row, 1.0), -np.inf)
        j = int(np.argmax(score))
        eta = eta_row[j]

        if y_pm[i] != y_pm[j]:
            L = max(0.0, alpha[j] - alpha[i])
            H = min(C, C + alpha[j] - alpha[i])
        else:
            L = max(0.0, alpha[i] + alpha[j] - C)
            H = min(C, alpha[i] + alpha[j])
        new_aj = alpha[j] + y_pm[j] * (F[i] - F[j]) / eta
        new_aj = _snap(min(H, max(L, new_aj)), C)
        delta_j = new_aj - alpha[j]
        if abs(delta_j) < 1e-14:
            break
        new_ai = alpha[i] + y_pm[i] * y_pm[j] * (alpha[j] - new_aj)
        new_ai = _snap(min(C, max(0.0, new_ai)), C)
        delta_i = new_ai - alpha[i]
        alpha[i] = new_ai
        alpha[j] = new_aj
        F += (delta_i * y_pm[i]) * K[i]
        F += (delta_j * y_pm[j]) * K[j]
        up[i], low[i] = membership(i)
        up[j], low[j] = membership(j)
        n_iter += 1
    candidates = []
    if up.any():
        candidates.append(float(np.min(np.where(up, F, np.inf))))
    if low.any():
        candidates.append(float(np.max(np.where(low, F, -np.inf))))
    intercept = -sum(candidates) / len(candidates) if candidates else 0.0

    if not converged:
        warnings.warn(
            f"SMO stopped at the {spec.max_iter}-update cap before reaching tol={tol}",
            stacklevel=3,
        )

    support = alpha > 1e-12
    if not support.any():
        support = np.zeros(n, dtype=bool)
        support[0] = True
    model = SvcModel(
        spec,
        support_X=X[support],
        support_coef=(alpha * y_pm)[support],
        intercept=intercept,
        gamma=gamma,
        converged=converged,
        n_iter=n_iter,
        seed=seed,
    )
    model.alphas_ = alpha[support]
    return model
