"""L2-regularised logistic regression, bagging and Wald coefficient tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DEFAULT_LAMBDA = 1e-3
DEFAULT_BAGS = 25
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 20_000


@dataclass
class Dataset:
    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    ids: tuple | None = None

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.X = np.asarray(self.X, dtype=np.float64).reshape(-1, len(self.feature_names))
        self.y = np.asarray(self.y, dtype=np.int64).ravel()
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError(f"{self.X.shape[0]} rows but {self.y.shape[0]} labels")
        if not np.isfinite(self.X).all():
            raise ValueError("feature matrix contains non-finite values")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self):
        return len(self.y)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        ids = tuple(self.ids[i] for i in idx) if self.ids is not None else None
        return Dataset(self.feature_names, self.X[idx], self.y[idx], ids)

    def select(self, names: Sequence[str]) -> "Dataset":
        cols = [self.feature_names.index(n) for n in names]
        return Dataset(tuple(names), self.X[:, cols], self.y, self.ids)


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        live = self.std > 0
        out = np.zeros_like(X)
        out[:, live] = (X[:, live] - self.mean[live]) / self.std[live]
        return out


def fit_standardization(X: np.ndarray) -> Standardization:
    X = np.asarray(X, dtype=np.float64)
    if not np.isfinite(X).all():
        raise ValueError("cannot standardise non-finite values")
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population convention
    # constant columns up to rounding noise
    std = np.where(std <= 1e-12 * np.maximum(1.0, np.abs(mean)), 0.0, std)
    return Standardization(mean, std)


def standardize(d: Dataset) -> tuple[Dataset, Standardization]:
    if len(d) < 2:
        raise ValueError("standardisation needs at least 2 examples")
    params = fit_standardization(d.X)
    return Dataset(d.feature_names, params.apply(d.X), d.y, d.ids), params


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def logistic_loss(theta: np.ndarray, Z: np.ndarray, y: np.ndarray, lam: float) -> float:
    """Mean log loss plus (lam/2)|w|^2; theta = (intercept, w...)."""
    z = theta[0] + Z @ theta[1:]
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * theta[1:] @ theta[1:])


def logistic_grad(theta: np.ndarray, Z: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    r = sigmoid(theta[0] + Z @ theta[1:]) - y
    g = np.empty_like(theta)
    g[0] = r.mean()
    g[1:] = Z.T @ r / len(y) + lam * theta[1:]
    return g


def _descend(Z, y, lam, tol, max_iter, theta0=None):
    """Gradient descent with Barzilai-Borwein trial steps and Armijo
    backtracking; every accepted step decreases the loss."""
    theta = np.zeros(Z.shape[1] + 1) if theta0 is None else theta0.copy()
    f = logistic_loss(theta, Z, y, lam)
    g = logistic_grad(theta, Z, y, lam)
    history = [f]
    step = 1.0
    it = 0
    converged = False
    while it < max_iter:
        if np.max(np.abs(g)) < tol:
            converged = True
            break
        gg = g @ g
        while True:
            cand = theta - step * g
            fc = logistic_loss(cand, Z, y, lam)
            if fc <= f - 1e-4 * step * gg:
                break
            step *= 0.5
            if step < 1e-20:
                return theta, f, it, False, history
        gc = logistic_grad(cand, Z, y, lam)
        s, dg = cand - theta, gc - g
        sy = s @ dg
        theta, f, g = cand, fc, gc
        history.append(f)
        it += 1
        step = (s @ s) / sy if sy > 0 else step * 2.0
    else:
        converged = bool(np.max(np.abs(g)) < tol)
    return theta, f, it, converged, history


@dataclass
class LogisticModel:
    feature_names: tuple[str, ...]
    weights: np.ndarray
    intercept: float
    lam: float
    scaler: Standardization
    iterations: int = 0
    loss: float = float("nan")
    converged: bool = True
    loss_history: list = field(default_factory=list, repr=False)

    def decision(self, X) -> np.ndarray:
        return self.intercept + self.scaler.apply(np.atleast_2d(X)) @ self.weights

    def proba(self, X) -> np.ndarray:
        return sigmoid(self.decision(X))

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "weights": self.weights.tolist(),
            "intercept": float(self.intercept),
            "lambda": self.lam,
            "mean": self.scaler.mean.tolist(),
            "std": self.scaler.std.tolist(),
            "iterations": self.iterations,
            "loss": self.loss,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(
            tuple(d["feature_names"]),
            np.array(d["weights"], dtype=np.float64),
            float(d["intercept"]),
            float(d["lambda"]),
            Standardization(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64)),
            d.get("iterations", 0),
            d.get("loss", float("nan")),
            d.get("converged", True),
        )


def train_logistic(
    d: Dataset, lam: float = DEFAULT_LAMBDA, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> LogisticModel:
    """Fit on standardised features; the intercept is not penalised."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    classes = np.unique(d.y)
    if len(classes) < 2:
        raise ValueError(
            f"training data has a single class ({int(classes[0]) if len(classes) else 'none'}); "
            "try a lower importance threshold or a longer horizon"
        )
    scaler = fit_standardization(d.X)
    Z = scaler.apply(d.X)
    theta, f, it, converged, history = _descend(Z, d.y.astype(np.float64), lam, tol, max_iter)
    return LogisticModel(d.feature_names, theta[1:], float(theta[0]), lam, scaler, it, f, converged, history)


@dataclass
class BaggedModel:
    members: list[LogisticModel]
    seed: int | None = None

    @property
    def bags(self) -> int:
        return len(self.members)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.members[0].feature_names

    def proba(self, X) -> np.ndarray:
        return np.mean([m.proba(X) for m in self.members], axis=0)

    def to_dict(self) -> dict:
        return {"bags": self.bags, "seed": self.seed, "members": [m.to_dict() for m in self.members]}

    @classmethod
    def from_dict(cls, d: dict) -> "BaggedModel":
        return cls([LogisticModel.from_dict(m) for m in d["members"]], d.get("seed"))


def bagging_train(
    d: Dataset,
    bags: int = DEFAULT_BAGS,
    lam: float = DEFAULT_LAMBDA,
    seed: int = 0,
    bootstrap: bool = True,
    max_retries: int = 100,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> BaggedModel:
    """Train ``bags`` models on same-size bootstrap resamples.

    Single-class resamples are redrawn, at most ``max_retries`` times each.
    """
    if bags < 1:
        raise ValueError("need at least one bag")
    rng = np.random.default_rng(seed)
    n = len(d)
    members = []
    for _ in range(bags):
        if not bootstrap:
            members.append(train_logistic(d, lam, tol, max_iter))
            continue
        for _attempt in range(max_retries + 1):
            idx = rng.integers(0, n, size=n)
            if 0 < d.y[idx].sum() < n:
                break
        else:
            raise RuntimeError(f"no two-class bootstrap sample after {max_retries} retries")
        members.append(train_logistic(d.subset(idx), lam, tol, max_iter))
    return BaggedModel(members, seed)


def _rows(model, x):
    names = model.feature_names
    if isinstance(x, Dataset):
        given = x.feature_names
        if given != names:
            if set(given) != set(names):
                _name_error(names, given)
            x = x.select(names)
        return x.X, False
    if isinstance(x, Mapping):
        if set(x) != set(names):
            _name_error(names, tuple(x))
        return np.array([[float(x[n]) for n in names]]), True
    raise TypeError("expected a feature mapping or a Dataset")


def _name_error(expected, given):
    missing = sorted(set(expected) - set(given))
    extra = sorted(set(given) - set(expected))
    raise ValueError(f"feature mismatch: missing {missing}, unexpected {extra}")


def predict_proba(model: LogisticModel | BaggedModel, x):
    """Probability of the positive (important) class.

    ``x`` is a name -> value mapping (returns a float) or a Dataset (returns
    an array). For a bagged model this is the plain mean of member outputs.
    """
    X, single = _rows(model, x)
    p = model.proba(X)
    return float(p[0]) if single else p


@dataclass(frozen=True)
class WaldResult:
    z: float | None
    p_value: float | None
    stars: str
    note: str = ""


def significance_stars(p: float | None) -> str:
    if p is None:
        return ""
    for cut, mark in ((0.001, "****"), (0.01, "***"), (0.05, "**"), (0.1, "*")):
        if p < cut:
            return mark
    return ""


def wald_test(model: LogisticModel, d: Dataset) -> dict[str, WaldResult]:
    """Per-coefficient Wald z and two-sided normal p-values.

    Standard errors come from the inverse observed information of the
    unpenalised log-likelihood at the fitted (standardised) coefficients.
    """
    X, _ = _rows(model, d)
    Z = model.scaler.apply(X)
    p = sigmoid(model.intercept + Z @ model.weights)
    wgt = p * (1.0 - p)
    names = model.feature_names
    out: dict[str, WaldResult] = {}
    live = [k for k in range(len(names)) if np.any(Z[:, k] != 0.0)]
    for k in range(len(names)):
        if k not in live:
            out[names[k]] = WaldResult(None, None, "", "constant feature; information singular")
    D = np.column_stack([np.ones(len(Z)), Z[:, live]])
    info = D.T @ (D * wgt[:, None])
    try:
        if np.linalg.cond(info) > 1e14:
            raise np.linalg.LinAlgError("ill-conditioned")
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        for k in live:
            out[names[k]] = WaldResult(None, None, "", "information matrix singular")
        return {n: out[n] for n in names}
    for pos, k in enumerate(live, start=1):
        se = math.sqrt(cov[pos, pos]) if cov[pos, pos] > 0 else float("nan")
        if not se > 0:
            out[names[k]] = WaldResult(None, None, "", "non-positive variance")
            continue
        z = float(model.weights[k] / se)
        pval = math.erfc(abs(z) / math.sqrt(2.0))
        out[names[k]] = WaldResult(z, pval, significance_stars(pval))
    return {n: out[n] for n in names}


def wald_report(d: Dataset, lam: float = DEFAULT_LAMBDA, mode: str = "joint", **fit) -> dict[str, WaldResult]:
    """Wald table from one joint model or from one model per feature."""
    if mode == "joint":
        return wald_test(train_logistic(d, lam, **fit), d)
    if mode == "univariate":
        out = {}
        for name in d.feature_names:
            sub = d.select([name])
            out[name] = wald_test(train_logistic(sub, lam, **fit), sub)[name]
        return out
    raise ValueError(f"unknown Wald mode {mode!r}")


def stratified_split(y: np.ndarray, test_fraction: float = 0.3, seed: int = 0):
    """Index arrays (train, test), splitting each class at ``test_fraction``."""
    if not 0 < test_fraction < 1:
        raise ValueError("test fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    y = np.asarray(y)
    train, test = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        k = int(round(len(idx) * test_fraction))
        if len(idx) >= 2:
            k = min(max(k, 1), len(idx) - 1)
        test.extend(idx[:k].tolist())
        train.extend(idx[k:].tolist())
    return np.sort(np.array(train, dtype=np.int64)), np.sort(np.array(test, dtype=np.int64))
