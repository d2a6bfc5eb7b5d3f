"""Binary logistic regression by damped Newton (IRLS) with Wald diagnostics.

Coefficients are on the raw predictor scale; nothing is standardized before
fitting. The reported deviance is always the unpenalized -2 log-likelihood,
and ``aic = deviance + 2 * n_params``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from chatdom.errors import ColumnMismatchError, InputError, ModelingError, RankDeficientError, SingleClassError

INTERCEPT = "Intercept"
P_CLAMP = 1e-12
STAR_LEVELS = ((0.0001, "***"), (0.001, "**"), (0.05, "*"))


# ---------------------------------------------------------------------------
# design


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    columns: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        cols = tuple(self.columns)
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        n, p = X.shape
        if len(cols) != p:
            raise ValueError(f"{len(cols)} column names for {p} columns")
        if len(set(cols)) != p:
            dup = sorted({c for c in cols if cols.count(c) > 1})
            raise ValueError(f"duplicate column names: {', '.join(dup)}")
        if p == 0 or cols[0] != INTERCEPT or not np.all(X[:, 0] == 1.0):
            raise ValueError(f"first column must be an all-ones {INTERCEPT!r} column")
        if y.shape != (n,):
            raise ValueError(f"response has shape {y.shape}, expected ({n},)")
        if not np.all(np.isfinite(X)):
            bad = [cols[j] for j in range(p) if not np.all(np.isfinite(X[:, j]))]
            raise ValueError(f"non-finite values in column(s): {', '.join(bad)}")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("response must be 0/1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_params(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_columns(cls, predictors: Mapping[str, Sequence[float]], response: Sequence[int]) -> "DesignMatrix":
        """Build from named predictor columns; the intercept is prepended."""
        if INTERCEPT in predictors:
            raise ValueError(f"{INTERCEPT!r} is added automatically")
        n = len(response)
        cols = [np.ones(n)]
        for name, values in predictors.items():
            v = np.asarray(values, dtype=float)
            if v.shape != (n,):
                raise ValueError(f"column {name!r} has {v.size} values, response has {n}")
            cols.append(v)
        return cls((INTERCEPT, *predictors), np.column_stack(cols), np.asarray(response))

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, float]], columns: Sequence[str],
                  response: Sequence[int]) -> "DesignMatrix":
        columns = [c for c in columns if c != INTERCEPT]
        data = {c: [float(r[c]) for r in rows] for c in columns}
        return cls.from_columns(data, response)


@dataclass(frozen=True)
class FitOptions:
    tol: float = 1e-8
    max_iter: int = 100
    beta_bound: float = 30.0
    ridge: float = 0.0  # L2 penalty on non-intercept coefficients

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1 or self.beta_bound <= 0 or self.ridge < 0:
            raise ValueError(f"invalid fit options: {self}")


# ---------------------------------------------------------------------------
# likelihood pieces


def sigmoid(eta):
    eta = np.asarray(eta, dtype=float)
    return np.exp(-np.logaddexp(0.0, -eta))


def log_likelihood(beta, X, y) -> float:
    """Bernoulli log-likelihood with logistic link (unclamped, exact)."""
    eta = np.asarray(X, dtype=float) @ np.asarray(beta, dtype=float)
    return float(np.sum(np.asarray(y) * eta - np.logaddexp(0.0, eta)))


def score(beta, X, y) -> np.ndarray:
    """Gradient of :func:`log_likelihood`: X'(y - p)."""
    X = np.asarray(X, dtype=float)
    return X.T @ (np.asarray(y, dtype=float) - sigmoid(X @ np.asarray(beta, dtype=float)))


def information(beta, X) -> np.ndarray:
    """Observed (= expected, for the canonical link) information X'WX."""
    X = np.asarray(X, dtype=float)
    p = sigmoid(X @ np.asarray(beta, dtype=float))
    w = p * (1.0 - p)
    return X.T @ (w[:, None] * X)


def binomial_deviance(y, p) -> float:
    p = np.clip(np.asarray(p, dtype=float), P_CLAMP, 1.0 - P_CLAMP)
    y = np.asarray(y, dtype=float)
    return float(-2.0 * np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def chi2_sf_1df(x: float) -> float:
    """Upper tail of chi-square with one degree of freedom."""
    return math.erfc(math.sqrt(max(x, 0.0) / 2.0))


def significance_stars(chisq: float) -> str:
    p = chi2_sf_1df(chisq)
    for level, stars in STAR_LEVELS:
        if p < level:
            return stars
    return ""


def separating_direction(X: np.ndarray, y: np.ndarray, tol: float = 1e-7) -> np.ndarray | None:
    """Direction d with (2y-1) * Xd >= 0 for all rows and > 0 for some, if one exists.

    Such a d means the data are completely or quasi-completely separated and
    the likelihood keeps rising along it. Solved as a box-bounded LP on
    max-abs scaled columns.
    """
    from scipy.optimize import linprog

    X = np.asarray(X, dtype=float)
    scale = np.max(np.abs(X), axis=0)
    scale[scale == 0] = 1.0
    A = (2.0 * np.asarray(y, dtype=float) - 1.0)[:, None] * (X / scale)
    res = linprog(-A.sum(axis=0), A_ub=-A, b_ub=np.zeros(len(A)), bounds=[(-1.0, 1.0)] * X.shape[1],
                  method="highs")
    if res.status != 0 or -res.fun <= tol * len(A):
        return None
    d = res.x / scale
    return np.where(np.abs(res.x) > tol, d, 0.0)


def collinear_columns(X: np.ndarray, columns: Sequence[str], rtol: float = 1e-10) -> list[str]:
    """Columns that are (numerically) linear combinations of the columns before them."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=0)
    scaled = X / np.where(norms > 0, norms, 1.0)
    bad = []
    kept: list[int] = []
    for j in range(X.shape[1]):
        if norms[j] == 0:
            bad.append(columns[j])
            continue
        cand = scaled[:, kept + [j]]
        s = np.linalg.svd(cand, compute_uv=False)
        if s[-1] <= rtol * s[0] * max(cand.shape):
            bad.append(columns[j])
        else:
            kept.append(j)
    return bad


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class LogitModel:
    columns: tuple[str, ...]
    coef: tuple[float, ...]
    standard_error: tuple[float, ...]
    residual_deviance: float
    converged: bool = True
    iterations: int = 0
    n_obs: int | None = None
    separation: bool = False
    separated_columns: tuple[str, ...] = ()
    max_abs_score: float | None = None
    ridge: float = 0.0
    source: str = "fit"
    message: str = ""
    wald_chisq: tuple[float, ...] = field(init=False)
    n_params: int = field(init=False)
    aic: float = field(init=False)

    def __post_init__(self):
        cols = tuple(self.columns)
        coef = tuple(float(b) for b in self.coef)
        se = tuple(float(s) for s in self.standard_error)
        if not cols or cols[0] != INTERCEPT:
            raise ValueError(f"first model column must be {INTERCEPT!r}")
        if not (len(cols) == len(coef) == len(se)):
            raise ValueError("columns, coefficients and standard errors differ in length")
        if any(not (s > 0) for s in se):
            raise ValueError("standard errors must be positive")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "standard_error", se)
        object.__setattr__(self, "separated_columns", tuple(self.separated_columns))
        object.__setattr__(self, "wald_chisq", tuple((b / s) ** 2 for b, s in zip(coef, se)))
        object.__setattr__(self, "n_params", len(cols))
        object.__setattr__(self, "aic", aic_from(self.residual_deviance, len(cols)))

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.columns, self.coef))

    @property
    def predictors(self) -> tuple[str, ...]:
        return self.columns[1:]

    def p_values(self) -> tuple[float, ...]:
        return tuple(chi2_sf_1df(w) for w in self.wald_chisq)

    def stars(self) -> tuple[str, ...]:
        return tuple(significance_stars(w) for w in self.wald_chisq)

    def wald_interval(self, z: float = 1.959963984540054) -> list[tuple[float, float]]:
        return [(b - z * s, b + z * s) for b, s in zip(self.coef, self.standard_error)]

    def table(self) -> list[dict]:
        """Rows of parameter, estimate, SE, chi-square, p-value, stars."""
        return [
            {"parameter": c, "estimate": b, "std_error": s, "chi_square": w, "p_value": p, "stars": st}
            for c, b, s, w, p, st in zip(self.columns, self.coef, self.standard_error,
                                         self.wald_chisq, self.p_values(), self.stars())
        ]

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "coefficients": list(self.coef),
            "standard_errors": list(self.standard_error),
            "wald_chisq": list(self.wald_chisq),
            "residual_deviance": self.residual_deviance,
            "aic": self.aic,
            "n_params": self.n_params,
            "n_obs": self.n_obs,
            "converged": self.converged,
            "iterations": self.iterations,
            "separation": self.separation,
            "separated_columns": list(self.separated_columns),
            "max_abs_score": self.max_abs_score,
            "ridge": self.ridge,
            "source": self.source,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LogitModel":
        try:
            model = cls(
                columns=tuple(data["columns"]),
                coef=tuple(data["coefficients"]),
                standard_error=tuple(data["standard_errors"]),
                residual_deviance=float(data["residual_deviance"]),
                converged=bool(data.get("converged", True)),
                iterations=int(data.get("iterations", 0)),
                n_obs=data.get("n_obs"),
                separation=bool(data.get("separation", False)),
                separated_columns=tuple(data.get("separated_columns", ())),
                max_abs_score=data.get("max_abs_score"),
                ridge=float(data.get("ridge", 0.0)),
                source=str(data.get("source", "fit")),
                message=str(data.get("message", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid model document: {exc}") from None
        if "aic" in data and abs(float(data["aic"]) - model.aic) > 1e-6 * max(1.0, abs(model.aic)):
            raise InputError(f"model AIC {data['aic']} disagrees with deviance + 2k = {model.aic}")
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LogitModel":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"model file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)


def aic_from(residual_deviance: float, n_params: int) -> float:
    return float(residual_deviance) + 2 * int(n_params)


def aic(model: LogitModel) -> float:
    return aic_from(model.residual_deviance, model.n_params)


# ---------------------------------------------------------------------------
# fitting


@dataclass
class _NewtonResult:
    beta: np.ndarray  # (B, k)
    ll: np.ndarray  # penalized log-likelihood, (B,)
    grad: np.ndarray  # penalized score, (B, k)
    iterations: np.ndarray
    converged: np.ndarray
    separation: np.ndarray  # stopped by the coefficient bound


def _weighted_ll(X, y, w, beta, penalty):
    eta = np.einsum("bnk,bk->bn", X, beta)
    ll = np.einsum("bn,bn->b", w, y * eta - np.logaddexp(0.0, eta)) - 0.5 * np.einsum("k,bk->b", penalty, beta**2)
    return eta, ll


def _gradient(X, y, w, eta, beta, penalty):
    return np.einsum("bnk,bn->bk", X, w * (y - sigmoid(eta))) - penalty * beta


def _solve_batch(H, g):
    try:
        return np.linalg.solve(H, g[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("bkl,bl->bk", np.linalg.pinv(H), g)


def _newton(X, y, w, beta, penalty, options: FitOptions) -> _NewtonResult:
    """Damped Newton on a stack of B designs sharing n rows and k columns.

    Every design takes full Newton steps, halved until the penalized
    log-likelihood does not drop. A design leaves the active set once
    max |gradient| <= tol, or when a coefficient passes ``beta_bound``
    while the likelihood is still improving.
    """
    B, _, k = X.shape
    beta = beta.copy()
    eta, ll = _weighted_ll(X, y, w, beta, penalty)
    grad = _gradient(X, y, w, eta, beta, penalty)
    iterations = np.zeros(B, dtype=int)
    converged = np.zeros(B, dtype=bool)
    separation = np.zeros(B, dtype=bool)
    active = np.arange(B)
    ridge = np.diag(penalty)

    for _ in range(options.max_iter):
        done = np.max(np.abs(grad[active]), axis=1) <= options.tol
        converged[active[done]] = True
        active = active[~done]
        if not active.size:
            break
        Xa, ya, wa, ba, la = X[active], y[active], w[active], beta[active], ll[active]
        p = sigmoid(eta[active])
        H = np.einsum("bnk,bn,bnl->bkl", Xa, wa * p * (1.0 - p), Xa) + ridge
        step = _solve_batch(H, grad[active])
        slack = 1e-12 * (1.0 + np.abs(la))
        t = np.ones(len(active))
        cand = ba + step
        cand_eta, cand_ll = _weighted_ll(Xa, ya, wa, cand, penalty)
        retry = np.flatnonzero(cand_ll < la - slack)
        while retry.size:
            t[retry] *= 0.5
            sub = ba[retry] + t[retry, None] * step[retry]
            e, l = _weighted_ll(Xa[retry], ya[retry], wa[retry], sub, penalty)
            cand[retry], cand_eta[retry], cand_ll[retry] = sub, e, l
            retry = retry[(l < la[retry] - slack[retry]) & (t[retry] >= 1e-10)]
        improved = cand_ll > la
        beta[active], eta[active], ll[active] = cand, cand_eta, cand_ll
        grad[active] = _gradient(Xa, ya, wa, cand_eta, cand, penalty)
        iterations[active] += 1
        stop = (np.any(np.abs(cand) > options.beta_bound, axis=1) & improved
                & (np.max(np.abs(grad[active]), axis=1) > options.tol))
        separation[active[stop]] = True
        active = active[~stop]
    else:
        converged[active] = np.max(np.abs(grad[active]), axis=1) <= options.tol
    return _NewtonResult(beta, ll, grad, iterations, converged, separation)


def _penalty(k: int, ridge: float) -> np.ndarray:
    penalty = np.full(k, float(ridge))
    penalty[0] = 0.0
    return penalty


def _covariance(X, w, beta, penalty) -> np.ndarray:
    p = sigmoid(np.einsum("bnk,bk->bn", X, beta))
    H = np.einsum("bnk,bn,bnl->bkl", X, w * p * (1.0 - p), X) + np.diag(penalty)
    try:
        return np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return np.linalg.pinv(H)


def _standard_errors(cov) -> np.ndarray:
    return np.sqrt(np.clip(np.diagonal(cov, axis1=-2, axis2=-1), np.finfo(float).tiny, None))


def fit(design: DesignMatrix, options: FitOptions = FitOptions()) -> LogitModel:
    """Maximum-likelihood logistic fit.

    Newton steps with step-halving whenever the (penalized) log-likelihood
    would drop. Converged means max |X'(y - p)| <= ``options.tol``. If some
    |beta| exceeds ``options.beta_bound`` while the likelihood is still
    improving, the fit stops and is returned flagged for separation.
    """
    X, y = design.X, design.y
    n, k = X.shape
    positives = int(y.sum())
    if positives == 0 or positives == n:
        raise SingleClassError(f"response has a single class ({positives} of {n} positive)")
    if n <= k:
        raise ModelingError(f"need more observations ({n}) than parameters ({k})")
    bad = collinear_columns(X, design.columns)
    if bad:
        raise RankDeficientError(bad)

    penalty = _penalty(k, options.ridge)
    w = np.ones((1, n))
    beta0 = np.zeros((1, k))
    beta0[0, 0] = math.log(positives / (n - positives))
    res = _newton(X[None], y[None], w, beta0, penalty, options)
    beta = res.beta[0]
    separation = bool(res.separation[0])
    converged = bool(res.converged[0])
    message = ""
    if separation:
        message = (f"|coefficient| exceeded {options.beta_bound} while the likelihood was still improving; "
                   "the data appear (quasi-)separated and the MLE may not exist")
    elif not converged:
        message = f"no convergence in {options.max_iter} iterations"

    if not separation and not options.ridge:
        p_hat = sigmoid(X @ beta)
        extreme = np.min(np.minimum(p_hat, 1.0 - p_hat)) < 1e-6
        if extreme or np.any(np.abs(beta) > options.beta_bound):
            d = separating_direction(X, y)
            if d is not None:
                separation = True
                sep = tuple(c for c, v in zip(design.columns, d) if v != 0.0)
                message = ("data are (quasi-)separated along " + ", ".join(sep) +
                           "; the MLE does not exist and the reported coefficients are not estimates")

    se = _standard_errors(_covariance(X[None], w, res.beta, penalty))[0]
    sep_cols = ()
    if separation:
        sep_cols = tuple(c for c, b in zip(design.columns, beta) if abs(b) > options.beta_bound)
        if not sep_cols:
            d = separating_direction(X, y)
            sep_cols = tuple(c for c, v in zip(design.columns, d) if v != 0.0) if d is not None else ()
    return LogitModel(
        columns=design.columns,
        coef=tuple(beta),
        standard_error=tuple(se),
        residual_deviance=binomial_deviance(y, sigmoid(X @ beta)),
        converged=converged and not separation,
        iterations=int(res.iterations[0]),
        n_obs=n,
        separation=separation,
        separated_columns=sep_cols,
        max_abs_score=float(np.max(np.abs(score(beta, X, y)))),
        ridge=options.ridge,
        message=message,
    )


@dataclass(frozen=True, eq=False)
class BatchFit:
    """Fits of one column layout to many datasets; arrays are indexed by dataset."""

    columns: tuple[str, ...]
    coef: np.ndarray  # (B, k)
    standard_error: np.ndarray  # (B, k)
    residual_deviance: np.ndarray
    converged: np.ndarray
    separation: np.ndarray
    iterations: np.ndarray
    max_abs_score: np.ndarray  # unpenalized, max |X'W(y - p)|

    def __len__(self) -> int:
        return len(self.coef)

    @property
    def wald_chisq(self) -> np.ndarray:
        return (self.coef / self.standard_error) ** 2

    @property
    def aic(self) -> np.ndarray:
        return self.residual_deviance + 2 * len(self.columns)

    def model(self, i: int) -> LogitModel:
        return LogitModel(
            columns=self.columns, coef=tuple(self.coef[i]), standard_error=tuple(self.standard_error[i]),
            residual_deviance=float(self.residual_deviance[i]), converged=bool(self.converged[i]),
            iterations=int(self.iterations[i]), separation=bool(self.separation[i]),
            max_abs_score=float(self.max_abs_score[i]), source="fit_batch",
        )


def fit_batch(X, y, columns: Sequence[str], weights=None, options: FitOptions = FitOptions()) -> BatchFit:
    """Fit the same model to B datasets at once.

    ``X`` is (B, n, k) with an all-ones first column, ``y`` is (B, n) of 0/1
    and ``weights`` (B, n) are non-negative frequency weights, so grouped
    data such as a 2x2 table can be passed as four weighted rows. Pad
    datasets of different sizes with zero-weight rows. Uses the same Newton
    iteration as :func:`fit`; designs that stop at extreme fitted
    probabilities are re-checked for separation one at a time.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    columns = tuple(columns)
    if X.ndim != 3 or y.shape != X.shape[:2]:
        raise ValueError("X must be (B, n, k) and y (B, n)")
    B, n, k = X.shape
    if len(columns) != k or columns[0] != INTERCEPT:
        raise ValueError(f"columns must name the {k} columns, {INTERCEPT!r} first")
    w = np.ones((B, n)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (B, n) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite, non-negative and shaped like y")
    if not np.all(X[:, :, 0] == 1.0) or not np.all(np.isfinite(X)):
        raise ValueError(f"first column must be an all-ones {INTERCEPT!r} column and all values finite")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("response must be 0/1")
    pos = np.einsum("bn,bn->b", w, y)
    tot = w.sum(axis=1)
    single = np.flatnonzero((pos == 0) | (pos == tot))
    if single.size:
        raise SingleClassError(f"dataset {int(single[0])} has a single response class")
    support = (w > 0).sum(axis=1)
    if np.any(support <= k):
        raise ModelingError(f"dataset {int(np.argmax(support <= k))} has no more weighted rows than parameters")
    used = X * (w > 0)[:, :, None]
    norms = np.linalg.norm(used, axis=1)
    if np.any(norms == 0):
        i = int(np.argmax(np.any(norms == 0, axis=1)))
        raise RankDeficientError(collinear_columns(X[i][w[i] > 0], columns))
    sv = np.linalg.svd(used / norms[:, None, :], compute_uv=False)
    deficient = np.flatnonzero(sv[:, -1] <= 1e-10 * sv[:, 0] * max(n, k))
    if deficient.size:
        i = int(deficient[0])
        raise RankDeficientError(collinear_columns(X[i][w[i] > 0], columns) or list(columns[1:]))

    penalty = _penalty(k, options.ridge)
    beta0 = np.zeros((B, k))
    beta0[:, 0] = np.log(pos / (tot - pos))
    res = _newton(X, y, w, beta0, penalty, options)
    eta = np.einsum("bnk,bk->bn", X, res.beta)
    p = sigmoid(eta)
    separation = res.separation.copy()
    if not options.ridge:
        pc = np.where(w > 0, np.minimum(p, 1.0 - p), 1.0)
        suspect = np.flatnonzero(~separation & ((pc.min(axis=1) < 1e-6)
                                                | np.any(np.abs(res.beta) > options.beta_bound, axis=1)))
        for i in suspect:
            rows = w[i] > 0
            separation[i] = separating_direction(X[i][rows], y[i][rows]) is not None
    pcl = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
    dev = -2.0 * np.einsum("bn,bn->b", w, y * np.log(pcl) + (1.0 - y) * np.log1p(-pcl))
    raw_score = np.einsum("bnk,bn->bk", X, w * (y - p))
    return BatchFit(
        columns=columns,
        coef=res.beta,
        standard_error=_standard_errors(_covariance(X, w, res.beta, penalty)),
        residual_deviance=dev,
        converged=res.converged & ~separation,
        separation=separation,
        iterations=res.iterations,
        max_abs_score=np.max(np.abs(raw_score), axis=1),
    )


# ---------------------------------------------------------------------------
# prediction and comparison


def linear_predictor(model: LogitModel, row: Mapping[str, float]) -> float:
    missing = [c for c in model.predictors if c not in row]
    if missing:
        raise ColumnMismatchError(missing, [])
    return model.coef[0] + sum(b * float(row[c]) for c, b in zip(model.predictors, model.coef[1:]))


def predict_prob(model: LogitModel, row: Mapping[str, float]) -> float:
    """Logistic probability for one row of named predictor values."""
    return float(sigmoid(linear_predictor(model, row)))


def _align_design(model: LogitModel, design: DesignMatrix) -> np.ndarray:
    if set(model.columns) != set(design.columns):
        raise ColumnMismatchError(sorted(set(model.columns) - set(design.columns)),
                                  sorted(set(design.columns) - set(model.columns)))
    order = [design.columns.index(c) for c in model.columns]
    return design.X[:, order]


def predict_design(model: LogitModel, design: DesignMatrix) -> np.ndarray:
    return sigmoid(_align_design(model, design) @ np.asarray(model.coef))


def deviance(model: LogitModel, design: DesignMatrix) -> float:
    """-2 log-likelihood of ``design`` under ``model`` (probabilities clamped)."""
    return binomial_deviance(design.y, predict_design(model, design))


@dataclass(frozen=True)
class RankedModel:
    name: str
    aic: float
    delta_aic: float
    n_params: int
    residual_deviance: float


def compare_models(models: Mapping[str, LogitModel]) -> list[RankedModel]:
    """Ascending AIC; ties go to fewer parameters, then to name."""
    if len(models) < 2:
        raise ValueError("compare_models needs at least two models")
    ordered = sorted(models.items(), key=lambda kv: (kv[1].aic, kv[1].n_params, kv[0]))
    best = ordered[0][1].aic
    return [RankedModel(name, m.aic, m.aic - best, m.n_params, m.residual_deviance) for name, m in ordered]
