"""Poisson-regression simulation designs, the train/validate/test
protocol and selection metrics.

Eleven designs are available: eight benchmarked designs ("1".."8") with
50/50/100 train/valid/test rows, and three selection-curve designs
("R1".."R3"). Replicates are deterministic functions of
(design seed, replicate index, split), so any execution order or worker
count reproduces the same data.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .families import Dataset, Family
from .groups import GroupStructure
from .solver import FitConfig, PathResult, path, select_lambda

NONZERO_TOL = 1e-10  # prox produces exact zeros; any tiny cutoff is equivalent

_SPLIT_TAGS = {"train": 0, "valid": 1, "test": 2}


@dataclass(frozen=True)
class SimDesign:
    """One data-generation recipe.

    Signal coordinates in group j are U_j + eps with U_j drawn once per
    row per group from ``u_range`` and eps i.i.d. from ``eps_range``;
    null coordinates are i.i.d. from ``null_range``.
    """

    id: str
    group_size: int
    n_signal_groups: int
    n_null_groups: int
    signal_values: tuple[float, ...]  # per signal group
    u_range: tuple[float, float]
    eps_range: tuple[float, float]
    null_range: tuple[float, float]
    n_train: int = 50
    n_valid: int = 50
    n_test: int = 100
    seed: int = 0

    @property
    def n_groups(self) -> int:
        return self.n_signal_groups + self.n_null_groups

    @property
    def p(self) -> int:
        return self.n_groups * self.group_size

    @property
    def s_star(self) -> int:
        return self.n_signal_groups * self.group_size

    def group_structure(self) -> GroupStructure:
        return GroupStructure((self.group_size,) * self.n_groups)

    def beta_star(self) -> np.ndarray:
        beta = np.zeros(self.p)
        for j, v in enumerate(self.signal_values):
            beta[j * self.group_size : (j + 1) * self.group_size] = v
        return beta


def _table_design(id, group_size, n_null, values, eps_range):
    return SimDesign(
        id=id,
        group_size=group_size,
        n_signal_groups=len(values),
        n_null_groups=n_null,
        signal_values=values,
        u_range=(0.0, 1.0),
        eps_range=eps_range,
        null_range=(-0.1, 0.1),
    )


_DESIGNS = {
    "1": _table_design("1", 10, 10, (0.3, 0.2), (0.0, 0.01)),
    "2": _table_design("2", 10, 10, (0.3, 0.2), (0.0, 1.0)),
    "3": _table_design("3", 10, 10, (0.3, 0.2), (0.0, 1.2)),
    "4": _table_design("4", 20, 10, (0.3, 0.2), (0.0, 1.0)),
    "5": _table_design("5", 5, 10, (0.3, 0.2), (0.0, 1.0)),
    "6": _table_design("6", 10, 10, (0.2, 0.2), (0.0, 1.0)),
    "7": _table_design("7", 10, 10, (0.2,) * 4, (0.0, 1.0)),
    "8": _table_design("8", 10, 10, (0.2,) * 6, (0.0, 1.0)),
    "R1": SimDesign(
        id="R1",
        group_size=5,
        n_signal_groups=10,
        n_null_groups=50,
        signal_values=(0.2,) * 10,
        u_range=(0.0, 1.0),
        eps_range=(-1.0, 1.0),
        null_range=(-0.1, 0.1),
        n_train=100,
    ),
    "R2": SimDesign(
        id="R2",
        group_size=5,
        n_signal_groups=10,
        n_null_groups=100,
        signal_values=(0.2,) * 10,
        u_range=(-1.0, 1.0),
        eps_range=(-1.0, 1.0),
        null_range=(-0.1, 0.1),
        n_train=100,
    ),
    "R3": SimDesign(
        id="R3",
        group_size=5,
        n_signal_groups=10,
        n_null_groups=100,
        signal_values=(0.2,) * 10,
        u_range=(-1.0, 1.0),
        eps_range=(-1.0, 1.0),
        null_range=(-0.01, 0.01),
        n_train=100,
    ),
}

TABLE_DESIGN_IDS = ("1", "2", "3", "4", "5", "6", "7", "8")
ROC_DESIGN_IDS = ("R1", "R2", "R3")


def get_design(design_id: str, seed: int = 0) -> SimDesign:
    try:
        base = _DESIGNS[str(design_id)]
    except KeyError:
        raise ValueError(
            f"unknown design {design_id!r}; expected 1..8 or R1..R3"
        ) from None
    return replace(base, seed=seed)


@dataclass
class SimData:
    train: Dataset
    valid: Dataset
    test: Dataset
    beta_star: np.ndarray
    gs: GroupStructure


def _draw_split(design: SimDesign, rng: np.random.Generator, n: int) -> Dataset:
    p = design.p
    X = np.empty((n, p))
    gsize = design.group_size
    for j in range(design.n_signal_groups):
        u = rng.uniform(*design.u_range, size=n)
        eps = rng.uniform(*design.eps_range, size=(n, gsize))
        X[:, j * gsize : (j + 1) * gsize] = u[:, None] + eps
    null_start = design.n_signal_groups * gsize
    X[:, null_start:] = rng.uniform(*design.null_range, size=(n, p - null_start))
    rate = np.exp(X @ design.beta_star())
    y = rng.poisson(rate).astype(float)
    return Dataset(X=X, y=y)


def generate(design: SimDesign, replicate_index: int) -> SimData:
    """Draw one replicate's train/valid/test triple from disjoint,
    deterministically derived random streams."""
    splits = {}
    for name, n in (
        ("train", design.n_train),
        ("valid", design.n_valid),
        ("test", design.n_test),
    ):
        ss = np.random.SeedSequence(
            entropy=design.seed, spawn_key=(replicate_index, _SPLIT_TAGS[name])
        )
        splits[name] = _draw_split(design, np.random.default_rng(ss), n)
    return SimData(
        train=splits["train"],
        valid=splits["valid"],
        test=splits["test"],
        beta_star=design.beta_star(),
        gs=design.group_structure(),
    )


@dataclass
class ProtocolConfig:
    n_lambda: int = 100
    lambda_min_ratio: float = 0.01
    fit: FitConfig = field(default_factory=lambda: FitConfig(max_iter=3000, tol=1e-4))


@dataclass
class SimMetrics:
    design_id: str
    estimator: str
    hit_pct: float
    fp_pct: float
    nonzero: float
    pred_error: float
    est_error: float
    reps: int

    def to_dict(self) -> dict:
        return {
            "design": self.design_id,
            "estimator": self.estimator,
            "hit_pct": self.hit_pct,
            "fp_pct": self.fp_pct,
            "nonzero": self.nonzero,
            "pred_error": self.pred_error,
            "est_error": self.est_error,
            "reps": self.reps,
        }


def _selection_counts(beta_hat, beta_star):
    selected = np.abs(beta_hat) > NONZERO_TOL
    signal = beta_star != 0.0
    hits = int(np.count_nonzero(selected & signal))
    fps = int(np.count_nonzero(selected & ~signal))
    return hits, fps, int(np.count_nonzero(selected))


def run_protocol(
    design: SimDesign,
    estimator_kind: str,
    reps: int,
    config: ProtocolConfig | None = None,
) -> SimMetrics:
    """Fit a penalty path on train, validate, and score on test; means
    over replicates use compensated summation so aggregation order never
    changes the result."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    config = config or ProtocolConfig()
    beta_star = design.beta_star()
    s_star = design.s_star
    n_null = design.p - s_star

    cols = {k: [] for k in ("hit", "fp", "nonzero", "pred", "est")}
    for rep in range(reps):
        data = generate(design, rep)
        try:
            pr = path(
                Family.POISSON,
                data.train,
                data.gs,
                estimator_kind,
                config.n_lambda,
                config.lambda_min_ratio,
                config.fit,
            )
        except Exception as exc:
            raise RuntimeError(f"solver failed in replicate {rep}: {exc}") from exc
        _, beta_opt = select_lambda(pr, Family.POISSON, data.valid)
        hits, fps, nz = _selection_counts(beta_opt, beta_star)
        cols["hit"].append(100.0 * hits / s_star)
        cols["fp"].append(100.0 * fps / n_null)
        cols["nonzero"].append(float(nz))
        cols["pred"].append(float(np.linalg.norm(data.test.X @ (beta_star - beta_opt))))
        cols["est"].append(float(np.sum(np.abs(beta_star - beta_opt))))

    mean = lambda xs: math.fsum(xs) / reps
    return SimMetrics(
        design_id=design.id,
        estimator=estimator_kind,
        hit_pct=mean(cols["hit"]),
        fp_pct=mean(cols["fp"]),
        nonzero=mean(cols["nonzero"]),
        pred_error=mean(cols["pred"]),
        est_error=mean(cols["est"]),
        reps=reps,
    )


def roc_curve(
    design: SimDesign,
    estimator_kind: str,
    n_lambda: int = 10000,
    config: FitConfig | None = None,
    replicate_index: int = 0,
):
    """Selection fractions over a dense log-spaced penalty grid.

    Returns an (n_lambda, 3) array of (lambda, tp_fraction, fp_fraction).
    The grid floor is 1e-4 of lambda_max; solutions change
    multiplicatively in the penalty, so log spacing resolves every entry
    event.
    """
    if design.id not in ROC_DESIGN_IDS:
        raise ValueError(f"design {design.id!r} is not a selection-curve design")
    data = generate(design, replicate_index)
    beta_star = data.beta_star
    signal = beta_star != 0.0
    s_star = int(np.count_nonzero(signal))
    n_null = beta_star.size - s_star

    pr = path(
        Family.POISSON,
        data.train,
        data.gs,
        estimator_kind,
        n_lambda,
        1e-4,
        config or FitConfig(max_iter=3000, tol=1e-4),
    )
    out = np.empty((n_lambda, 3))
    for i, (lam, res) in enumerate(zip(pr.lambda_grid, pr.fits)):
        selected = np.abs(res.beta_hat) > NONZERO_TOL
        out[i, 0] = lam
        out[i, 1] = np.count_nonzero(selected & signal) / s_star
        out[i, 2] = np.count_nonzero(selected & ~signal) / n_null
    return out


_TABLE_ROWS = (
    ("hit_pct", "Mean Hit (%)"),
    ("fp_pct", "Mean False positive (%)"),
    ("nonzero", "Mean Nonzero"),
    ("pred_error", "Mean Prediction error"),
    ("est_error", "Mean Estimation error"),
)


def table_report(metrics: list[SimMetrics]) -> dict:
    """Benchmark table as CSV and aligned text, one column per design
    and one row per metric x estimator."""
    designs = []
    for m in metrics:
        if m.design_id not in designs:
            designs.append(m.design_id)
    by_key = {(m.design_id, m.estimator): m for m in metrics}
    estimators = []
    for m in metrics:
        if m.estimator not in estimators:
            estimators.append(m.estimator)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "estimator"] + [f"design_{d}" for d in designs])
    text_rows = []
    for attr, label in _TABLE_ROWS:
        for est in estimators:
            row = [attr, est]
            shown = [label + f" {est}"]
            for d in designs:
                m = by_key.get((d, est))
                if m is None:
                    row.append("")
                    shown.append("-")
                else:
                    v = getattr(m, attr)
                    row.append(format(v, ".17g"))
                    shown.append(format(v, ".4g"))
            writer.writerow(row)
            text_rows.append(shown)

    widths = [max(len(r[i]) for r in text_rows) for i in range(len(text_rows[0]))] if text_rows else []
    header = ["metric"] + [f"design {d}" for d in designs]
    if text_rows:
        widths = [max(w, len(h)) for w, h in zip(widths, header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in text_rows]
        text = "\n".join(lines) + "\n"
    else:
        text = "  ".join(header) + "\n"
    return {"csv": buf.getvalue(), "text": text}


def roc_csv(curve: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "tp_fraction", "fp_fraction"])
    for lam, tp, fp in curve:
        writer.writerow([format(lam, ".17g"), format(tp, ".17g"), format(fp, ".17g")])
    return buf.getvalue()


def metrics_json(metrics: list[SimMetrics]) -> str:
    return json.dumps([m.to_dict() for m in metrics], indent=2, sort_keys=True) + "\n"
