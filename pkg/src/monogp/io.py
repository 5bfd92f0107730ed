"""Dataset files, run configuration, canonical serialization, and snapshots.

Snapshots are self-contained: they carry the (transformed) training data,
derivative spec, prediction points, priors, the full ensemble, and the
annealing trace, so a later process can re-condition and predict without the
original inputs.  Serialization is canonical — fixed field order, decimal
floats with 17 significant digits — and carries a checksum, so any artifact
written by one run is consumed bit-identically by another.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .design import PlacementPlan
from .experiments import ExperimentConfig
from .gp import Dataset, DerivativeSpec, JitterPolicy, PriorConfig
from .scmc import Ensemble

SNAPSHOT_VERSION = 1


class SnapshotVersionError(RuntimeError):
    """Snapshot file written by an incompatible format version."""


# -- canonical JSON ------------------------------------------------------------------


def canonical_json(obj) -> str:
    """Deterministic JSON text: insertion-ordered fields, floats at 17 digits."""
    out: list = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj, out: list):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not math.isfinite(f):
            raise ValueError("canonical payloads cannot carry non-finite floats")
        out.append(format(f, ".17g"))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError("canonical payload keys must be strings")
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _emit(value, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj)} canonically")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- dataset files -------------------------------------------------------------------


def load_dataset(path) -> Dataset:
    """CSV with a header row: input columns followed by one response column.

    Parse problems report the offending line number; duplicate design rows
    and non-finite values are rejected.
    """
    path = Path(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row")
        if len(header) < 2:
            raise ValueError(f"{path}: need at least one input column plus "
                             "a response column")
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValueError(f"{path}:{lineno}: expected {width} fields, "
                                 f"got {len(row)}")
            try:
                values = [float(v) for v in row]
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: {err}") from None
            if not all(math.isfinite(v) for v in values):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows)
    return Dataset(arr[:, :-1], arr[:, -1])


def load_points(path, ndim: int | None = None) -> np.ndarray:
    """CSV of points (header row, all columns numeric)."""
    ds_like = []
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                ds_like.append([float(v) for v in row])
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: {err}") from None
    pts = np.asarray(ds_like)
    if pts.ndim != 2 or pts.size == 0:
        raise ValueError(f"{path}: no points")
    if ndim is not None and pts.shape[1] != ndim:
        raise ValueError(f"{path}: points have dimension {pts.shape[1]}, "
                         f"expected {ndim}")
    return pts


# -- run configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    """Everything one fit needs: data, constraints, predictions, sampler knobs."""

    data_path: str | None = None
    monotone_dims: tuple = ()
    directions: tuple = ()
    placement: PlacementPlan | None = None
    prediction_points: np.ndarray | None = None
    prediction_grid: int | None = None
    sampler: ExperimentConfig = field(default_factory=ExperimentConfig)

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        import yaml

        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        data_path = doc.get("data", {}).get("path")
        if data_path is not None:
            data_path = str((path.parent / data_path).resolve()
                            if not Path(data_path).is_absolute() else data_path)
            if not Path(data_path).exists():
                raise FileNotFoundError(f"data file not found: {data_path}")
        mono = doc.get("monotonicity", {})
        dims = tuple(int(k) for k in mono.get("dims", ()))
        directions = tuple(int(s) for s in mono.get("directions", (1,) * len(dims)))
        deriv = doc.get("derivatives")
        placement = None
        if deriv:
            placement = PlacementPlan(
                deriv.get("strategy", "plus_shape"), dims, directions,
                {k: v for k, v in deriv.items() if k != "strategy"})
        pred = doc.get("prediction", {})
        points = pred.get("points")
        points = np.asarray(points, dtype=float) if points is not None else None
        grid = pred.get("grid_count")
        sampler_doc = dict(doc.get("sampler", {}))
        model_doc = dict(doc.get("model", {}))
        prior_doc = dict(doc.get("priors", {}))
        jitter = JitterPolicy(model_doc.pop("jitter_start", 1e-10),
                              model_doc.pop("jitter_max", 1e-4))
        priors = PriorConfig(prior_doc.get("theta_df", 1.0),
                             prior_doc.get("variance_df", 5.0))
        sampler = ExperimentConfig(**sampler_doc, **model_doc, jitter=jitter,
                                   priors=priors)
        return cls(data_path, dims, directions, placement, points,
                   int(grid) if grid is not None else None, sampler)

    def to_dict(self) -> dict:
        s = self.sampler
        return {
            "data_path": self.data_path,
            "monotone_dims": list(self.monotone_dims),
            "directions": list(self.directions),
            "placement": self.placement.to_dict() if self.placement else None,
            "prediction_points": (self.prediction_points.tolist()
                                  if self.prediction_points is not None else None),
            "prediction_grid": self.prediction_grid,
            "sampler": {
                "n_particles": s.n_particles, "tau_final": s.tau_final,
                "schedule": s.schedule, "n_steps": s.n_steps,
                "ess_floor": s.ess_floor, "max_growth": s.max_growth,
                "n_mh": s.n_mh, "burnin": s.burnin, "thin": s.thin,
                "seed": s.seed, "center": s.center,
                "standardize": s.standardize,
                "resample_policy": s.resample_policy,
                "hastings_sigma2": s.hastings_sigma2,
                "field_proposal": s.field_proposal,
                "rw_scale0": s.rw_scale0, "q0": s.q0, "workers": s.workers,
                "jitter_start": s.jitter.start, "jitter_max": s.jitter.stop,
                "theta_df": s.priors.theta_df,
                "variance_df": s.priors.variance_df,
            },
        }

    def digest(self) -> str:
        return _sha256(canonical_json(self.to_dict()))

    def build_problem(self):
        """(data, spec, xstar) from the referenced files and placement plan."""
        if self.data_path is None:
            raise ValueError("config has no data path")
        data = load_dataset(self.data_path)
        d = data.ndim
        if self.prediction_points is not None:
            xstar = np.atleast_2d(self.prediction_points)
        elif self.prediction_grid:
            lo, hi = data.X.min(axis=0), data.X.max(axis=0)
            axes = [np.linspace(lo[j], hi[j], self.prediction_grid)
                    for j in range(d)]
            if d == 1:
                xstar = axes[0][:, None]
            else:
                mesh = np.meshgrid(*axes, indexing="ij")
                xstar = np.column_stack([m.ravel() for m in mesh])
        else:
            xstar = None
        if self.placement is not None:
            spec = self.placement.realize(
                d, pred_points=xstar,
                box=(data.X.min(axis=0), data.X.max(axis=0)))
        else:
            spec = DerivativeSpec.empty()
        return data, spec, xstar


# -- snapshots -----------------------------------------------------------------------


@dataclass
class EnsembleSnapshot:
    """Versioned, checksummed bundle of one fitted run."""

    config_digest: str
    config: dict
    problem: dict       # transformed data, spec, xstar, priors, shift, scale
    ensemble: Ensemble
    trace: list
    taus: tuple
    version: int = SNAPSHOT_VERSION

    @classmethod
    def from_fit(cls, config: RunConfig, fit) -> "EnsembleSnapshot":
        state = fit.state
        spec = state.spec
        problem = {
            "X": state.data.X, "y": state.data.y,
            "xstar": state.xstar,
            "spec": {"dims": list(spec.dims),
                     "locations": [L for L in spec.locations],
                     "directions": list(spec.directions)},
            "theta_df": state.priors.theta_df,
            "variance_df": state.priors.variance_df,
            "jitter_start": state.jitter.start,
            "jitter_max": state.jitter.stop,
            "shift": fit.shift, "scale": fit.scale,
        }
        return cls(config.digest(), config.to_dict(), problem, fit.ensemble,
                   [rec.to_dict() for rec in fit.result.trace],
                   tuple(fit.result.taus))

    def problem_objects(self):
        p = self.problem
        spec = DerivativeSpec(tuple(p["spec"]["dims"]),
                              tuple(np.asarray(L) for L in p["spec"]["locations"]),
                              tuple(p["spec"]["directions"]))
        data = Dataset(np.asarray(p["X"]), np.asarray(p["y"]))
        xstar = np.asarray(p["xstar"]) if p["xstar"] is not None else None
        priors = PriorConfig(p["theta_df"], p["variance_df"])
        jitter = JitterPolicy(p["jitter_start"], p["jitter_max"])
        return data, spec, xstar, priors, jitter


def _ensemble_payload(ens: Ensemble) -> dict:
    return {
        "lengthscales": ens.lengthscales, "variances": ens.variances,
        "ystar": ens.ystar, "yprime": ens.yprime,
        "logweights": ens.logweights, "t_index": ens.t_index,
        "seed": ens.seed,
    }


def _ensemble_from_payload(payload: dict) -> Ensemble:
    n = len(payload["variances"])

    def arr2(key):
        raw = payload[key]
        out = np.asarray(raw, dtype=float)
        return out.reshape(n, -1) if out.size else np.empty((n, 0))

    return Ensemble(arr2("lengthscales"), np.asarray(payload["variances"]),
                    arr2("ystar"), arr2("yprime"),
                    np.asarray(payload["logweights"]),
                    t_index=int(payload["t_index"]), seed=int(payload["seed"]))


def save_snapshot(snapshot: EnsembleSnapshot, path) -> Path:
    payload = {
        "version": snapshot.version,
        "config_digest": snapshot.config_digest,
        "config": snapshot.config,
        "problem": snapshot.problem,
        "ensemble": _ensemble_payload(snapshot.ensemble),
        "trace": snapshot.trace,
        "taus": list(snapshot.taus),
    }
    text = canonical_json(payload)
    wrapper = canonical_json({"checksum": _sha256(text), "payload": None})
    # splice the already-canonical payload text in place of the null
    document = wrapper.replace('"payload":null', '"payload":' + text)
    path = Path(path)
    path.write_text(document + "\n", encoding="utf-8")
    return path


def load_snapshot(path, expect_config_digest: str | None = None) -> EnsembleSnapshot:
    path = Path(path)
    document = json.loads(path.read_text(encoding="utf-8"))
    payload = document["payload"]
    if payload.get("version") != SNAPSHOT_VERSION:
        raise SnapshotVersionError(
            f"{path}: snapshot version {payload.get('version')!r} needs "
            f"migration to version {SNAPSHOT_VERSION}")
    recomputed = _sha256(canonical_json(payload))
    if recomputed != document.get("checksum"):
        raise ValueError(f"{path}: checksum mismatch, file corrupted")
    if expect_config_digest and payload["config_digest"] != expect_config_digest:
        warnings.warn(f"{path}: snapshot was produced under a different "
                      "configuration (digest mismatch)")
    return EnsembleSnapshot(payload["config_digest"], payload["config"],
                            payload["problem"],
                            _ensemble_from_payload(payload["ensemble"]),
                            payload["trace"], tuple(payload["taus"]),
                            version=payload["version"])
