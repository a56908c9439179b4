"""Scenario files: parsing, validation and hashing."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
import hashlib
import json
import os
from pathlib import Path

import jsonschema
import yaml

from .dist import DistributionSpec, MarkLaw, from_dict
from .errors import UnstableInput, ValidationError
from .net import NetworkModel, SingleServerModel, TandemModel

TASKS = ("Gamma", "Lambda", "ThetaStar", "Tail", "Verify", "Bounds")
NEEDS_STABILITY = ("ThetaStar", "Tail", "Verify", "Bounds")
OUTPUT_ENV = "MSNET_OUTPUT_DIR"

DEFAULTS = {
    "Gamma": {"n_schedule": [1, 2, 4, 8, 16, 32, 64], "replicas": 10_000},
    "Lambda": {"n": 16, "replicas": 100_000},
    "ThetaStar": {"n_schedule": [1, 2, 4, 8, 16, 32, 64], "replicas": 100_000, "tol": 1e-3,
                  "theta_max": 50.0, "min_ess": 1000.0, "gamma_replicas": 10_000},
    "Tail": {"count": 1_000_000, "policy": "ForwardErgodic", "warmup": None, "q_lo": 0.95,
             "q_hi": 0.9999, "window_settle": 200, "n_max": 1_000_000, "ccdf": False},
    "Bounds": {"L": 8, "batches": 16, "replicas": 10_000},
}
DEFAULTS["Verify"] = {**DEFAULTS["ThetaStar"], **DEFAULTS["Tail"], "slope_rel_tol": 0.1}


class FieldError(ValidationError):
    """A validation error tied to one field of the scenario document."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


def schema() -> dict:
    text = resources.files("msnet").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    model: NetworkModel
    marks: MarkLaw
    arrival: DistributionSpec
    task: str
    task_params: dict
    raw: dict = field(repr=False)
    output_dir: str | None = None

    @property
    def hash(self) -> str:
        doc = {k: v for k, v in self.raw.items() if k != "output_dir"}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def resolve_output(self, override: str | None = None) -> Path:
        if override:
            return Path(override)
        if self.output_dir:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_ENV, "msnet-out")) / self.name


def _law(data, where) -> DistributionSpec:
    try:
        return from_dict(data)
    except ValidationError as exc:
        raise FieldError(where, str(exc)) from exc


def parse(doc: dict) -> Scenario:
    """Validate a scenario document and build its model objects."""
    if not isinstance(doc, dict):
        raise FieldError("<root>", "scenario must be a mapping")
    errors = sorted(jsonschema.Draft202012Validator(schema()).iter_errors(doc),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise FieldError(_path(err.absolute_path), err.message)

    m = doc["model"]
    md = m["marks"]
    if "per_station" in md:
        laws = [_law(d, f"model.marks.per_station[{i}]") for i, d in enumerate(md["per_station"])]
    elif "law" in md and "stations" in md:
        laws = [_law(md["law"], "model.marks.law")] * md["stations"]
    else:
        raise FieldError("model.marks", "needs 'per_station' or 'law' + 'stations'")
    try:
        marks = MarkLaw(tuple(laws), md.get("dependence", "independent"))
    except ValidationError as exc:
        raise FieldError("model.marks", str(exc)) from exc
    K = m.get("K", marks.stations)
    if K != marks.stations:
        raise FieldError("model.K", f"K={K} but marks describe {marks.stations} stations")
    if m["kind"] == "single_server":
        if K != 1:
            raise FieldError("model.K", "a single server has one station")
        model = SingleServerModel()
    else:
        model = TandemModel(K)
    arrival = _law(doc["arrival"], "arrival")

    task = doc["task"]
    params = {**DEFAULTS[task], **doc.get("task_params", {})}
    unknown = set(doc.get("task_params", {})) - set(DEFAULTS[task]) - {"thetas"}
    if unknown:
        raise FieldError(f"task_params.{sorted(unknown)[0]}", f"not a parameter of task {task}")
    _check_params(task, params)

    if task in NEEDS_STABILITY:
        a = arrival.mean()
        worst = max(marks.means())
        if not worst < a:
            raise UnstableInput(f"arrival: unstable, largest mean service {worst:.6g} "
                                f"is not below mean inter-arrival {a:.6g}")
    return Scenario(doc["name"], doc["seed"], model, marks, arrival, task, params, doc,
                    doc.get("output_dir"))


def _check_params(task, p):
    if "n_schedule" in p:
        s = p["n_schedule"]
        if any(b <= a for a, b in zip(s, s[1:])):
            raise FieldError("task_params.n_schedule", "must be strictly increasing")
    if task == "Lambda" and not p.get("thetas"):
        raise FieldError("task_params.thetas", "Lambda needs a list of theta values")
    if "q_lo" in p and not p["q_lo"] < p["q_hi"]:
        raise FieldError("task_params.q_lo", "must be below q_hi")
    if "count" in p and p["count"] * (p["q_hi"] - p["q_lo"]) < 20:
        raise FieldError("task_params.count", "fewer than 20 points would fall in the slope window")
    if p.get("policy") == "BackwardWindow" and p["n_max"] < max(2 * p["window_settle"], 256):
        raise FieldError("task_params.n_max", "must be at least max(2 * window_settle, 256)")


def load(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise FieldError("<root>", f"not valid YAML: {exc}") from exc
    return parse(doc)
