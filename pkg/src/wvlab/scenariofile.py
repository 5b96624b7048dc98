"""
JSON scenario files (format ``scenario-v1``).

::

    {
      "name": "my-experiment",
      "dims": [2, 2],
      "pre":  [[re, im], ...],          # prod(dims) amplitudes
      "post": [[re, im], ...],
      "observables": [
        {"label": "ZZ", "expr": "Z@1 * Z@2"},
        {"label": "M",  "matrix": [[[re, im], ...], ...]}
      ],
      "expected_weak": [{"label": "ZZ", "value": [re, im]}]
    }

Amplitudes follow the library basis order (subsystem 1 slowest) and may be
unnormalized; they are rescaled on load, with a warning when the norm is
off by more than ``1e-6``. ``matrix`` may also be given flattened row-major.
"""
from __future__ import annotations

import json
import logging
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import opexpr
from .hilbert import OperatorMatrix, SpaceShape, StateVector
from .scenarios import Exact, Scenario
from .tsvf import TwoStateVector

SCHEMA_VERSION = "scenario-v1"
NORM_WARN_TOL = 1e-6

log = logging.getLogger(__name__)


class ScenarioFileError(ValueError):
    pass


def _complex_list(raw, what: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise ScenarioFileError(f"{what}: expected a list of [re, im] pairs")
    out = []
    for k, pair in enumerate(raw):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
            raise ScenarioFileError(f"{what}[{k}]: expected [re, im], got {pair!r}")
        if not all(math.isfinite(v) for v in pair):
            raise ScenarioFileError(f"{what}[{k}]: non-finite number")
        out.append(complex(pair[0], pair[1]))
    return np.array(out, dtype=complex)


def _state(raw, shape: SpaceShape, what: str) -> StateVector:
    amps = _complex_list(raw, what)
    if len(amps) != shape.total_dim:
        raise ScenarioFileError(
            f"{what}: {len(amps)} amplitudes, dims {list(shape.dims)} need {shape.total_dim}")
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise ScenarioFileError(f"{what}: zero vector")
    if abs(norm - 1.0) > NORM_WARN_TOL:
        log.warning("%s has norm %.6g; normalizing", what, norm)
    return StateVector(amps, shape)


def _matrix(raw, shape: SpaceShape, what: str) -> OperatorMatrix:
    n = shape.total_dim
    if isinstance(raw, list) and raw and isinstance(raw[0], list) and raw[0] \
            and isinstance(raw[0][0], list):
        flat = [pair for row in raw for pair in row]
    else:
        flat = raw
    entries = _complex_list(flat, what)
    if len(entries) != n * n:
        raise ScenarioFileError(f"{what}: {len(entries)} entries, expected {n}x{n}")
    return OperatorMatrix(entries.reshape(n, n), shape)


def scenario_from_dict(doc: dict, source: str = "<scenario>") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFileError(f"{source}: top level must be an object")
    for key in ("dims", "pre", "post", "observables"):
        if key not in doc:
            raise ScenarioFileError(f"{source}: missing key {key!r}")
    dims = doc["dims"]
    if not (isinstance(dims, list) and dims and all(isinstance(d, int) and not isinstance(d, bool)
                                                   for d in dims)):
        raise ScenarioFileError(f"{source}: dims must be a nonempty integer array")
    try:
        shape = SpaceShape(tuple(dims))
    except ValueError as exc:
        raise ScenarioFileError(f"{source}: {exc}") from None
    pre = _state(doc["pre"], shape, "pre")
    post = _state(doc["post"], shape, "post")
    tsv = TwoStateVector(pre, post)

    observables, expressions = {}, {}
    if not isinstance(doc["observables"], list):
        raise ScenarioFileError(f"{source}: observables must be an array")
    for k, item in enumerate(doc["observables"]):
        what = f"observables[{k}]"
        if not isinstance(item, dict) or not isinstance(item.get("label"), str):
            raise ScenarioFileError(f"{what}: needs a string 'label'")
        label = item["label"]
        if label in observables:
            raise ScenarioFileError(f"{what}: duplicate label {label!r}")
        if ("expr" in item) == ("matrix" in item):
            raise ScenarioFileError(f"{what}: give exactly one of 'expr' or 'matrix'")
        if "expr" in item:
            try:
                observables[label] = opexpr.operator(item["expr"], shape)
            except opexpr.ParseError as exc:
                raise ScenarioFileError(f"{what} ({label}): {exc}") from None
            except (IndexError, ValueError) as exc:
                raise ScenarioFileError(f"{what} ({label}): {exc}") from None
            expressions[label] = item["expr"]
        else:
            observables[label] = _matrix(item["matrix"], shape, what)

    expected = {}
    for k, item in enumerate(doc.get("expected_weak", [])):
        what = f"expected_weak[{k}]"
        if not isinstance(item, dict) or item.get("label") not in observables:
            raise ScenarioFileError(f"{what}: label must name an observable")
        value = _complex_list([item.get("value")], what)[0]
        # keep file values as given; Fraction of a float is exact
        expected[item["label"]] = Exact(Fraction(value.real), Fraction(value.imag))

    name = doc.get("name", Path(source).stem)
    return Scenario(str(name), tsv, observables, expected, [], expressions)


def load_scenario_file(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioFileError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"{path}: invalid JSON ({exc})") from None
    return scenario_from_dict(doc, str(path))


def scenario_to_dict(s: Scenario) -> dict:
    """Serialize a scenario; observables without an expression are written as matrices."""
    def pairs(a):
        return [[float(z.real), float(z.imag)] for z in np.asarray(a).ravel()]

    observables = []
    for label, op in s.observables.items():
        if label in s.expressions:
            observables.append({"label": label, "expr": s.expressions[label]})
        else:
            observables.append({"label": label, "matrix": [pairs(r) for r in op.entries]})
    return {
        "name": s.name,
        "dims": list(s.shape.dims),
        "pre": pairs(s.tsv.pre.amps),
        "post": pairs(s.tsv.post.amps),
        "observables": observables,
        "expected_weak": [{"label": k, "value": [float(v.re), float(v.im)]}
                          for k, v in s.expected_weak.items()],
    }
