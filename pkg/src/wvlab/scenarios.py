"""
Builtin pre/post-selection experiments with their expected values.

Conventions:

* Hardy: particles ordered (positron, electron); basis index 0 is the
  overlapping arm O, index 1 the non-overlapping arm NO.
* Cheshire cat: spin first, box second; box index 0 is L, index 1 is R.
* ``|+y> = (|up> + i|down>)/sqrt(2)``.

Expected numbers are stored exactly (rationals on the real and imaginary
axes) and only turned into floats when compared.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import tsvf
from .hilbert import (
    OperatorMatrix,
    SpaceShape,
    StateVector,
    identity,
    product_state,
    qubit_projector,
    sandwich,
    tensor,
    pauli,
    pauli_on,
    embed,
)
from .tsvf import TwoStateVector

VERIFY_TOL = 1e-10


@dataclass(frozen=True)
class Exact:
    """``re + i*im`` with rational parts."""
    re: Fraction
    im: Fraction = Fraction(0)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        return f"{self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i"


def exact(re, im=0) -> Exact:
    return Exact(Fraction(re), Fraction(im))


@dataclass(frozen=True)
class Fact:
    """An assertion beyond a single weak value.

    ``kind`` selects the computation; ``labels`` name observables of the
    scenario. Kinds:

    ``weak_sum``          sum of the weak values of ``labels``
    ``weak_product``      product of the weak values of ``labels``
    ``abl_probability``   ABL probability of ``eigenvalue`` for ``labels[0]``
    ``abl_expectation``   ABL mean of ``labels[0]``
    ``correlation``       ABL correlation of ``labels[0]`` and ``labels[1]``
    ``dichotomic``        eigenvalue returned by the dichotomic weak/strong check
    ``pre_expectation``   ``<pre|A|pre>`` for ``labels[0]``
    ``transition``        ``<post|A|pre>`` for ``labels[0]``
    ``nonzero_transition`` 1 if ``|<post|A|pre>| > tol`` else 0
    """
    label: str
    kind: str
    labels: tuple[str, ...]
    expected: Exact
    eigenvalue: float | None = None


@dataclass
class Scenario:
    name: str
    tsv: TwoStateVector
    observables: dict[str, OperatorMatrix]
    expected_weak: dict[str, Exact] = field(default_factory=dict)
    facts: list[Fact] = field(default_factory=list)
    # opexpr text for each observable, where one exists
    expressions: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        missing = [k for k in self.expected_weak if k not in self.observables]
        for f in self.facts:
            missing += [k for k in f.labels if k not in self.observables]
        if missing:
            raise KeyError(f"expected values reference unknown observables {missing}")

    @property
    def shape(self) -> SpaceShape:
        return self.tsv.shape


@dataclass(frozen=True)
class Check:
    label: str
    expected: complex
    computed: complex
    abs_error: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    scenario: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _fact_value(s: Scenario, f: Fact) -> complex:
    ops = [s.observables[k] for k in f.labels]
    tsv = s.tsv
    if f.kind == "weak_sum":
        return sum(tsv_weak(tsv, a) for a in ops)
    if f.kind == "weak_product":
        return complex(np.prod([tsv_weak(tsv, a) for a in ops]))
    if f.kind == "abl_probability":
        return tsvf.abl_distribution(tsv, ops[0]).probability(f.eigenvalue)
    if f.kind == "abl_expectation":
        return tsvf.abl_expectation(tsv, ops[0])
    if f.kind == "correlation":
        return tsvf.correlation(tsv, ops[0], ops[1])
    if f.kind == "dichotomic":
        hit = tsvf.dichotomic_strong_check(tsv, ops[0])
        return complex("nan") if hit is None else hit
    if f.kind == "pre_expectation":
        return sandwich(tsv.pre, ops[0], tsv.pre)
    if f.kind == "transition":
        return sandwich(tsv.post, ops[0], tsv.pre)
    if f.kind == "nonzero_transition":
        return float(abs(sandwich(tsv.post, ops[0], tsv.pre)) > 1e-12)
    raise ValueError(f"unknown fact kind {f.kind!r}")


def tsv_weak(tsv: TwoStateVector, op: OperatorMatrix) -> complex:
    return tsvf.weak_value(tsv, op)


def verify(s: Scenario, tol: float = VERIFY_TOL) -> VerificationReport:
    """Recompute every expected value of ``s``; failures become report entries."""
    checks = []
    items: list[tuple[str, Exact, Callable[[], complex]]] = [
        (label, value, (lambda op=s.observables[label]: tsv_weak(s.tsv, op)))
        for label, value in s.expected_weak.items()
    ]
    items += [(f.label, f.expected, (lambda f=f: _fact_value(s, f))) for f in s.facts]
    for label, value, compute in items:
        expected = complex(value)
        try:
            computed = complex(compute())
        except (ArithmeticError, ValueError) as exc:
            checks.append(Check(f"{label} ({type(exc).__name__})", expected,
                                complex("nan"), float("inf"), False))
            continue
        err = abs(computed - expected)
        checks.append(Check(label, expected, computed, err, bool(err <= tol)))
    return VerificationReport(s.name, tuple(checks))


# -- builders ----------------------------------------------------------------

def build_hardy() -> Scenario:
    """Two overlapping interferometers, no annihilation, both dark detectors click."""
    dims = (2, 2)
    pre = StateVector([0, 1, 1, 1], dims)
    post = StateVector([1, -1, -1, 1], dims)
    arm = {"O": "P0", "NO": "P1"}
    obs, exprs = {}, {}
    for a, b in itertools.product(arm, repeat=2):
        label = f"{a}.{b}"
        obs[label] = tensor(qubit_projector("up" if a == "O" else "down"),
                            qubit_projector("up" if b == "O" else "down"))
        exprs[label] = f"{arm[a]}@1 * {arm[b]}@2"
    expected = {"O.O": exact(0), "O.NO": exact(1), "NO.O": exact(1), "NO.NO": exact(-1)}
    facts = [
        Fact("sum of joint projectors", "weak_sum", ("O.O", "O.NO", "NO.O", "NO.NO"), exact(1)),
    ]
    return Scenario("hardy", TwoStateVector(pre, post), obs, expected, facts, exprs)


def build_cheshire() -> Scenario:
    """Spin separated from the particle's location."""
    dims = (2, 2)
    # basis (up L, up R, down L, down R)
    pre = StateVector([1, 1, 1, -1], dims)
    post = StateVector([1, 1, -1, -1], dims)
    sz = pauli("Z")
    pl, pr = qubit_projector("up"), qubit_projector("down")
    eye = pauli("I")
    obs = {
        "Pi_L": tensor(eye, pl),
        "Pi_R": tensor(eye, pr),
        "sigma_z": tensor(sz, eye),
        "sigma_z Pi_L": tensor(sz, pl),
        "sigma_z Pi_R": tensor(sz, pr),
    }
    exprs = {
        "Pi_L": "P0@2",
        "Pi_R": "P1@2",
        "sigma_z": "Z@1",
        "sigma_z Pi_L": "Z@1 * 0.5*(I@2 + Z@2)",
        "sigma_z Pi_R": "Z@1 * 0.5*(I@2 - Z@2)",
    }
    expected = {
        "Pi_L": exact(0), "Pi_R": exact(1), "sigma_z": exact(1),
        "sigma_z Pi_L": exact(1), "sigma_z Pi_R": exact(0),
    }
    facts = [
        Fact("<Pi_L>_w + <Pi_R>_w", "weak_sum", ("Pi_L", "Pi_R"), exact(1)),
        Fact("<sigma_z Pi_L>_w + <sigma_z Pi_R>_w", "weak_sum",
             ("sigma_z Pi_L", "sigma_z Pi_R"), exact(1)),
        # product rule fails: <sigma_z Pi_L>_w = 1 but <sigma_z>_w <Pi_L>_w = 0
        Fact("<sigma_z>_w * <Pi_L>_w", "weak_product", ("sigma_z", "Pi_L"), exact(0)),
        Fact("dichotomic Pi_R", "dichotomic", ("Pi_R",), exact(1)),
    ]
    return Scenario("cheshire", TwoStateVector(pre, post), obs, expected, facts, exprs)


def build_epr_bohm() -> Scenario:
    """Singlet pre-selection, Alice post-selected on +x and Bob on +y."""
    dims = (2, 2)
    pre = StateVector([0, 1, -1, 0], dims)
    post = product_state(["+x", "+y"])
    a_proj = {"up_y": "+y", "down_y": "-y"}
    b_proj = {"up_x": "+x", "down_x": "-x"}
    # y-projectors have no opexpr name; (I +/- Y)/2 instead
    a_expr = {"up_y": "0.5*(I@1 + Y@1)", "down_y": "0.5*(I@1 - Y@1)"}
    b_expr = {"up_x": "Pp@2", "down_x": "Pm@2"}
    obs, exprs = {}, {}
    for a, b in itertools.product(a_proj, b_proj):
        label = f"A:{a} B:{b}"
        obs[label] = tensor(qubit_projector(a_proj[a]), qubit_projector(b_proj[b]))
        exprs[label] = f"{a_expr[a]} * {b_expr[b]}"
    for a in a_proj:
        obs[f"A:{a}"] = embed(qubit_projector(a_proj[a]), 0, dims)
        exprs[f"A:{a}"] = a_expr[a]
    for b in b_proj:
        obs[f"B:{b}"] = embed(qubit_projector(b_proj[b]), 1, dims)
        exprs[f"B:{b}"] = b_expr[b]
    obs["sigma_y^A sigma_x^B"] = tensor(pauli("Y"), pauli("X"))
    exprs["sigma_y^A sigma_x^B"] = "Y@1 * X@2"
    obs["sigma_x^A sigma_x^B"] = tensor(pauli("X"), pauli("X"))
    exprs["sigma_x^A sigma_x^B"] = "X@1 * X@2"
    obs["sigma_y^A sigma_y^B"] = tensor(pauli("Y"), pauli("Y"))
    exprs["sigma_y^A sigma_y^B"] = "Y@1 * Y@2"
    obs["xy + yx"] = tensor(pauli("X"), pauli("Y")) + tensor(pauli("Y"), pauli("X"))
    exprs["xy + yx"] = "X@1 * Y@2 + Y@1 * X@2"

    half = Fraction(1, 2)
    expected = {
        "A:up_y B:up_x": exact(-half),
        "A:up_y B:down_x": exact(half),
        "A:down_y B:up_x": exact(half),
        "A:down_y B:down_x": exact(half),
        "A:up_y": exact(0), "A:down_y": exact(1),
        "B:up_x": exact(0), "B:down_x": exact(1),
        "sigma_y^A sigma_x^B": exact(-1),
    }
    facts = [
        Fact("<Pi_up_y^A>_w from joint table", "weak_sum",
             ("A:up_y B:up_x", "A:up_y B:down_x"), exact(0)),
        Fact("<Pi_down_y^A>_w from joint table", "weak_sum",
             ("A:down_y B:up_x", "A:down_y B:down_x"), exact(1)),
        Fact("<Pi_up_x^B>_w from joint table", "weak_sum",
             ("A:up_y B:up_x", "A:down_y B:up_x"), exact(0)),
        Fact("<Pi_down_x^B>_w from joint table", "weak_sum",
             ("A:up_y B:down_x", "A:down_y B:down_x"), exact(1)),
        Fact("<pre|sigma_x sigma_x|pre>", "pre_expectation", ("sigma_x^A sigma_x^B",), exact(-1)),
        Fact("<pre|sigma_y sigma_y|pre>", "pre_expectation", ("sigma_y^A sigma_y^B",), exact(-1)),
        Fact("<pre|xy + yx|pre>", "pre_expectation", ("xy + yx",), exact(0)),
    ]
    return Scenario("epr-bohm", TwoStateVector(pre, post), obs, expected, facts, exprs)


def build_pigeonhole(n_particles: int = 2) -> Scenario:
    """``n`` spins pre-selected in ``|+x>`` and post-selected in ``|+y>``.

    Reading ``sigma_z`` as which of two boxes a particle is in, no pair is
    found in the same box.
    """
    if n_particles < 2:
        raise ValueError("the pigeonhole scenario needs at least 2 particles")
    n = n_particles
    dims = (2,) * n
    pre = product_state(["+x"] * n)
    post = product_state(["+y"] * n)
    obs, exprs, expected, facts = {}, {}, {}, []
    for k in range(1, n + 1):
        label = f"Z{k}"
        obs[label] = pauli_on("Z", k - 1, dims)
        exprs[label] = f"Z@{k}"
        expected[label] = exact(0, 1)
        facts.append(Fact(f"ABL <Z{k}>", "abl_expectation", (label,), exact(0)))
    for j, k in itertools.combinations(range(1, n + 1), 2):
        zz, same = f"Z{j}Z{k}", f"same{j}{k}"
        obs[zz] = obs[f"Z{j}"] @ obs[f"Z{k}"]
        exprs[zz] = f"Z@{j} * Z@{k}"
        obs[same] = 0.5 * (identity(dims) + obs[zz])
        exprs[same] = f"0.5*(I@1 + Z@{j} * Z@{k})"
        expected[zz] = exact(-1)
        expected[same] = exact(0)
        facts += [
            Fact(f"ABL <{zz}>", "abl_expectation", (zz,), exact(-1)),
            Fact(f"ABL P({zz} = -1)", "abl_probability", (zz,), exact(1), eigenvalue=-1.0),
            Fact(f"Corr(Z{j}, Z{k})", "correlation", (f"Z{j}", f"Z{k}"), exact(-1)),
            Fact(f"dichotomic {zz}", "dichotomic", (zz,), exact(-1)),
            Fact(f"<Z{j}>_w * <Z{k}>_w", "weak_product", (f"Z{j}", f"Z{k}"), exact(-1)),
        ]
        # along x and y every pair is correlated, with certainty
        for axis in "XY":
            label = f"{axis}{j}{axis}{k}"
            obs[label] = pauli_on(axis, j - 1, dims) @ pauli_on(axis, k - 1, dims)
            exprs[label] = f"{axis}@{j} * {axis}@{k}"
            expected[label] = exact(1)
            facts.append(Fact(f"ABL P({label} = +1)", "abl_probability", (label,), exact(1),
                              eigenvalue=1.0))
    if n == 2:
        # z-basis: the correlated components cancel between pre and post
        corr = OperatorMatrix(np.diag([1, 0, 0, 1]), dims)
        anti = OperatorMatrix(np.diag([0, 1, 1, 0]), dims)
        obs["Pi_corr"], obs["Pi_anti"] = corr, anti
        exprs["Pi_corr"] = "P0@1 * P0@2 + P1@1 * P1@2"
        exprs["Pi_anti"] = "P0@1 * P1@2 + P1@1 * P0@2"
        facts += [
            Fact("<post|Pi_corr|pre>", "transition", ("Pi_corr",), exact(0)),
            Fact("<post|Pi_anti|pre> != 0", "nonzero_transition", ("Pi_anti",), exact(1)),
        ]
    return Scenario(f"pigeonhole:{n}", TwoStateVector(pre, post), obs, expected, facts, exprs)


BUILTINS = ("hardy", "cheshire", "epr-bohm", "pigeonhole:2", "pigeonhole:3")


def builtin(name: str) -> Scenario:
    """Look up ``hardy``, ``cheshire``, ``epr-bohm`` or ``pigeonhole:N``."""
    if name == "hardy":
        return build_hardy()
    if name == "cheshire":
        return build_cheshire()
    if name == "epr-bohm":
        return build_epr_bohm()
    if name.startswith("pigeonhole"):
        _, _, n = name.partition(":")
        try:
            count = int(n) if n else 2
        except ValueError:
            raise KeyError(f"bad particle count in {name!r}") from None
        return build_pigeonhole(count)
    raise KeyError(f"unknown builtin scenario {name!r}")


def all_builtins() -> list[Scenario]:
    return [builtin(n) for n in BUILTINS]
