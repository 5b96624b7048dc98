"""
Complex linear algebra for small tensor-product Hilbert spaces.

Basis order is row-major over the subsystem dimensions: the index of
subsystem 1 varies slowest, so ``|a>|b>`` maps to ``a * d2 + b``.
All objects are immutable after construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-9
SAME_RAY_TOL = 1e-10


class ShapeMismatch(ValueError):
    pass


class NotHermitian(ValueError):
    pass


@dataclass(frozen=True)
class SpaceShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a space needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def __add__(self, other: "SpaceShape") -> "SpaceShape":
        return SpaceShape(self.dims + other.dims)

    def __repr__(self):
        return f"SpaceShape({list(self.dims)})"


ShapeLike = Union[SpaceShape, Sequence[int], int]


def as_shape(shape: ShapeLike) -> SpaceShape:
    if isinstance(shape, SpaceShape):
        return shape
    if isinstance(shape, (int, np.integer)):
        return SpaceShape((int(shape),))
    return SpaceShape(tuple(shape))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite entries")
    a.setflags(write=False)
    return a


class StateVector:
    """Normalized pure state on a tensor-product space.

    The amplitudes are normalized at construction; a zero vector is rejected.
    """

    __slots__ = ("shape", "amps")

    def __init__(self, amps, dims: ShapeLike | None = None):
        amps = np.asarray(amps, dtype=complex).ravel()
        shape = as_shape(dims if dims is not None else len(amps))
        if len(amps) != shape.total_dim:
            raise ShapeMismatch(
                f"{len(amps)} amplitudes for dims {list(shape.dims)}")
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("cannot normalize a zero or non-finite vector")
        self.shape = shape
        self.amps = _frozen(amps / norm)

    @classmethod
    def _unchecked(cls, amps: np.ndarray, shape: SpaceShape) -> "StateVector":
        # for products of already-normalized states; skips the rescale
        self = object.__new__(cls)
        self.shape = shape
        self.amps = _frozen(amps)
        return self

    @classmethod
    def basis(cls, index: int, dims: ShapeLike) -> "StateVector":
        shape = as_shape(dims)
        amps = np.zeros(shape.total_dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps, shape)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def __len__(self):
        return len(self.amps)

    def __repr__(self):
        return f"StateVector({np.round(self.amps, 6).tolist()}, dims={list(self.dims)})"


class OperatorMatrix:
    """Square complex matrix on a tensor-product space.

    ``hermitian`` is checked against the entries, never asserted by the caller.
    """

    __slots__ = ("shape", "entries", "__dict__")

    def __init__(self, entries, dims: ShapeLike | None = None):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ShapeMismatch(f"expected a square matrix, got {entries.shape}")
        shape = as_shape(dims if dims is not None else entries.shape[0])
        if entries.shape[0] != shape.total_dim:
            raise ShapeMismatch(
                f"{entries.shape[0]}x{entries.shape[0]} matrix for dims {list(shape.dims)}")
        self.shape = shape
        self.entries = _frozen(entries)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    @cached_property
    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def hermitian(self) -> bool:
        return self.hermitian_error <= HERMITIAN_TOL

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.shape)

    @cached_property
    def _spectral_default(self) -> "SpectralDecomposition":
        return spectral(self, DEGENERACY_TOL)

    def spectral(self, degeneracy_tol: float = DEGENERACY_TOL) -> "SpectralDecomposition":
        if degeneracy_tol == DEGENERACY_TOL:
            return self._spectral_default
        return spectral(self, degeneracy_tol)

    def _check(self, other: "OperatorMatrix"):
        if other.shape != self.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(self.entries + other.entries, self.shape)

    def __sub__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(self.entries - other.entries, self.shape)

    def __neg__(self):
        return OperatorMatrix(-self.entries, self.shape)

    def __mul__(self, scalar):
        if isinstance(scalar, (OperatorMatrix, StateVector)):
            return NotImplemented
        return OperatorMatrix(complex(scalar) * self.entries, self.shape)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.entries @ other.entries, self.shape)
        return NotImplemented

    def allclose(self, other: "OperatorMatrix", atol: float = 1e-12) -> bool:
        return self.shape == other.shape and np.allclose(
            self.entries, other.entries, rtol=0.0, atol=atol)

    def __repr__(self):
        return f"OperatorMatrix(dims={list(self.dims)}, hermitian={self.hermitian})"


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple[float, ...]
    projectors: tuple[OperatorMatrix, ...]

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(zip(self.eigenvalues, self.projectors))

    def reconstruct(self) -> OperatorMatrix:
        total = sum((a * p.entries for a, p in self), start=0j)
        return OperatorMatrix(total, self.projectors[0].shape)

    @property
    def min_gap(self) -> float:
        if len(self.eigenvalues) < 2:
            return float("inf")
        return float(np.min(np.diff(self.eigenvalues)))


# -- basic operations ------------------------------------------------------

def tensor(a, b):
    """Kronecker product of two states or two operators, ``a`` most significant."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector._unchecked(np.kron(a.amps, b.amps), a.shape + b.shape)
    if isinstance(a, OperatorMatrix) and isinstance(b, OperatorMatrix):
        return OperatorMatrix(np.kron(a.entries, b.entries), a.shape + b.shape)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def tensor_all(factors: Iterable):
    return reduce(tensor, factors)


def inner(bra: StateVector, ket: StateVector) -> complex:
    """``<bra|ket>``, conjugate-linear in ``bra``."""
    if bra.shape != ket.shape:
        raise ShapeMismatch(f"{bra.shape} vs {ket.shape}")
    return complex(np.vdot(bra.amps, ket.amps))


def apply(op: OperatorMatrix, ket: StateVector) -> np.ndarray:
    """Unnormalized ``op|ket>`` as a raw amplitude array."""
    if op.shape != ket.shape:
        raise ShapeMismatch(f"{op.shape} vs {ket.shape}")
    return op.entries @ ket.amps


def sandwich(bra: StateVector, op: OperatorMatrix, ket: StateVector) -> complex:
    """``<bra|op|ket>``."""
    if bra.shape != ket.shape:
        raise ShapeMismatch(f"{bra.shape} vs {ket.shape}")
    return complex(np.vdot(bra.amps, apply(op, ket)))


# Accurate contractions. Products of doubles are split into exact pairs
# (Dekker's two-product) and summed with math.fsum, so the result is the
# exact value rounded once.
_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_product(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _rounded_sum(x, y, z=None) -> float:
    """Correctly rounded ``sum(x * y * z)`` over all entries."""
    p, e = _two_product(x, y)
    pieces = [p, e] if z is None else [*_two_product(p, z), *_two_product(e, z)]
    return math.fsum(np.concatenate([q.ravel() for q in pieces]).tolist())


def inner_accurate(bra: StateVector, ket: StateVector) -> complex:
    """``<bra|ket>`` correctly rounded."""
    if bra.shape != ket.shape:
        raise ShapeMismatch(f"{bra.shape} vs {ket.shape}")
    a, c = bra.amps, ket.amps
    ar, ai, cr, ci = a.real, -a.imag, c.real, c.imag
    re = _rounded_sum(np.stack([ar, -ai]), np.stack([cr, ci]))
    im = _rounded_sum(np.stack([ar, ai]), np.stack([ci, cr]))
    return complex(re, im)


def sandwich_accurate(bra: StateVector, op: OperatorMatrix, ket: StateVector) -> complex:
    """``<bra|op|ket>`` correctly rounded.

    Several times slower than :func:`sandwich`. Worth it when the result is
    divided by a small overlap, which amplifies ordinary rounding error.
    """
    if bra.shape != ket.shape or op.shape != ket.shape:
        raise ShapeMismatch(f"{bra.shape}, {op.shape}, {ket.shape}")
    m = op.entries
    ar = np.broadcast_to(bra.amps.real[:, None], m.shape)
    ai = np.broadcast_to(-bra.amps.imag[:, None], m.shape)
    cr = np.broadcast_to(ket.amps.real[None, :], m.shape)
    ci = np.broadcast_to(ket.amps.imag[None, :], m.shape)
    mr, mi = m.real, m.imag
    re = _rounded_sum(np.stack([ar, -ar, -ai, -ai]), np.stack([mr, mi, mr, mi]),
                      np.stack([cr, ci, ci, cr]))
    im = _rounded_sum(np.stack([ar, ar, ai, -ai]), np.stack([mr, mi, mr, mi]),
                      np.stack([ci, cr, cr, ci]))
    return complex(re, im)


def dagger(op: OperatorMatrix) -> OperatorMatrix:
    return op.dagger()


def normalize(amps) -> np.ndarray:
    amps = np.asarray(amps, dtype=complex)
    norm = np.linalg.norm(amps)
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return amps / norm


def same_ray(a: StateVector, b: StateVector, tol: float = SAME_RAY_TOL) -> bool:
    """True when the states agree up to a global phase."""
    return abs(abs(inner(a, b)) - 1.0) <= tol


def identity(dims: ShapeLike) -> OperatorMatrix:
    shape = as_shape(dims)
    return OperatorMatrix(np.eye(shape.total_dim), shape)


def projector(state: StateVector) -> OperatorMatrix:
    """Rank-one projector ``|s><s|``."""
    return OperatorMatrix(np.outer(state.amps, state.amps.conj()), state.shape)


def embed(local: OperatorMatrix, index: int, dims: ShapeLike) -> OperatorMatrix:
    """Pad a single-subsystem operator with identities.

    ``index`` is 0-based here; the operator-expression language is 1-based.
    """
    shape = as_shape(dims)
    if not 0 <= index < shape.n_subsystems:
        raise IndexError(f"subsystem {index} out of range for {shape}")
    if local.shape.total_dim != shape.dims[index]:
        raise ShapeMismatch(
            f"operator of dim {local.shape.total_dim} on subsystem of dim {shape.dims[index]}")
    left = int(np.prod(shape.dims[:index], dtype=int))
    right = int(np.prod(shape.dims[index + 1:], dtype=int))
    m = np.kron(np.kron(np.eye(left), local.entries), np.eye(right))
    return OperatorMatrix(m, shape)


def partial_trace(op: OperatorMatrix, index: int) -> np.ndarray:
    """Trace out subsystem ``index`` (0-based), returning the raw reduced matrix."""
    dims = op.dims
    n = len(dims)
    t = op.entries.reshape(dims + dims)
    return np.trace(t, axis1=index, axis2=n + index).reshape(
        op.shape.total_dim // dims[index], -1)


def acts_trivially_on(op: OperatorMatrix, index: int, tol: float = 1e-12) -> bool:
    """Whether ``op`` factors as (something) x I on subsystem ``index``."""
    dims = op.dims
    d = dims[index]
    reduced = partial_trace(op, index) / d
    # rebuild reduced (x) I with the identity slotted back at ``index``
    n = len(dims)
    rest = dims[:index] + dims[index + 1:]
    r = reduced.reshape(rest + rest)
    full = np.tensordot(r, np.eye(d), axes=0)
    # axes now: rest_out, rest_in, k_out, k_in -> reorder to out..., in...
    out_axes = list(range(n - 1))
    in_axes = list(range(n - 1, 2 * (n - 1)))
    k_out, k_in = 2 * (n - 1), 2 * (n - 1) + 1
    out_axes.insert(index, k_out)
    in_axes.insert(index, k_in)
    full = full.transpose(out_axes + in_axes).reshape(op.entries.shape)
    return bool(np.max(np.abs(full - op.entries), initial=0.0) <= tol)


def support(op: OperatorMatrix, tol: float = 1e-12) -> frozenset[int]:
    """0-based subsystems on which ``op`` acts nontrivially."""
    return frozenset(
        k for k in range(op.shape.n_subsystems) if not acts_trivially_on(op, k, tol))


# -- eigensolver -----------------------------------------------------------

def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns,
    unsorted.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.max(np.abs(a)), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def spectral(op: OperatorMatrix, degeneracy_tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    """Spectral projectors of a Hermitian operator, degenerate levels merged.

    Diagonalizes the real symmetric embedding ``[[Re, -Im], [Im, Re]]`` with
    cyclic Jacobi; every eigenvalue there appears twice, and the complex
    projector is read back off the upper-left and lower-left blocks.
    """
    if not op.hermitian:
        raise NotHermitian(
            f"operator is not Hermitian (max |M - M^dag| = {op.hermitian_error:.3g})")
    m = op.entries
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    big = np.block([[m.real, -m.imag], [m.imag, m.real]])
    vals, vecs = jacobi_eigh(big)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    groups: list[list[int]] = [[0]]
    for k in range(1, len(vals)):
        if vals[k] - vals[groups[-1][-1]] > degeneracy_tol:
            groups.append([k])
        else:
            groups[-1].append(k)

    eigenvalues = []
    projectors = []
    for g in groups:
        cols = vecs[:, g]
        q = cols @ cols.T
        p = q[:n, :n] + 1j * q[n:, :n]
        eigenvalues.append(float(np.mean(vals[g])))
        projectors.append(OperatorMatrix(p, op.shape))
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors))


# -- single-qubit constructors ---------------------------------------------

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
}

_SQRT_HALF = 1.0 / np.sqrt(2.0)

QUBIT_STATES = {
    "up": np.array([1, 0]),
    "down": np.array([0, 1]),
    "+x": _SQRT_HALF * np.array([1, 1]),
    "-x": _SQRT_HALF * np.array([1, -1]),
    "+y": _SQRT_HALF * np.array([1, 1j]),
    "-y": _SQRT_HALF * np.array([1, -1j]),
}


def pauli(name: str) -> OperatorMatrix:
    """Single-qubit Pauli matrix, ``name`` in I, X, Y, Z."""
    return OperatorMatrix(_PAULI[name.upper()], 2)


def qubit(label: str) -> StateVector:
    """Named single-qubit state: up, down, +x, -x, +y, -y.

    ``+y`` is ``(|up> + i|down>)/sqrt(2)``.
    """
    return StateVector(QUBIT_STATES[label], 2)


def qubit_projector(label: str) -> OperatorMatrix:
    return projector(qubit(label))


def product_state(labels: Sequence[str]) -> StateVector:
    return tensor_all(qubit(s) for s in labels)


def pauli_on(name: str, index: int, dims: ShapeLike) -> OperatorMatrix:
    """Pauli ``name`` on 0-based subsystem ``index``, identity elsewhere."""
    return embed(pauli(name), index, dims)
