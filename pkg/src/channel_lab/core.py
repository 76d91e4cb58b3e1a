"""Finite-dimensional operator and channel primitives.

Conventions, fixed once and used by every module:

* Composite spaces flatten row-major: basis label (i, k) of X (tensor) Y
  maps to index ``i * dim(Y) + k``, exactly the ``numpy.kron`` layout.
  The first tensor factor is the one kept by ``partial_trace(..., "E")``.
* The operator norm is the largest singular value, the trace norm the sum
  of singular values.
* Eigendecompositions are reproducible: eigenvalues ascending, ties broken
  by lexicographic comparison of eigenvector entries (real part, then
  imaginary part), and every eigenvector's first significant component
  rotated to be real positive.

Tolerances are module-level configuration.  Operations assume their inputs
passed construction-time validation and are free to rely on the invariants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Constructor-time invariant checks (trace preservation, isometry, ...).
TOL_VALID = 1e-10
#: Entrywise hermiticity tolerance.
TOL_HERM = 1e-12
#: Arithmetic identities (duality, trace consistency).
TOL_EXACT = 1e-12
#: Spectral comparisons between alternative constructions of one object.
TOL_SPECTRAL = 1e-8
#: How far below zero a "nonnegative" eigenvalue may slip.
TOL_EIG = 1e-10


class ValidationError(ValueError):
    """Raised when a value violates its construction-time invariants."""


def _cmat(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    a.setflags(write=False)
    return a


def _require_finite(m: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{what} contains non-finite entries")


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def opnorm(m: np.ndarray) -> float:
    """Operator norm (largest singular value)."""
    return float(np.linalg.norm(m, 2))


def trace_norm(x: np.ndarray) -> float:
    """Trace norm, the sum of singular values.

    Not the induced 1-norm that ``numpy.linalg.norm(x, 1)`` computes.
    """
    return float(np.linalg.norm(x, "nuc"))


def tensor(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kronecker product in the row-major flattening (i, k) -> i*dim(Y)+k."""
    return np.kron(x, y)


def partial_trace(x: np.ndarray, which: str, d_left: int, d_right: int) -> np.ndarray:
    """Trace out one tensor factor of a matrix on a d_left*d_right space.

    ``which`` names the factor that is traced out: ``"E"`` removes the
    second (right) factor and returns a d_left x d_left matrix with
    entries ``sum_e X[(b, e), (b', e)]``; ``"B"`` removes the first.
    """
    d = d_left * d_right
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (d, d):
        raise ValidationError(
            f"matrix of shape {x.shape} does not live on a {d_left}x{d_right} product space"
        )
    t = x.reshape(d_left, d_right, d_left, d_right)
    if which == "E":
        return np.trace(t, axis1=1, axis2=3)
    if which == "B":
        return np.trace(t, axis1=0, axis2=2)
    raise ValidationError(f"unknown factor {which!r}, expected 'B' or 'E'")


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector's global phase so its first significant entry is real positive."""
    mags = np.abs(v)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return v
    idx = int(np.argmax(mags > 1e-12 * top))
    pivot = v[idx]
    if pivot == 0:
        return v
    return v * (pivot.conjugate() / abs(pivot))


def _lex_key(v: np.ndarray) -> tuple:
    out = []
    for z in v:
        out.append(z.real)
        out.append(z.imag)
    return tuple(out)


def ordered_eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with a reproducible output convention.

    Eigenvalues ascend; exact ties are ordered lexicographically by the
    phase-fixed eigenvector entries.  Degenerate subspaces still admit many
    orthonormal bases, so only the ordering and phases are canonical, which
    is what downstream constructions need for determinism.
    """
    w, v = np.linalg.eigh(np.asarray(h, dtype=np.complex128))
    cols = [_fix_phase(v[:, k]) for k in range(v.shape[1])]
    order = sorted(range(len(w)), key=lambda k: (w[k],) + _lex_key(cols[k]))
    vals = np.array([w[k] for k in order])
    vecs = np.column_stack([cols[k] for k in order]) if order else v
    return vals, vecs


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A state: Hermitian, positive semidefinite, unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _cmat(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError(f"density operator must be square, got shape {m.shape}")
        _require_finite(m, "density operator")
        herm = np.max(np.abs(m - dagger(m)))
        if herm > TOL_HERM:
            raise ValidationError(f"density operator is not Hermitian (deviation {herm:.3e})")
        low = float(np.linalg.eigvalsh(m).min())
        if low < -TOL_EIG:
            raise ValidationError(f"density operator has negative eigenvalue {low:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TOL_VALID:
            raise ValidationError(f"density operator has trace {tr:.12g}, expected 1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Observable:
    """A bounded operator used on the dual side.  No hermiticity is required."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _cmat(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError(f"observable must be square, got shape {m.shape}")
        _require_finite(m, "observable")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A channel presented by Kraus operators ``rho -> sum_i A_i rho A_i*``.

    All operators share one (d_out, d_in) shape and the family is trace
    preserving: ``sum_i A_i* A_i = I`` within ``TOL_VALID`` in operator norm.
    Zero operators are legal members.
    """

    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(_cmat(a) for a in self.kraus_ops)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or 0 in shape:
            raise ValidationError(f"Kraus operators must be matrices, got shape {shape}")
        for a in ops:
            if a.shape != shape:
                raise ValidationError(
                    f"Kraus operators disagree in shape: {a.shape} vs {shape}"
                )
            _require_finite(a, "Kraus operator")
        total = sum(dagger(a) @ a for a in ops)
        defect = opnorm(total - np.eye(shape[1]))
        if defect > TOL_VALID:
            raise ValidationError(
                f"Kraus family is not trace preserving: ||sum A*A - I|| = {defect:.3e}"
            )
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def d_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus_ops[0].shape[0]


@dataclass(frozen=True, eq=False)
class StinespringIsometry:
    """An isometry V from the input space into output (tensor) environment.

    ``v`` has shape (d_out * d_env, d_in) in the row-major flattening, and
    ``V* V = I`` within ``TOL_VALID``.  The channel it presents is
    ``rho -> Tr_env V rho V*``.
    """

    v: np.ndarray
    d_out: int
    d_env: int

    def __post_init__(self):
        m = _cmat(self.v)
        if self.d_out < 1 or self.d_env < 1:
            raise ValidationError(
                f"dimensions must be positive, got d_out={self.d_out}, d_env={self.d_env}"
            )
        if m.ndim != 2 or m.shape[0] != self.d_out * self.d_env or m.shape[1] == 0:
            raise ValidationError(
                f"isometry of shape {m.shape} does not match d_out*d_env = "
                f"{self.d_out}*{self.d_env}"
            )
        _require_finite(m, "isometry")
        defect = opnorm(dagger(m) @ m - np.eye(m.shape[1]))
        if defect > TOL_VALID:
            raise ValidationError(f"V*V deviates from identity by {defect:.3e}")
        object.__setattr__(self, "v", m)

    @property
    def d_in(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True, eq=False)
class PartialIsometry:
    """A matrix W whose restriction to (ker W)^perp is isometric.

    Equivalently W*W is a projector, checked as ``||(W*W)^2 - W*W|| <=
    TOL_VALID`` in operator norm.  Rectangular shapes are allowed.
    """

    w: np.ndarray

    def __post_init__(self):
        m = _cmat(self.w)
        if m.ndim != 2 or 0 in m.shape:
            raise ValidationError(f"partial isometry must be a matrix, got shape {m.shape}")
        _require_finite(m, "partial isometry")
        p = dagger(m) @ m
        defect = opnorm(p @ p - p)
        if defect > TOL_VALID:
            raise ValidationError(f"W*W is not a projector (defect {defect:.3e})")
        object.__setattr__(self, "w", m)

    @property
    def d_in(self) -> int:
        return self.w.shape[1]

    @property
    def d_out(self) -> int:
        return self.w.shape[0]

    @property
    def initial_projector(self) -> np.ndarray:
        """The projector W*W onto the initial subspace."""
        return dagger(self.w) @ self.w

    @property
    def range_projector(self) -> np.ndarray:
        """The projector WW* onto the range."""
        return self.w @ dagger(self.w)


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    """A square unitary, both ``U*U`` and ``UU*`` within ``TOL_VALID`` of I."""

    u: np.ndarray

    def __post_init__(self):
        m = _cmat(self.u)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError(f"unitary must be square, got shape {m.shape}")
        _require_finite(m, "unitary")
        eye = np.eye(m.shape[0])
        left = opnorm(dagger(m) @ m - eye)
        right = opnorm(m @ dagger(m) - eye)
        if max(left, right) > TOL_VALID:
            raise ValidationError(
                f"matrix is not unitary: ||U*U-I||={left:.3e}, ||UU*-I||={right:.3e}"
            )
        object.__setattr__(self, "u", m)

    @property
    def dim(self) -> int:
        return self.u.shape[0]


def channel_action(ch: KrausChannel, x: np.ndarray) -> np.ndarray:
    """The linear action ``sum_i A_i X A_i*`` on an arbitrary matrix."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (ch.d_in, ch.d_in):
        raise ValidationError(
            f"channel expects a {ch.d_in}x{ch.d_in} input, got shape {x.shape}"
        )
    out = np.zeros((ch.d_out, ch.d_out), dtype=np.complex128)
    for a in ch.kraus_ops:
        out += a @ x @ dagger(a)
    return out


def dual_action(ch: KrausChannel, b: np.ndarray) -> np.ndarray:
    """The dual (Heisenberg picture) action ``sum_i A_i* B A_i``."""
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (ch.d_out, ch.d_out):
        raise ValidationError(
            f"dual action expects a {ch.d_out}x{ch.d_out} operator, got shape {b.shape}"
        )
    out = np.zeros((ch.d_in, ch.d_in), dtype=np.complex128)
    for a in ch.kraus_ops:
        out += dagger(a) @ b @ a
    return out


def apply_kraus(ch: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Apply a channel to a state."""
    if rho.dim != ch.d_in:
        raise ValidationError(f"channel input dim {ch.d_in} != state dim {rho.dim}")
    return DensityOperator(channel_action(ch, rho.matrix))


def dual_apply(ch: KrausChannel, b: Observable) -> Observable:
    """Apply the dual map to an observable, so that
    ``Tr apply_kraus(ch, rho) B = Tr rho dual_apply(ch, B)``."""
    if b.dim != ch.d_out:
        raise ValidationError(f"channel output dim {ch.d_out} != observable dim {b.dim}")
    return Observable(dual_action(ch, b.matrix))


def apply_stinespring(v: StinespringIsometry, rho: DensityOperator) -> DensityOperator:
    """Apply ``rho -> Tr_env V rho V*``."""
    if rho.dim != v.d_in:
        raise ValidationError(f"isometry input dim {v.d_in} != state dim {rho.dim}")
    big = v.v @ rho.matrix @ dagger(v.v)
    return DensityOperator(partial_trace(big, "E", v.d_out, v.d_env))


def complementary(v: StinespringIsometry, rho: DensityOperator) -> DensityOperator:
    """Apply the complementary channel ``rho -> Tr_out V rho V*``."""
    if rho.dim != v.d_in:
        raise ValidationError(f"isometry input dim {v.d_in} != state dim {rho.dim}")
    big = v.v @ rho.matrix @ dagger(v.v)
    return DensityOperator(partial_trace(big, "B", v.d_out, v.d_env))


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """The Choi matrix ``sum_ij ch(E_ij) (tensor) E_ij`` on output (x) input."""
    j = np.zeros((ch.d_out * ch.d_in,) * 2, dtype=np.complex128)
    for a in ch.kraus_ops:
        vec = a.reshape(-1)
        j += np.outer(vec, vec.conj())
    return j


def max_action_deviation(a: KrausChannel, b: KrausChannel) -> float:
    """Largest trace-norm disagreement of two channels over the matrix-unit basis."""
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise ValidationError(
            f"channels act between different spaces: "
            f"({a.d_in},{a.d_out}) vs ({b.d_in},{b.d_out})"
        )
    worst = 0.0
    for i in range(a.d_in):
        for j in range(a.d_in):
            unit = np.zeros((a.d_in, a.d_in), dtype=np.complex128)
            unit[i, j] = 1.0
            worst = max(worst, trace_norm(channel_action(a, unit) - channel_action(b, unit)))
    return worst


def tensor_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Tensor product channel with the pairwise Kraus family {A_i (x) B_j}."""
    return KrausChannel(tuple(tensor(x, y) for x in a.kraus_ops for y in b.kraus_ops))


def compose_channels(first: KrausChannel, then: KrausChannel) -> KrausChannel:
    """Composition (apply ``first``, then ``then``) with Kraus family {B_j A_i}."""
    if first.d_out != then.d_in:
        raise ValidationError(
            f"cannot compose: first channel outputs dim {first.d_out}, "
            f"second expects dim {then.d_in}"
        )
    return KrausChannel(tuple(y @ x for x in first.kraus_ops for y in then.kraus_ops))


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),))


def dephasing_channel(keep: float = 0.0) -> KrausChannel:
    """Qubit channel multiplying off-diagonal entries by ``keep``.

    ``keep = 0`` is full dephasing with Kraus {diag(1,0), diag(0,1)}.
    """
    if not 0.0 <= keep <= 1.0:
        raise ValidationError(f"off-diagonal factor must lie in [0, 1], got {keep}")
    ops = [np.diag([1.0, keep]).astype(np.complex128)]
    if keep < 1.0:
        ops.append(np.diag([0.0, np.sqrt(1.0 - keep * keep)]).astype(np.complex128))
    return KrausChannel(tuple(ops))


def depolarizing_qubit_channel() -> KrausChannel:
    """The completely depolarizing qubit channel, Kraus {|i><j| / sqrt(2)}."""
    ops = []
    for i in range(2):
        for j in range(2):
            a = np.zeros((2, 2), dtype=np.complex128)
            a[i, j] = 1.0 / np.sqrt(2.0)
            ops.append(a)
    return KrausChannel(tuple(ops))


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    """Qubit amplitude damping with decay probability ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"damping probability must lie in [0, 1], got {gamma}")
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    a1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return KrausChannel((a0, a1))


def replacement_channel(sigma: DensityOperator, d_in: int) -> KrausChannel:
    """The constant channel ``rho -> Tr(rho) sigma``."""
    vals, vecs = ordered_eigh(sigma.matrix)
    ops = []
    for k in range(len(vals)):
        if vals[k] <= 1e-12:
            continue
        for m in range(d_in):
            a = np.zeros((sigma.dim, d_in), dtype=np.complex128)
            a[:, m] = np.sqrt(vals[k]) * vecs[:, k]
            ops.append(a)
    return KrausChannel(tuple(ops))
