"""Time-local generators in GKSL form and their structure.

A generator acts on density matrices as

    L[rho] = -i [H, rho] + sum_k gamma_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})

with possibly negative time-dependent rates gamma_k. It is stored densely
on column-stacked operators (see :mod:`decotherm.linops` for the
convention). This module builds such generators, finds their instantaneous
fixed points, extracts the minimal-dissipation effective Hamiltonian, and
detects pure-decoherence structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NoFixedPointError, NotDephasingError, ValidationError
from .linops import check_hermitian, check_square, kron_super, unvec, vec

SUPEROP_TOL = 1e-10


@dataclass(frozen=True)
class LindbladTerm:
    """One dissipator channel: a rate (may be negative) and its operator."""

    rate: float
    operator: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "operator", check_square(self.operator))
        if not np.isfinite(self.rate):
            raise ValidationError("rate must be finite")


class Superoperator:
    """Dense linear map on column-stacked operators of an N-dimensional system.

    Valid generators are trace annihilating (``vec(I)^dag @ matrix == 0``)
    and Hermiticity preserving (``L[X^dag] == L[X]^dag``); both are checked
    at construction unless ``validate=False``.
    """

    def __init__(self, matrix: np.ndarray, validate: bool = True, tol: float = SUPEROP_TOL):
        matrix = check_square(matrix)
        dim = int(round(np.sqrt(matrix.shape[0])))
        if dim * dim != matrix.shape[0]:
            raise ValidationError(
                f"superoperator size {matrix.shape[0]} is not a perfect square"
            )
        self.dim = dim
        self.matrix = matrix
        if validate:
            self._validate(tol)

    def _validate(self, tol: float):
        n = self.dim
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        trace_row = vec(np.eye(n)).conj() @ self.matrix
        dev = np.max(np.abs(trace_row))
        if dev > tol * scale:
            raise ValidationError(f"not trace annihilating: |vec(I)^dag L| = {dev:.3e}")
        for m in range(n):
            for k in range(n):
                basis = np.zeros((n, n), dtype=complex)
                basis[m, k] = 1.0
                left = self(basis.conj().T)
                right = self(basis).conj().T
                dev = np.max(np.abs(left - right))
                if dev > tol * scale:
                    raise ValidationError(
                        f"not Hermiticity preserving on |{m}><{k}|: deviation {dev:.3e}"
                    )

    def __call__(self, operator: np.ndarray) -> np.ndarray:
        operator = np.asarray(operator, dtype=complex)
        if operator.shape != (self.dim, self.dim):
            raise ValidationError(
                f"operator shape {operator.shape} does not match dimension {self.dim}"
            )
        return unvec(self.matrix @ vec(operator), self.dim)


def build_superoperator(
    hamiltonian: np.ndarray,
    terms: Sequence[LindbladTerm] = (),
    validate: bool = False,
) -> Superoperator:
    """Assemble the GKSL generator for a Hamiltonian and dissipator terms.

    The result is trace annihilating and Hermiticity preserving by
    construction; set ``validate=True`` to have that re-checked.
    """
    h = check_hermitian(np.asarray(hamiltonian, dtype=complex), tol=1e-10)
    n = h.shape[0]
    eye = np.eye(n)
    mat = -1j * (kron_super(h, eye) - kron_super(eye, h))
    for term in terms:
        op = term.operator
        if op.shape != (n, n):
            raise ValidationError(
                f"Lindblad operator shape {op.shape} does not match dimension {n}"
            )
        opd_op = op.conj().T @ op
        mat = mat + term.rate * (
            kron_super(op, op.conj().T)
            - 0.5 * (kron_super(opd_op, eye) + kron_super(eye, opd_op))
        )
    return Superoperator(mat, validate=validate)


def apply(superop: Superoperator, rho: np.ndarray) -> np.ndarray:
    """Apply a superoperator to an operator (devectorized matrix-vector product)."""
    return superop(rho)


class FixedPoints(NamedTuple):
    kernel_basis: list  # Hermitian, unit Frobenius norm, spanning the kernel
    states: list        # positive unit-trace representatives (may be empty)

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel_basis)


def _hermitian_kernel_basis(kernel_vecs: np.ndarray, dim: int) -> list:
    """Turn complex kernel vectors into a real-orthonormal Hermitian basis.

    The kernel of a Hermiticity-preserving map is closed under the adjoint,
    so its Hermitian elements span it; orthonormalize over the reals.
    """
    candidates = []
    for col in kernel_vecs.T:
        x = unvec(col, dim)
        candidates.append((x + x.conj().T) / 2.0)
        candidates.append((x - x.conj().T) / 2.0j)
    stacked = np.array([np.concatenate([vec(c).real, vec(c).imag]) for c in candidates])
    # real SVD keeps combinations real, hence Hermitian
    u, s, vt = np.linalg.svd(stacked.T, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(s[0], 1e-300)))
    basis = []
    for i in range(rank):
        re, im = u[: dim * dim, i], u[dim * dim :, i]
        mat = unvec(re + 1j * im, dim)
        mat = (mat + mat.conj().T) / 2.0
        basis.append(mat / np.linalg.norm(mat))
    return basis


def instantaneous_fixed_points(superop: Superoperator, tol: float = 1e-9) -> FixedPoints:
    """Kernel of the generator and positive unit-trace representatives.

    The kernel is detected by singular value decomposition with relative
    threshold ``tol * sigma_max`` (robust when time-dependent rates pass
    through zero). Kernel elements are Hermitized; states are collected
    from trace-normalized kernel elements and kernel combinations that
    turn out positive. ``states`` may be empty when no positive
    representative is found; the kernel basis is still returned.
    """
    n = superop.dim
    u, s, vh = np.linalg.svd(superop.matrix)
    smax = s[0] if len(s) else 0.0
    if smax == 0.0:
        null_mask = np.ones(len(s), dtype=bool)
    else:
        null_mask = s <= tol * smax
    if not np.any(null_mask):
        raise NoFixedPointError(
            f"no IFP found: smallest singular value {s[-1]:.3e} exceeds "
            f"{tol:.1e} * sigma_max = {tol * smax:.3e}"
        )
    kernel_vecs = vh.conj().T[:, null_mask]
    basis = _hermitian_kernel_basis(kernel_vecs, n)

    # positive unit-trace representatives: single elements, the projection of
    # the maximally mixed state onto the kernel, and the mean of positive hits
    candidates = []
    for b in basis:
        tr = np.trace(b).real
        if abs(tr) > 1e-10:
            candidates.append(b / tr)
    proj = np.zeros((n, n), dtype=complex)
    mixed = np.eye(n) / n
    for b in basis:
        proj += np.vdot(vec(b), vec(mixed)) * b
    if abs(np.trace(proj)) > 1e-10:
        candidates.append(proj / np.trace(proj).real)

    states = []
    for cand in candidates:
        cand = (cand + cand.conj().T) / 2.0
        lam = np.linalg.eigvalsh(cand)
        if lam[0] >= -1e-10:
            cand = cand / np.trace(cand).real
            if not any(np.max(np.abs(cand - st)) < 1e-9 for st in states):
                states.append(cand)
    if len(states) > 1:
        mean = sum(states) / len(states)
        if not any(np.max(np.abs(mean - st)) < 1e-9 for st in states):
            states.append(mean)
    return FixedPoints(kernel_basis=basis, states=states)


def effective_hamiltonian(superop: Superoperator) -> np.ndarray:
    """Minimal-dissipation effective Hamiltonian extracted from a generator.

    For any orthonormal basis {|n>} of the N-dimensional space,

        K = (1 / 2iN) sum_{m,n} [ |n><m| , L[|m><n|] ]

    which is traceless and basis independent. The computational basis is
    used here; basis independence is asserted in tests rather than trusted.
    """
    n = superop.dim
    acc = np.zeros((n, n), dtype=complex)
    for m in range(n):
        for k in range(n):
            e_mk = np.zeros((n, n), dtype=complex)
            e_mk[m, k] = 1.0
            image = superop(e_mk)
            e_km = e_mk.conj().T
            acc += e_km @ image - image @ e_km
    k_eff = acc / (2j * n)
    herm_dev = np.max(np.abs(k_eff - k_eff.conj().T))
    if herm_dev > 1e-9 * max(1.0, np.max(np.abs(k_eff))):
        raise ValidationError(
            f"extracted Hamiltonian is not Hermitian (deviation {herm_dev:.3e}); "
            "the generator is not Hermiticity preserving"
        )
    return (k_eff + k_eff.conj().T) / 2.0


def to_minimal_dissipation(hamiltonian: np.ndarray, terms: Sequence[LindbladTerm]):
    """Rewrite a generator with traceless Lindblad operators.

    Splitting each L_k = L'_k + c_k I with c_k = Tr(L_k)/N shifts the
    commutator part by sum_k gamma_k * i(c_k^* L'_k - c_k L'_k^dag)/2. The
    returned Hamiltonian is traceless (an identity component never acts),
    and ``build_superoperator(K, terms')`` equals the original generator.
    """
    h = check_hermitian(np.asarray(hamiltonian, dtype=complex), tol=1e-10)
    n = h.shape[0]
    k_eff = h.astype(complex).copy()
    new_terms = []
    for term in terms:
        op = term.operator
        c = np.trace(op) / n
        op_traceless = op - c * np.eye(n)
        shift = 0.5j * (np.conj(c) * op_traceless - c * op_traceless.conj().T)
        k_eff += term.rate * shift
        new_terms.append(LindbladTerm(rate=term.rate, operator=op_traceless))
    k_eff -= (np.trace(k_eff) / n) * np.eye(n)
    return (k_eff + k_eff.conj().T) / 2.0, new_terms


@dataclass(frozen=True)
class DephasingCoefficients:
    """Coefficients gamma_jk of a pure-decoherence generator.

    The generator reads ``L[rho] = sum_jk gamma_jk |j><j| rho |k><k|`` in
    the stored orthonormal basis (columns of ``basis``), with
    ``gamma_jk = conj(gamma_kj)`` and zero diagonal.
    """

    gamma: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        g = check_square(self.gamma)
        b = check_square(self.basis)
        if g.shape != b.shape:
            raise ValidationError("gamma and basis dimensions differ")
        if np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))) > 1e-10:
            raise ValidationError("basis is not orthonormal")
        if np.max(np.abs(g - g.conj().T)) > 1e-10:
            raise ValidationError("gamma_jk != conj(gamma_kj)")
        if np.max(np.abs(np.diag(g))) > 1e-10:
            raise ValidationError("gamma has nonzero diagonal")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]


def dephasing_coefficients(
    superop: Superoperator,
    basis: np.ndarray | None = None,
    tol: float = 1e-9,
) -> DephasingCoefficients:
    """Expand a generator over projectors of an orthonormal basis.

    Writing ``L[rho] = sum_{jkln} c_{jkln} |j><k| rho |l><n|``, a
    pure-decoherence generator has support only on j = k, l = n. Any
    off-structure coefficient above ``tol`` raises
    :class:`NotDephasingError` naming the largest violator.
    """
    n = superop.dim
    if basis is None:
        basis = np.eye(n, dtype=complex)
    basis = check_square(basis)
    if np.max(np.abs(basis.conj().T @ basis - np.eye(n))) > 1e-10:
        raise ValidationError("basis is not orthonormal")

    gamma = np.zeros((n, n), dtype=complex)
    worst = (0.0, None)
    for k in range(n):
        for l in range(n):
            e_kl = np.outer(basis[:, k], basis[:, l].conj())
            image = basis.conj().T @ superop(e_kl) @ basis
            # c_{j k l n} sits at entry (j, n) of the image of |k><l|
            gamma[k, l] = image[k, l]
            image[k, l] = 0.0
            j, m = np.unravel_index(np.argmax(np.abs(image)), image.shape)
            if abs(image[j, m]) > worst[0]:
                worst = (abs(image[j, m]), (int(j), k, l, int(m)))
    if worst[0] > tol:
        j, k, l, m = worst[1]
        raise NotDephasingError(
            "not a pure-decoherence generator in this basis: coefficient "
            f"c[{j},{k},{l},{m}] = {worst[0]:.3e} exceeds {tol:.1e}"
        )
    return DephasingCoefficients(gamma=gamma, basis=basis)


def dephasing_superoperator(coeffs: DephasingCoefficients) -> Superoperator:
    """Rebuild the generator ``sum_jk gamma_jk |j><j| rho |k><k|``."""
    n = coeffs.dim
    mat = np.zeros((n * n, n * n), dtype=complex)
    projectors = [
        np.outer(coeffs.basis[:, j], coeffs.basis[:, j].conj()) for j in range(n)
    ]
    for j in range(n):
        for k in range(n):
            if coeffs.gamma[j, k] != 0.0:
                mat += coeffs.gamma[j, k] * kron_super(projectors[j], projectors[k])
    return Superoperator(mat, validate=False)


def dephasing_effective_hamiltonian(coeffs: DephasingCoefficients) -> np.ndarray:
    """Effective Hamiltonian of a pure-decoherence generator.

    Diagonal in the stored basis: ``K = (1/N) sum_n (sum_m Im gamma_mn) |n><n|``.
    """
    n = coeffs.dim
    diag = coeffs.gamma.imag.sum(axis=0) / n
    return (coeffs.basis * diag) @ coeffs.basis.conj().T
