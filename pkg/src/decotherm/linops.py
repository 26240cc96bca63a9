"""Dense complex linear algebra for small Hilbert spaces.

Eigendecompositions, matrix functions, entropies (natural log throughout)
and partial traces, all on plain complex ``numpy`` arrays.

Vectorization convention used package-wide: column stacking, so that
``vec(A X B) = kron(B.T, A) @ vec(X)``.
"""

from __future__ import annotations

import numpy as np

from .errors import SupportError, ValidationError

HERMITICITY_TOL = 1e-12
EIGENVALUE_CLIP = 1e-10


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(matrix).ravel(order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec` for a square ``dim x dim`` matrix."""
    return np.asarray(vector).reshape((dim, dim), order="F")


def kron_super(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> A X B`` on column-stacked vectors: ``kron(B.T, A)``."""
    return np.kron(np.asarray(b).T, np.asarray(a))


def check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def check_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate hermiticity within ``tol`` (max elementwise) and return the array."""
    a = check_square(a)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian: max |A - A^dag| = {dev:.3e}")
    return a


def check_density_matrix(
    rho: np.ndarray,
    tol: float = HERMITICITY_TOL,
    eig_tol: float = HERMITICITY_TOL,
) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, eigenvalues >= -eig_tol."""
    rho = check_hermitian(rho, tol)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"trace is {tr:.15g}, expected 1 within {tol:.1e}")
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < -eig_tol:
        raise ValidationError(f"negative eigenvalue {lam[0]:.3e} below -{eig_tol:.1e}")
    return rho


def eig_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as the columns of a unitary matrix, so that
    ``A = V @ diag(lam) @ V.conj().T``.
    """
    a = check_hermitian(a, tol)
    lam, vecs = np.linalg.eigh(a)
    return lam, vecs


def _entropy_eigenvalues(rho: np.ndarray, clip: float) -> np.ndarray:
    """Eigenvalues of a state, with round-off negatives in [-clip, 0) set to 0."""
    lam = np.linalg.eigvalsh(check_hermitian(rho))
    if lam[0] < -clip:
        raise ValidationError(
            f"eigenvalue {lam[0]:.3e} is more negative than the clip window -{clip:.1e}"
        )
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho: np.ndarray, clip: float = EIGENVALUE_CLIP) -> float:
    """Von Neumann entropy -Tr(rho ln rho) in nats, with 0 ln 0 := 0.

    Tiny negative results (an eigenvalue at 1 + round-off after clipping)
    are clamped to zero.
    """
    lam = _entropy_eigenvalues(rho, clip)
    pos = lam[lam > 0.0]
    value = float(-(pos * np.log(pos)).sum())
    if -clip <= value < 0.0:
        value = 0.0
    return value


def matrix_log_hermitian(a: np.ndarray, support_tol: float = 1e-12) -> np.ndarray:
    """Logarithm of a positive Hermitian matrix on its support.

    Eigenvalues at or below ``support_tol`` are excluded; the log is only
    meaningful when contracted against operators supported on supp(a).
    """
    lam, v = eig_hermitian(a)
    keep = lam > support_tol
    if not np.any(keep):
        raise ValidationError("matrix has empty support at the given tolerance")
    log_lam = np.zeros_like(lam)
    log_lam[keep] = np.log(lam[keep])
    return (v * log_lam) @ v.conj().T


def relative_entropy(
    rho: np.ndarray,
    sigma: np.ndarray,
    support_tol: float = 1e-12,
) -> float:
    """Quantum relative entropy D(rho || sigma) = Tr(rho ln rho) - Tr(rho ln sigma).

    Requires supp(rho) to lie inside supp(sigma); eigenvalues of ``sigma``
    at or below ``support_tol`` count as its kernel. Small negative results
    from round-off (above -1e-12) are clamped to zero.
    """
    rho = check_density_matrix(rho, eig_tol=EIGENVALUE_CLIP)
    sigma = check_density_matrix(sigma, eig_tol=EIGENVALUE_CLIP)
    if rho.shape != sigma.shape:
        raise ValidationError(f"shape mismatch {rho.shape} vs {sigma.shape}")

    mu, w = eig_hermitian(sigma)
    kernel = mu <= support_tol
    if np.any(kernel):
        # mass of rho on the kernel of sigma must vanish
        overlap = np.real(np.einsum("ij,ji->i", w.conj().T @ rho, w))
        bad = kernel & (overlap > support_tol)
        if np.any(bad):
            i = int(np.argmax(np.where(bad, overlap, -np.inf)))
            raise SupportError(
                f"support violation: sigma eigenvalue {mu[i]:.3e} (index {i}) "
                f"carries rho-mass {overlap[i]:.3e}"
            )

    lam = _entropy_eigenvalues(rho, EIGENVALUE_CLIP)
    pos = lam[lam > 0.0]
    tr_rho_ln_rho = float((pos * np.log(pos)).sum())

    proj = np.real(np.einsum("ij,ji->i", w.conj().T @ rho, w))
    good = mu > support_tol
    tr_rho_ln_sigma = float((proj[good] * np.log(mu[good])).sum())

    value = tr_rho_ln_rho - tr_rho_ln_sigma
    if -1e-12 <= value < 0.0:
        value = 0.0
    return value


def partial_trace(rho: np.ndarray, dims, keep: int) -> np.ndarray:
    """Trace out every tensor factor except ``dims[keep]``.

    ``dims`` lists the factor dimensions in tensor order (first factor is
    the slowest index), and their product must match the matrix dimension.
    """
    rho = check_square(rho)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValidationError(f"dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if rho.shape[0] != total:
        raise ValidationError(
            f"matrix dimension {rho.shape[0]} != product of factors {total}"
        )
    if not 0 <= keep < len(dims):
        raise ValidationError(f"keep index {keep} out of range for {len(dims)} factors")

    n = len(dims)
    tensor = rho.reshape(dims + dims)
    # traced factors share a label between their row and column axes
    row_labels = list(range(n))
    col_labels = list(range(n))
    col_labels[keep] = n
    return np.einsum(tensor, row_labels + col_labels, [keep, n])
