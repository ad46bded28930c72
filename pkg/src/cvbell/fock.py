"""Dense truncated Fock-lattice states and operators for a few bosonic modes.

A state lives on ``n_modes`` modes with a uniform single-mode cutoff ``d``
(basis |0>..|d-1> per mode). Every state carries a *headroom* ``h``: a
guarantee that no populated basis state has occupation above ``d-1-h`` in any
mode. Operator words whose per-mode creation count stays within the headroom
are therefore evaluated exactly, with no silent truncation error.

Multi-index linearization is row-major with mode 0 slowest; the moments
module shares this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import BipartitionError, CutoffError, HeadroomError, TruncationError

LadderOp = Literal["annihilate", "create"]

_TRUNCATION_BUDGET = 1e-10


@dataclass(frozen=True)
class ModeSpec:
    """Number of modes and the uniform per-mode Fock cutoff."""

    n_modes: int
    cutoff: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.cutoff < 2:
            raise ValueError("cutoff must be >= 2")
        if self.cutoff ** self.n_modes > 2**31:
            raise ValueError("total dimension exceeds supported desk scale")

    @property
    def dim(self) -> int:
        return self.cutoff ** self.n_modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cutoff,) * self.n_modes


@dataclass
class DenseState:
    """Pure tensor or density matrix on the truncated lattice.

    ``array`` is a complex tensor of shape ``(d,)*n`` for pure states, or a
    ``(d**n, d**n)`` matrix for mixed states. States are treated as immutable
    after construction.
    """

    mode_spec: ModeSpec
    kind: Literal["pure", "mixed"]
    array: np.ndarray
    headroom: int = 0

    def __post_init__(self):
        self.array = np.asarray(self.array, dtype=complex)
        if self.kind == "pure":
            if self.array.shape != self.mode_spec.shape:
                raise ValueError("pure amplitude tensor has wrong shape")
        elif self.kind == "mixed":
            if self.array.shape != (self.mode_spec.dim, self.mode_spec.dim):
                raise ValueError("density matrix has wrong shape")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if not 0 <= self.headroom < self.mode_spec.cutoff:
            raise ValueError("headroom out of range")

    @property
    def n_modes(self) -> int:
        return self.mode_spec.n_modes

    @property
    def cutoff(self) -> int:
        return self.mode_spec.cutoff

    def to_density_matrix(self) -> np.ndarray:
        if self.kind == "mixed":
            return self.array
        vec = self.array.reshape(-1)
        return np.outer(vec, vec.conj())

    def max_occupation(self) -> int:
        """Largest per-mode occupation actually populated (amplitude scan)."""
        d, n = self.cutoff, self.n_modes
        if self.kind == "pure":
            weights = np.abs(self.array)
        else:
            weights = np.abs(np.diagonal(self.array)).reshape((d,) * n)
        occ = 0
        for k in range(n):
            axes = tuple(i for i in range(n) if i != k)
            marginal = weights.sum(axis=axes) if axes else weights
            populated = np.nonzero(marginal > 1e-14)[0]
            if populated.size:
                occ = max(occ, int(populated.max()))
        return occ

    def check_invariants(self, check_psd: bool = True) -> None:
        """Raise if the stored array is not a valid state of its kind."""
        if self.kind == "pure":
            norm = np.linalg.norm(self.array)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"pure state norm {norm} != 1")
        else:
            dev = np.max(np.abs(self.array - self.array.conj().T))
            if dev > 1e-12:
                raise ValueError(f"density matrix Hermiticity residue {dev}")
            tr = np.trace(self.array)
            if abs(tr - 1.0) > 1e-12:
                raise ValueError(f"density matrix trace {tr} != 1")
            if check_psd:
                lo = float(np.linalg.eigvalsh(self.array)[0])
                if lo < -1e-10:
                    raise ValueError(f"density matrix min eigenvalue {lo} < 0")
        if self.max_occupation() > self.cutoff - 1 - self.headroom:
            raise ValueError("declared headroom inconsistent with support")


@dataclass
class PartialTransposeResult:
    """Minimal eigenvalue of a partially transposed density matrix."""

    bipartition: frozenset[int]
    min_eigenvalue: float
    witness_vector: np.ndarray


# ---------------------------------------------------------------------------
# single-mode operator matrices


@lru_cache(maxsize=None)
def ladder_matrix_tuple(d: int, op: LadderOp) -> tuple:
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
    m = a if op == "annihilate" else a.conj().T
    return (m,)


def ladder_matrix(d: int, op: LadderOp) -> np.ndarray:
    """Truncated d x d matrix of a or a-dagger."""
    return ladder_matrix_tuple(d, op)[0]


@lru_cache(maxsize=None)
def _monomial_cached(d: int, q: int, p: int) -> tuple:
    m = np.zeros((d, d))
    for col in range(p, d):
        row = col - p + q
        if row < d:
            m[row, col] = math.sqrt(math.perm(col, p) * math.perm(row, q))
    return (m,)


def monomial_matrix(d: int, q: int, p: int) -> np.ndarray:
    """Exact matrix elements <m'| a^dag^q a^p |m> on the d-dim truncation."""
    return _monomial_cached(d, q, p)[0]


# ---------------------------------------------------------------------------
# constructors


def _support_cap(spec: ModeSpec, headroom: int) -> int:
    cap = spec.cutoff - 1 - headroom
    if cap < 0:
        raise ValueError("headroom exceeds cutoff")
    return cap


def from_amplitudes(spec: ModeSpec, tensor: np.ndarray,
                    headroom: int | None = None) -> DenseState:
    """Wrap a (normalized) amplitude tensor; infer headroom if not given."""
    arr = np.asarray(tensor, dtype=complex).reshape(spec.shape)
    nrm = np.linalg.norm(arr)
    if nrm == 0:
        raise ValueError("zero amplitude tensor")
    arr = arr / nrm
    state = DenseState(spec, "pure", arr, headroom=0)
    occ = state.max_occupation()
    inferred = spec.cutoff - 1 - occ
    if headroom is None:
        headroom = inferred
    elif headroom > inferred:
        raise ValueError("requested headroom inconsistent with support")
    return DenseState(spec, "pure", arr, headroom=headroom)


def make_basis_state(spec: ModeSpec, occupations: Sequence[int]) -> DenseState:
    if len(occupations) != spec.n_modes:
        raise ValueError("one occupation per mode required")
    for k, m in enumerate(occupations):
        if not 0 <= m < spec.cutoff:
            raise CutoffError(f"occupation {m} on mode {k} exceeds cutoff {spec.cutoff}")
    arr = np.zeros(spec.shape, dtype=complex)
    arr[tuple(occupations)] = 1.0
    return DenseState(spec, "pure", arr,
                      headroom=spec.cutoff - 1 - max(occupations))


def make_ghz_like(spec: ModeSpec, phase: complex = 1.0) -> DenseState:
    """(|0...0> + phase |1...1>)/sqrt(2) with |phase| = 1."""
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError("phase must lie on the unit circle")
    arr = np.zeros(spec.shape, dtype=complex)
    arr[(0,) * spec.n_modes] = 1.0 / math.sqrt(2)
    arr[(1,) * spec.n_modes] = phase / math.sqrt(2)
    return DenseState(spec, "pure", arr, headroom=spec.cutoff - 2)


def _coherent_vector(alpha: complex, top: int) -> np.ndarray:
    m = np.arange(top + 1)
    logfact = np.cumsum(np.log(np.maximum(m, 1)))
    return np.exp(-abs(alpha) ** 2 / 2 + m * np.log(complex(alpha))
                  - logfact / 2) if alpha != 0 else np.eye(top + 1, 1, dtype=complex)[:, 0]


def make_coherent_product(spec: ModeSpec, alphas: Sequence[complex],
                          headroom: int = 2) -> DenseState:
    """Normalized truncated product of coherent states |alpha_k>.

    Support is capped at d-1-headroom per mode; the dropped tail must fit
    inside the truncation budget, else the offending mode is reported.
    """
    if len(alphas) != spec.n_modes:
        raise ValueError("one alpha per mode required")
    cap = _support_cap(spec, headroom)
    factors = []
    for k, alpha in enumerate(alphas):
        x = abs(alpha) ** 2
        tail = sum(math.exp(m * math.log(x) - math.lgamma(m + 1)) if x > 0 else 0.0
                   for m in range(cap + 1, cap + 200))
        if tail > _TRUNCATION_BUDGET:
            raise TruncationError(
                f"coherent truncation budget exceeded on mode {k}: tail {tail:.3e}")
        vec = np.zeros(spec.cutoff, dtype=complex)
        vec[: cap + 1] = _coherent_vector(alpha, cap)
        factors.append(vec)
    arr = factors[0]
    for vec in factors[1:]:
        arr = np.tensordot(arr, vec, axes=0)
    arr = arr / np.linalg.norm(arr)
    return DenseState(spec, "pure", arr.reshape(spec.shape), headroom=headroom)


def make_two_mode_squeezed(spec: ModeSpec, r: float, headroom: int = 2) -> DenseState:
    """Truncation of sqrt(1-l^2) sum_m l^m |m,m>, l = tanh r."""
    if spec.n_modes != 2:
        raise ValueError("two-mode squeezed vacuum requires n_modes = 2")
    lam = math.tanh(r)
    cap = _support_cap(spec, headroom)
    if lam ** (2 * (cap + 1)) > _TRUNCATION_BUDGET:
        raise TruncationError(
            f"squeezing truncation budget exceeded: tanh(r)^(2(d-h)) = "
            f"{lam ** (2 * (cap + 1)):.3e}")
    arr = np.zeros(spec.shape, dtype=complex)
    for m in range(cap + 1):
        arr[m, m] = lam ** m
    arr = arr / np.linalg.norm(arr)
    return DenseState(spec, "pure", arr, headroom=headroom)


def _support_mask(spec: ModeSpec, cap: int) -> np.ndarray:
    grids = np.indices(spec.shape)
    return (grids.max(axis=0) <= cap)


def random_state(spec: ModeSpec, kind: Literal["pure", "mixed"],
                 headroom: int, seed: int) -> DenseState:
    """Seeded Gaussian-random state supported below the headroom cap."""
    cap = _support_cap(spec, headroom)
    rng = np.random.default_rng(seed)
    mask = _support_mask(spec, cap)
    if kind == "pure":
        arr = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
        arr = arr * mask
        arr = arr / np.linalg.norm(arr)
        return DenseState(spec, "pure", arr, headroom=headroom)
    dim = spec.dim
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    flat = mask.reshape(-1)
    g[~flat, :] = 0.0
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return DenseState(spec, "mixed", rho, headroom=headroom)


def random_separable_mixture(spec: ModeSpec, n_terms: int, headroom: int,
                             seed: int) -> DenseState:
    """Random convex mixture of random product pure states (PPT by construction)."""
    cap = _support_cap(spec, headroom)
    rng = np.random.default_rng(seed)
    weights = rng.random(n_terms)
    weights = weights / weights.sum()
    dim = spec.dim
    rho = np.zeros((dim, dim), dtype=complex)
    for w in weights:
        vec = np.ones(1, dtype=complex)
        for _ in range(spec.n_modes):
            f = np.zeros(spec.cutoff, dtype=complex)
            f[: cap + 1] = (rng.standard_normal(cap + 1)
                            + 1j * rng.standard_normal(cap + 1))
            f = f / np.linalg.norm(f)
            vec = np.kron(vec, f)
        rho += w * np.outer(vec, vec.conj())
    return DenseState(spec, "mixed", rho, headroom=headroom)


# ---------------------------------------------------------------------------
# operator application and expectation values


def apply_mode_op(state: DenseState, mode: int, op: LadderOp) -> DenseState:
    """Apply a or a-dagger on one mode of a pure state (result unnormalized)."""
    if state.kind != "pure":
        raise ValueError("apply_mode_op acts on pure states; use expectation for mixed")
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range")
    if op == "create" and state.headroom < 1:
        raise HeadroomError("cannot create: zero headroom (would corrupt moments)")
    m = ladder_matrix(state.cutoff, op)
    arr = np.moveaxis(np.tensordot(m, state.array, axes=([1], [mode])), 0, mode)
    headroom = state.headroom - 1 if op == "create" else min(
        state.headroom + 1, state.cutoff - 1)
    return DenseState(state.mode_spec, "pure", arr, headroom=headroom)


def _word_mode_matrices(state: DenseState,
                        word: Sequence[tuple[int, LadderOp]]) -> dict[int, np.ndarray]:
    """Per-mode operator matrices for a ladder word, exact below the cutoff.

    Matrices are built at a padded dimension and cropped so intermediate
    occupations above the cutoff are never silently dropped.
    """
    d = state.cutoff
    per_mode: dict[int, list[LadderOp]] = {}
    for mode, op in word:
        if not 0 <= mode < state.n_modes:
            raise ValueError(f"mode {mode} out of range")
        if op not in ("annihilate", "create"):
            raise ValueError(f"unknown ladder op {op!r}")
        per_mode.setdefault(mode, []).append(op)
    matrices = {}
    for mode, ops in per_mode.items():
        creations = sum(1 for o in ops if o == "create")
        if creations > state.headroom:
            raise HeadroomError(
                f"word needs {creations} creations on mode {mode}, "
                f"headroom is {state.headroom}")
        dp = d + creations
        m = np.eye(dp, dtype=complex)
        for op in reversed(ops):  # rightmost factor acts first
            m = ladder_matrix(dp, op) @ m
        matrices[mode] = m[:d, :d]
    return matrices


def product_operator_expectation(state: DenseState,
                                 matrices: dict[int, np.ndarray]) -> complex:
    """<psi| prod_k M_k |psi> or tr(rho prod_k M_k) for per-mode matrices."""
    n, d = state.n_modes, state.cutoff
    if state.kind == "pure":
        out = state.array
        for mode, m in matrices.items():
            out = np.moveaxis(np.tensordot(m, out, axes=([1], [mode])), 0, mode)
        return complex(np.vdot(state.array, out))
    rho = state.array.reshape((d,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    subs = []
    operands = []
    for mode, m in matrices.items():
        subs.append(cols[mode] + rows[mode])
        operands.append(m)
    for mode in range(n):
        if mode not in matrices:
            cols[mode] = rows[mode]
    rho_sub = "".join(rows) + "".join(cols)
    return complex(np.einsum(rho_sub + "," + ",".join(subs) + "->", rho, *operands)
                   if operands else np.einsum(rho_sub + "->", rho))


def expectation(state: DenseState, word: Sequence[tuple[int, LadderOp]]) -> complex:
    """Expectation of an operator word; factors are listed left to right."""
    if not word:
        if state.kind == "pure":
            return complex(np.vdot(state.array, state.array))
        return complex(np.trace(state.array))
    matrices = _word_mode_matrices(state, word)
    return product_operator_expectation(state, matrices)


# ---------------------------------------------------------------------------
# partial transposition


def partial_transpose(state: DenseState, bipartition: Iterable[int]) -> np.ndarray:
    """Density matrix with the indices of the given modes transposed."""
    modes = frozenset(bipartition)
    n, d = state.n_modes, state.cutoff
    if not modes or modes == frozenset(range(n)):
        raise BipartitionError(
            "trivial bipartition: corresponds to no transposition at all")
    if not modes <= frozenset(range(n)):
        raise BipartitionError(f"bipartition {sorted(modes)} references unknown modes")
    rho = state.to_density_matrix().reshape((d,) * (2 * n))
    for k in modes:
        rho = np.swapaxes(rho, k, n + k)
    return rho.reshape(state.mode_spec.dim, state.mode_spec.dim)


def partial_transpose_min_eig(state: DenseState,
                              bipartition: Iterable[int]) -> PartialTransposeResult:
    """Minimal eigenvalue (and eigenvector) of the partial transpose."""
    modes = frozenset(bipartition)
    pt = partial_transpose(state, modes)
    herm_res = np.max(np.abs(pt - pt.conj().T))
    if herm_res > 1e-10:
        raise ValueError(f"partial transpose Hermiticity residue {herm_res}")
    vals, vecs = np.linalg.eigh(pt)
    witness = vecs[:, 0]
    witness = witness / np.linalg.norm(witness)
    return PartialTransposeResult(bipartition=modes,
                                  min_eigenvalue=float(vals[0]),
                                  witness_vector=witness)
