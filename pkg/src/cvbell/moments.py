"""Matrices of moments with bipartition-dependent operator ordering.

Row index (k, l) and column index (p, q) are per-mode exponent vectors. The
entry word puts, for each transposed mode,  b^dag^q b^p b^dag^k b^l  and for
each untransposed mode  b^dag^l b^k b^dag^p b^q.  Nonnegativity of every
principal minor of such a matrix characterizes positivity of the partial
transpose across the chosen bipartition; at finite order only the
necessary direction is testable.

The ladder frame ``b`` defaults to the bare mode operators; passing a
Bogoliubov transform (per-mode (u, v) with b = u a + v a^dag) evaluates the
same structure in a rotated/squeezed frame.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import HeadroomError, NumericalConsistencyError
from .fock import DenseState, product_operator_expectation
from .structured import (NormalOrderedPoly, StructuredState,
                         structured_poly_expectation)

NEGATIVITY_THRESHOLD = -1e-9

IndexPair = tuple[tuple[int, ...], tuple[int, ...]]  # (k, l) per-mode exponents


@dataclass
class MomentMatrix:
    bipartition: frozenset[int]
    order: int
    index_list: list[IndexPair]
    entries: np.ndarray

    def hermiticity_residue(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


@dataclass
class MinorReport:
    subset: tuple[int, ...]
    determinant: float
    matrix_slice: np.ndarray


def index_pairs(n_modes: int, order: int) -> list[IndexPair]:
    """All (k, l) pairs with total degree <= order, graded lexicographic."""
    pairs = []
    for combo in itertools.product(range(order + 1), repeat=2 * n_modes):
        if sum(combo) <= order:
            pairs.append((combo[:n_modes], combo[n_modes:]))
    pairs.sort(key=lambda kl: (sum(kl[0]) + sum(kl[1]), kl[0] + kl[1]))
    return pairs


def _b_polys(transform) -> tuple[NormalOrderedPoly, NormalOrderedPoly]:
    if transform is None:
        return (NormalOrderedPoly.ladder("annihilate"),
                NormalOrderedPoly.ladder("create"))
    u, v = transform
    b = NormalOrderedPoly({(0, 1): u, (1, 0): v})
    return b, b.dagger()


def _entry_polys(n_modes: int, bipartition: frozenset[int], row: IndexPair,
                 col: IndexPair, transforms) -> dict[int, NormalOrderedPoly]:
    kvec, lvec = row
    pvec, qvec = col
    polys = {}
    for mode in range(n_modes):
        tr = None if transforms is None else transforms[mode]
        b, bdag = _b_polys(tr)
        if mode in bipartition:
            exps = [(bdag, qvec[mode]), (b, pvec[mode]),
                    (bdag, kvec[mode]), (b, lvec[mode])]
        else:
            exps = [(bdag, lvec[mode]), (b, kvec[mode]),
                    (bdag, pvec[mode]), (b, qvec[mode])]
        poly = NormalOrderedPoly.identity()
        for base, power in exps:
            for _ in range(power):
                poly = poly * base
        if poly.terms != {(0, 0): 1.0 + 0j}:
            polys[mode] = poly
    return polys


def _poly_product_expectation(state, polys: dict[int, NormalOrderedPoly]) -> complex:
    if isinstance(state, StructuredState):
        return structured_poly_expectation(state, polys)
    if isinstance(state, DenseState):
        for mode, poly in polys.items():
            if poly.max_creation() > state.headroom:
                raise HeadroomError(
                    f"moment word needs creation degree {poly.max_creation()} "
                    f"on mode {mode}, headroom is {state.headroom}")
        matrices = {mode: poly.to_matrix(state.cutoff)
                    for mode, poly in polys.items()}
        return product_operator_expectation(state, matrices)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def moment_entry(state, bipartition: Iterable[int], row: IndexPair,
                 col: IndexPair, transforms: Sequence[tuple[complex, complex]] | None = None,
                 ) -> complex:
    """Single matrix-of-moments entry for the given row/column exponents.

    The empty and all-mode bipartitions are allowed here: they label the
    state-positivity matrix rather than a genuine partial transpose.
    """
    n = state.n_modes
    part = frozenset(bipartition)
    polys = _entry_polys(n, part, row, col, transforms)
    return _poly_product_expectation(state, polys)


def build_moment_matrix(state, bipartition: Iterable[int], order: int,
                        transforms: Sequence[tuple[complex, complex]] | None = None,
                        ) -> MomentMatrix:
    """Full matrix over all exponent pairs with total degree <= order."""
    part = frozenset(bipartition)
    pairs = index_pairs(state.n_modes, order)
    dim = len(pairs)
    entries = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(pairs):
        for j, col in enumerate(pairs):
            entries[i, j] = moment_entry(state, part, row, col, transforms)
    return MomentMatrix(bipartition=part, order=order, index_list=pairs,
                        entries=entries)


def principal_minor(matrix: MomentMatrix, subset: Sequence[int]) -> MinorReport:
    """Determinant of the principal submatrix on the given index subset."""
    idx = tuple(subset)
    if not idx:
        raise ValueError("subset must be nonempty")
    if max(idx) >= len(matrix.index_list) or min(idx) < 0:
        raise ValueError("subset outside matrix dimension")
    sl = matrix.entries[np.ix_(idx, idx)]
    det = complex(np.linalg.det(sl))
    if abs(det.imag) > 1e-9 * max(1.0, abs(det)):
        raise NumericalConsistencyError(
            f"principal minor determinant {det} has non-real residue")
    return MinorReport(subset=idx, determinant=det.real, matrix_slice=sl)


def find_negative_minor(matrix: MomentMatrix, max_size: int = 3) -> MinorReport | None:
    """First principal minor below the negativity threshold, sizes ascending."""
    dim = len(matrix.index_list)
    if max_size > dim:
        raise ValueError("max_size exceeds matrix dimension")
    for size in range(1, max_size + 1):
        for idx in itertools.combinations(range(dim), size):
            report = principal_minor(matrix, idx)
            if report.determinant < NEGATIVITY_THRESHOLD:
                return report
    return None


def cfrd_minor_indices(n_modes: int) -> tuple[IndexPair, IndexPair]:
    """Row indices of the 2x2 minor tied to the Bell functional.

    Row one is the identity moment; row two has l = 1 on every mode, which
    puts the product-of-number-operators moment on the diagonal.
    """
    zero = (0,) * n_modes
    ones = (1,) * n_modes
    return (zero, zero), (zero, ones)


def cfrd_minor_determinant(state, bipartition: Iterable[int],
                           transforms: Sequence[tuple[complex, complex]] | None = None,
                           ) -> float:
    """The 2x2 minor det computed entirely through moment_entry calls."""
    r0, r1 = cfrd_minor_indices(state.n_modes)
    part = frozenset(bipartition)
    m = np.array([[moment_entry(state, part, r, c, transforms)
                   for c in (r0, r1)] for r in (r0, r1)])
    det = complex(np.linalg.det(m))
    if abs(det.imag) > 1e-9 * max(1.0, abs(det)):
        raise NumericalConsistencyError(f"minor determinant {det} not real")
    return det.real
