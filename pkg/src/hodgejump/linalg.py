"""Exact linear algebra over Q(i) and over fraction fields of polynomial rings.

Matrices are dense with entries that are either all GaussianRational or all
Poly (over one shared parameter tuple).  Rank and kernel computations over
polynomial entries are carried out in the fraction field: ranks via
fraction-free (Bareiss) elimination, kernels via Cramer-style minors of the
echelon form, so every intermediate value stays polynomial.

Pivoting always scans rows and columns in their natural order, which makes
every output deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .coeff import GR_ONE, GR_ZERO, GaussianRational, Poly

__all__ = [
    "ExactMatrix",
    "CohomologyBasis",
    "LinalgError",
    "kernel_basis",
    "cohomology",
    "generic_rank",
    "specialized_rank",
]


class LinalgError(ValueError):
    pass


def _is_constant(x) -> bool:
    return isinstance(x, GaussianRational)


def _coerce_entry(x):
    if isinstance(x, (GaussianRational, Poly)):
        return x
    return GaussianRational._coerce(x)


class ExactMatrix:
    """Dense matrix with exact entries (GaussianRational or Poly)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries):
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise LinalgError("inconsistent matrix shape")
        self.rows = rows
        self.cols = cols
        self.entries = [[_coerce_entry(x) for x in row] for row in entries]

    # -- constructors ------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols, [[GR_ZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, [[GR_ONE if i == j else GR_ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, rows: int, columns) -> "ExactMatrix":
        columns = list(columns)
        return cls(rows, len(columns), [[col[i] for col in columns] for i in range(rows)])

    # -- basics ------------------------------------------------------

    def is_polynomial(self) -> bool:
        return any(isinstance(x, Poly) for row in self.entries for x in row)

    def column(self, j: int) -> list:
        return [self.entries[i][j] for i in range(self.rows)]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            self.cols, self.rows,
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
        )

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        # differentials are sparse; skipping zero factors matters at scale
        if self.cols != other.rows:
            raise LinalgError("shape mismatch in matmul")
        out = []
        for i in range(self.rows):
            nonzero = [(k, v) for k, v in enumerate(self.entries[i]) if v]
            row = []
            for j in range(other.cols):
                acc = None
                for k, v in nonzero:
                    w = other.entries[k][j]
                    if not w:
                        continue
                    term = v * w
                    acc = term if acc is None else acc + term
                row.append(acc if acc is not None else GR_ZERO)
            out.append(row)
        return ExactMatrix(self.rows, other.cols, out)

    def apply(self, vector: list) -> list:
        if len(vector) != self.cols:
            raise LinalgError("vector length mismatch")
        out = []
        for i in range(self.rows):
            acc = None
            for k, v in enumerate(self.entries[i]):
                if not v or not vector[k]:
                    continue
                term = v * vector[k]
                acc = term if acc is None else acc + term
            out.append(acc if acc is not None else GR_ZERO)
        return out

    def eval_point(self, point: dict) -> "ExactMatrix":
        """Specialize polynomial entries at a parameter point."""
        out = []
        for row in self.entries:
            out.append([x.eval(point) if isinstance(x, Poly) else x for x in row])
        return ExactMatrix(self.rows, self.cols, out)

    def is_zero(self) -> bool:
        return all(not x for row in self.entries for x in row)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and all(
                self.entries[i][j] == other.entries[i][j]
                for i in range(self.rows)
                for j in range(self.cols)
            )
        )

    def __hash__(self):
        return hash((self.rows, self.cols))

    def __str__(self):
        return "[" + ", ".join(
            "[" + ", ".join(str(x) for x in row) + "]" for row in self.entries
        ) + "]"

    __repr__ = __str__


# -- elimination over Q(i) ----------------------------------------------

def _rref(entries: list[list[GaussianRational]]):
    """Reduced row echelon form; returns (rows, pivot column list)."""
    rows = [list(r) for r in entries]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = rows[r][c].inv()
        rows[r] = [x * inv if x else x for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b if b else a for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows[:r], pivots


def rank_const(m: ExactMatrix) -> int:
    if m.is_polynomial():
        raise LinalgError("rank_const on polynomial matrix; use generic_rank")
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots = _rref(m.entries)
    return len(pivots)


def kernel_basis_const(m: ExactMatrix) -> list[list[GaussianRational]]:
    """Canonical right-kernel basis over Q(i): one vector per free column."""
    if m.cols == 0:
        return []
    if m.rows == 0:
        return [[GR_ONE if i == j else GR_ZERO for i in range(m.cols)] for j in range(m.cols)]
    rref, pivots = _rref(m.entries)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [GR_ZERO] * m.cols
        v[f] = GR_ONE
        for k, c in enumerate(pivots):
            v[c] = -rref[k][f]
        basis.append(v)
    return basis


def solve_const(m: ExactMatrix, rhs: list) -> list | None:
    """One exact solution of m x = rhs over Q(i), or None; free variables 0."""
    if len(rhs) != m.rows:
        raise LinalgError("rhs length mismatch")
    aug = [list(row) + [GaussianRational._coerce(b)] for row, b in zip(m.entries, rhs)]
    if m.rows == 0:
        return [GR_ZERO] * m.cols
    rref, pivots = _rref(aug)
    for k, c in enumerate(pivots):
        if c == m.cols:
            return None  # pivot in the rhs column: inconsistent
    x = [GR_ZERO] * m.cols
    for k, c in enumerate(pivots):
        x[c] = rref[k][m.cols]
    return x


def _reduce_against(span_rows: list[list[GaussianRational]], v: list[GaussianRational]):
    """Reduce v against RREF rows (leading coefficient 1); returns residue."""
    v = list(v)
    for row in span_rows:
        lead = next((j for j, x in enumerate(row) if x), None)
        if lead is not None and v[lead]:
            f = v[lead]
            v = [a - f * b if b else a for a, b in zip(v, row)]
    return v


class _Span:
    """Growing RREF row span over Q(i) with canonical reduction."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[GaussianRational]] = []

    def residue(self, v: list) -> list:
        return _reduce_against(self.rows, [GaussianRational._coerce(x) for x in v])

    def add(self, v: list) -> bool:
        """Insert v; True if it enlarged the span."""
        r = self.residue(v)
        lead = next((j for j, x in enumerate(r) if x), None)
        if lead is None:
            return False
        inv = r[lead].inv()
        r = [x * inv for x in r]
        for i, row in enumerate(self.rows):
            if row[lead]:
                f = row[lead]
                self.rows[i] = [a - f * b for a, b in zip(row, r)]
        self.rows.append(r)
        self.rows.sort(key=lambda row: next(j for j, x in enumerate(row) if x))
        return True

    def contains(self, v: list) -> bool:
        return all(not x for x in self.residue(v))

    @property
    def rank(self) -> int:
        return len(self.rows)


# -- fraction-free elimination over polynomial entries -------------------

def _to_poly(x, params) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly.constant(params, x)


def _poly_exact_div(num: Poly, den: Poly) -> Poly:
    """Exact division of multivariate polynomials; raises if not divisible."""
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    params = num.params
    quot = Poly(params)
    rem = num
    dl_exps, dl_c = max(den.terms.items(), key=lambda t: (sum(t[0]), t[0]))
    while rem:
        rl_exps, rl_c = max(rem.terms.items(), key=lambda t: (sum(t[0]), t[0]))
        diff = tuple(a - b for a, b in zip(rl_exps, dl_exps))
        if any(d < 0 for d in diff):
            raise LinalgError("inexact polynomial division")
        t = Poly(params, {diff: rl_c / dl_c})
        quot = quot + t
        rem = rem - t * den
    return quot


def _bareiss(entries: list[list[Poly]]):
    """Fraction-free row echelon form.

    Returns (echelon rows, pivot columns).  Row order is preserved except
    for the swaps needed to bring a nonzero pivot up; pivots are chosen as
    the first nonzero entry in column order, so the result is deterministic.
    """
    rows = [list(r) for r in entries]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    prev = None
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, nrows):
            if all(not x for x in rows[i]):
                continue
            new_row = []
            for j in range(ncols):
                val = piv * rows[i][j] - rows[i][c] * rows[r][j]
                if prev is not None:
                    val = _poly_exact_div(val, prev)
                new_row.append(val)
            rows[i] = new_row
        prev = piv
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows[:r], pivots


def generic_rank(m: ExactMatrix) -> int:
    """Rank over the fraction field of the polynomial ring."""
    if m.rows == 0 or m.cols == 0:
        return 0
    if not m.is_polynomial():
        return rank_const(m)
    params = next(x for row in m.entries for x in row if isinstance(x, Poly)).params
    entries = [[_to_poly(x, params) for x in row] for row in m.entries]
    _, pivots = _bareiss(entries)
    return len(pivots)


def specialized_rank(m: ExactMatrix, point: dict) -> int:
    """Rank after exact evaluation at a parameter point."""
    return rank_const(m.eval_point(point))


def _det_poly(entries: list[list[Poly]]) -> Poly:
    """Determinant by cofactor expansion; sizes here are small."""
    n = len(entries)
    params = entries[0][0].params
    if n == 0:
        return Poly.constant(params, 1)
    if n == 1:
        return entries[0][0]
    det = Poly(params)
    for j in range(n):
        if not entries[0][j]:
            continue
        minor = [[row[k] for k in range(n) if k != j] for row in entries[1:]]
        term = entries[0][j] * _det_poly(minor)
        det = det + term if j % 2 == 0 else det - term
    return det


def kernel_basis(m: ExactMatrix) -> list[list]:
    """Right-kernel basis over the entry field.

    Constant matrices get the canonical RREF kernel.  Polynomial matrices
    get polynomial vectors (Cramer minors of the echelon form), a basis of
    the kernel over the fraction field.
    """
    if not m.is_polynomial():
        return kernel_basis_const(m)
    params = next(x for row in m.entries for x in row if isinstance(x, Poly)).params
    entries = [[_to_poly(x, params) for x in row] for row in m.entries]
    if m.rows == 0:
        one = Poly.constant(params, 1)
        zero = Poly(params)
        return [[one if i == j else zero for i in range(m.cols)] for j in range(m.cols)]
    ech, pivots = _bareiss(entries)
    free = [c for c in range(m.cols) if c not in pivots]
    r = len(pivots)
    zero = Poly(params)
    basis = []
    for f in free:
        pivot_block = [[ech[i][pivots[j]] for j in range(r)] for i in range(r)]
        det = _det_poly(pivot_block) if r else Poly.constant(params, 1)
        v = [zero] * m.cols
        v[f] = det
        for k in range(r):
            col = [[ech[i][pivots[j]] if j != k else ech[i][f] for j in range(r)] for i in range(r)]
            v[pivots[k]] = -_det_poly(col)
        basis.append(v)
    return basis


# -- cohomology of a two-step complex over Q(i) ---------------------------

@dataclass
class CohomologyBasis:
    """Basis of Ker(d_out)/Im(d_in) with a coordinate projection.

    ``representatives`` are canonical vectors in the ambient space; the
    projection sends any d_out-closed vector to its coordinates in this
    basis, killing the image of d_in.
    """

    dim: int
    representatives: list[list[GaussianRational]]
    _project: Callable[[list], list] = field(repr=False)
    label: str = ""

    def project(self, vector: list) -> list[GaussianRational]:
        return self._project(vector)

    def is_zero_class(self, vector: list) -> bool:
        return all(not x for x in self.project(vector))


def cohomology(d_in: ExactMatrix, d_out: ExactMatrix, label: str = "") -> CohomologyBasis:
    """Cohomology at the middle of  . --d_in--> . --d_out--> .  over Q(i)."""
    if d_in.is_polynomial() or d_out.is_polynomial():
        raise LinalgError("cohomology expects constant matrices")
    if d_in.cols and d_out.rows and d_in.rows != d_out.cols:
        raise LinalgError("chain shape mismatch")
    n = d_out.cols if d_out.cols else d_in.rows
    # composition must vanish
    if d_in.cols and d_out.rows:
        comp = d_out.matmul(d_in)
        for j in range(comp.cols):
            if any(comp.entries[i][j] for i in range(comp.rows)):
                raise LinalgError(f"d_out . d_in nonzero on column {j}")

    ker = kernel_basis_const(d_out) if d_out.rows else [
        [GR_ONE if i == j else GR_ZERO for i in range(n)] for j in range(n)
    ]
    image_span = _Span(n)
    for j in range(d_in.cols):
        image_span.add(d_in.column(j))

    full_span = _Span(n)
    for row in image_span.rows:
        full_span.add(row)
    reps: list[list[GaussianRational]] = []
    for v in ker:
        residue = full_span.residue(v)
        lead = next((j for j, x in enumerate(residue) if x), None)
        if lead is None:
            continue
        inv = residue[lead].inv()
        residue = [x * inv for x in residue]
        reps.append(residue)
        full_span.add(residue)

    dim = len(reps)
    # solve [reps | image] coords once per projection call
    columns = reps + image_span.rows
    solver_matrix = ExactMatrix.from_columns(n, columns) if columns else ExactMatrix(n, 0, [[] for _ in range(n)])

    def project(vector: list) -> list[GaussianRational]:
        vec = [GaussianRational._coerce(x) for x in vector]
        if len(vec) != n:
            raise LinalgError("projection: vector length mismatch")
        if d_out.rows:
            img = d_out.apply(vec)
            if any(img):
                raise LinalgError("projection of a non-closed vector")
        if not columns:
            if any(vec):
                raise LinalgError("projection: vector outside kernel+image")
            return []
        sol = solve_const(solver_matrix, vec)
        if sol is None:
            raise LinalgError("projection: vector outside kernel+image")
        return sol[:dim]

    return CohomologyBasis(dim=dim, representatives=reps, _project=project, label=label)
