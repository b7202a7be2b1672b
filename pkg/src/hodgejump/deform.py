"""Deformation engine: Kodaira-Spencer classes, order-by-order Maurer-Cartan
extension, first-order obstruction maps on Dolbeault cohomology, class
extension along a family, obstructed subspaces, the induced first spectral
differential, and Hodge-number jump prediction with an independent oracle.

The first-order obstruction of a class [a] in H^{p,q} along a first-order
direction psi is

    o1([a]) = [ del(iota_psi a) + iota_psi(del a) ]  in  H^{p,q+1},

with the contraction convention of :mod:`hodgejump.exterior`.  The extension
machinery works instead in the deformed coframe; for a (p,q)-class the raw
first-order closure defect there equals (-1)^(p+q+1) o1, so the reported
obstruction carries that normalization and the two routes agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .coeff import GR_ONE, GR_ZERO, GaussianRational, Jet, Poly, rmul
from .errors import InternalInvariantError, ValidationFailure
from .exterior import (
    ComplexStructureSpec,
    Diagnostic,
    InvariantForm,
    SpecError,
    VectorForm,
    _normalize_factors,
    basis_monomials,
    contract,
    deformed_coframe,
    defect_is_zero,
    differential,
    validate_spec,
)

__all__ = [
    "Dolbeault",
    "DolbeaultBasis",
    "KSClass",
    "DeformationFamily",
    "McObstruction",
    "ObstructionReport",
    "ExtensionResult",
    "SecondClassReport",
    "JumpTable",
    "Witness",
    "hodge_table",
    "validate_first_order",
    "dbar_vector",
    "mc_extend",
    "obstruction_o1",
    "extend_class",
    "second_class_subspace",
    "jump_report",
    "oracle_hodge_at_point",
    "frolicher_d1",
    "parallelisable_witness",
    "THREEFOLD_ROW",
]

# bidegrees in the order Hodge rows are conventionally reported for n = 3
THREEFOLD_ROW = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]


@dataclass
class DolbeaultBasis:
    """Cohomology basis at one bidegree, with form-level projection."""

    p: int
    q: int
    monomials: list
    cob: linalg.CohomologyBasis

    @property
    def dim(self) -> int:
        return self.cob.dim

    def rep_form(self, spec: ComplexStructureSpec, k: int) -> InvariantForm:
        vec = self.cob.representatives[k]
        coeffs = {key: c for key, c in zip(self.monomials, vec) if c}
        return InvariantForm(spec, self.p, self.q, coeffs)

    def project_constant_form(self, form: InvariantForm) -> list[GaussianRational]:
        return self.cob.project(form.coordinates(self.monomials))

    def project_form(self, form: InvariantForm, params=None):
        """Project a form whose coefficients may be polynomial.

        Returns GaussianRational coordinates for constant coefficients and
        Poly coordinates otherwise, splitting by parameter monomial.
        """
        pieces = form.monomial_split()
        if not pieces:
            if params is None:
                return [GR_ZERO] * self.dim
            zero = Poly(params)
            return [zero] * self.dim
        if set(pieces) == {()} and params is None:
            return self.project_constant_form(pieces[()])
        if params is None:
            raise SpecError("polynomial form projected without parameter context")
        coords = [Poly(params) for _ in range(self.dim)]
        for exps, piece in pieces.items():
            cls = self.project_constant_form(piece)
            e = exps if exps else (0,) * len(params)
            for k, c in enumerate(cls):
                if c:
                    coords[k] = coords[k] + Poly(params, {e: c})
        return coords


class Dolbeault:
    """Bigraded delbar-complex of a spec with memoized cohomology bases."""

    def __init__(self, spec: ComplexStructureSpec):
        self.spec = spec
        self._matrices: dict[tuple[int, int], linalg.ExactMatrix] = {}
        self._bases: dict[tuple[int, int], DolbeaultBasis] = {}

    def monomials(self, p: int, q: int):
        return basis_monomials(self.spec.n, p, q)

    def dbar_matrix(self, p: int, q: int) -> linalg.ExactMatrix:
        """Matrix of delbar from bidegree (p, q) to (p, q+1)."""
        key = (p, q)
        if key in self._matrices:
            return self._matrices[key]
        src = self.monomials(p, q)
        tgt = self.monomials(p, q + 1)
        cols = []
        for I, J in src:
            form = InvariantForm.monomial(self.spec, I, J)
            db = differential(self.spec, form)[1]
            cols.append(db.coordinates(tgt))
        m = linalg.ExactMatrix.from_columns(len(tgt), cols) if src else linalg.ExactMatrix(len(tgt), 0, [[] for _ in range(len(tgt))])
        self._matrices[key] = m
        return m

    def basis(self, p: int, q: int) -> DolbeaultBasis:
        key = (p, q)
        if key in self._bases:
            return self._bases[key]
        d_out = self.dbar_matrix(p, q)
        d_in = self.dbar_matrix(p, q - 1) if q >= 1 else linalg.ExactMatrix(
            len(self.monomials(p, q)), 0, [[] for _ in self.monomials(p, q)]
        )
        cob = linalg.cohomology(d_in, d_out, label=f"H^{p},{q}")
        b = DolbeaultBasis(p=p, q=q, monomials=self.monomials(p, q), cob=cob)
        self._bases[key] = b
        return b

    def table(self) -> dict[tuple[int, int], int]:
        n = self.spec.n
        return {(p, q): self.basis(p, q).dim for p in range(n + 1) for q in range(n + 1)}


def hodge_table(spec: ComplexStructureSpec) -> dict[tuple[int, int], int]:
    """Invariant Hodge numbers h^{p,q} for all 0 <= p, q <= n."""
    return Dolbeault(spec).table()


def threefold_row(table: dict[tuple[int, int], int]) -> tuple[int, ...]:
    """The nine jumping-relevant Hodge numbers of a threefold, in table order."""
    return tuple(table[pq] for pq in THREEFOLD_ROW)


# -- first-order classes --------------------------------------------------

def dbar_vector(spec: ComplexStructureSpec, psi: VectorForm) -> VectorForm:
    """delbar on T^(1,0)-valued forms in the invariant model.

    delbar(theta_i (x) w) = sum_{k,l} B^k_{i,l} theta_k (x) (c_l ^ w)
                           + theta_i (x) delbar(w).
    The first term vanishes for parallelisable structures (B = 0).
    """
    if psi.spec != spec:
        raise SpecError("dbar_vector: spec mismatch")
    out = VectorForm(spec, psi.q + 1, {})
    for (i, J), c in psi.coeffs.items():
        w = InvariantForm(spec, 0, len(J), {((), J): GR_ONE})
        db = differential(spec, w)[1]
        for (_, J2), c2 in db.coeffs.items():
            out = out + VectorForm(spec, psi.q + 1, {(i, J2): rmul(c, c2)})
        for k in range(1, spec.n + 1):
            for (ii, lam), b in spec.B[k].items():
                if ii != i:
                    continue
                norm = _normalize_factors([("c", lam)] + [("c", j) for j in J])
                if norm is None:
                    continue
                sign, _, J2 = norm
                v = rmul(c, b)
                if sign < 0:
                    v = -v
                out = out + VectorForm(spec, psi.q + 1, {(k, J2): v})
    return out


def validate_first_order(spec: ComplexStructureSpec, psi1: VectorForm) -> list[Diagnostic]:
    """Check that psi1 is a valid first-order deformation direction."""
    diags: list[Diagnostic] = []
    if psi1.q != 1:
        diags.append(Diagnostic("error", "psi", f"expected a (0,1) vector form, got q={psi1.q}"))
        return diags
    for (i, J), c in psi1.coeffs.items():
        if isinstance(c, (Poly, Jet)) and c:
            degs = {sum(e) for e in (c.base.terms if isinstance(c, Jet) else c.terms)}
            if degs - {1}:
                diags.append(
                    Diagnostic(
                        "error",
                        f"theta{i}(x)c{J[0]}",
                        "coefficients of a first-order class must be homogeneous of degree 1",
                    )
                )
    db = dbar_vector(spec, psi1)
    if db:
        for (i, J) in sorted(db.coeffs):
            diags.append(
                Diagnostic(
                    "error",
                    f"theta{i}",
                    f"delbar(psi) has a nonzero component on theta{i}(x)"
                    + "^".join(f"c{j}" for j in J),
                )
            )
    return diags


@dataclass(frozen=True)
class KSClass:
    """Homogeneous degree-n piece of a deformation family."""

    n: int
    value: VectorForm


class McObstruction(Exception):
    """Raised when the Maurer-Cartan step has no solution at some order."""

    def __init__(self, order: int, residual: dict):
        self.order = order
        self.residual = residual
        super().__init__(f"Maurer-Cartan obstruction at order {order}")


@dataclass
class DeformationFamily:
    """A jet family through the base spec with vanishing integrability defect."""

    spec: ComplexStructureSpec
    psi: VectorForm
    order: int
    deformed: ComplexStructureSpec = field(default=None, repr=False)
    corrections: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.psi.q != 1:
            raise ValidationFailure("family direction must be a (0,1) vector form")
        if not self.psi.constant_part_is_zero():
            raise ValidationFailure("family must pass through the base point (zero constant term)")
        dspec, defect = deformed_coframe(self.spec, self.psi)
        if not defect_is_zero(defect):
            raise ValidationFailure(
                f"family is not integrable modulo degree {self.order + 1}"
            )
        if self.deformed is None:
            self.deformed = dspec

    def kodaira_spencer(self, n: int) -> KSClass:
        value = self.psi.homogeneous_part(n)
        if n == 1 and dbar_vector(self.spec, value):
            raise InternalInvariantError("first-order class is not delbar-closed")
        return KSClass(n, value)

    def params(self) -> tuple[str, ...]:
        for c in self.psi.coeffs.values():
            if isinstance(c, (Poly, Jet)):
                return c.params
        return ()


def mc_extend(spec: ComplexStructureSpec, psi1: VectorForm, target_order: int) -> DeformationFamily:
    """Extend a first-order class to a family killing the defect order by order.

    The degree-k correction solves the exact linear system
    dbar_vector(psi_k) = -(degree-k defect); raises :class:`McObstruction`
    with the unkillable residual when no solution exists.
    """
    diags = [d for d in validate_first_order(spec, psi1) if d.severity == "error"]
    if diags:
        raise ValidationFailure("; ".join(map(str, diags)))
    if target_order < 1:
        raise ValidationFailure("target order must be at least 1")
    params = None
    for c in psi1.coeffs.values():
        if isinstance(c, (Poly, Jet)):
            params = c.params
            break
    if params is None:
        raise ValidationFailure("mc_extend expects polynomial first-order coefficients")

    def to_jet(v: VectorForm) -> VectorForm:
        out = {}
        for key, c in v.coeffs.items():
            if isinstance(c, Jet):
                out[key] = Jet(c.base, target_order)
            elif isinstance(c, Poly):
                out[key] = Jet(c, target_order)
            else:
                out[key] = Jet.constant(params, c, target_order)
        return VectorForm(spec, v.q, out)

    psi = to_jet(psi1)

    # linear operator psi_k -> degree-k defect contribution, on the frame basis
    n = spec.n
    unknowns = [(i, lam) for i in range(1, n + 1) for lam in range(1, n + 1)]
    pairs = [(k, (a, b)) for k in range(1, n + 1)
             for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    columns = []
    for (i, lam) in unknowns:
        v = dbar_vector(spec, VectorForm.term(spec, i, (lam,)))
        col = []
        for (k, (a, b)) in pairs:
            col.append(v.coeffs.get((k, (a, b)), GR_ZERO))
        columns.append(col)
    L = linalg.ExactMatrix.from_columns(len(pairs), columns)

    corrections: dict[int, VectorForm] = {}
    for k in range(2, target_order + 1):
        _, defect = deformed_coframe(spec, psi)
        # degree-k part of the defect, per parameter monomial
        by_monomial: dict[tuple[int, ...], dict] = {}
        for gen, row in defect.items():
            for (a, b), c in row.items():
                h = c.homogeneous_part(k) if isinstance(c, (Poly, Jet)) else Poly(params)
                for exps, v in h.terms.items():
                    by_monomial.setdefault(exps, {})[(gen, (a, b))] = v
        if not by_monomial:
            corrections[k] = VectorForm(spec, 1, {})
            continue
        delta: dict = {}
        for exps, rowvals in sorted(by_monomial.items()):
            rhs = [-(rowvals.get(pair, GR_ZERO)) for pair in pairs]
            sol = linalg.solve_const(L, rhs)
            if sol is None:
                residual = {
                    gen: InvariantForm(spec, 0, 2,
                                       {((), ab): Poly(params, {exps: c})
                                        for (g, ab), c in rowvals.items() if g == gen})
                    for gen in range(1, n + 1)
                }
                raise McObstruction(k, residual)
            for (key, x) in zip(unknowns, sol):
                if x:
                    i, lam = key
                    prev = delta.get((i, (lam,)), Poly(params))
                    delta[(i, (lam,))] = prev + Poly(params, {exps: x})
        step = to_jet(VectorForm(spec, 1, delta))
        corrections[k] = VectorForm(spec, 1, delta)
        psi = psi + step

    dspec, defect = deformed_coframe(spec, psi)
    if not defect_is_zero(defect):
        raise InternalInvariantError("Maurer-Cartan solution left a nonzero defect")
    return DeformationFamily(
        spec=spec, psi=psi, order=target_order, deformed=dspec, corrections=corrections
    )


# -- first-order obstruction map ------------------------------------------

@dataclass
class ObstructionReport:
    """Matrix of o1 : H^{p,q} -> H^{p,q+1} in the stored bases."""

    p: int
    q: int
    matrix: linalg.ExactMatrix
    source: DolbeaultBasis
    target: DolbeaultBasis
    params: tuple[str, ...] | None

    def generic_rank(self) -> int:
        return linalg.generic_rank(self.matrix)

    def rank_at(self, point: dict) -> int:
        return linalg.specialized_rank(self.matrix, point)

    def kernel(self) -> list[list]:
        return linalg.kernel_basis(self.matrix)

    def apply_to_coords(self, coords: list) -> list:
        return self.matrix.apply(coords)


def o1_value(spec: ComplexStructureSpec, psi1: VectorForm, form: InvariantForm) -> InvariantForm:
    """The representative-level value del(iota_psi a) + iota_psi(del a)."""
    da = differential(spec, form)[0]
    v1 = differential(spec, contract(psi1, form))[0]
    v2 = contract(psi1, da)
    if v1.p != v2.p or v1.q != v2.q:
        # one side is identically zero with a clamped bidegree
        if not v1:
            return v2
        if not v2:
            return v1
        raise InternalInvariantError("o1 bidegree mismatch")
    return v1 + v2


def obstruction_o1(spec: ComplexStructureSpec, psi1: VectorForm, p: int, q: int,
                   dol: Dolbeault | None = None) -> ObstructionReport:
    """First-order obstruction map on cohomology at bidegree (p, q)."""
    errs = [d for d in validate_first_order(spec, psi1) if d.severity == "error"]
    if errs:
        raise ValidationFailure("; ".join(map(str, errs)))
    dol = dol or Dolbeault(spec)
    src = dol.basis(p, q)
    tgt = dol.basis(p, q + 1)
    params = None
    for c in psi1.coeffs.values():
        if isinstance(c, (Poly, Jet)):
            params = c.params
            break
    columns = []
    for k in range(src.dim):
        rep = src.rep_form(spec, k)
        v = o1_value(spec, psi1, rep)
        if differential(spec, v)[1]:
            raise InternalInvariantError("o1 value is not delbar-closed")
        columns.append(tgt.project_form(v, params=params))
    zero = Poly(params) if params is not None else GR_ZERO
    m = linalg.ExactMatrix(tgt.dim, src.dim, [
        [columns[j][i] if columns else zero for j in range(src.dim)]
        for i in range(tgt.dim)
    ]) if src.dim else linalg.ExactMatrix(tgt.dim, 0, [[] for _ in range(tgt.dim)])
    return ObstructionReport(p=p, q=q, matrix=m, source=src, target=tgt, params=params)


# -- class extension along a family ---------------------------------------

@dataclass
class ExtensionResult:
    status: str  # "extended" | "obstructed"
    order: int   # verified order, or the first failing order
    p: int
    q: int
    obstruction_coords: list | None = None
    obstruction_form: InvariantForm | None = None
    extension: InvariantForm | None = None


def extend_class(family: DeformationFamily, alpha: InvariantForm, max_order: int) -> ExtensionResult:
    """Extend a delbar-closed class order by order along the family.

    The extension lives in the deformed coframe with jet coefficients.  At
    the first order whose closure defect has a nonzero class in
    H^{p,q+1}(X_0) the obstruction is reported, normalized by
    (-1)^(p+q+1) so that at order 1 it equals the o1 matrix value.
    """
    spec = family.spec
    if max_order < 1 or max_order > family.order:
        raise ValidationFailure(
            f"max_order must lie in 1..{family.order} (the family's jet order)"
        )
    if alpha.spec != spec:
        raise ValidationFailure("class must live on the family's base spec")
    if any(not isinstance(c, GaussianRational) for c in alpha.coeffs.values()):
        raise ValidationFailure("class representative must have constant coefficients")
    if differential(spec, alpha)[1]:
        raise ValidationFailure("class representative is not delbar-closed")
    params = family.params()
    p, q = alpha.p, alpha.q
    dol = Dolbeault(spec)
    tgt = dol.basis(p, q + 1)
    dbar0 = dol.dbar_matrix(p, q)
    src_monomials = dol.monomials(p, q)
    tgt_monomials = dol.monomials(p, q + 1)
    dspec = family.deformed
    order = family.order
    sign = GR_ONE if (p + q) % 2 else -GR_ONE  # (-1)^(p+q+1)

    coeffs = {key: Jet.constant(params, c, order) for key, c in alpha.coeffs.items()}
    alpha_t = InvariantForm(dspec, p, q, coeffs)

    for k in range(1, max_order + 1):
        w = differential(dspec, alpha_t)[1]
        for j in range(k):
            if w.homogeneous_part(j):
                raise InternalInvariantError(
                    f"extension defect reappeared at order {j} while solving order {k}"
                )
        wk = w.homogeneous_part(k)
        if not wk.coeffs:
            continue
        pieces = InvariantForm(spec, p, q + 1, wk.coeffs).monomial_split()
        obstruction = [Poly(params) for _ in range(tgt.dim)]
        obstructed = False
        fixes: dict = {}
        for exps, piece in sorted(pieces.items()):
            cls = tgt.project_constant_form(piece)
            if any(cls):
                obstructed = True
                for i, cval in enumerate(cls):
                    if cval:
                        obstruction[i] = obstruction[i] + Poly(params, {exps: rmul(cval, sign)})
            else:
                rhs = [-c for c in piece.coordinates(tgt_monomials)]
                sol = linalg.solve_const(dbar0, rhs)
                if sol is None:
                    raise InternalInvariantError("zero class defect was not exact")
                fixes[exps] = sol
        if obstructed:
            oform = None
            for idx in range(tgt.dim):
                if obstruction[idx]:
                    term = tgt.rep_form(spec, idx).scale(obstruction[idx])
                    oform = term if oform is None else oform + term
            return ExtensionResult(
                status="obstructed", order=k, p=p, q=q,
                obstruction_coords=obstruction, obstruction_form=oform,
            )
        if fixes:
            add = {}
            for exps, sol in fixes.items():
                for key, x in zip(src_monomials, sol):
                    if x:
                        prev = add.get(key, Poly(params))
                        add[key] = prev + Poly(params, {exps: x})
            add_form = InvariantForm(
                dspec, p, q, {key: Jet(c, order) for key, c in add.items()}
            )
            alpha_t = alpha_t + add_form
    return ExtensionResult(status="extended", order=max_order, p=p, q=q, extension=alpha_t)


# -- obstructed subspaces and jump prediction ------------------------------

@dataclass
class SecondClassReport:
    """Image of o1 : H^{p,q-1} -> H^{p,q}, symbolically and at a point."""

    p: int
    q: int
    o1: ObstructionReport
    generic_dim: int
    generic_image: list[list]
    point: dict | None = None
    point_dim: int | None = None
    point_image: list[list] | None = None


def second_class_subspace(spec: ComplexStructureSpec, psi1: VectorForm, p: int, q: int,
                          point: dict | None = None,
                          dol: Dolbeault | None = None) -> SecondClassReport:
    if q < 1:
        raise ValidationFailure("second-class subspace needs q >= 1")
    rep = obstruction_o1(spec, psi1, p, q - 1, dol=dol)
    m = rep.matrix
    if m.is_polynomial():
        params = next(x for row in m.entries for x in row if isinstance(x, Poly)).params
        entries = [[x if isinstance(x, Poly) else Poly.constant(params, x) for x in row]
                   for row in m.entries]
        _, pivots = linalg._bareiss(entries)
    elif m.rows and m.cols:
        _, pivots = linalg._rref(m.entries)
    else:
        pivots = []
    generic_image = [m.column(j) for j in pivots]
    out = SecondClassReport(
        p=p, q=q, o1=rep, generic_dim=len(pivots), generic_image=generic_image,
    )
    if point is not None:
        ev = m.eval_point(point)
        span = linalg._Span(ev.rows)
        for j in range(ev.cols):
            span.add(ev.column(j))
        out.point = dict(point)
        out.point_dim = span.rank
        out.point_image = [list(r) for r in span.rows]
    return out


@dataclass
class JumpRow:
    h0: int
    first: int
    second: int

    @property
    def predicted(self) -> int:
        return self.h0 - self.first - self.second


@dataclass
class JumpTable:
    """First-order jump prediction for every bidegree."""

    n: int
    point: dict
    rows: dict[tuple[int, int], JumpRow]
    label: str = "first-order prediction"
    reports: dict = field(default_factory=dict, repr=False)

    def predicted_table(self) -> dict[tuple[int, int], int]:
        return {pq: row.predicted for pq, row in self.rows.items()}

    def threefold_row(self) -> tuple[int, ...]:
        return tuple(self.rows[pq].predicted for pq in THREEFOLD_ROW)


def jump_report(spec: ComplexStructureSpec, psi1: VectorForm, point: dict) -> JumpTable:
    """Predict h^{p,q} near the base point from first-order obstruction ranks.

    first  = rank at the point of o1 : H^{p,q}   -> H^{p,q+1}
    second = rank at the point of o1 : H^{p,q-1} -> H^{p,q}
    predicted = h^{p,q}(0) - first - second
    """
    errs = [d for d in validate_first_order(spec, psi1) if d.severity == "error"]
    if errs:
        raise ValidationFailure("; ".join(map(str, errs)))
    n = spec.n
    dol = Dolbeault(spec)
    ranks: dict[tuple[int, int], int] = {}
    reports: dict[tuple[int, int], ObstructionReport] = {}
    for p in range(n + 1):
        for q in range(n + 1):
            rep = obstruction_o1(spec, psi1, p, q, dol=dol)
            reports[(p, q)] = rep
            ranks[(p, q)] = rep.rank_at(point)
    rows = {}
    for p in range(n + 1):
        for q in range(n + 1):
            h0 = dol.basis(p, q).dim
            first = ranks[(p, q)]
            second = ranks[(p, q - 1)] if q >= 1 else 0
            row = JumpRow(h0=h0, first=first, second=second)
            if row.predicted < 0:
                raise InternalInvariantError(
                    f"negative predicted Hodge number at ({p},{q})"
                )
            rows[(p, q)] = row
    return JumpTable(n=n, point=dict(point), rows=rows, reports=reports)


def oracle_hodge_at_point(spec: ComplexStructureSpec, family: DeformationFamily,
                          point: dict) -> dict[tuple[int, int], int]:
    """Recompute the full Hodge table at an exact parameter point.

    Independent of the obstruction calculus: evaluates the family, builds
    the deformed structure constants, validates them, and runs the
    bigraded cohomology from scratch.
    """
    psi_num = family.psi.eval_point(point)
    dspec, defect = deformed_coframe(spec, psi_num)
    if not defect_is_zero(defect):
        raise ValidationFailure(
            "integrability defect is nonzero at the point; family truncation insufficient"
        )
    diags = validate_spec(dspec)
    if any(d.severity == "error" for d in diags):
        raise InternalInvariantError(
            "deformed structure failed validation: " + "; ".join(map(str, diags))
        )
    return hodge_table(dspec)


def frolicher_d1(spec: ComplexStructureSpec, p: int, q: int,
                 dol: Dolbeault | None = None) -> linalg.ExactMatrix:
    """Map induced by del on delbar-cohomology, H^{p,q} -> H^{p+1,q}."""
    dol = dol or Dolbeault(spec)
    src = dol.basis(p, q)
    if p + 1 > spec.n:
        return linalg.ExactMatrix(0, src.dim, [])
    tgt = dol.basis(p + 1, q)
    columns = []
    for k in range(src.dim):
        rep = src.rep_form(spec, k)
        v = differential(spec, rep)[0]
        if differential(spec, v)[1]:
            raise InternalInvariantError("del of a closed representative is not delbar-closed")
        columns.append(tgt.project_constant_form(v))
    return linalg.ExactMatrix(tgt.dim, src.dim, [
        [columns[j][i] for j in range(src.dim)] for i in range(tgt.dim)
    ]) if src.dim else linalg.ExactMatrix(tgt.dim, 0, [[] for _ in range(tgt.dim)])


@dataclass
class Witness:
    """Certificate that h^{1,0} jumps along theta_k (x) c_j."""

    i: int
    k: int
    j: int
    value: InvariantForm
    coords: list[GaussianRational]


def parallelisable_witness(spec: ComplexStructureSpec) -> Witness | None:
    """Search for a holomorphic 1-form with nonzero first-order obstruction.

    Requires a parallelisable structure (all mixed tables zero).  Returns
    None exactly when del vanishes identically (a torus).
    """
    if not spec.is_parallelisable():
        raise ValidationFailure("witness search requires a parallelisable structure")
    if all(not spec.A[k] for k in spec.A):
        return None
    dol = Dolbeault(spec)
    h11 = dol.basis(1, 1)
    closed_js = [j for j in range(1, spec.n + 1) if not spec.A[j]]
    for i in range(1, spec.n + 1):
        if not spec.A[i]:
            continue
        ks = sorted({a for pair in spec.A[i] for a in pair})
        for k in ks:
            for j in closed_js:
                psi = VectorForm.term(spec, k, (j,))
                v = o1_value(spec, psi, InvariantForm.generator(spec, "f", i))
                if not v:
                    continue
                coords = h11.project_constant_form(v)
                if any(coords):
                    return Witness(i=i, k=k, j=j, value=v, coords=coords)
    raise InternalInvariantError(
        "no witness found although del is nonzero on a parallelisable structure"
    )
