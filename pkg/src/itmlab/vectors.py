"""Integer coefficient vectors attached to orbit segments, exact linear algebra.

Every orbit segment of a piecewise translation satisfies
``T^n(x) = x + sum_s k_s * gamma_s`` where ``k_s`` counts visits to branch s.
Recording those counts (plus +/-1 markers on interior partition points) turns
orbit coincidences into integer vectors whose products against the parameter
vector are exact rational identities.  Families of such vectors drive both the
independence checks and the perturbation solver.

Vector anatomy: ``e_part`` has length r (branch visit counts), ``f_part`` has
length r-1 (coefficients on the interior partition points).  The product
against a parameter or displacement vector ``(g_1..g_r, b_1..b_{r-1})`` is
``sum e_s g_s + sum f_i b_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exact import HalfOpenInterval, IntervalSet, Sign, SignedPoint
from .itm import ITMap
from .attractor import exact_period, orbit_tail
from .returnmap import ReturnMapData, return_map


class DimensionMismatch(ValueError):
    pass


class NotInConnectionClass(ValueError):
    """The point's orbit never meets another partition point."""


class FamilyAssemblyError(ValueError):
    pass


class Infeasible(ValueError):
    def __init__(self, msg: str, certificate: Optional[list] = None):
        super().__init__(msg)
        self.certificate = certificate or []


@dataclass(frozen=True)
class CoeffVector:
    e_part: tuple[int, ...]
    f_part: tuple[int, ...]
    role: str = ""

    @property
    def dim(self) -> int:
        return len(self.e_part) + len(self.f_part)

    def entries(self) -> tuple[int, ...]:
        return self.e_part + self.f_part

    def __add__(self, other: "CoeffVector") -> "CoeffVector":
        if len(self.e_part) != len(other.e_part) or len(self.f_part) != len(other.f_part):
            raise DimensionMismatch("vector shapes differ")
        return CoeffVector(
            tuple(a + b for a, b in zip(self.e_part, other.e_part)),
            tuple(a + b for a, b in zip(self.f_part, other.f_part)),
            role=self.role,
        )


def param_vector(m: ITMap) -> tuple[Fraction, ...]:
    """(gamma_1..gamma_r, beta_1..beta_{r-1}) of the map."""
    return m.gamma + m.interior_breaks()


def product(v: CoeffVector, w: Sequence[Fraction]) -> Fraction:
    if v.dim != len(w):
        raise DimensionMismatch(f"vector dim {v.dim} vs {len(w)}")
    return sum((c * x for c, x in zip(v.entries(), w)), Fraction(0))


def _unit_f(r: int, index: int, coef: int) -> list[int]:
    f = [0] * (r - 1)
    if index:
        f[index - 1] = coef
    return f


def _counts_between(m: ITMap, p: SignedPoint, start: int, stop: int) -> tuple[int, ...]:
    """Branch visit counts of p's orbit over times start <= t < stop."""
    k = [0] * m.r
    cur = m.iterate(p, start)
    for _ in range(stop - start):
        s = m.branch_of(cur)
        k[s - 1] += 1
        cur = cur.shifted(m.gamma[s - 1])
    return tuple(k)


def landing_vector(m: ITMap, rmd: ReturnMapData, j: int) -> CoeffVector:
    """Vector of the j-th landing: counts up to the landing time, -1 marker on
    the partition point hit.  Product + a_j = 0 exactly."""
    ld = rmd.landings[j]
    target = None
    for pt, q in ld.plus_chain + ld.minus_chain:
        if q == ld.l:
            target = pt
            break
    assert target is not None
    e = _counts_between(m, SignedPoint(ld.a, Sign.PLUS), 0, ld.l)
    ind = m.break_index(target.value)
    f = _unit_f(m.r, ind, -1)
    return CoeffVector(e, tuple(f), role=f"landing[{j}]")


def connection_vectors(
    m: ITMap, rmd: ReturnMapData, j: int, sign: Sign
) -> list[CoeffVector]:
    """One vector per consecutive pair in the landing's one-sided chain; each
    has product 0 against the map's parameters."""
    ld = rmd.landings[j]
    chain = ld.plus_chain if sign is Sign.PLUS else ld.minus_chain
    p = SignedPoint(ld.a, sign)
    out = []
    tag = "+" if sign is Sign.PLUS else "-"
    for k in range(len(chain) - 1):
        (b_from, q_from), (b_to, q_to) = chain[k], chain[k + 1]
        e = _counts_between(m, p, q_from, q_to)
        f = [0] * (m.r - 1)
        f[m.break_index(b_from.value) - 1] += 1
        f[m.break_index(b_to.value) - 1] -= 1
        out.append(CoeffVector(e, tuple(f), role=f"connection[{j},{k}]{tag}"))
    return out


def return_vector(m: ITMap, rmd: ReturnMapData, j: int, sign: Sign) -> CoeffVector:
    """Return vector of branch j (0-based), anchored one-sidedly.

    For the plus side the representative is the branch's left endpoint as a
    plus point; for the minus side, the right endpoint as a minus point.  If
    the representative's orbit meets a partition point strictly before the
    return time, counts start at the last such hit and the f marker sits on
    it, making the product equal to the return image of that one-sided point
    (a point of J).  Otherwise the vector is f-free with full-horizon counts
    and the product equals the branch translation.
    """
    br = rmd.branches[j]
    if sign is Sign.PLUS:
        p = SignedPoint(br.domain.left, Sign.PLUS)
    else:
        p = SignedPoint(br.domain.right, Sign.MINUS)
    horizon = br.return_time
    breaks = set(m.interior_breaks())
    last_hit: Optional[tuple[Fraction, int]] = None
    cur = p
    for q in range(horizon):
        if cur.value in breaks:
            last_hit = (cur.value, q)
        cur = m.apply(cur)
    tag = "+" if sign is Sign.PLUS else "-"
    if last_hit is None:
        e = _counts_between(m, p, 0, horizon)
        return CoeffVector(e, tuple([0] * (m.r - 1)), role=f"return[{j}]{tag}")
    value, q0 = last_hit
    e = _counts_between(m, p, q0, horizon)
    f = _unit_f(m.r, m.break_index(value), 1)
    return CoeffVector(e, tuple(f), role=f"return[{j}]{tag}")


def general_connection_vector(m: ITMap, p: SignedPoint) -> CoeffVector:
    """Connection vector of a one-sided partition point whose orbit hits some
    partition point value at a time k >= 1: +1 marker at the source, -1 at the
    target, counts in between; product 0 exactly."""
    breaks = set(m.interior_breaks())
    if p.value not in breaks:
        raise NotInConnectionClass(f"{p} is not an interior partition point")
    # hits inside the periodic tail are cycle features, not connections:
    # only the transient (k <= preperiod) can carry one
    pre, _period = orbit_tail(m, p)
    cur = m.apply(p)
    hit = None
    for k in range(1, pre + 1):
        if cur.value in breaks:
            hit = (cur.value, k)
            break
        cur = m.apply(cur)
    if hit is None:
        raise NotInConnectionClass(f"the orbit of {p} never meets a partition point")
    value, k = hit
    e = _counts_between(m, p, 0, k)
    f = [0] * (m.r - 1)
    f[m.break_index(p.value) - 1] += 1
    f[m.break_index(value) - 1] -= 1
    return CoeffVector(e, tuple(f), role=f"general[{p}]")


def has_connection(m: ITMap, p: SignedPoint) -> bool:
    try:
        general_connection_vector(m, p)
        return True
    except NotInConnectionClass:
        return False


def cyclic_chain_vectors(m: ITMap, P: HalfOpenInterval, period: int) -> list[CoeffVector]:
    """Boundary chain of a periodic interval, closed up cyclically.

    The left endpoint's plus orbit over one period hits partition points at
    times q_1 < ... < q_m; consecutive hits give connection vectors and the
    wrap-around from q_m back to q_1 (through the period) closes the cycle.
    All products are 0 because T^period fixes the endpoint."""
    p = SignedPoint(P.left, Sign.PLUS)
    breaks = set(m.interior_breaks())
    hits = []
    cur = p
    for q in range(period):
        if cur.value in breaks:
            hits.append((cur.value, q))
        cur = m.apply(cur)
    out = []
    if not hits:
        return out
    for k in range(len(hits)):
        v_from, q_from = hits[k]
        if k + 1 < len(hits):
            v_to, q_to = hits[k + 1]
            e = _counts_between(m, p, q_from, q_to)
        else:
            v_to, q_to = hits[0]
            e1 = _counts_between(m, p, q_from, period)
            e2 = _counts_between(m, p, 0, q_to)
            e = tuple(a + b for a, b in zip(e1, e2))
        f = [0] * (m.r - 1)
        f[m.break_index(v_from) - 1] += 1
        f[m.break_index(v_to) - 1] -= 1
        out.append(
            CoeffVector(e, tuple(f), role=f"cycle[{P.left}->{v_from}@{q_from}]")
        )
    return out


@dataclass(frozen=True)
class VectorFamily:
    vectors: tuple[CoeffVector, ...]

    def __len__(self) -> int:
        return len(self.vectors)

    def labels(self) -> list[str]:
        return [v.role for v in self.vectors]

    def to_csv(self) -> str:
        r = len(self.vectors[0].e_part) if self.vectors else 0
        header = (
            "role,label,"
            + ",".join(f"e_{s}" for s in range(1, r + 1))
            + ","
            + ",".join(f"f_{s}" for s in range(1, r))
        )
        lines = [header]
        for v in self.vectors:
            kind = v.role.split("[")[0]
            lines.append(
                f"{kind},{v.role},"
                + ",".join(str(c) for c in v.e_part)
                + ","
                + ",".join(str(c) for c in v.f_part)
            )
        return "\n".join(lines) + "\n"


def assemble_family(
    m: ITMap,
    X: IntervalSet,
    J0: HalfOpenInterval,
    periodic_intervals: Sequence[tuple[HalfOpenInterval, int]] = (),
) -> VectorFamily:
    """The independence family for one attractor component plus extra periodic
    intervals: landings and plus-side return vectors of J0's return map, the
    one-sided connection chains, the cyclic chains of the periodic intervals,
    and one connection vector for every one-sided partition point off the
    attractor that has one.
    """
    if J0 not in X.parts:
        raise FamilyAssemblyError(f"{J0} is not a component of the attractor")
    for b in m.interior_breaks():
        if b in (J0.left, J0.right):
            raise FamilyAssemblyError(
                f"partition point {b} sits on the boundary of {J0}"
            )
    rmd = return_map(m, X, J0)
    vectors: list[CoeffVector] = []
    for j in range(len(rmd.landings)):
        vectors.append(landing_vector(m, rmd, j))
        vectors.extend(connection_vectors(m, rmd, j, Sign.PLUS))
        vectors.extend(connection_vectors(m, rmd, j, Sign.MINUS))
    for j in range(rmd.branch_count()):
        vectors.append(return_vector(m, rmd, j, Sign.PLUS))

    # orbit-disjointness of the extra periodic intervals
    orbits: list[IntervalSet] = []
    for P, period in periodic_intervals:
        S = IntervalSet([P])
        acc = S
        for _ in range(period - 1):
            S = m.image(S)
            acc = acc.union(S)
        orbits.append(acc)
    for i in range(len(orbits)):
        for k in range(i + 1, len(orbits)):
            overlap = any(
                orbits[i].intersect_interval(part) for part in orbits[k].parts
            )
            if overlap:
                raise FamilyAssemblyError(
                    f"periodic interval orbits {i} and {k} overlap"
                )
    for P, period in periodic_intervals:
        vectors.extend(cyclic_chain_vectors(m, P, period))

    for p in m.critical_points():
        if not X.member_value(p.value):
            try:
                vectors.append(general_connection_vector(m, p))
            except NotInConnectionClass:
                pass
    return VectorFamily(tuple(vectors))


# -- exact linear algebra ---------------------------------------------------


def rank(family: VectorFamily | Sequence[CoeffVector]) -> int:
    rows = [list(v.entries()) for v in (family.vectors if isinstance(family, VectorFamily) else family)]
    return _integer_rank(rows)


def _integer_rank(rows: list[list[int]]) -> int:
    """Fraction-free (Bareiss) elimination over the integers."""
    mat = [row[:] for row in rows if any(row)]
    if not mat:
        return 0
    n_rows, n_cols = len(mat), len(mat[0])
    prev = 1
    rk = 0
    col = 0
    for col in range(n_cols):
        piv = None
        for i in range(rk, n_rows):
            if mat[i][col]:
                piv = i
                break
        if piv is None:
            continue
        mat[rk], mat[piv] = mat[piv], mat[rk]
        for i in range(rk + 1, n_rows):
            for j in range(col + 1, n_cols):
                mat[i][j] = (mat[rk][col] * mat[i][j] - mat[rk][j] * mat[i][col]) // prev
            mat[i][col] = 0
        prev = mat[rk][col]
        rk += 1
        if rk == n_rows:
            break
    return rk


def solve_min_norm(
    constraints: Sequence[tuple[CoeffVector, Fraction]],
) -> list[Fraction]:
    """Minimum-Euclidean-norm exact solution of <v_i, d> = t_i for all i.

    Solves the normal equations (V V^T) lam = t over the rationals and returns
    d = V^T lam; raises Infeasible with a dependency certificate when the
    system has no solution."""
    if not constraints:
        raise Infeasible("no constraints")
    dim = constraints[0][0].dim
    V = [list(v.entries()) for v, _ in constraints]
    t = [Fraction(x) for _, x in constraints]
    n = len(V)
    G = [
        [Fraction(sum(V[i][k] * V[j][k] for k in range(dim))) for j in range(n)]
        for i in range(n)
    ]
    lam = _solve_linear(G, t)
    if lam is None:
        raise Infeasible(
            "inconsistent constraint system",
            certificate=[c[0].role for c in constraints],
        )
    d = [Fraction(0)] * dim
    for i in range(n):
        if lam[i]:
            for k in range(dim):
                if V[i][k]:
                    d[k] += lam[i] * V[i][k]
    # min-norm solutions of the normal equations solve the original system
    # exactly when it is consistent; verify and report otherwise
    for (v, target) in constraints:
        if product(v, d) != target:
            raise Infeasible(
                "inconsistent constraint system",
                certificate=[c[0].role for c in constraints],
            )
    return d


def _solve_linear(
    A: list[list[Fraction]], b: list[Fraction]
) -> Optional[list[Fraction]]:
    """Gaussian elimination over the rationals; any particular solution, or
    None when inconsistent."""
    n = len(A)
    if n == 0:
        return []
    m_cols = len(A[0])
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    piv_cols = []
    row = 0
    for col in range(m_cols):
        piv = None
        for i in range(row, n):
            if M[i][col]:
                piv = i
                break
        if piv is None:
            continue
        M[row], M[piv] = M[piv], M[row]
        inv = 1 / M[row][col]
        M[row] = [x * inv for x in M[row]]
        for i in range(n):
            if i != row and M[i][col]:
                factor = M[i][col]
                M[i] = [x - factor * y for x, y in zip(M[i], M[row])]
        piv_cols.append(col)
        row += 1
        if row == n:
            break
    for i in range(row, n):
        if M[i][m_cols]:
            return None
    x = [Fraction(0)] * m_cols
    for i, col in enumerate(piv_cols):
        x[col] = M[i][m_cols]
    return x
