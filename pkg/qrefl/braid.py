"""辫子矩阵与反射方程

V⊗V 的基按行优先排列：(i, k) ↦ n(i−1)+k（下标从 1 开始）。矩阵一律是 numpy
object 数组，元素为 ``Scalar``（符号）或 ``Fraction``（数值）。

矩阵元记号：A = Σ A^α_β e^β_α，e^i_j 是第 i 行第 j 列的矩阵单位，
因此 A^α_β 存放在第 β 行、第 α 列。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from qrefl.errors import UsageError
from qrefl.scalars import Number, PairRelations, Scalar, VariableSpace, reduce

logger = logging.getLogger("qrefl.braid")

Entry = Union[Scalar, Fraction]


# --------------------------- 通用矩阵工具 --------------------------- #

def basis_index(n: int, i: int, k: int) -> int:
    """(i, k) 在 V⊗V 中的 0 起行优先位置"""
    return n * (i - 1) + (k - 1)


def zeros(space: VariableSpace, size: int) -> np.ndarray:
    out = np.empty((size, size), dtype=object)
    zero = Scalar.zero(space)
    for idx in np.ndindex(out.shape):
        out[idx] = zero
    return out


def identity(space: VariableSpace, size: int) -> np.ndarray:
    out = zeros(space, size)
    one = Scalar.constant(space, 1)
    for k in range(size):
        out[k, k] = one
    return out


def fraction_matrix(rows: Sequence[Sequence[Number]]) -> np.ndarray:
    """有理数方阵（object 数组，元素为 Fraction）"""
    rows = [list(row) for row in rows]
    n = len(rows)
    if n == 0 or any(len(row) != n for row in rows):
        raise UsageError(f"需要非空方阵，收到各行长度 {[len(row) for row in rows]}")
    arr = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            arr[i, j] = Fraction(value)
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """object 数组的矩阵乘法，跳过零元"""
    rows, inner = a.shape
    cols = b.shape[1]
    zero = a.flat[0] * 0
    b_rows = [[(j, b[k, j]) for j in range(cols) if b[k, j]] for k in range(inner)]
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        acc: Dict[int, Entry] = {}
        for k in range(inner):
            aik = a[i, k]
            if not aik:
                continue
            for j, bkj in b_rows[k]:
                term = aik * bkj
                acc[j] = acc[j] + term if j in acc else term
        for j in range(cols):
            out[i, j] = acc.get(j, zero)
    return out


def is_zero_matrix(m: np.ndarray) -> bool:
    return not any(m.flat)


def evaluate_matrix(m: np.ndarray, assignment: Mapping[str, Number]) -> np.ndarray:
    """逐元素求值为 Fraction"""
    out = np.empty(m.shape, dtype=object)
    for idx in np.ndindex(m.shape):
        entry = m[idx]
        out[idx] = entry.evaluate(assignment) if isinstance(entry, Scalar) else Fraction(entry)
    return out


def substitute_matrix(m: np.ndarray, assignment: Mapping[str, Number]) -> np.ndarray:
    out = np.empty(m.shape, dtype=object)
    for idx in np.ndindex(m.shape):
        out[idx] = m[idx].substitute(assignment)
    return out


def reduce_matrix(m: np.ndarray, relations: PairRelations) -> np.ndarray:
    out = np.empty(m.shape, dtype=object)
    for idx in np.ndindex(m.shape):
        out[idx] = reduce(m[idx], relations)
    return out


def lift_matrix(space: VariableSpace, m: np.ndarray) -> np.ndarray:
    """把数值矩阵提升为常数 Scalar 矩阵"""
    out = np.empty(m.shape, dtype=object)
    for idx in np.ndindex(m.shape):
        entry = m[idx]
        out[idx] = entry if isinstance(entry, Scalar) else Scalar.constant(space, entry)
    return out


def validate_q(q: Number) -> Fraction:
    """通用 q：不能是 0、1、−1（否则 ω = 0 或 q 不可逆）"""
    q = Fraction(q)
    if q in (0, 1, -1):
        raise UsageError(f"q = {q} 不是通用值，需要 q ∉ {{0, 1, −1}}")
    return q


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise UsageError(f"维数 n 必须是正整数，收到 {n!r}")


# --------------------------- 辫子矩阵 --------------------------- #

def s_coefficient(space: VariableSpace, i: int, k: int) -> Scalar:
    """s_ik：i<k 为 ω，i=k 为 q，i>k 为 0"""
    if i < k:
        return Scalar.omega(space)
    if i == k:
        return Scalar.q_power(space, 1)
    return Scalar.zero(space)


@dataclass(frozen=True)
class BraidOperator:
    """n²×n² 的辫子矩阵 S，元素为 Scalar"""

    n: int
    space: VariableSpace
    entries: np.ndarray = field(compare=False, repr=False)

    @property
    def dim(self) -> int:
        return self.n * self.n

    def at(self, i: int, k: int, j: int, l: int) -> Scalar:
        """⟨e^i⊗e^k | S | e^j⊗e^l⟩"""
        return self.entries[basis_index(self.n, i, k), basis_index(self.n, j, l)]

    def evaluate(self, q: Number) -> np.ndarray:
        return evaluate_matrix(self.entries, {"q": q})

    def specialize(self, q: Number) -> np.ndarray:
        """只代入 q，元素仍为 Scalar"""
        return substitute_matrix(self.entries, {"q": q})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BraidOperator):
            return NotImplemented
        return self.n == other.n and self.space == other.space and bool(np.all(self.entries == other.entries))

    __hash__ = None  # type: ignore[assignment]


def build_R(n: int, space: Optional[VariableSpace] = None) -> np.ndarray:
    """基本表示中的泛 R 矩阵像

    R = qΣ e^i_i⊗e^i_i + Σ_{i≠j} e^i_i⊗e^j_j + ωΣ_{i<k} e^k_i⊗e^i_k
    """
    _check_n(n)
    space = space or VariableSpace(n)
    r = zeros(space, n * n)
    q = Scalar.q_power(space, 1)
    one = Scalar.constant(space, 1)
    omega = Scalar.omega(space)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            idx = basis_index(n, i, j)
            r[idx, idx] = q if i == j else one
    for i in range(1, n + 1):
        for k in range(i + 1, n + 1):
            # e^k_i⊗e^i_k 把 e^i⊗e^k 送到 e^k⊗e^i
            r[basis_index(n, k, i), basis_index(n, i, k)] = omega
    return r


def flip(n: int, space: Optional[VariableSpace] = None) -> np.ndarray:
    """张量因子交换 P：e^a⊗e^b ↦ e^b⊗e^a"""
    _check_n(n)
    space = space or VariableSpace(n)
    p = zeros(space, n * n)
    one = Scalar.constant(space, 1)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            p[basis_index(n, b, a), basis_index(n, a, b)] = one
    return p


def build_S(n: int, space: Optional[VariableSpace] = None) -> BraidOperator:
    """辫子矩阵 S = Σ s_ik e^i_i⊗e^k_k + Σ_{i≠j} e^i_j⊗e^j_i（等于 P·R）"""
    _check_n(n)
    space = space or VariableSpace(n)
    s = zeros(space, n * n)
    one = Scalar.constant(space, 1)
    for i in range(1, n + 1):
        for k in range(1, n + 1):
            idx = basis_index(n, i, k)
            s[idx, idx] = s_coefficient(space, i, k)
            if i != k:
                s[basis_index(n, i, k), basis_index(n, k, i)] = one
    return BraidOperator(n=n, space=space, entries=s)


def _embed(s: np.ndarray, n: int, position: str) -> np.ndarray:
    """S₁₂ = S⊗1 或 S₂₃ = 1⊗S，作用在 V⊗V⊗V 上"""
    space = s.flat[0].space
    out = zeros(space, n ** 3)
    nn = n * n
    rows, cols = np.nonzero(np.vectorize(bool, otypes=[bool])(s))
    for r, c in zip(rows, cols):
        for extra in range(n):
            if position == "12":
                out[r * n + extra, c * n + extra] = s[r, c]
            else:
                out[extra * nn + r, extra * nn + c] = s[r, c]
    return out


def braid_residual(S: BraidOperator) -> np.ndarray:
    """S₁₂S₂₃S₁₂ − S₂₃S₁₂S₂₃"""
    s12 = _embed(S.entries, S.n, "12")
    s23 = _embed(S.entries, S.n, "23")
    lhs = matmul(matmul(s12, s23), s12)
    rhs = matmul(matmul(s23, s12), s23)
    return lhs - rhs


def hecke_residual(S: BraidOperator) -> np.ndarray:
    """(S − q·Id)(S + q⁻¹·Id)"""
    ident = identity(S.space, S.dim)
    q = Scalar.q_power(S.space, 1)
    q_inv = Scalar.q_power(S.space, -1)
    return matmul(S.entries - ident * q, S.entries + ident * q_inv)


# --------------------------- 特征矩阵与 RE 残差 --------------------------- #

@dataclass(frozen=True)
class CharacterMatrix:
    """候选/解矩阵 A：第 i 行第 i 列为 x_i，第 j 行第 σ(j) 列为 y_j"""

    n: int
    space: VariableSpace
    entries: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def from_rows(cls, space: VariableSpace, rows: Sequence[Sequence[Union[Scalar, Number]]]) -> "CharacterMatrix":
        arr = np.empty((len(rows), len(rows)), dtype=object)
        for i, row in enumerate(rows):
            if len(row) != len(rows):
                raise UsageError("特征矩阵必须是方阵")
            for j, value in enumerate(row):
                arr[i, j] = value if isinstance(value, Scalar) else Scalar.constant(space, value)
        return cls(n=len(rows), space=space, entries=arr)

    @classmethod
    def from_numeric(cls, matrix: np.ndarray, space: Optional[VariableSpace] = None) -> "CharacterMatrix":
        n = matrix.shape[0]
        space = space or VariableSpace(n)
        return cls(n=n, space=space, entries=lift_matrix(space, matrix))

    def __post_init__(self) -> None:
        if self.entries.shape != (self.n, self.n):
            raise UsageError(f"特征矩阵形状应为 ({self.n}, {self.n})，收到 {self.entries.shape}")

    def __getitem__(self, pos: Tuple[int, int]) -> Scalar:
        """1 起的 (行, 列) 访问"""
        return self.entries[pos[0] - 1, pos[1] - 1]

    def evaluate(self, assignment: Mapping[str, Number]) -> np.ndarray:
        return evaluate_matrix(self.entries, assignment)

    def reduce(self, relations: PairRelations) -> "CharacterMatrix":
        return CharacterMatrix(self.n, self.space, reduce_matrix(self.entries, relations))

    def rows(self) -> List[List[str]]:
        return [[str(self.entries[i, j]) for j in range(self.n)] for i in range(self.n)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CharacterMatrix):
            return NotImplemented
        return self.n == other.n and self.space == other.space and bool(np.all(self.entries == other.entries))

    __hash__ = None  # type: ignore[assignment]


def symbolic_character(
    n: int,
    sigma: Mapping[int, int],
    diagonal: Sequence[Scalar],
    space: VariableSpace,
) -> CharacterMatrix:
    """对角元取 ``diagonal``，第 j 行第 σ(j) 列放符号 y_j"""
    if len(diagonal) != n:
        raise UsageError(f"对角元个数应为 {n}，收到 {len(diagonal)}")
    entries = zeros(space, n)
    for i, x in enumerate(diagonal):
        entries[i, i] = x
    for j, target in sigma.items():
        entries[j - 1, target - 1] = Scalar.variable(space, f"y{j}")
    return CharacterMatrix(n=n, space=space, entries=entries)


def second_copy(a: np.ndarray) -> np.ndarray:
    """A₂ = 1⊗A"""
    n = a.shape[0]
    zero = a.flat[0] * 0
    out = np.empty((n * n, n * n), dtype=object)
    for idx in np.ndindex(out.shape):
        out[idx] = zero
    for i in range(n):
        out[i * n:(i + 1) * n, i * n:(i + 1) * n] = a
    return out


def _re_residual_array(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    a2 = second_copy(a)
    a2sa2 = matmul(matmul(a2, s), a2)
    return matmul(s, a2sa2) - matmul(a2sa2, s)


def re_residual(A: CharacterMatrix, S: BraidOperator, relations: PairRelations = PairRelations()) -> np.ndarray:
    """S·A₂·S·A₂ − A₂·S·A₂·S，每个元素再按 relations 约化"""
    if A.n != S.n:
        raise UsageError(f"维数不一致：A 为 {A.n}，S 为 {S.n}")
    if A.space != S.space:
        raise UsageError("A 与 S 的变量空间不一致")
    residual = _re_residual_array(A.entries, S.entries)
    return reduce_matrix(residual, relations) if relations else residual


def numeric_residual(matrix: np.ndarray, q: Number) -> np.ndarray:
    """数值矩阵在数值 q 处的 RE 残差（Fraction）"""
    matrix = fraction_matrix(matrix)
    return _re_residual_array(matrix, _numeric_S(matrix.shape[0], validate_q(q)))


@lru_cache(maxsize=64)
def _numeric_S(n: int, q: Fraction) -> np.ndarray:
    s = build_S(n).evaluate(q)
    s.flags.writeable = False
    return s


# --------------------------- 二次方程组 --------------------------- #

@dataclass(frozen=True)
class ReEquation:
    """一条二次方程 Σ c·A[p]·A[p'] = 0

    ``terms`` 中的位置是 1 起的 (行, 列)；系数只含 q。
    """

    tag: str
    line: int
    indices: Tuple[int, ...]
    terms: Tuple[Tuple[Scalar, Tuple[int, int], Tuple[int, int]], ...]

    def evaluate(self, matrix: np.ndarray, coeff_values: Mapping[Scalar, Fraction]) -> Fraction:
        total = Fraction(0)
        for coeff, (r1, c1), (r2, c2) in self.terms:
            a, b = matrix[r1 - 1, c1 - 1], matrix[r2 - 1, c2 - 1]
            if a and b:
                total += coeff_values[coeff] * a * b
        return total

    def substitute(self, A: CharacterMatrix) -> Scalar:
        total = Scalar.zero(A.space)
        for coeff, p1, p2 in self.terms:
            total = total + coeff * A[p1] * A[p2]
        return total

    def label(self) -> str:
        return f"{self.tag}.{self.line}{self.indices}"


class _EquationBuilder:
    """按记号 A^u_l（第 l 行第 u 列）累积二次项"""

    def __init__(self, space: VariableSpace) -> None:
        self.space = space
        self.acc: Dict[Tuple[Tuple[int, int], Tuple[int, int]], Scalar] = {}

    def add(self, coeff: Scalar, upper1: int, lower1: int, upper2: int, lower2: int) -> "_EquationBuilder":
        if coeff.is_zero():
            return self
        key = tuple(sorted([(lower1, upper1), (lower2, upper2)]))
        self.acc[key] = self.acc.get(key, Scalar.zero(self.space)) + coeff  # type: ignore[index]
        return self

    def build(self, tag: str, line: int, indices: Tuple[int, ...]) -> ReEquation:
        terms = tuple((c, p1, p2) for (p1, p2), c in sorted(self.acc.items()) if not c.is_zero())
        return ReEquation(tag=tag, line=line, indices=indices, terms=terms)


def extract_re_system(n: int) -> List[ReEquation]:
    """RE 等价的二次方程组，五组，顺序 eq1 … eq5

    第三组前两行的系数取 (q − s_mi)：由残差直接展开得到的是这一形式，
    写成 (q − s_im) 时 A^{1,1} 在 λ+μ ≠ 0 时不满足。
    """
    _check_n(n)
    space = VariableSpace(n)
    s = {(i, k): s_coefficient(space, i, k) for i in range(1, n + 1) for k in range(1, n + 1)}
    q = Scalar.q_power(space, 1)
    one = Scalar.constant(space, 1)
    idx = range(1, n + 1)
    system: List[ReEquation] = []

    def builder() -> _EquationBuilder:
        return _EquationBuilder(space)

    # eq1: 每行、每列至多一个非零非对角元
    for i in idx:
        for m in idx:
            for k in idx:
                if len({i, m, k}) < 3:
                    continue
                system.append(builder().add(one, m, i, k, i).build("eq1", 1, (i, m, k)))
                system.append(builder().add(one, i, m, i, k).build("eq1", 2, (i, m, k)))

    # eq2: A^n_i A^j_m = 0, j≠m≠n≠i, (m−i)(n−j)<0
    for i in idx:
        for k in idx:
            for m in idx:
                for j in idx:
                    if j == m or m == k or k == i:
                        continue
                    if (m - i) * (k - j) < 0:
                        system.append(builder().add(one, k, i, j, m).build("eq2", 1, (i, k, m, j)))

    # eq3
    for i in idx:
        for m in idx:
            if i == m:
                continue
            b = builder().add(q - s[m, i], i, i, m, i)
            for nu in idx:
                b.add(-s[i, nu], nu, i, m, nu)
            system.append(b.build("eq3", 1, (i, m)))

            b = builder().add(q - s[m, i], i, i, i, m)
            for nu in idx:
                b.add(-s[i, nu], nu, m, i, nu)
            system.append(b.build("eq3", 2, (i, m)))
    for i in idx:
        for m in idx:
            for k in idx:
                if (m - i) * (k - i) < 0:
                    b = builder()
                    for nu in idx:
                        b.add(s[i, nu], nu, m, k, nu)
                    system.append(b.build("eq3", 3, (i, m, k)))

    # eq4: A^n_i A^i_m − Σ s_iν A^ν_m A^n_ν − (s_ni − s_im) A^i_i A^n_m = 0
    for m in idx:
        for i in idx:
            for k in idx:
                if len({m, i, k}) < 3:
                    continue
                b = builder().add(one, k, i, i, m)
                for nu in idx:
                    b.add(-s[i, nu], nu, m, k, nu)
                b.add(-(s[k, i] - s[i, m]), i, i, k, m)
                system.append(b.build("eq4", 1, (m, i, k)))

    # eq5: ω A^m_m A^i_i − Σ s_iν A^ν_m A^m_ν + Σ s_mν A^ν_i A^i_ν = 0, i<m
    omega = Scalar.omega(space)
    for i in idx:
        for m in idx:
            if i >= m:
                continue
            b = builder().add(omega, m, m, i, i)
            for nu in idx:
                b.add(-s[i, nu], nu, m, m, nu)
                b.add(s[m, nu], nu, i, i, nu)
            system.append(b.build("eq5", 1, (i, m)))

    # 展开后系数全部抵消的方程恒成立，不列入
    system = [eq for eq in system if eq.terms]
    logger.debug("n=%d 的 RE 方程组共 %d 条", n, len(system))
    return system


@lru_cache(maxsize=16)
def cached_system(n: int) -> Tuple[ReEquation, ...]:
    """extract_re_system 的缓存版本（只读元组）"""
    return tuple(extract_re_system(n))


def coefficient_values(system: Sequence[ReEquation], q: Number) -> Dict[Scalar, Fraction]:
    values: Dict[Scalar, Fraction] = {}
    for eq in system:
        for coeff, _, _ in eq.terms:
            if coeff not in values:
                values[coeff] = coeff.evaluate({"q": q})
    return values


def first_violation(system: Sequence[ReEquation], matrix: np.ndarray, q: Number) -> Optional[ReEquation]:
    values = coefficient_values(system, q)
    for eq in system:
        if eq.evaluate(matrix, values) != 0:
            return eq
    return None


@dataclass(frozen=True)
class EquivalenceReport:
    residual_zero: bool
    system_zero: bool

    @property
    def agree(self) -> bool:
        return self.residual_zero == self.system_zero


def system_equivalence_check(matrix: np.ndarray, q: Number) -> EquivalenceReport:
    """同时计算 RE 残差与二次方程组，两者必须一致"""
    q = validate_q(q)
    matrix = fraction_matrix(matrix)
    residual_zero = is_zero_matrix(numeric_residual(matrix, q))
    system_zero = first_violation(cached_system(matrix.shape[0]), matrix, q) is None
    if residual_zero != system_zero:
        logger.error("残差与方程组结论不一致: residual_zero=%s system_zero=%s", residual_zero, system_zero)
    return EquivalenceReport(residual_zero=residual_zero, system_zero=system_zero)
