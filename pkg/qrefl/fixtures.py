"""已知的 RE 矩阵：A^{1,1}、A^{2,1}、A^{2,2}、A^{3,1}、D_n、P_k

这些矩阵按显式排布直接写出，不经过解族构造器，
用来与 ``type1_family`` / ``type2_family`` 的输出逐元素比对。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple

from qrefl.braid import CharacterMatrix, build_S, evaluate_matrix, re_residual, is_zero_matrix, zeros
from qrefl.classification import (
    SolutionFamily,
    Type1Family,
    Type2Family,
    family_matrix,
    instantiate,
)
from qrefl.errors import UsageError
from qrefl.io import matrix_to_dict
from qrefl.scalars import Number, PairRelations, Scalar, VariableSpace

logger = logging.getLogger("qrefl.fixtures")


def _anti_diagonal_matrix(n: int, diagonal: Sequence[str], ys: Sequence[int]) -> Tuple[CharacterMatrix, PairRelations]:
    """对角元取 "lm"（λ+μ）、"l"（λ）或 "0"；y_i 放在 (i, n+1−i)，配对 y_i·y_{n+1−i}"""
    space = VariableSpace(n)
    lam = Scalar.variable(space, "l")
    values = {"lm": lam + Scalar.variable(space, "m"), "l": lam, "0": Scalar.zero(space)}
    entries = zeros(space, n)
    for i, key in enumerate(diagonal):
        entries[i, i] = values[key]
    for i in ys:
        entries[i - 1, n - i] = Scalar.variable(space, f"y{i}")
    pairs = {frozenset((i, n + 1 - i)) for i in ys}
    return CharacterMatrix(n, space, entries), PairRelations(frozenset(pairs))


def a11() -> Tuple[CharacterMatrix, PairRelations]:
    return _anti_diagonal_matrix(2, ["lm", "0"], [1, 2])


def a21() -> Tuple[CharacterMatrix, PairRelations]:
    return _anti_diagonal_matrix(3, ["lm", "l", "0"], [1, 3])


def a22() -> Tuple[CharacterMatrix, PairRelations]:
    return _anti_diagonal_matrix(4, ["lm", "lm", "0", "0"], [1, 2, 3, 4])


def a31() -> Tuple[CharacterMatrix, PairRelations]:
    return _anti_diagonal_matrix(4, ["lm", "l", "l", "0"], [1, 4])


def d_matrix(n: int) -> CharacterMatrix:
    """D_n = λ Σ e^i_{n+1−i}"""
    if n < 1:
        raise UsageError(f"维数 n 必须 ≥ 1，收到 {n}")
    space = VariableSpace(n)
    entries = zeros(space, n)
    for i in range(n):
        entries[i, n - 1 - i] = Scalar.variable(space, "l")
    return CharacterMatrix(n, space, entries)


def p_matrix(n: int, k: int) -> CharacterMatrix:
    """P_k = λ Σ_{i≤k} e^i_i"""
    if not 0 <= k <= n:
        raise UsageError(f"P_k 需要 0 ≤ k ≤ n，收到 k={k}, n={n}")
    space = VariableSpace(n)
    entries = zeros(space, n)
    for i in range(k):
        entries[i, i] = Scalar.variable(space, "l")
    return CharacterMatrix(n, space, entries)


def d_family(n: int, lam: Number = 1) -> Tuple[SolutionFamily, Dict[str, Fraction]]:
    """D_n 所在的解族与参数：λ = −μ = y_i；n = 1 时 D_1 = P_1"""
    lam = Fraction(lam)
    if n == 1:
        return Type2Family(1, (), (), 1), {"l": lam}
    b_minus = n // 2
    family = Type1Family(n, b_minus, b_minus + 1 + n % 2)
    params = {"l": lam, "m": -lam}
    params.update({f"y{i}": lam for i in range(1, b_minus + 1)})
    return family, params


# --------------------------- 汇总 --------------------------- #

@dataclass(frozen=True)
class FixtureStatus:
    name: str
    n: int
    family: str
    matches_family: bool
    residual_zero: bool
    matrix: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return self.matches_family and self.residual_zero

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "n": self.n,
            "family": self.family,
            "matches_family": self.matches_family,
            "residual_zero": self.residual_zero,
            "matrix": self.matrix,
        }


def _status(name: str, matrix: CharacterMatrix, relations: PairRelations, family: SolutionFamily) -> FixtureStatus:
    built, built_relations = family_matrix(family)
    matches = built == matrix and built_relations == relations
    residual_zero = is_zero_matrix(re_residual(matrix, build_S(matrix.n), relations))
    logger.debug("%s: matches=%s residual_zero=%s", name, matches, residual_zero)
    return FixtureStatus(name, matrix.n, family.label(), matches, residual_zero, matrix_to_dict(matrix, relations))


def _d_status(n: int, samples: Sequence[Number] = (1, -2, Fraction(3, 2))) -> FixtureStatus:
    matrix = d_matrix(n)
    matches = True
    for lam in samples:
        family, params = d_family(n, lam)
        numeric = evaluate_matrix(matrix.entries, {"l": lam})
        matches = matches and bool((instantiate(family, params) == numeric).all())
    residual_zero = is_zero_matrix(re_residual(matrix, build_S(n)))
    return FixtureStatus(f"D_{n}", n, d_family(n)[0].label(), matches, residual_zero, matrix_to_dict(matrix))


def examples_report(max_n: int = 6) -> List[FixtureStatus]:
    """全部已知矩阵与对应解族的比对结果及 RE 残差状态"""
    if max_n < 1:
        raise UsageError(f"max_n 必须 ≥ 1，收到 {max_n}")
    report = []
    for name, builder, family in (
        ("A^{1,1}", a11, Type1Family(2, 1, 2)),
        ("A^{2,1}", a21, Type1Family(3, 1, 3)),
        ("A^{2,2}", a22, Type1Family(4, 2, 3)),
        ("A^{3,1}", a31, Type1Family(4, 1, 4)),
    ):
        matrix, relations = builder()
        if matrix.n <= max_n:
            report.append(_status(name, matrix, relations, family))
    for n in range(1, max_n + 1):
        report.append(_d_status(n))
    for n in range(1, max_n + 1):
        for k in range(0, n + 1):
            report.append(_status(f"P_{k} (n={n})", p_matrix(n, k), PairRelations(), Type2Family(n, (), (), k)))
    return report
