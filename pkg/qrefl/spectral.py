"""不变子空间、谱与半单性

多项式一律以 Fraction 系数列表表示，最高次在前（与 ``numpy.poly1d`` 同序），
除法、gcd 与求导都在有理数上精确进行。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from qrefl.braid import CharacterMatrix, fraction_matrix
from qrefl.classification import (
    AdmissiblePair,
    NotACharacter,
    SolutionFamily,
    Type1Family,
    Type1Match,
    Type2Match,
    classify_matrix,
)
from qrefl.errors import UsageError, ValidationError
from qrefl.scalars import Number, Scalar, VariableSpace, format_canonical

logger = logging.getLogger("qrefl.spectral")

Poly = List[Fraction]

DEFAULT_Q = Fraction(2)


# --------------------------- 不变子空间 --------------------------- #

def invariant_blocks(A: Union[CharacterMatrix, np.ndarray], p: AdmissiblePair) -> List[Tuple[int, ...]]:
    """{i, σ(i)}（i ∈ Y）与其余单点下标，按最小元排序"""
    n = A.n if isinstance(A, CharacterMatrix) else A.shape[0]
    if n != p.n:
        raise UsageError(f"矩阵维数 {n} 与可容许对维数 {p.n} 不一致")
    blocks = {frozenset((i, j)) for i, j in p.sigma.items()}
    covered: Dict[int, frozenset] = {}
    for block in blocks:
        for i in block:
            if i in covered:
                raise ValidationError(f"块 {sorted(block)} 与 {sorted(covered[i])} 相交")
            covered[i] = block
    singles = [frozenset((i,)) for i in range(1, n + 1) if i not in covered]
    return sorted((tuple(sorted(b)) for b in list(blocks) + singles), key=lambda b: b[0])


def is_invariant(A: Union[CharacterMatrix, np.ndarray], block: Sequence[int]) -> bool:
    """A·span(e_k : k ∈ block) ⊆ span(block)：块内列在块外行上为零"""
    entries = A.entries if isinstance(A, CharacterMatrix) else A
    n = entries.shape[0]
    inside = set(block)
    return all(not entries[r - 1, k - 1] for k in inside for r in range(1, n + 1) if r not in inside)


# --------------------------- 谱 --------------------------- #

@dataclass(frozen=True)
class Spectrum:
    """(特征值, 重数) 列表，重数为正"""

    entries: Tuple[Tuple[Union[Scalar, Fraction], int], ...]

    def __post_init__(self) -> None:
        if any(m <= 0 for _, m in self.entries):
            raise ValidationError("重数必须为正")

    @property
    def total(self) -> int:
        return sum(m for _, m in self.entries)

    def evaluate(self, params: Mapping[str, Number]) -> "Spectrum":
        """代入参数，相等的特征值合并"""
        merged: Dict[Fraction, int] = {}
        for value, mult in self.entries:
            v = value.evaluate(params) if isinstance(value, Scalar) else Fraction(value)
            merged[v] = merged.get(v, 0) + mult
        return Spectrum(tuple(merged.items()))

    def polynomial(self) -> Poly:
        """Π (t − e)^m（要求特征值已是有理数）"""
        poly: Poly = [Fraction(1)]
        for value, mult in self.entries:
            if isinstance(value, Scalar):
                raise UsageError("符号谱需先 evaluate")
            for _ in range(mult):
                poly = poly_mul(poly, [Fraction(1), -value])
        return poly

    def to_list(self) -> List[Dict[str, object]]:
        out = []
        for value, mult in self.entries:
            text = format_canonical(value) if isinstance(value, Scalar) else str(value)
            out.append({"value": text, "mult": mult})
        return out


def expected_spectrum(f: SolutionFamily) -> Spectrum:
    """按块分析得到的特征值与重数

    Type 1：μ 重数 b₋，λ 重数 b₊−1，0 重数 n−b₋−b₊+1；
    Type 2：λ 重数 b，0 重数 n−b。重数为 0 的项不列出。
    """
    space = VariableSpace(f.n)
    lam = Scalar.variable(space, "l")
    zero = Scalar.zero(space)
    if isinstance(f, Type1Family):
        mu = Scalar.variable(space, "m")
        raw = [(mu, f.b_minus), (lam, f.b_plus - 1), (zero, f.n - f.b_minus - f.b_plus + 1)]
    else:
        raw = [(lam, f.b), (zero, f.n - f.b)]
    spectrum = Spectrum(tuple((v, m) for v, m in raw if m > 0))
    if spectrum.total != f.n:
        raise ValidationError(f"{f.label()} 的重数之和 {spectrum.total} ≠ n")
    return spectrum


# --------------------------- 多项式工具 --------------------------- #

def _trim(p: Poly) -> Poly:
    k = 0
    while k < len(p) - 1 and p[k] == 0:
        k += 1
    return p[k:]


def poly_mul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def poly_divmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    a, b = _trim(list(a)), _trim(list(b))
    if b == [0]:
        raise ZeroDivisionError("多项式除以零")
    if len(a) < len(b):
        return [Fraction(0)], a
    quotient = [Fraction(0)] * (len(a) - len(b) + 1)
    rem = list(a)
    for k in range(len(quotient)):
        c = rem[k] / b[0]
        quotient[k] = c
        for j, y in enumerate(b):
            rem[k + j] -= c * y
    return quotient, _trim(rem[len(quotient):] or [Fraction(0)])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """首一最大公因式"""
    a, b = _trim(list(a)), _trim(list(b))
    while b != [0]:
        a, b = b, poly_divmod(a, b)[1]
    return [c / a[0] for c in a]


def poly_derivative(p: Poly) -> Poly:
    d = len(p) - 1
    return [c * (d - k) for k, c in enumerate(p[:-1])] or [Fraction(0)]


def poly_at_matrix(p: Poly, A: np.ndarray) -> np.ndarray:
    """Horner 法计算 p(A)"""
    n = A.shape[0]
    ident = fraction_matrix(np.eye(n, dtype=int).tolist())
    result = ident * p[0]
    for c in p[1:]:
        result = result @ A + ident * c
    return result


# --------------------------- 数值谱 --------------------------- #

def char_poly(A: Union[np.ndarray, Sequence[Sequence[Number]]]) -> Poly:
    """det(t·Id − A)，Faddeev–LeVerrier 递推，精确有理"""
    A = fraction_matrix(A)
    n = A.shape[0]
    ident = fraction_matrix(np.eye(n, dtype=int).tolist())
    coeffs = [Fraction(1)]
    M = fraction_matrix(np.zeros((n, n), dtype=int).tolist())
    for k in range(1, n + 1):
        M = A @ M + ident * coeffs[-1]
        AM = A @ M
        coeffs.append(-sum(AM[i, i] for i in range(n)) / k)
    return coeffs


def rank(A: Union[np.ndarray, Sequence[Sequence[Number]]]) -> int:
    """无分数消元（Bareiss）求秩"""
    M = fraction_matrix(A).copy()
    rows, cols = M.shape
    r = 0
    prev = Fraction(1)
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if M[i, c] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            M[[r, pivot]] = M[[pivot, r]]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                M[i, j] = (M[r, c] * M[i, j] - M[i, c] * M[r, j]) / prev
            M[i, c] = Fraction(0)
        prev = M[r, c]
        r += 1
        if r == rows:
            break
    return r


def eigenspace_dimension(A: Union[np.ndarray, Sequence[Sequence[Number]]], value: Number) -> int:
    A = fraction_matrix(A)
    n = A.shape[0]
    shifted = A - fraction_matrix(np.eye(n, dtype=int).tolist()) * Fraction(value)
    return n - rank(shifted)


def is_semisimple(A: Union[np.ndarray, Sequence[Sequence[Number]]], q: Number = DEFAULT_Q) -> bool:
    """最小多项式无重根 ⇔ 特征多项式的无平方部分在 A 处为零

    Raises:
        UsageError: A 不是 RE 解
    """
    A = fraction_matrix(A)
    result = classify_matrix(A, q)
    if isinstance(result, NotACharacter):
        raise UsageError(f"矩阵不满足 RE（{result.equation}），无法判定半单性")
    p = char_poly(A)
    squarefree = poly_divmod(p, poly_gcd(p, poly_derivative(p)))[0]
    return not any(poly_at_matrix(squarefree, A).flat)


def expected_semisimple(
    source: Union[Type1Match, Type2Match, SolutionFamily], params: Optional[Mapping[str, Number]] = None
) -> bool:
    """由解族参数给出的判据：Type 1 为 λ ≠ μ；Type 2 为 λ ≠ 0 或 Y = ∅

    Args:
        source: 分类结果，或解族（此时需给出 params）
        params: 解族参数，至少含 l（Type 1 还需 m）
    """
    if isinstance(source, Type1Match):
        return source.e1 * source.e1 - 4 * source.e2 != 0
    if isinstance(source, Type2Match):
        return source.lam != 0 or not source.family.Y
    if params is None:
        raise UsageError("按解族判定半单性需要参数")
    lam = Fraction(params["l"])
    if isinstance(source, Type1Family):
        return lam != Fraction(params["m"])
    return lam != 0 or not source.Y
