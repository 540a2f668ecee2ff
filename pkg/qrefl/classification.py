"""可容许对、两类解族、枚举与反向分类"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, ClassVar, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import comb

from qrefl.braid import (
    CharacterMatrix,
    cached_system,
    first_violation,
    fraction_matrix,
    is_zero_matrix,
    numeric_residual,
    symbolic_character,
    validate_q,
)
from qrefl.errors import ClassificationError, ParameterError, UsageError, ValidationError
from qrefl.scalars import Number, PairRelations, Scalar, VariableSpace, format_rational

logger = logging.getLogger("qrefl.classification")


# --------------------------- 可容许对 --------------------------- #

@dataclass(frozen=True)
class PairStats:
    y_minus: FrozenSet[int]
    y_plus: FrozenSet[int]
    y_zero: FrozenSet[int]
    b_minus: int
    b_plus: int


@dataclass(frozen=True)
class AdmissiblePair:
    """Y ⊆ [1, n] 与严格递减、无不动点的单射 σ: Y → [1, n]

    Args:
        n: 维数
        Y: 升序下标
        images: 与 Y 对齐的像 σ(Y[0]), σ(Y[1]), …
    """

    n: int
    Y: Tuple[int, ...] = ()
    images: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"维数 n 必须 ≥ 1，收到 {self.n}")
        if len(self.Y) != len(self.images):
            raise ValidationError("Y 与 σ(Y) 长度不一致")
        if list(self.Y) != sorted(set(self.Y)):
            raise ValidationError(f"Y 必须严格升序：{self.Y}")
        for i, j in zip(self.Y, self.images):
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValidationError(f"下标越界：σ({i}) = {j}，n = {self.n}")
            if i == j:
                raise ValidationError(f"σ 有不动点 {i}")
        if any(a <= b for a, b in zip(self.images, self.images[1:])):
            raise ValidationError(f"σ 必须严格递减：σ({self.Y}) = {self.images}")

    @classmethod
    def from_sets(cls, n: int, Y: Sequence[int], Z: Sequence[int]) -> "AdmissiblePair":
        """用唯一的保序反转双射 Y → Z 构造"""
        if len(Y) != len(Z):
            raise ValidationError(f"|Y| = {len(Y)} 与 |Z| = {len(Z)} 不等")
        return cls(n=n, Y=tuple(sorted(Y)), images=tuple(sorted(Z, reverse=True)))

    @property
    def sigma(self) -> Dict[int, int]:
        return dict(zip(self.Y, self.images))

    @property
    def Z(self) -> Tuple[int, ...]:
        return tuple(sorted(self.images))

    @property
    def size(self) -> int:
        return len(self.Y)

    def stats(self) -> PairStats:
        sigma = self.sigma
        y_minus = frozenset(i for i in self.Y if i < sigma[i])
        y_plus = frozenset(i for i in self.Y if i > sigma[i])
        y_zero = frozenset(i for i in self.Y if sigma[i] in sigma and sigma[sigma[i]] == i)
        if not self.Y:
            return PairStats(y_minus, y_plus, y_zero, 0, self.n + 1)
        b_minus = max(y_minus | {sigma[i] for i in y_plus})
        b_plus = min(y_plus | {sigma[i] for i in y_minus})
        return PairStats(y_minus, y_plus, y_zero, b_minus, b_plus)

    def is_involutive(self) -> bool:
        return bool(self.Y) and set(self.Y) == set(self.images)

    def is_disjoint(self) -> bool:
        return not set(self.Y) & set(self.images)


def pair_stats(p: AdmissiblePair) -> PairStats:
    """(Y₋, Y₊, Y₀, b₋, b₊)"""
    stats = p.stats()
    if stats.b_minus >= stats.b_plus:
        raise ValidationError(f"b₋ = {stats.b_minus} 不小于 b₊ = {stats.b_plus}")
    return stats


def enumerate_admissible_pairs(n: int) -> List[AdmissiblePair]:
    """按 (|Y|, Y, Z) 字典序列出全部可容许对"""
    if n < 1:
        raise UsageError(f"维数 n 必须 ≥ 1，收到 {n}")
    pairs: List[AdmissiblePair] = []
    indices = range(1, n + 1)
    for k in range(n + 1):
        for Y in combinations(indices, k):
            for Z in combinations(indices, k):
                images = tuple(reversed(Z))
                if any(i == j for i, j in zip(Y, images)):
                    continue
                pairs.append(AdmissiblePair(n=n, Y=Y, images=images))
    return pairs


def enumerate_sigma_choices(n: int, Y: Sequence[int]) -> List[Tuple[int, ...]]:
    """给定 Y，列出与 Y 不相交的像集 Z"""
    rest = [i for i in range(1, n + 1) if i not in set(Y)]
    return [Z for Z in combinations(rest, len(Y))]


def count_sigma_choices(n: int, K: int) -> int:
    """C(n−K, K)，K 超出 [0, n/2] 时为 0"""
    if K < 0 or 2 * K > n:
        return 0
    return int(comb(n - K, K, exact=True))


# --------------------------- 解族 --------------------------- #

@dataclass(frozen=True)
class Type1Family:
    """对合型解族：Y = [1, b₋] ∪ [b₊, b₊+b₋−1]，σ(i) = b₊+b₋−i"""

    n: int
    b_minus: int
    b_plus: int

    type: ClassVar[int] = 1

    def __post_init__(self) -> None:
        if not (1 <= self.b_minus < self.b_plus and self.b_minus + self.b_plus <= self.n + 1):
            raise UsageError(
                f"Type 1 参数需满足 1 ≤ b₋ < b₊ 且 b₋ + b₊ ≤ n + 1，收到 n={self.n}, "
                f"b₋={self.b_minus}, b₊={self.b_plus}"
            )

    def sigma_of(self, i: int) -> int:
        return self.b_plus + self.b_minus - i

    @property
    def pair(self) -> AdmissiblePair:
        Y = tuple(range(1, self.b_minus + 1)) + tuple(range(self.b_plus, self.b_plus + self.b_minus))
        return AdmissiblePair(n=self.n, Y=Y, images=tuple(self.sigma_of(i) for i in Y))

    @property
    def relations(self) -> PairRelations:
        return PairRelations.of([(i, self.sigma_of(i)) for i in range(1, self.b_minus + 1)])

    def free_parameters(self) -> List[str]:
        return ["l", "m"] + [f"y{i}" for i in range(1, self.b_minus + 1)]

    def sort_key(self) -> Tuple:
        return (1, (self.b_minus, self.b_plus), (), ())

    def label(self) -> str:
        return f"Type1(n={self.n}, b-={self.b_minus}, b+={self.b_plus})"


@dataclass(frozen=True)
class Type2Family:
    """Y ∩ σ(Y) = ∅ 的解族，对角线前 b 个为 λ"""

    n: int
    Y: Tuple[int, ...]
    Z: Tuple[int, ...]
    b: int

    type: ClassVar[int] = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "Y", tuple(sorted(self.Y)))
        object.__setattr__(self, "Z", tuple(sorted(self.Z)))
        if set(self.Y) & set(self.Z):
            raise UsageError(f"Type 2 要求 Y ∩ Z = ∅，收到 Y={self.Y}, Z={self.Z}")
        try:
            stats = pair_stats(self.pair)
        except ValidationError as e:
            raise UsageError(str(e)) from e
        if not stats.b_minus <= self.b < stats.b_plus:
            raise UsageError(f"b = {self.b} 不在 [{stats.b_minus}, {stats.b_plus}) 内")

    @property
    def pair(self) -> AdmissiblePair:
        return AdmissiblePair.from_sets(self.n, self.Y, self.Z)

    @property
    def relations(self) -> PairRelations:
        return PairRelations()

    def free_parameters(self) -> List[str]:
        return ["l"] + [f"y{i}" for i in self.Y]

    def sort_key(self) -> Tuple:
        return (2, (self.b,), self.Y, self.Z)

    def label(self) -> str:
        return f"Type2(n={self.n}, Y={list(self.Y)}, Z={list(self.Z)}, b={self.b})"


SolutionFamily = Union[Type1Family, Type2Family]


def type1_family(n: int, b_minus: int, b_plus: int) -> Tuple[CharacterMatrix, PairRelations]:
    """符号矩阵：对角 λ+μ（[1,b₋]）、λ（(b₋,b₊)）、0（[b₊,n]），y_j 位于 (j, σ(j))"""
    family = Type1Family(n, b_minus, b_plus)
    space = VariableSpace(n)
    lam = Scalar.variable(space, "l")
    mu = Scalar.variable(space, "m")
    zero = Scalar.zero(space)
    diagonal = [lam + mu if i <= b_minus else lam if i < b_plus else zero for i in range(1, n + 1)]
    return symbolic_character(n, family.pair.sigma, diagonal, space), family.relations


def type2_family(n: int, Y: Sequence[int], Z: Sequence[int], b: int) -> CharacterMatrix:
    """符号矩阵：对角前 b 个为 λ，y_i 位于 (i, σ(i))"""
    family = Type2Family(n, tuple(Y), tuple(Z), b)
    space = VariableSpace(n)
    lam = Scalar.variable(space, "l")
    zero = Scalar.zero(space)
    diagonal = [lam if i <= b else zero for i in range(1, n + 1)]
    return symbolic_character(n, family.pair.sigma, diagonal, space)


def family_matrix(f: SolutionFamily) -> Tuple[CharacterMatrix, PairRelations]:
    if isinstance(f, Type1Family):
        return type1_family(f.n, f.b_minus, f.b_plus)
    return type2_family(f.n, f.Y, f.Z, f.b), PairRelations()


def enumerate_families(n: int) -> List[SolutionFamily]:
    """全部 Type 1（b₋ ≥ 1）与 Type 2 解族，按 (类型, b 数据, Y, Z) 排序"""
    if n < 1:
        raise UsageError(f"维数 n 必须 ≥ 1，收到 {n}")
    families: List[SolutionFamily] = []
    for b_minus in range(1, n + 1):
        for b_plus in range(b_minus + 1, n + 2 - b_minus):
            families.append(Type1Family(n, b_minus, b_plus))
    for pair in enumerate_admissible_pairs(n):
        if not pair.is_disjoint():
            continue
        stats = pair_stats(pair)
        for b in range(stats.b_minus, stats.b_plus):
            families.append(Type2Family(n, pair.Y, pair.Z, b))
    families.sort(key=lambda f: f.sort_key())
    logger.debug("n=%d 共 %d 个解族", n, len(families))
    return families


# --------------------------- 实例化 --------------------------- #

def _require(params: Mapping[str, Number], name: str) -> Fraction:
    if name not in params:
        raise ParameterError(f"缺少参数 {name}")
    return Fraction(params[name])


def instantiate(f: SolutionFamily, params: Mapping[str, Number]) -> np.ndarray:
    """代入参数得到数值矩阵（Fraction object 数组）

    Args:
        f: 解族
        params: {"l": λ, "m": μ（仅 Type 1）, "y<i>": …}，只接受自由参数

    Raises:
        ParameterError: 缺参数、多余参数、λμ = 0（Type 1）或 y_i = 0
    """
    unknown = set(params) - set(f.free_parameters())
    if unknown:
        raise ParameterError(f"{f.label()} 不接受参数 {sorted(unknown)}")
    n = f.n
    out = np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
    lam = _require(params, "l")
    if isinstance(f, Type1Family):
        mu = _require(params, "m")
        if lam * mu == 0:
            raise ParameterError(f"Type 1 要求 λμ ≠ 0，收到 λ={lam}, μ={mu}")
        for i in range(1, n + 1):
            out[i - 1, i - 1] = lam + mu if i <= f.b_minus else lam if i < f.b_plus else Fraction(0)
        for i in range(1, f.b_minus + 1):
            y = _require(params, f"y{i}")
            if y == 0:
                raise ParameterError(f"y{i} 不能为 0")
            partner = f.sigma_of(i)
            out[i - 1, partner - 1] = y
            out[partner - 1, i - 1] = -lam * mu / y
        return out
    for i in range(1, f.b + 1):
        out[i - 1, i - 1] = lam
    for i, j in f.pair.sigma.items():
        y = _require(params, f"y{i}")
        if y == 0:
            raise ParameterError(f"y{i} 不能为 0")
        out[i - 1, j - 1] = y
    return out


def random_nonzero(rng: random.Random, bound: int = 9) -> Fraction:
    num = 0
    while num == 0:
        num = rng.randint(-bound, bound)
    return Fraction(num, rng.randint(1, 4))


def sample_parameters(f: SolutionFamily, rng: random.Random) -> Dict[str, Fraction]:
    """随机生成满足约束的通用参数（全部非零）"""
    return {name: random_nonzero(rng) for name in f.free_parameters()}


def degenerate(f: Type1Family, params: Mapping[str, Number]) -> Tuple[np.ndarray, Type2Family]:
    """μ → 0 的逐元素极限：μ = 0，y_σ(i) = 0，保留 y_i

    Returns:
        (极限矩阵, 它所属的 Type 2 解族 Y=[1,b₋], Z=σ(Y), b=b₊−1)
    """
    if not isinstance(f, Type1Family):
        raise UsageError("只有 Type 1 解族可以退化")
    base = dict(params)
    base["m"] = Fraction(1)
    matrix = instantiate(f, base)
    lam = Fraction(params["l"])
    for i in range(1, f.n + 1):
        matrix[i - 1, i - 1] = lam if i < f.b_plus else Fraction(0)
    for i in range(1, f.b_minus + 1):
        matrix[f.sigma_of(i) - 1, i - 1] = Fraction(0)
    Y = tuple(range(1, f.b_minus + 1))
    Z = tuple(sorted(f.sigma_of(i) for i in Y))
    return matrix, Type2Family(f.n, Y, Z, f.b_plus - 1)


# --------------------------- 序列化 --------------------------- #

def family_to_dict(f: SolutionFamily) -> Dict[str, Any]:
    if isinstance(f, Type1Family):
        return {"type": 1, "n": f.n, "b_minus": f.b_minus, "b_plus": f.b_plus}
    return {"type": 2, "n": f.n, "Y": list(f.Y), "Z": list(f.Z), "b": f.b}


def family_from_dict(data: Mapping[str, Any]) -> SolutionFamily:
    try:
        kind = data["type"]
        if kind == 1:
            return Type1Family(int(data["n"]), int(data["b_minus"]), int(data["b_plus"]))
        if kind == 2:
            Y = tuple(int(i) for i in data["Y"])
            Z = tuple(int(i) for i in data["Z"])
            return Type2Family(int(data["n"]), Y, Z, int(data["b"]))
    except KeyError as e:
        raise UsageError(f"解族数据缺少字段 {e}") from e
    except (TypeError, ValidationError) as e:
        raise UsageError(f"解族数据格式错误: {e}") from e
    raise UsageError(f"未知的解族类型 {data.get('type')!r}")


# --------------------------- 反向分类 --------------------------- #

def _y_dict(y: Mapping[int, Fraction]) -> Dict[str, str]:
    return {f"y{i}": format_rational(v) for i, v in sorted(y.items())}


@dataclass(frozen=True)
class Type1Match:
    family: Type1Family
    e1: Fraction
    e2: Fraction
    lam: Optional[Fraction]
    mu: Optional[Fraction]
    y: Tuple[Tuple[int, Fraction], ...]

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"result": "type1", "family": family_to_dict(self.family)}
        out["e1"] = format_rational(self.e1)
        out["e2"] = format_rational(self.e2)
        if self.lam is not None:
            out["l"] = format_rational(self.lam)
            out["m"] = format_rational(self.mu)
        out["y"] = _y_dict(dict(self.y))
        return out


@dataclass(frozen=True)
class Type2Match:
    family: Type2Family
    lam: Fraction
    y: Tuple[Tuple[int, Fraction], ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "result": "type2",
            "family": family_to_dict(self.family),
            "l": format_rational(self.lam),
            "y": _y_dict(dict(self.y)),
        }


@dataclass(frozen=True)
class NotACharacter:
    tag: str
    equation: str

    def to_dict(self) -> Dict[str, Any]:
        return {"result": "not_a_character", "tag": self.tag, "equation": self.equation}


ClassificationResult = Union[Type1Match, Type2Match, NotACharacter]


def _rational_sqrt(value: Fraction) -> Optional[Fraction]:
    if value < 0:
        return None
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def _off_diagonal_support(matrix: np.ndarray) -> AdmissiblePair:
    n = matrix.shape[0]
    sigma: Dict[int, int] = {}
    used_cols: set = set()
    for r in range(n):
        cols = [c for c in range(n) if c != r and matrix[r, c] != 0]
        if len(cols) > 1:
            raise ClassificationError(f"第 {r + 1} 行有多个非零非对角元")
        if cols:
            if cols[0] in used_cols:
                raise ClassificationError(f"第 {cols[0] + 1} 列有多个非零非对角元")
            used_cols.add(cols[0])
            sigma[r + 1] = cols[0] + 1
    Y = tuple(sorted(sigma))
    try:
        return AdmissiblePair(n=n, Y=Y, images=tuple(sigma[i] for i in Y))
    except ValidationError as e:
        raise ClassificationError(f"非对角支撑不可容许: {e}") from e


def _classify_type1(matrix: np.ndarray, pair: AdmissiblePair) -> Type1Match:
    stats = pair_stats(pair)
    try:
        family = Type1Family(pair.n, stats.b_minus, stats.b_plus)
    except UsageError as e:
        raise ClassificationError(f"对合支撑不构成 Type 1: {e}") from e
    if family.pair != pair:
        raise ClassificationError(f"支撑 {pair.sigma} 与 {family.label()} 不符")
    sigma = pair.sigma
    e1 = matrix[0, 0]
    e2 = -matrix[0, sigma[1] - 1] * matrix[sigma[1] - 1, 0]
    if stats.b_plus - stats.b_minus > 1:
        lam: Optional[Fraction] = matrix[stats.b_minus, stats.b_minus]
        mu: Optional[Fraction] = e1 - lam
    else:
        root = _rational_sqrt(e1 * e1 - 4 * e2)
        lam, mu = ((e1 + root) / 2, (e1 - root) / 2) if root is not None else (None, None)
    y = {i: matrix[i - 1, sigma[i] - 1] for i in range(1, stats.b_minus + 1)}

    # 逐元素核对：对角模式、y_i·y_σ(i) = −e₂，λ 可定时再整体重建
    n = pair.n
    for i in range(1, n + 1):
        if i <= stats.b_minus:
            expected = e1
        elif i < stats.b_plus:
            expected = lam
        else:
            expected = Fraction(0)
        if matrix[i - 1, i - 1] != expected:
            raise ClassificationError(f"x{i} = {matrix[i - 1, i - 1]} 与 {family.label()} 不符")
    for i in y:
        if y[i] * matrix[sigma[i] - 1, i - 1] != -e2:
            raise ClassificationError(f"y{i}·y{sigma[i]} ≠ −e₂")
    if lam is not None:
        try:
            rebuilt = instantiate(family, {"l": lam, "m": mu, **{f"y{i}": v for i, v in y.items()}})
        except ParameterError as e:
            raise ClassificationError(f"参数无法重建矩阵: {e}") from e
        if not np.array_equal(rebuilt, matrix):
            raise ClassificationError(f"重建矩阵与输入不一致（{family.label()}）")
    return Type1Match(family, e1, e2, lam, mu, tuple(sorted(y.items())))


def _classify_type2(matrix: np.ndarray, pair: AdmissiblePair) -> Type2Match:
    n = pair.n
    diagonal = [matrix[i, i] for i in range(n)]
    nonzero = [i + 1 for i, x in enumerate(diagonal) if x != 0]
    if not nonzero:
        lam, b = Fraction(0), pair_stats(pair).b_minus
    else:
        lam, b = diagonal[0], max(nonzero)
    try:
        family = Type2Family(n, pair.Y, pair.Z, b)
    except UsageError as e:
        raise ClassificationError(f"对角模式与支撑不符: {e}") from e
    y = {i: matrix[i - 1, j - 1] for i, j in pair.sigma.items()}
    try:
        rebuilt = instantiate(family, {"l": lam, **{f"y{i}": v for i, v in y.items()}})
    except ParameterError as e:
        raise ClassificationError(f"参数无法重建矩阵: {e}") from e
    if not np.array_equal(rebuilt, matrix):
        raise ClassificationError(f"重建矩阵与输入不一致（{family.label()}）")
    return Type2Match(family, lam, tuple(sorted(y.items())))


def classify_matrix(matrix: Union[np.ndarray, Sequence[Sequence[Number]]], q: Number) -> ClassificationResult:
    """判定数值矩阵属于哪个解族并恢复参数

    Args:
        matrix: 有理数方阵
        q: 通用 q 值

    Returns:
        Type1Match / Type2Match；不满足 RE 时返回 NotACharacter（首个违反的方程）

    Raises:
        UsageError: 非方阵或 q 非通用
        ClassificationError: 满足 RE 却落在解族之外（内部矛盾）
    """
    q = validate_q(q)
    matrix = fraction_matrix(matrix)
    n = matrix.shape[0]
    if not is_zero_matrix(numeric_residual(matrix, q)):
        violated = first_violation(cached_system(n), matrix, q)
        if violated is None:
            raise ClassificationError("RE 残差非零，但方程组全部成立")
        logger.debug("矩阵违反 %s", violated.label())
        return NotACharacter(tag=violated.tag, equation=violated.label())
    pair = _off_diagonal_support(matrix)
    if pair.is_involutive():
        return _classify_type1(matrix, pair)
    if pair.is_disjoint():
        return _classify_type2(matrix, pair)
    raise ClassificationError(f"支撑 {pair.sigma} 既非对合也非不相交")
