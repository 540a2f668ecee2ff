"""精确系数环

ℚ[q, q⁻¹][λ, μ, y₁…y_n] 上的多元多项式（q 允许负指数），以及由互不相交的配对
{i, j} 给出的改写规则 y_i·y_j ↦ −λμ。

变量顺序固定为 y1 < … < yn < (x1 < … < xn) < l < m < q，其中 l、m 分别是 λ、μ 的
文本拼写；x 变量只在暴力求解器（oracle）的变量空间中出现。
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from qrefl.errors import EvaluationError, InvalidRelationsError, UsageError

Exponents = Tuple[int, ...]
Number = Union[int, Fraction]

_COEFF_RE = re.compile(r"-?\d+(?:/\d+)?")
_FACTOR_RE = re.compile(r"([a-z][0-9]*)(?:\^(-?[0-9]+))?")


# --------------------------- 变量空间 --------------------------- #

@dataclass(frozen=True)
class VariableSpace:
    """变量全集

    Args:
        n: 维数，决定 y1…yn（以及 x1…xn）
        diagonal: 为 True 时追加对角元未知量 x1…xn
    """

    n: int
    diagonal: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise UsageError(f"维数 n 必须 ≥ 1，收到 {self.n}")

    @cached_property
    def names(self) -> Tuple[str, ...]:
        ys = tuple(f"y{i}" for i in range(1, self.n + 1))
        xs = tuple(f"x{i}" for i in range(1, self.n + 1)) if self.diagonal else ()
        return ys + xs + ("l", "m", "q")

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def q_index(self) -> int:
        return self.size - 1

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise UsageError(f"变量 {name!r} 不属于 n={self.n} 的变量空间") from None

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {name: k for k, name in enumerate(self.names)}


# --------------------------- 标量 --------------------------- #

def _sort_key(exps: Exponents) -> Tuple[int, Exponents]:
    return (sum(exps), exps)


class Scalar:
    """精确系数环中的元素（不可变）

    内部以 (指数向量, 有理系数) 的有序元组保存，按分次字典序降序排列，
    因而结构相等即数学相等。
    """

    __slots__ = ("space", "_terms")

    def __init__(self, space: VariableSpace, terms: Optional[Mapping[Exponents, Number]] = None) -> None:
        clean: Dict[Exponents, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != space.size:
                raise UsageError("指数向量长度与变量空间不符")
            c = Fraction(coeff)
            if c:
                clean[tuple(exps)] = c
        self.space = space
        self._terms: Tuple[Tuple[Exponents, Fraction], ...] = tuple(
            sorted(clean.items(), key=lambda item: _sort_key(item[0]), reverse=True)
        )

    # ---------- 构造 ---------- #
    @classmethod
    def zero(cls, space: VariableSpace) -> "Scalar":
        return cls(space)

    @classmethod
    def constant(cls, space: VariableSpace, value: Number) -> "Scalar":
        return cls(space, {(0,) * space.size: value})

    @classmethod
    def variable(cls, space: VariableSpace, name: str, power: int = 1) -> "Scalar":
        idx = space.index(name)
        if power < 0 and idx != space.q_index:
            raise UsageError(f"只有 q 允许负指数，{name}^{power} 非法")
        exps = [0] * space.size
        exps[idx] = power
        return cls(space, {tuple(exps): 1})

    @classmethod
    def q_power(cls, space: VariableSpace, power: int) -> "Scalar":
        return cls.variable(space, "q", power)

    @classmethod
    def omega(cls, space: VariableSpace) -> "Scalar":
        """ω = q − q⁻¹"""
        return cls.q_power(space, 1) - cls.q_power(space, -1)

    # ---------- 基本信息 ---------- #
    @property
    def terms(self) -> Dict[Exponents, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(exps) for exps, _ in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise UsageError(f"{self} 不是常数")
        return self._terms[0][1] if self._terms else Fraction(0)

    def variables(self) -> FrozenSet[str]:
        names = self.space.names
        return frozenset(names[k] for exps, _ in self._terms for k, e in enumerate(exps) if e)

    def degree(self, name: str) -> int:
        idx = self.space.index(name)
        return max((exps[idx] for exps, _ in self._terms), default=0)

    def leading_coefficient(self) -> Fraction:
        return self._terms[0][1] if self._terms else Fraction(0)

    # ---------- 运算 ---------- #
    def _coerce(self, other: object) -> "Scalar":
        if isinstance(other, Scalar):
            if other.space != self.space:
                raise UsageError(f"变量空间不一致：n={self.space.n} 与 n={other.space.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar.constant(self.space, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        acc = dict(self._terms)
        for exps, c in rhs._terms:
            acc[exps] = acc.get(exps, 0) + c
        return Scalar(self.space, acc)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(self.space, {exps: -c for exps, c in self._terms})

    def __sub__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> "Scalar":
        lhs = self._coerce(other)
        if lhs is NotImplemented:
            return NotImplemented
        return lhs - self

    def __mul__(self, other: object) -> "Scalar":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        acc: Dict[Exponents, Fraction] = {}
        for e1, c1 in self._terms:
            for e2, c2 in rhs._terms:
                exps = tuple(a + b for a, b in zip(e1, e2))
                acc[exps] = acc.get(exps, 0) + c1 * c2
        return Scalar(self.space, acc)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "Scalar":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("除以零")
            return Scalar(self.space, {exps: c / other for exps, c in self._terms})
        return NotImplemented

    def __pow__(self, power: int) -> "Scalar":
        if power < 0:
            # 只有 q 的单项式可逆
            if len(self._terms) != 1 or any(e for e in self._terms[0][0][: self.space.q_index]):
                raise UsageError(f"{self} 在系数环中不可逆")
            exps, c = self._terms[0]
            inv = Scalar(self.space, {tuple(-e for e in exps): 1 / c})
            return inv ** (-power)
        result = Scalar.constant(self.space, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.space == other.space and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.space, self._terms))

    def __bool__(self) -> bool:
        return bool(self._terms)

    # ---------- 代入与求值 ---------- #
    def substitute(self, assignment: Mapping[str, Number]) -> "Scalar":
        """部分代入：把 assignment 中的变量换成有理数，其余保持符号"""
        fixed = {self.space.index(name): Fraction(value) for name, value in assignment.items()}
        q_idx = self.space.q_index
        if q_idx in fixed and fixed[q_idx] == 0:
            raise EvaluationError("q 不能取 0")
        acc: Dict[Exponents, Fraction] = {}
        for exps, c in self._terms:
            coeff = c
            new_exps = list(exps)
            for idx, value in fixed.items():
                if exps[idx]:
                    coeff *= value ** exps[idx]
                    new_exps[idx] = 0
            key = tuple(new_exps)
            acc[key] = acc.get(key, 0) + coeff
        return Scalar(self.space, acc)

    def evaluate(self, assignment: Mapping[str, Number]) -> Fraction:
        """在有理赋值处精确求值

        Raises:
            EvaluationError: 缺少变量或 q = 0
        """
        missing = self.variables() - set(assignment)
        if missing:
            raise EvaluationError(f"缺少变量赋值: {sorted(missing)}")
        if "q" in assignment and Fraction(assignment["q"]) == 0:
            raise EvaluationError("q 不能取 0")
        used = {name: value for name, value in assignment.items() if name in self.variables()}
        return self.substitute(used).constant_value()

    def collect(self, name: str) -> Dict[int, "Scalar"]:
        """按变量 name 的次数收集系数"""
        idx = self.space.index(name)
        buckets: Dict[int, Dict[Exponents, Fraction]] = {}
        for exps, c in self._terms:
            key = exps[:idx] + (0,) + exps[idx + 1:]
            buckets.setdefault(exps[idx], {})[key] = c
        return {deg: Scalar(self.space, terms) for deg, terms in buckets.items()}

    def reduce(self, relations: "PairRelations") -> "Scalar":
        return reduce(self, relations)

    # ---------- 文本 ---------- #
    def format(self) -> str:
        return format_canonical(self)

    def __str__(self) -> str:
        return format_canonical(self)

    def __repr__(self) -> str:
        return f"Scalar({format_canonical(self)!r}, n={self.space.n})"


# --------------------------- 配对关系 --------------------------- #

@dataclass(frozen=True)
class PairRelations:
    """改写规则 y_i·y_j ↦ −λμ 的集合，各配对两两不相交"""

    pairs: FrozenSet[FrozenSet[int]] = frozenset()

    def __post_init__(self) -> None:
        seen: set = set()
        for pair in self.pairs:
            if len(pair) != 2:
                raise InvalidRelationsError(f"配对 {sorted(pair)} 必须由两个不同下标组成")
            if seen & pair:
                raise InvalidRelationsError(f"下标 {sorted(seen & pair)} 出现在多个配对中")
            seen |= pair

    @classmethod
    def of(cls, pairs: Iterable[Iterable[int]]) -> "PairRelations":
        frozen = [frozenset(p) for p in pairs]
        if len(set(frozen)) != len(frozen):
            raise InvalidRelationsError("存在重复配对")
        return cls(frozenset(frozen))

    def sorted_pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(sorted(tuple(sorted(p)) for p in self.pairs))

    def __bool__(self) -> bool:
        return bool(self.pairs)


def reduce(s: Scalar, relations: PairRelations) -> Scalar:
    """对每个配对 {i, j} 把 y_i^a·y_j^b 中的 min(a, b) 份 y_i·y_j 换成 −λμ

    配对互不相交且规则只降低 y 的指数，所以一次扫描即得正规形，结果与改写顺序无关。
    """
    if not relations:
        return s
    space = s.space
    pair_idx = [(space.index(f"y{i}"), space.index(f"y{j}")) for i, j in relations.sorted_pairs()]
    l_idx, m_idx = space.index("l"), space.index("m")
    acc: Dict[Exponents, Fraction] = {}
    for exps, c in s.terms.items():
        e = list(exps)
        coeff = c
        for a, b in pair_idx:
            k = min(e[a], e[b])
            if k:
                e[a] -= k
                e[b] -= k
                e[l_idx] += k
                e[m_idx] += k
                coeff = -coeff if k % 2 else coeff
        key = tuple(e)
        acc[key] = acc.get(key, 0) + coeff
    return Scalar(space, acc)


# --------------------------- 文本格式 --------------------------- #

def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_canonical(s: Scalar) -> str:
    """规范文本：单项式以 " + " 连接，系数 1 在非常数单项式中省略"""
    if s.is_zero():
        return "0"
    names = s.space.names
    parts = []
    for exps, c in s.terms.items():
        factors = [name if e == 1 else f"{name}^{e}" for name, e in zip(names, exps) if e]
        if not factors:
            parts.append(_format_coeff(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append("*".join([_format_coeff(c)] + factors))
    return " + ".join(parts)


def parse(text: str, space: VariableSpace) -> Scalar:
    """format_canonical 的逆

    Raises:
        UsageError: 变量未知或单项式格式错误
    """
    text = text.strip()
    if text == "0":
        return Scalar.zero(space)
    if not text:
        raise UsageError("空表达式")
    total = Scalar.zero(space)
    for monomial in text.split(" + "):
        tokens = monomial.strip().split("*")
        coeff = Fraction(1)
        if _COEFF_RE.fullmatch(tokens[0]):
            coeff = Fraction(tokens[0])
            tokens = tokens[1:]
        term = Scalar.constant(space, coeff)
        for token in tokens:
            match = _FACTOR_RE.fullmatch(token)
            if not match:
                raise UsageError(f"无法解析因子 {token!r}（来自 {text!r}）")
            power = int(match.group(2)) if match.group(2) else 1
            if power == 0:
                raise UsageError(f"因子 {token!r} 的指数不能为 0")
            term = term * Scalar.variable(space, match.group(1), power)
        total = total + term
    return total


def parse_rational(text: str) -> Fraction:
    """解析 "p/q" 形式的有理数"""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"无法解析有理数 {text!r}: {e}") from e


def format_rational(value: Fraction) -> str:
    return _format_coeff(Fraction(value))
