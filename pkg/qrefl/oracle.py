"""暴力求解器

对每个可容许的非对角支撑模式，把对角元 x_i 与支撑上的 y_j 当作未知量，在数值 q
处展开 RE 残差，再用分支消元把方程组拆成若干三角形分层（SolutionComponent）。
所有分支都是穷尽的：变量要么取 0，要么记为非零；主元方程只在系数非零时使用。
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from qrefl.braid import (
    BraidOperator,
    build_S,
    fraction_matrix,
    is_zero_matrix,
    numeric_residual,
    re_residual,
    symbolic_character,
    validate_q,
)
from qrefl.classification import (
    AdmissiblePair,
    NotACharacter,
    SolutionFamily,
    classify_matrix,
    enumerate_admissible_pairs,
    enumerate_families,
    family_to_dict,
    instantiate,
    random_nonzero,
    sample_parameters,
)
from qrefl.errors import ClassificationError, EvaluationError, OracleError, UsageError
from qrefl.scalars import Number, Scalar, VariableSpace, format_rational

logger = logging.getLogger("qrefl.oracle")

SUPPORTED_N = (2, 3)


# --------------------------- 数据类型 --------------------------- #

@dataclass(frozen=True)
class Pivot:
    """coeff·var + rest = 0，coeff 在所在分支上非零"""

    var: str
    coeff: Scalar
    rest: Scalar

    def equation(self) -> Scalar:
        return self.coeff * Scalar.variable(self.coeff.space, self.var) + self.rest


@dataclass(frozen=True)
class SolutionComponent:
    """解集的一个分层：主元方程 + 非零条件"""

    pattern: AdmissiblePair
    pivots: Tuple[Pivot, ...]
    nonvanishing: Tuple[str, ...]
    space: VariableSpace = field(compare=False, repr=False)

    @property
    def constraints(self) -> Tuple[Scalar, ...]:
        return tuple(p.equation() for p in self.pivots)

    @property
    def unknowns(self) -> Tuple[str, ...]:
        xs = tuple(f"x{i}" for i in range(1, self.pattern.n + 1))
        return tuple(f"y{j}" for j in self.pattern.Y) + xs

    @property
    def free_variables(self) -> Tuple[str, ...]:
        bound = {p.var for p in self.pivots}
        return tuple(v for v in self.unknowns if v not in bound)

    def matrix_from(self, values: Dict[str, Fraction]) -> np.ndarray:
        n = self.pattern.n
        out = fraction_matrix([[0] * n for _ in range(n)])
        for i in range(1, n + 1):
            out[i - 1, i - 1] = values[f"x{i}"]
        for j, target in self.pattern.sigma.items():
            out[j - 1, target - 1] = values[f"y{j}"]
        return out

    def contains(self, matrix: np.ndarray) -> bool:
        """matrix 的支撑落在模式内，且满足全部约束与非零条件"""
        n = self.pattern.n
        if matrix.shape != (n, n):
            return False
        sigma = self.pattern.sigma
        for r in range(1, n + 1):
            for c in range(1, n + 1):
                if r != c and sigma.get(r) != c and matrix[r - 1, c - 1] != 0:
                    return False
        values = {f"x{i}": Fraction(matrix[i - 1, i - 1]) for i in range(1, n + 1)}
        values.update({f"y{j}": Fraction(matrix[j - 1, t - 1]) for j, t in sigma.items()})
        if any(values[v] == 0 for v in self.nonvanishing):
            return False
        return all(c.evaluate(values) == 0 for c in self.constraints)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pattern": {"Y": list(self.pattern.Y), "images": list(self.pattern.images)},
            "constraints": [str(c) for c in self.constraints],
            "nonvanishing": list(self.nonvanishing),
        }


# --------------------------- 方程化简 --------------------------- #

class _Inconsistent(Exception):
    """分支无解"""


@dataclass(frozen=True)
class _Branch:
    equations: Tuple[Scalar, ...]
    nonzero: FrozenSet[str]
    pivots: Tuple[Pivot, ...]


def _pseudo_reduce(e: Scalar, pivot: Pivot) -> Scalar:
    """以 var = −rest/coeff 代入并乘以 coeff^d，结果不含 var"""
    buckets = e.collect(pivot.var)
    d = max(buckets)
    if d == 0:
        return e
    neg_rest = -pivot.rest
    total = Scalar.zero(e.space)
    for k, ek in buckets.items():
        total = total + ek * neg_rest ** k * pivot.coeff ** (d - k)
    return total


def _strip(e: Scalar, nonzero: FrozenSet[str]) -> Scalar:
    """约去已知非零变量的公因子"""
    terms = e.terms
    if not terms:
        return e
    space = e.space
    shift = [0] * space.size
    for name in nonzero:
        idx = space.index(name)
        shift[idx] = min(exps[idx] for exps in terms)
    if not any(shift):
        return e
    return Scalar(space, {tuple(a - s for a, s in zip(exps, shift)): c for exps, c in terms.items()})


def _normalize(equations: Sequence[Scalar], branch: _Branch) -> List[Scalar]:
    seen = set()
    out: List[Scalar] = []
    for e in equations:
        for pivot in branch.pivots:
            e = _pseudo_reduce(e, pivot)
        e = _strip(e, branch.nonzero)
        if e.is_zero():
            continue
        if e.is_constant():
            raise _Inconsistent()
        e = e / e.leading_coefficient()
        if e not in seen:
            seen.add(e)
            out.append(e)
    out.sort(key=lambda s: (len(s.terms), str(s)))
    return out


def _ordered_variables(e: Scalar) -> List[str]:
    present = e.variables()
    return [name for name in e.space.names if name in present]


def _choose(equations: Sequence[Scalar], nonzero: FrozenSet[str]) -> Tuple[str, Any]:
    """依次尝试：常系数主元、整体公因子分裂、非零单项式系数主元、系数变量分裂"""
    linear: List[Tuple[Scalar, str, Scalar, Scalar]] = []
    for e in equations:
        for v in _ordered_variables(e):
            if e.degree(v) == 1:
                buckets = e.collect(v)
                linear.append((e, v, buckets[1], buckets.get(0, Scalar.zero(e.space))))
    for _, v, coeff, rest in linear:
        if coeff.is_constant():
            return "pivot", Pivot(v, coeff, rest)
    for e in equations:
        for v in _ordered_variables(e):
            if v not in nonzero and all(exps[e.space.index(v)] > 0 for exps in e.terms):
                return "split", v
    monomial = [(v, coeff, rest) for _, v, coeff, rest in linear if len(coeff.terms) == 1]
    for v, coeff, rest in monomial:
        if coeff.variables() <= nonzero:
            return "pivot", Pivot(v, coeff, rest)
    for _, coeff, _ in monomial:
        for w in _ordered_variables(coeff):
            if w not in nonzero:
                return "split", w
    raise OracleError(f"无法把方程组化为三角形式: {[str(e) for e in equations]}")


def _consistent(branch: _Branch) -> bool:
    """非零变量作主元时，其余式在后续主元下不能恒为零"""
    for k, pivot in enumerate(branch.pivots):
        if pivot.var not in branch.nonzero:
            continue
        rest = pivot.rest
        for later in branch.pivots[k + 1:]:
            rest = _pseudo_reduce(rest, later)
        if rest.is_zero():
            return False
    return True


def solve_system(
    equations: Sequence[Scalar],
    pattern: AdmissiblePair,
    nonzero: FrozenSet[str] = frozenset(),
) -> List[SolutionComponent]:
    """分支消元，返回全部相容分层（深度优先，变量取 0 的分支先出）"""
    space = equations[0].space if equations else VariableSpace(pattern.n, diagonal=True)
    stack = [_Branch(tuple(equations), frozenset(nonzero), ())]
    out: List[SolutionComponent] = []
    one = Scalar.constant(space, 1)
    zero = Scalar.zero(space)
    while stack:
        branch = stack.pop()
        try:
            eqs = _normalize(branch.equations, branch)
        except _Inconsistent:
            continue
        if not eqs:
            if _consistent(branch):
                nonvanishing = tuple(v for v in space.names if v in branch.nonzero)
                out.append(SolutionComponent(pattern, branch.pivots, nonvanishing, space))
            continue
        kind, payload = _choose(eqs, branch.nonzero)
        if kind == "pivot":
            stack.append(_Branch(tuple(eqs), branch.nonzero, branch.pivots + (payload,)))
        else:
            stack.append(_Branch(tuple(eqs), branch.nonzero | {payload}, branch.pivots))
            stack.append(_Branch(tuple(eqs), branch.nonzero, branch.pivots + (Pivot(payload, one, zero),)))
    return out


# --------------------------- 采样 --------------------------- #

def sample_component(c: SolutionComponent, rng: random.Random, attempts: int = 50) -> np.ndarray:
    """自由变量取随机非零有理数，按主元逆序回代

    Raises:
        OracleError: 多次尝试都违反非零条件
    """
    for _ in range(attempts):
        values = {v: random_nonzero(rng) for v in c.free_variables}
        try:
            for pivot in reversed(c.pivots):
                coeff = pivot.coeff.evaluate(values)
                if coeff == 0:
                    raise ZeroDivisionError(pivot.var)
                values[pivot.var] = -pivot.rest.evaluate(values) / coeff
        except ZeroDivisionError:
            continue
        if any(values[v] == 0 for v in c.nonvanishing):
            continue
        return c.matrix_from(values)
    raise OracleError(f"分层 {c.to_dict()} 采样失败")


# --------------------------- 求解 --------------------------- #

def pattern_equations(pattern: AdmissiblePair, q: Number) -> List[Scalar]:
    """模式上的 RE 残差在数值 q 处的非零元"""
    n = pattern.n
    space = VariableSpace(n, diagonal=True)
    diagonal = [Scalar.variable(space, f"x{i}") for i in range(1, n + 1)]
    A = symbolic_character(n, pattern.sigma, diagonal, space)
    S = build_S(n, space)
    S_q = BraidOperator(n=n, space=space, entries=S.specialize(q))
    residual = re_residual(A, S_q)
    return [entry for entry in residual.flat if not entry.is_zero()]


def _drop_unsampleable(components: List[SolutionComponent]) -> List[SolutionComponent]:
    rng = random.Random(0)
    kept = []
    for c in components:
        try:
            sample_component(c, rng)
        except OracleError:
            logger.warning("丢弃无法采样的分层 %s", c.to_dict())
            continue
        kept.append(c)
    return kept


def solve_pattern(pattern: AdmissiblePair, q: Number, assume_support: bool = True) -> List[SolutionComponent]:
    q = validate_q(q)
    equations = pattern_equations(pattern, q)
    nonzero = frozenset(f"y{j}" for j in pattern.Y) if assume_support else frozenset()
    components = _drop_unsampleable(solve_system(equations, pattern, nonzero))
    logger.debug("模式 %s 得到 %d 个分层", pattern.sigma, len(components))
    return components


def solve_all(n: int, q: Number, workers: int = 1) -> List[SolutionComponent]:
    """n ∈ {2, 3} 时全部可容许模式上的解集分层

    Raises:
        UsageError: n 不受支持或 q 非通用
    """
    if n not in SUPPORTED_N:
        raise UsageError(f"暴力求解只支持 n ∈ {SUPPORTED_N}，收到 {n}")
    q = validate_q(q)
    patterns = enumerate_admissible_pairs(n)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(lambda p: solve_pattern(p, q), patterns))
    components = [c for group in results for c in group]
    logger.info("n=%d, q=%s：%d 个模式，%d 个分层", n, q, len(patterns), len(components))
    return components


def solve_unrestricted(q: Number, n: int = 2) -> List[SolutionComponent]:
    """不预设支撑：全部 n² 个元都是未知量，无非零假设（只用于 n = 2）"""
    if n != 2:
        raise UsageError("无支撑限制的求解只支持 n = 2")
    full = AdmissiblePair(n=2, Y=(1, 2), images=(2, 1))
    return solve_pattern(full, q, assume_support=False)


# --------------------------- 与目录对照 --------------------------- #

@dataclass(frozen=True)
class OracleReport:
    n: int
    q: Fraction
    components: Tuple[SolutionComponent, ...]
    missing: Tuple[Dict[str, Any], ...]
    extra: Tuple[Dict[str, Any], ...]

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "q": format_rational(self.q),
            "components": [c.to_dict() for c in self.components],
            "missing": list(self.missing),
            "extra": list(self.extra),
        }


def _classify_sample(matrix: np.ndarray, q: Fraction, catalog: FrozenSet[SolutionFamily]) -> Optional[Dict[str, Any]]:
    """样本落在目录之外时返回说明，否则返回 None"""
    try:
        result = classify_matrix(matrix, q)
    except ClassificationError as e:
        return {"reason": "unclassifiable", "detail": str(e)}
    if isinstance(result, NotACharacter):
        return {"reason": "not_a_character", "detail": result.equation}
    if result.family not in catalog:
        return {"reason": "family_not_in_catalog", "family": family_to_dict(result.family)}
    return None


def compare_with_catalog(
    n: int,
    q: Number,
    catalog: Optional[Sequence[SolutionFamily]] = None,
    samples: int = 100,
    seed: int = 0,
    workers: int = 1,
    progress: bool = False,
) -> OracleReport:
    """双向对照：分层样本都能归入目录；目录中每个解族的通用实例都落在某个分层里"""
    q = validate_q(q)
    components = solve_all(n, q, workers=workers)
    families = list(enumerate_families(n) if catalog is None else catalog)
    known = frozenset(families)
    rng = random.Random(seed)

    missing: List[Dict[str, Any]] = []
    for c in tqdm(components, desc="分层采样", disable=not progress):
        for _ in range(samples):
            problem = _classify_sample(sample_component(c, rng), q, known)
            if problem is not None:
                missing.append({"component": c.to_dict(), **problem})
                break

    extra: List[Dict[str, Any]] = []
    for f in families:
        matrix = instantiate(f, sample_parameters(f, rng))
        if not any(c.contains(matrix) for c in components):
            extra.append(family_to_dict(f))

    logger.info("n=%d, q=%s：missing=%d, extra=%d", n, q, len(missing), len(extra))
    return OracleReport(n, q, tuple(components), tuple(missing), tuple(extra))


def covers(components: Sequence[SolutionComponent], matrix: np.ndarray) -> bool:
    return any(c.contains(matrix) for c in components)


def _pinned_point(c: SolutionComponent, pinned: str, rng: random.Random) -> Optional[np.ndarray]:
    """pinned 取 0、其余自由变量随机，回代后仍满足全部等式约束时返回矩阵"""
    values = {v: random_nonzero(rng) for v in c.free_variables}
    values[pinned] = Fraction(0)
    for pivot in reversed(c.pivots):
        if pivot.var == pinned:
            continue
        coeff = pivot.coeff.evaluate(values)
        if coeff == 0:
            return None
        values[pivot.var] = -pivot.rest.evaluate(values) / coeff
    if any(e.evaluate(values) != 0 for e in c.constraints):
        return None
    return c.matrix_from(values)


def closure_gaps(
    components: Sequence[SolutionComponent], q: Number, rng: random.Random, samples: int = 3
) -> Tuple[int, List[np.ndarray]]:
    """违反某个非零条件但满足等式约束的点：若解出 RE，必须落在另一个分层里

    Returns:
        (检查的点数, 解出 RE 却不被任何分层覆盖的矩阵)
    """
    q = validate_q(q)
    checked = 0
    gaps: List[np.ndarray] = []
    for c in components:
        for v in c.nonvanishing:
            for _ in range(samples):
                matrix = _pinned_point(c, v, rng)
                if matrix is None:
                    continue
                checked += 1
                if is_zero_matrix(numeric_residual(matrix, q)) and not covers(components, matrix):
                    logger.warning("分层 %s 在 %s = 0 处的解不被覆盖", c.to_dict(), v)
                    gaps.append(matrix)
    return checked, gaps


def support_counterexamples(n: int, q: Number, samples: int, rng: random.Random) -> List[np.ndarray]:
    """某一行放两个非零非对角元的随机矩阵中解出 RE 的那些（预期为空）"""
    q = validate_q(q)
    if n < 3:
        raise UsageError("一行两个非零非对角元至少需要 n = 3")
    found: List[np.ndarray] = []
    for _ in range(samples):
        matrix = fraction_matrix([[0] * n for _ in range(n)])
        for i in range(n):
            if rng.random() < 0.5:
                matrix[i, i] = random_nonzero(rng)
        row = rng.randrange(n)
        c1, c2 = rng.sample([c for c in range(n) if c != row], 2)
        matrix[row, c1] = random_nonzero(rng)
        matrix[row, c2] = random_nonzero(rng)
        for _ in range(rng.randrange(n)):
            r, c = rng.sample(range(n), 2)
            matrix[r, c] = random_nonzero(rng)
        try:
            if is_zero_matrix(numeric_residual(matrix, q)):
                found.append(matrix)
        except EvaluationError as e:
            logger.warning("样本求值失败: %s", e)
    return found
