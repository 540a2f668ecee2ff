"""验收检查

每个检查类由配置项的 params 构造，``run()`` 返回 CheckReport。
检查项在 ``config/configs.json`` 的 ``checks`` 中登记，按 class 名动态加载。
"""

from __future__ import annotations

import importlib
import logging
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from qrefl.braid import (
    braid_residual,
    build_R,
    build_S,
    flip,
    hecke_residual,
    is_zero_matrix,
    matmul,
    re_residual,
    system_equivalence_check,
)
from qrefl.classification import (
    SolutionFamily,
    Type1Family,
    Type1Match,
    Type2Match,
    classify_matrix,
    count_sigma_choices,
    enumerate_admissible_pairs,
    enumerate_families,
    enumerate_sigma_choices,
    family_matrix,
    instantiate,
    random_nonzero,
    sample_parameters,
)
from qrefl.config.utils import DEFAULT_SETTINGS
from qrefl.fixtures import examples_report
from qrefl.oracle import (
    closure_gaps,
    compare_with_catalog,
    covers,
    sample_component,
    solve_all,
    solve_unrestricted,
    support_counterexamples,
)
from qrefl.scalars import parse_rational
from qrefl.spectral import (
    char_poly,
    expected_semisimple,
    expected_spectrum,
    invariant_blocks,
    is_invariant,
    is_semisimple,
)

logger = logging.getLogger("qrefl.checks")


@dataclass
class CheckReport:
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "details": self.details}


class BaseCheck:
    """检查项基类：保存全局设置并提供随机源与 q 值"""

    name = "check"

    def __init__(self, settings: Optional[Mapping[str, Any]] = None) -> None:
        self.settings = {**DEFAULT_SETTINGS, **(settings or {})}
        self.rng = random.Random(self.settings["seed"])

    @property
    def q_values(self) -> List[Fraction]:
        return [parse_rational(str(q)) for q in self.settings["q_values"]]

    @property
    def workers(self) -> int:
        return max(1, int(self.settings["workers"]))

    def random_q(self) -> Fraction:
        q = Fraction(0)
        while q in (0, 1, -1):
            q = random_nonzero(self.rng, bound=7)
        return q

    def run(self) -> CheckReport:  # pragma: no cover - 由子类实现
        raise NotImplementedError


# --------------------------- 辫子矩阵 --------------------------- #

class BraidHeckeCheck(BaseCheck):
    """n = 1…max_n：辫子关系、Hecke 关系、S = P·R 全部精确成立"""

    name = "braid_hecke"

    def __init__(self, max_n: int = 6, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n

    def run(self) -> CheckReport:
        failures = []
        for n in tqdm(range(1, self.max_n + 1), desc="辫子关系", leave=False):
            S = build_S(n)
            if not is_zero_matrix(braid_residual(S)):
                failures.append({"n": n, "identity": "braid"})
            if not is_zero_matrix(hecke_residual(S)):
                failures.append({"n": n, "identity": "hecke"})
            if not bool(np.all(matmul(flip(n), build_R(n)) == S.entries)):
                failures.append({"n": n, "identity": "S = P·R"})
        return CheckReport(self.name, not failures, {"max_n": self.max_n, "failures": failures})


# --------------------------- 解族可靠性 --------------------------- #

def _family_residual_zero(f: SolutionFamily) -> bool:
    A, relations = family_matrix(f)
    return is_zero_matrix(re_residual(A, build_S(f.n), relations))


class SoundnessCheck(BaseCheck):
    """每个解族的符号 RE 残差在配对关系下约化为零"""

    name = "soundness"

    def __init__(self, max_n: int = 5, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n

    def run(self) -> CheckReport:
        families = [f for n in range(1, self.max_n + 1) for f in enumerate_families(n)]
        failures = []
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(_family_residual_zero, f): f for f in families}
            for future in tqdm(as_completed(futures), total=len(futures), desc="解族残差", leave=False):
                if not future.result():
                    failures.append(futures[future].label())
        return CheckReport(self.name, not failures, {"families": len(families), "failures": sorted(failures)})


# --------------------------- 已知矩阵 --------------------------- #

class FixtureCheck(BaseCheck):
    name = "fixtures"

    def __init__(self, max_n: int = 6, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n

    def run(self) -> CheckReport:
        report = examples_report(self.max_n)
        failures = [s.to_dict() for s in report if not s.ok]
        return CheckReport(self.name, not failures, {"fixtures": len(report), "failures": failures})


# --------------------------- 暴力求解 --------------------------- #

def _structure(components) -> List[Tuple]:
    return sorted((c.pattern.Y, c.pattern.images, len(c.pivots), len(c.nonvanishing)) for c in components)


class OracleCheck(BaseCheck):
    """n ∈ dims 的完备性对照、删除解族的对照组、无支撑限制求解与支撑反例抽查"""

    name = "oracle"

    def __init__(self, dims: Sequence[int] = (2, 3), settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.dims = tuple(dims)

    def run(self) -> CheckReport:
        details: Dict[str, Any] = {"runs": []}
        passed = True
        samples = int(self.settings["oracle_samples"])
        for n in self.dims:
            structures = []
            for q in self.q_values:
                report = compare_with_catalog(
                    n, q, samples=samples, seed=self.settings["seed"], workers=self.workers
                )
                passed = passed and report.ok
                structures.append(_structure(report.components))
                details["runs"].append(
                    {"n": n, "q": str(q), "components": len(report.components),
                     "missing": len(report.missing), "extra": len(report.extra)}
                )
            if any(s != structures[0] for s in structures[1:]):
                passed = False
                details.setdefault("q_dependent", []).append(n)

        # 删除一个解族后必须被检出
        q = self.q_values[0]
        catalog = [f for f in enumerate_families(2) if not isinstance(f, Type1Family)]
        sabotaged = compare_with_catalog(2, q, catalog=catalog, samples=10, seed=self.settings["seed"])
        details["sabotage_detected"] = any(
            m.get("family", {}).get("type") == 1 for m in sabotaged.missing
        )
        passed = passed and details["sabotage_detected"]

        # n = 2 不加支撑限制时解集相同
        restricted = solve_all(2, q)
        unrestricted = solve_unrestricted(q)
        agree = all(
            covers(restricted, sample_component(c, self.rng)) for c in unrestricted for _ in range(10)
        ) and all(covers(unrestricted, sample_component(c, self.rng)) for c in restricted for _ in range(10))
        details["unrestricted_agrees"] = agree
        passed = passed and agree

        # 非零条件被打破、等式仍成立的解必须落在别的分层
        gaps = 0
        checked = 0
        for n in self.dims:
            n_checked, n_gaps = closure_gaps(solve_all(n, q, workers=self.workers), q, self.rng)
            checked += n_checked
            gaps += len(n_gaps)
        details["closure_checked"] = checked
        details["closure_gaps"] = gaps
        passed = passed and gaps == 0

        counterexamples = support_counterexamples(3, q, samples=200, rng=self.rng)
        details["support_counterexamples"] = len(counterexamples)
        passed = passed and not counterexamples
        return CheckReport(self.name, passed, details)


# --------------------------- 残差与方程组 --------------------------- #

def equivalence_corpus(size: int, max_n: int, rng: random.Random) -> List[np.ndarray]:
    """解族实例、单元素扰动、随机稠密矩阵各占三分之一左右"""
    families = [f for n in range(1, max_n + 1) for f in enumerate_families(n)]
    corpus: List[np.ndarray] = []
    while len(corpus) < size:
        f = rng.choice(families)
        A = instantiate(f, sample_parameters(f, rng))
        corpus.append(A)
        zero_slots = [idx for idx in np.ndindex(A.shape) if A[idx] == 0]
        if zero_slots:
            perturbed = A.copy()
            perturbed[rng.choice(zero_slots)] += 1
            corpus.append(perturbed)
        n = rng.randint(2, max_n)
        dense = np.empty((n, n), dtype=object)
        for idx in np.ndindex(dense.shape):
            dense[idx] = Fraction(rng.randint(-3, 3))
        corpus.append(dense)
    return corpus[:size]


class EquivalenceCheck(BaseCheck):
    """RE 残差为零 ⇔ 二次方程组全部成立"""

    name = "equivalence"

    def __init__(self, max_n: int = 4, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n

    def run(self) -> CheckReport:
        corpus = equivalence_corpus(int(self.settings["equivalence_corpus"]), self.max_n, self.rng)
        disagreements = []
        solutions = 0
        for A in tqdm(corpus, desc="方程组等价", leave=False):
            q = self.random_q()
            report = system_equivalence_check(A, q)
            solutions += report.residual_zero
            if not report.agree:
                disagreements.append({"q": str(q), "rows": [[str(v) for v in row] for row in A]})
        return CheckReport(
            self.name,
            not disagreements,
            {"corpus": len(corpus), "solutions": solutions, "disagreements": disagreements},
        )


# --------------------------- 谱 --------------------------- #

def _spectral_samples(f: SolutionFamily, count: int, rng: random.Random) -> Iterable[Dict[str, Fraction]]:
    for _ in range(count):
        yield sample_parameters(f, rng)
    # 退化参数：Type 1 取 λ = μ，Type 2 取 λ = 0
    params = sample_parameters(f, rng)
    if isinstance(f, Type1Family):
        params["m"] = params["l"]
    else:
        params["l"] = Fraction(0)
    yield params


class SpectrumCheck(BaseCheck):
    """特征多项式等于按块分析的乘积形式；半单性判据；不变块"""

    name = "spectrum"

    def __init__(self, max_n: int = 5, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n

    def _check_family(self, f: SolutionFamily, count: int, seed: int) -> List[Dict[str, Any]]:
        rng = random.Random(seed)
        q = self.q_values[0]
        spectrum = expected_spectrum(f)
        problems = []
        for params in _spectral_samples(f, count, rng):
            A = instantiate(f, params)
            if char_poly(A) != spectrum.evaluate(params).polynomial():
                problems.append({"family": f.label(), "issue": "char_poly"})
            if is_semisimple(A, q) != expected_semisimple(f, params):
                problems.append({"family": f.label(), "issue": "semisimple"})
            if not all(is_invariant(A, block) for block in invariant_blocks(A, f.pair)):
                problems.append({"family": f.label(), "issue": "blocks"})
        return problems

    def run(self) -> CheckReport:
        families = [f for n in range(1, self.max_n + 1) for f in enumerate_families(n)]
        count = int(self.settings["spectral_samples"])
        problems: List[Dict[str, Any]] = []
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = [
                executor.submit(self._check_family, f, count, self.rng.randrange(2 ** 32)) for f in families
            ]
            for future in tqdm(as_completed(futures), total=len(futures), desc="谱", leave=False):
                problems.extend(future.result())
        return CheckReport(self.name, not problems, {"families": len(families), "problems": problems[:20]})


# --------------------------- 计数 --------------------------- #

def brute_force_pair_count(n: int) -> int:
    """遍历等大小子集对 (Y, Z) 与全部双射，数出存在递减无不动点双射的对数"""
    count = 0
    indices = range(1, n + 1)
    for k in range(n + 1):
        for Y in combinations(indices, k):
            for Z in combinations(indices, k):
                for images in permutations(Z):
                    decreasing = all(a > b for a, b in zip(images, images[1:]))
                    if decreasing and all(i != j for i, j in zip(Y, images)):
                        count += 1
                        break
    return count


class CountingCheck(BaseCheck):
    name = "counting"

    def __init__(self, max_n: int = 10, brute_force_n: int = 6, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n
        self.brute_force_n = brute_force_n

    def run(self) -> CheckReport:
        failures = []
        for n in range(1, self.max_n + 1):
            for K in range(0, n // 2 + 1):
                expected = count_sigma_choices(n, K)
                for Y in combinations(range(1, n + 1), K):
                    if len(enumerate_sigma_choices(n, Y)) != expected:
                        failures.append({"n": n, "Y": list(Y)})
        pair_counts = {}
        for n in range(1, self.brute_force_n + 1):
            enumerated = len(enumerate_admissible_pairs(n))
            pair_counts[n] = enumerated
            if enumerated != brute_force_pair_count(n):
                failures.append({"n": n, "pairs": enumerated})
        return CheckReport(self.name, not failures, {"pair_counts": pair_counts, "failures": failures})


# --------------------------- 分类往返 --------------------------- #

def _roundtrip_ok(f: SolutionFamily, params: Mapping[str, Fraction], q: Fraction) -> bool:
    result = classify_matrix(instantiate(f, params), q)
    if not isinstance(result, (Type1Match, Type2Match)) or result.family != f:
        return False
    if isinstance(result, Type1Match):
        lam, mu = params["l"], params["m"]
        if result.e1 != lam + mu or result.e2 != lam * mu:
            return False
        if result.lam is not None and {result.lam, result.mu} != {lam, mu}:
            return False
    return True


class RoundTripCheck(BaseCheck):
    """classify(instantiate(f, θ)) 还原 f 与 (e₁, e₂)"""

    name = "roundtrip"

    def __init__(self, max_n: int = 5, settings: Optional[Mapping[str, Any]] = None) -> None:
        super().__init__(settings)
        self.max_n = max_n

    def run(self) -> CheckReport:
        samples = int(self.settings["roundtrip_samples"])
        failures = []
        total = 0
        for n in range(1, self.max_n + 1):
            for f in enumerate_families(n):
                for _ in range(samples):
                    params = sample_parameters(f, self.rng)
                    total += 1
                    if not _roundtrip_ok(f, params, self.random_q()):
                        failures.append({"family": f.label(), "params": {k: str(v) for k, v in params.items()}})
        return CheckReport(self.name, not failures, {"samples": total, "failures": failures[:20]})


# --------------------------- 加载与运行 --------------------------- #

def instantiate_check(cfg: Mapping[str, Any], settings: Optional[Mapping[str, Any]] = None) -> Tuple[str, BaseCheck]:
    """动态加载检查类并实例化"""
    cls_name = cfg.get("class")
    if not cls_name:
        raise ValueError("缺少 class 字段")

    try:
        module = importlib.import_module("qrefl.checks")
        cls = getattr(module, cls_name)
    except (ModuleNotFoundError, AttributeError) as e:
        raise ImportError(f"无法加载 qrefl.checks.{cls_name}: {e}") from e

    params = cfg.get("params", {})
    return cfg.get("alias", cls_name), cls(settings=settings, **params)


def run_checks(
    cfgs: Sequence[Mapping[str, Any]],
    settings: Optional[Mapping[str, Any]] = None,
    only: Optional[str] = None,
) -> List[Tuple[str, CheckReport]]:
    results = []
    for cfg in cfgs:
        if cfg.get("activate", True) is False:
            continue
        alias, check = instantiate_check(cfg, settings)
        if only is not None and only not in (alias, cfg.get("class")):
            continue
        logger.info("运行检查: %s", alias)
        report = check.run()
        logger.info("%s: %s", alias, "通过" if report.passed else "失败")
        results.append((alias, report))
    return results
