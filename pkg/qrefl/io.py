"""JSON 文件读写：矩阵、解族、参数"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from qrefl.braid import BraidOperator, CharacterMatrix
from qrefl.classification import SolutionFamily, family_from_dict
from qrefl.errors import UsageError
from qrefl.scalars import PairRelations, VariableSpace, parse, parse_rational

SCHEMA_VERSION = 1


def load_json(path: Path) -> Any:
    if not path.exists():
        raise FileNotFoundError(f"文件 {path} 不存在")
    with path.open(encoding="utf-8") as f:
        return json.load(f)


def dump_json(data: Any) -> str:
    """确定性的 JSON 文本（键序即插入序）"""
    return json.dumps(data, ensure_ascii=False, indent=2)


def with_schema(data: Dict[str, Any]) -> Dict[str, Any]:
    return {"schema": SCHEMA_VERSION, **data}


# ---------- 矩阵 ---------- #

def matrix_to_dict(A: CharacterMatrix, relations: Optional[PairRelations] = None) -> Dict[str, Any]:
    out: Dict[str, Any] = {"n": A.n, "rows": A.rows()}
    if relations:
        out["relations"] = [list(p) for p in relations.sorted_pairs()]
    return out


def braid_to_dict(S: BraidOperator) -> Dict[str, Any]:
    rows = [[str(S.entries[i, j]) for j in range(S.dim)] for i in range(S.dim)]
    return {"n": S.n, "rows": rows}


def matrix_from_dict(data: Dict[str, Any], n: Optional[int] = None) -> Tuple[CharacterMatrix, PairRelations]:
    """解析 {"n", "rows", "relations"?}；n 给定时必须与文件一致"""
    try:
        size = int(data["n"])
        rows = data["rows"]
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"矩阵文件缺少 n 或 rows: {e}") from e
    if n is not None and n != size:
        raise UsageError(f"命令行 --n {n} 与文件中的 n = {size} 不一致")
    if len(rows) != size or any(len(row) != size for row in rows):
        raise UsageError(f"rows 必须是 {size}×{size}")
    space = VariableSpace(size)
    parsed = [[parse(str(entry), space) for entry in row] for row in rows]
    relations = PairRelations.of(data.get("relations", []))
    return CharacterMatrix.from_rows(space, parsed), relations


def read_matrix(path: Path, n: Optional[int] = None) -> Tuple[CharacterMatrix, PairRelations]:
    return matrix_from_dict(load_json(path), n)


def numeric_entries(A: CharacterMatrix) -> np.ndarray:
    """要求全部元素为常数，返回 Fraction 矩阵"""
    out = np.empty((A.n, A.n), dtype=object)
    for idx in np.ndindex(out.shape):
        entry = A.entries[idx]
        if not entry.is_constant():
            raise UsageError(f"需要数值矩阵，({idx[0] + 1}, {idx[1] + 1}) 处为 {entry}")
        out[idx] = entry.constant_value()
    return out


# ---------- 解族与参数 ---------- #

def read_family(path: Path) -> SolutionFamily:
    data = load_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path} 应为解族对象")
    return family_from_dict(data)


def read_params(path: Path) -> Dict[str, Fraction]:
    """{"l": "2", "m": "-1/3", "y1": 1, …}"""
    data = load_json(path)
    if not isinstance(data, dict):
        raise UsageError(f"{path} 应为参数对象")
    return {str(k): parse_rational(str(v)) for k, v in data.items()}
