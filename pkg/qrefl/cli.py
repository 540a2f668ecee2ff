#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""命令行入口

有理数参数一律写成 "p/q" 文本；``--q`` 指形变参数 q，分母写在取值字符串里，
例如 ``--q 5/2``。
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from qrefl.braid import BraidOperator, build_S, first_violation, cached_system, is_zero_matrix, re_residual, validate_q
from qrefl.checks import run_checks
from qrefl.classification import (
    classify_matrix,
    enumerate_families,
    family_to_dict,
    instantiate,
)
from qrefl.config.utils import copy_default_config, load_config, load_settings
from qrefl.errors import QreflError
from qrefl.fixtures import examples_report
from qrefl.io import dump_json, numeric_entries, read_family, read_matrix, read_params, with_schema, braid_to_dict
from qrefl.oracle import SUPPORTED_N, compare_with_catalog
from qrefl.scalars import parse_rational
from qrefl.spectral import char_poly, expected_spectrum, is_semisimple

logger = logging.getLogger("qrefl.cli")


# ---------- 日志 ----------

def setup_logging(level: str = "WARNING", log_file: Optional[str] = None) -> None:
    """日志只写 stderr（及可选文件），stdout 留给结果输出"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=handlers,
        force=True,
    )


def _q_arg(text: str):
    try:
        return validate_q(parse_rational(text))
    except QreflError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _emit(data: Dict[str, Any], as_json: bool, text: str) -> None:
    print(dump_json(with_schema(data)) if as_json else text)


# ---------- 子命令 ----------

def cmd_braid(args: argparse.Namespace) -> int:
    S = build_S(args.n)
    labels = [f"{i}{k}" for i in range(1, args.n + 1) for k in range(1, args.n + 1)]
    table = pd.DataFrame([[str(v) for v in row] for row in S.entries], index=labels, columns=labels)
    _emit(braid_to_dict(S), args.json, table.to_string())
    return 0


def _family_row(f) -> Dict[str, Any]:
    data = family_to_dict(f)
    return {
        "type": data["type"],
        "b_minus": data.get("b_minus", ""),
        "b_plus": data.get("b_plus", ""),
        "Y": data.get("Y", ""),
        "Z": data.get("Z", ""),
        "b": data.get("b", ""),
    }


def cmd_families(args: argparse.Namespace) -> int:
    families = enumerate_families(args.n)
    table = pd.DataFrame([_family_row(f) for f in families])
    text = f"n={args.n}: {len(families)} 个解族\n{table.to_string(index=False)}"
    _emit({"n": args.n, "families": [family_to_dict(f) for f in families]}, args.json, text)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    A, relations = read_matrix(Path(args.input), args.n)
    S = build_S(A.n)
    S_q = BraidOperator(n=S.n, space=S.space, entries=S.specialize(args.q))
    residual = re_residual(A, S_q, relations)
    zero = is_zero_matrix(residual)
    data: Dict[str, Any] = {
        "n": A.n,
        "q": str(args.q),
        "residual_zero": zero,
        "nonzero_entries": sum(1 for v in residual.flat if v),
    }
    text = f"RE 残差{'为零' if zero else '非零'}（q = {args.q}，非零元 {data['nonzero_entries']} 个）"
    if not zero and all(v.is_constant() for v in A.entries.flat):
        violated = first_violation(cached_system(A.n), numeric_entries(A), args.q)
        if violated is not None:
            data["first_violation"] = violated.label()
            text += f"\n首个违反的方程: {violated.label()}"
    _emit(data, args.json, text)
    return 0 if zero else 1


def cmd_classify(args: argparse.Namespace) -> int:
    A, _ = read_matrix(Path(args.input), args.n)
    result = classify_matrix(numeric_entries(A), args.q)
    data = result.to_dict()
    lines = [f"{k}: {v}" for k, v in data.items()]
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    family = read_family(Path(args.family))
    spectrum = expected_spectrum(family)
    data: Dict[str, Any] = {"family": family_to_dict(family), "spectrum": spectrum.to_list()}
    lines = [family.label()] + [f"  {e['value']}: {e['mult']}" for e in data["spectrum"]]
    if args.params:
        params = read_params(Path(args.params))
        A = instantiate(family, params)
        numeric = spectrum.evaluate(params)
        data["instance"] = {
            "spectrum": numeric.to_list(),
            "char_poly_matches": char_poly(A) == numeric.polynomial(),
            "semisimple": is_semisimple(A, args.q),
        }
        lines.append("实例:")
        lines += [f"  {e['value']}: {e['mult']}" for e in data["instance"]["spectrum"]]
        lines.append(f"  特征多项式一致: {data['instance']['char_poly_matches']}")
        lines.append(f"  半单: {data['instance']['semisimple']}")
    _emit(data, args.json, "\n".join(lines))
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    report = compare_with_catalog(
        args.n, args.q, samples=args.samples, seed=args.seed, workers=args.workers, progress=not args.json
    )
    table = pd.DataFrame(
        [
            {
                "Y": list(c.pattern.Y),
                "sigma(Y)": list(c.pattern.images),
                "constraints": "; ".join(str(e) for e in c.constraints) or "-",
                "nonzero": ", ".join(c.nonvanishing) or "-",
            }
            for c in report.components
        ]
    )
    text = (
        f"n={report.n}, q={args.q}: {len(report.components)} 个分层\n{table.to_string(index=False)}\n"
        f"missing: {len(report.missing)}, extra: {len(report.extra)}"
    )
    _emit(report.to_dict(), args.json, text)
    return 0 if report.ok else 1


def cmd_examples(args: argparse.Namespace) -> int:
    report = examples_report(args.max_n)
    summary = [{k: v for k, v in s.to_dict().items() if k != "matrix"} for s in report]
    lines = [pd.DataFrame(summary).to_string(index=False)]
    for s in report:
        lines.append(f"\n{s.name}（{s.family}）:")
        lines.append(pd.DataFrame(s.matrix["rows"]).to_string(index=False, header=False))
        if "relations" in s.matrix:
            lines.append("配对: " + ", ".join(f"y{i}·y{j} = -l*m" for i, j in s.matrix["relations"]))
    _emit({"fixtures": [s.to_dict() for s in report]}, args.json, "\n".join(lines))
    return 0 if all(s.ok for s in report) else 1


def cmd_check(args: argparse.Namespace) -> int:
    config = Path(args.config) if args.config else None
    settings = load_settings(config)
    if args.workers is not None:
        settings["workers"] = args.workers
    if args.seed is not None:
        settings["seed"] = args.seed
    results = run_checks(load_config(config), settings, only=args.only)
    rows = [{"check": alias, "passed": r.passed} for alias, r in results]
    data = {"checks": [{"alias": alias, **r.to_dict()} for alias, r in results]}
    _emit(data, args.json, pd.DataFrame(rows).to_string(index=False) if rows else "没有匹配的检查项")
    return 0 if results and all(r.passed for _, r in results) else 1


def cmd_init(args: argparse.Namespace) -> int:
    target = copy_default_config(args.dir)
    print(f"默认配置已复制到 {target}")
    return 0


# ---------- 解析器 ----------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrefl",
        description="qrefl - U_q(gl(n)) 反射方程特征标的构造、验证、分类与暴力对照",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="日志级别")
    parser.add_argument("--log-file", help="额外写入的日志文件")

    subparsers = parser.add_subparsers(dest="command", required=True, help="子命令")

    p = subparsers.add_parser("braid", help="输出辫子矩阵 S")
    p.add_argument("--n", type=int, required=True, help="维数")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_braid)

    p = subparsers.add_parser("families", help="列出全部解族")
    p.add_argument("--n", type=int, required=True, help="维数")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_families)

    p = subparsers.add_parser("verify", help="检验矩阵是否满足 RE，残差为零时退出码为 0")
    p.add_argument("--n", type=int, required=True, help="维数")
    p.add_argument("--input", required=True, help="矩阵 JSON 文件")
    p.add_argument("--q", type=_q_arg, required=True, help="形变参数 q，形如 p/q")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_verify)

    p = subparsers.add_parser("classify", help="判定数值矩阵所属解族")
    p.add_argument("--n", type=int, required=True, help="维数")
    p.add_argument("--input", required=True, help="矩阵 JSON 文件")
    p.add_argument("--q", type=_q_arg, required=True, help="形变参数 q，形如 p/q")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_classify)

    p = subparsers.add_parser("spectrum", help="解族的特征值与重数")
    p.add_argument("--family", required=True, help="解族 JSON 文件")
    p.add_argument("--params", help="参数 JSON 文件；给出时同时检验实例")
    p.add_argument("--q", type=_q_arg, default=_q_arg("2"), help="判定半单性时使用的 q")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_spectrum)

    p = subparsers.add_parser("oracle", help="暴力求解并与解族目录对照，一致时退出码为 0")
    p.add_argument("--n", type=int, choices=list(SUPPORTED_N), required=True, help="维数")
    p.add_argument("--q", type=_q_arg, required=True, help="形变参数 q，形如 p/q")
    p.add_argument("--samples", type=int, default=100, help="每个分层的采样数")
    p.add_argument("--seed", type=int, default=0, help="随机种子")
    p.add_argument("--workers", type=int, default=1, help="并发线程数")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_oracle)

    p = subparsers.add_parser("examples", help="已知的具体矩阵及其验证状态")
    p.add_argument("--max-n", type=int, default=6, help="D_n、P_k 的最大维数")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_examples)

    p = subparsers.add_parser("check", help="运行验收检查，全部通过时退出码为 0")
    p.add_argument("--config", help="检查配置文件，缺省使用内置 configs.json")
    p.add_argument("--only", help="只运行指定 alias 或 class 的检查")
    p.add_argument("--workers", type=int, help="并发线程数，覆盖配置")
    p.add_argument("--seed", type=int, help="随机种子，覆盖配置")
    p.add_argument("--json", action="store_true", help="输出 JSON")
    p.set_defaults(func=cmd_check)

    p = subparsers.add_parser("init", help="复制默认配置文件")
    p.add_argument("--dir", default=".", help="目标目录")
    p.set_defaults(func=cmd_init)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """执行命令并返回退出码：0 成功，1 验证/对照失败，2 用法错误"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(args.log_level, args.log_file)
    try:
        return args.func(args)
    except (QreflError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error("%s", e)
        print(f"错误: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
