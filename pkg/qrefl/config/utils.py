#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""配置文件工具"""

import json
import shutil
from pathlib import Path
from typing import Any, Dict, List, Optional

DEFAULT_SETTINGS: Dict[str, Any] = {
    "q_values": ["2", "3", "5/2"],
    "seed": 0,
    "workers": 1,
    "oracle_samples": 100,
    "roundtrip_samples": 20,
    "spectral_samples": 50,
    "equivalence_corpus": 200,
}


def get_default_config_path(filename: str = "configs.json") -> Path:
    """获取默认配置文件路径"""
    return Path(__file__).parent / filename


def _read(config_path: Optional[Path]) -> Any:
    if config_path is None:
        config_path = get_default_config_path()

    if not config_path.exists():
        raise FileNotFoundError(f"配置文件 {config_path} 不存在")

    with config_path.open(encoding="utf-8") as f:
        return json.load(f)


def load_config(config_path: Optional[Path] = None) -> List[Dict[str, Any]]:
    """加载验收检查配置

    Args:
        config_path: 配置文件路径，如果为None则使用默认配置

    Returns:
        检查项配置列表
    """
    cfg_raw = _read(config_path)

    # 兼容三种结构：单对象、对象数组、或带 checks 键
    if isinstance(cfg_raw, list):
        cfgs = cfg_raw
    elif isinstance(cfg_raw, dict) and "checks" in cfg_raw:
        cfgs = cfg_raw["checks"]
    else:
        cfgs = [cfg_raw]

    if not cfgs:
        raise ValueError(f"{config_path} 未定义任何检查项")

    return cfgs


def load_settings(config_path: Optional[Path] = None) -> Dict[str, Any]:
    """加载全局设置，缺省项取 DEFAULT_SETTINGS

    Args:
        config_path: 配置文件路径，如果为None则使用默认配置

    Returns:
        合并后的设置字典
    """
    cfg_raw = _read(config_path)
    settings = dict(DEFAULT_SETTINGS)
    if isinstance(cfg_raw, dict):
        settings.update(cfg_raw.get("settings", {}))
    return settings


def copy_default_config(target_dir: str) -> Path:
    """复制默认配置文件到指定目录，便于修改后通过 --config 使用

    Args:
        target_dir: 目标目录

    Returns:
        复制后的文件路径
    """
    target_path = Path(target_dir)
    target_path.mkdir(parents=True, exist_ok=True)
    target = target_path / "configs.json"
    shutil.copy2(get_default_config_path(), target)
    return target
