"""异常类型

所有库内异常都继承自 ``QreflError``（即 ``ValueError``），命令行据此统一映射退出码。
"""


class QreflError(ValueError):
    """qrefl 的基础异常"""


class UsageError(QreflError):
    """参数不合法：n 越界、q 非通用值、变量空间不一致、输入文件格式错误等"""


class InvalidRelationsError(QreflError):
    """配对关系不互斥（某个下标出现在两个配对中）"""


class EvaluationError(QreflError):
    """求值失败：缺少变量赋值或 q = 0"""


class ValidationError(QreflError):
    """可容许对 / 解族数据不满足定义"""


class ParameterError(QreflError):
    """实例化参数违反解族约束"""


class ClassificationError(QreflError):
    """分类过程中出现内部矛盾"""


class OracleError(QreflError):
    """暴力求解器无法把某一分支化为三角形式"""
