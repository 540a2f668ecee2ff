"""U_q(gl(n)) 反射方程特征标的精确计算与分类"""

__version__ = "0.1.0"
