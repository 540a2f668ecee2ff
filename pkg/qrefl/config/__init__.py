"""检查项配置：默认 configs.json 与加载函数"""
