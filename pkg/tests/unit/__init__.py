# 单元测试包初始化文件