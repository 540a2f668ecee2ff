# 集成测试包初始化文件