# 功能测试包初始化文件