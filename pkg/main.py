#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""qrefl 主入口"""

import sys

from qrefl.cli import run


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
