#!/usr/bin/env python3
import multiprocessing as mp
import sys

from udwharvest.cli import main

if __name__ == "__main__":
    mp.set_start_method('spawn', force=True)
    sys.exit(main())
