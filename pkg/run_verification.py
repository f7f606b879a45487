#!/usr/bin/env python
"""
Run the second-order tangent bundle verification suites from the command line.

    python run_verification.py verify --config flat-cartesian-polar --suite bundle
    python run_verification.py fixtures list
"""
import sys

from verifier.main import main

if __name__ == "__main__":
    sys.exit(main())
