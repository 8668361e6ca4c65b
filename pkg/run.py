"""
Command-line entry point
"""
import sys

from slicedmi.cli import main

if __name__ == '__main__':
    # Exit code reflects the error class (2 input, 3 numerical, 4 configuration)
    sys.exit(main())
