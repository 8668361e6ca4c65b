import sys

from slicedmi.cli import main

sys.exit(main())
