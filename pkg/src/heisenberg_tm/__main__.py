import sys

from heisenberg_tm.cli import main

sys.exit(main())
