import sys

from pointnls.cli import main

sys.exit(main())
