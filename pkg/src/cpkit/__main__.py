import sys

from cpkit.cli import main

sys.exit(main())
