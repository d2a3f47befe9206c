import sys

from privopt.cli import main

sys.exit(main())
