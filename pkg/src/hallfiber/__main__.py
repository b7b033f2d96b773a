import sys

from hallfiber.cli import main

sys.exit(main())
