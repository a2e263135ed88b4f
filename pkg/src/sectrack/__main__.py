import sys

from sectrack.cli import main

sys.exit(main())
