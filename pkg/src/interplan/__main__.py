import sys

from interplan.cli import main

sys.exit(main())
