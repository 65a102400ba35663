"""Allow `python -m treeshift`."""

import sys

from .cli import main

sys.exit(main())
