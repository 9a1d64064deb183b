"""``python -m pdqkit``."""

import sys

from .cli import main

sys.exit(main())
