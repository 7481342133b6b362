"""Allow `python -m central_configs`."""

import sys

from central_configs.cli import main

sys.exit(main())
