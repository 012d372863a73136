import sys

from privacy_power.cli import main

sys.exit(main())
