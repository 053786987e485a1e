import sys

from sfcrel.cli import main

sys.exit(main())
