import sys

from shiftadd.cli import main

sys.exit(main())
