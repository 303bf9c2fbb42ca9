import sys

from freebell.cli import main

sys.exit(main())
