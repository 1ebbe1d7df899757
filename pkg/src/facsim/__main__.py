import sys

from facsim.cli import main

sys.exit(main())
