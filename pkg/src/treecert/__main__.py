import sys

from treecert.cli import main

sys.exit(main())
