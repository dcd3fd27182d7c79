import sys

from negscope.cli import main

sys.exit(main())
