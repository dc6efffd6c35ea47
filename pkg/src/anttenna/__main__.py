import sys

from anttenna.cli import main

sys.exit(main())
