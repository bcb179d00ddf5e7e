import sys

from attributist.cli import main

sys.exit(main())
