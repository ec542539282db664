import sys

from trn.cli import main

sys.exit(main())
