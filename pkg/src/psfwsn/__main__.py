import sys

from psfwsn.cli import main

sys.exit(main())
