import sys

from isoflow.cli import main

sys.exit(main())
