import sys

from smoothtensor.expcli import main

sys.exit(main())
