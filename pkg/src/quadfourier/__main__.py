import sys

from quadfourier.cli import main

sys.exit(main())
