import sys

from fracfast.cli import main

sys.exit(main())
