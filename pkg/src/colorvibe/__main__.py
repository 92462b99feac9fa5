import sys

from colorvibe.cli import main

sys.exit(main())
