import sys

from toyaudit.cli import main

sys.exit(main())
