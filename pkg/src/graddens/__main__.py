import sys

from graddens.cli import main

sys.exit(main())
