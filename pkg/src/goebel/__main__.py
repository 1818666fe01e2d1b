import sys

from goebel.cli import main

sys.exit(main())
