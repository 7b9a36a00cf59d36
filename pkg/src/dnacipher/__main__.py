import sys

from dnacipher.cli import main

sys.exit(main())
