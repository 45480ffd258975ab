"""Entry script: ``python app.py <command> ...`` runs the somkit command line."""

import sys

from somkit.cli import main

if __name__ == "__main__":
    sys.exit(main())
