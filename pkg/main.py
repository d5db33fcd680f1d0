"""
scompress - Command-Line Entry Point

Sample compression schemes and their reductions on finite concept classes.
"""

import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
