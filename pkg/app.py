"""Experiment entry point: ``python app.py <group> <command> [options]``.

See ``python app.py --help`` and FORMATS.md for the file formats.
"""
import sys

from submodnorms.cli import main

if __name__ == "__main__":
    sys.exit(main())
