"""
Main entry point for the variable-selection engine.
"""
import sys

from varsel_engine.cli import main

if __name__ == "__main__":
    sys.exit(main())
