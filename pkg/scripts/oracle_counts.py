"""Single-fault injection counts (C, L) for the two-H unit and the QEC units."""

import sys

from qecsim.cli import oracle_counts_csv

if __name__ == "__main__":
    sys.stdout.write(oracle_counts_csv())
