"""``python -m erestab`` runs the command-line interface."""

from .atlas.cli import main

main()
