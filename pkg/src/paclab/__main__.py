"""Allow `python -m paclab ...` to behave exactly like the console script."""

from .cli import entry

if __name__ == "__main__":
    entry()
