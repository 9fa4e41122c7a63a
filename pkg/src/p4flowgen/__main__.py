"""python -m p4flowgen"""

from .cli import entry

if __name__ == "__main__":
    entry()
