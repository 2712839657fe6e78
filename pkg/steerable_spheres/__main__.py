"""Module entrypoint for ``python -m steerable_spheres``."""

from .cli import main


if __name__ == "__main__":
    main()
