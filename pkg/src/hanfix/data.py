"""Paths to the bundled demo resources.

These back the CLI defaults and the narrative demos: a ~400-reading pinyin
table, the default fuzzy class file, and a small word list around the
can-jia / chan-jia confusion family.
"""

from importlib import resources
from pathlib import Path


def resource_path(name: str) -> Path:
    return Path(str(resources.files("hanfix") / "resources" / name))


def demo_pinyin_path() -> Path:
    return resource_path("pinyin_demo.tsv")


def demo_fuzzy_path() -> Path:
    return resource_path("fuzzy_default.txt")


def demo_words_path() -> Path:
    return resource_path("words_demo.tsv")
