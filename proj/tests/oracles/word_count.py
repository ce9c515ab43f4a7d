"""Independent word-count oracle for the fixture monster corpus.

Counts whitespace-separated tokens in lore plus every ability text, using
Python's Unicode-aware str.split(). Prints per-monster counts and the corpus
mean/min/max so the C++ tests can freeze them.
"""
import json
import pathlib
import sys


def words(text: str) -> int:
    return len(text.split())


def main(monsters_dir: str) -> None:
    counts = {}
    for path in sorted(pathlib.Path(monsters_dir).glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        counts[doc["id"]] = words(doc.get("lore", "")) + sum(words(a.get("text", "")) for a in doc.get("abilities", []))
    for mid, n in counts.items():
        print(f"{mid} {n}")
    values = list(counts.values())
    print(f"total {sum(values)} n {len(values)} mean {sum(values) / len(values):.10f} min {min(values)} max {max(values)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/monsters")
