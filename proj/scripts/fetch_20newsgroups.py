#!/usr/bin/env python3
"""Download 20 Newsgroups and write it as a corpus JSONL file.

Each line is {"id", "text", "label"}. Ids are "train/<i>" and "test/<i>" so the
held-out split can be selected with eval_split.heldout_id_prefix = "test/".
Headers, footers and quoted replies are kept unless --strip is given.
"""

import argparse
import json
from pathlib import Path

from sklearn.datasets import fetch_20newsgroups


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("output", type=Path, help="destination .jsonl path")
    parser.add_argument("--strip", action="store_true", help="remove headers, footers and quotes")
    parser.add_argument("--data-home", type=Path, default=None, help="scikit-learn download cache")
    args = parser.parse_args()

    remove = ("headers", "footers", "quotes") if args.strip else ()
    args.output.parent.mkdir(parents=True, exist_ok=True)
    total = 0
    with args.output.open("w", encoding="utf-8") as out:
        for subset in ("train", "test"):
            data = fetch_20newsgroups(subset=subset, remove=remove, data_home=args.data_home)
            for i, (text, target) in enumerate(zip(data.data, data.target)):
                record = {"id": f"{subset}/{i}", "text": text, "label": data.target_names[target]}
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
                total += 1
    print(f"wrote {total} documents to {args.output}")


if __name__ == "__main__":
    main()
