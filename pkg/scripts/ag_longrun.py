#!/usr/bin/env python3
"""Full-corpus run on the AG News CSVs (hours-scale, not part of CI).

Expects the standard distribution format: train.csv / test.csv with
double-quoted fields, a 1-based class index first, then title and body
(literal backslash-n inside fields).  120K training documents, 4 classes.

The run uses the small-data schedule (100 epochs, decay after 80), holds
out 10K documents for validation, and grid-searches region size {3,5},
pooling {1,10} and the default learning-rate ladder.  Target for a
correct implementation: test error at or below 8.0%.

Usage: python3 scripts/ag_longrun.py AG/train.csv AG/test.csv outdir/
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from swcnn.cli import main  # noqa: E402


def run(argv):
    code = main([str(a) for a in argv])
    if code != 0:
        sys.exit(code)


def longrun(train_csv: Path, test_csv: Path, outdir: Path):
    for path in (train_csv, test_csv):
        if not path.exists():
            sys.exit(f"missing {path}; download the AG News CSV distribution first")
    outdir.mkdir(parents=True, exist_ok=True)
    config = outdir / "ag.conf"
    config.write_text(
        "seed=1\n"
        "profile=topic\n"
        "small_data=true\n"      # 100 epochs, decay after 80
        "holdout=10000\n"
        "n_classes=4\n",
        encoding="utf-8",
    )
    vocab = outdir / "word.vocab"
    model = outdir / "model.swcn"

    run(["vocab", "--config", config, "--input", train_csv, "--output", vocab])
    run(["select", "--config", config, "--input", train_csv,
         "--word-vocab", vocab, "--output", model,
         "--metrics", outdir / "selection.txt"])
    run(["eval", "--model", model, "--input", test_csv,
         "--table", outdir / "confusion.tsv"])


if __name__ == "__main__":
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    longrun(Path(sys.argv[1]), Path(sys.argv[2]), Path(sys.argv[3]))
