#!/usr/bin/env python3
"""Export MIT-BIH records to the plain-text CSV pairs the pipeline ingests.

Needs the `wfdb` package (`pip install wfdb`), which is not a dependency
of the package itself. Reads local PhysioNet records or downloads them,
then writes per record:

    <out>/<record>.signal.csv       index,voltage  (channel 0, usually MLII)
    <out>/<record>.annotations.csv  index,symbol

Usage:
    python scripts/export_mitbih.py --out data/mitbih --download
    python scripts/export_mitbih.py --out data/mitbih --wfdb-dir /path/to/mitdb
"""

import argparse
import sys
from pathlib import Path

RECORDS = [
    "100", "101", "102", "103", "104", "105", "106", "107", "108", "109",
    "111", "112", "113", "114", "115", "116", "117", "118", "119", "121",
    "122", "123", "124", "200", "201", "202", "203", "205", "207", "208",
    "209", "210", "212", "213", "214", "215", "217", "219", "220", "221",
    "222", "223", "228", "230", "231", "232", "233", "234",
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory for CSV pairs")
    parser.add_argument("--wfdb-dir", help="directory with local mitdb records")
    parser.add_argument("--download", action="store_true",
                        help="fetch records from PhysioNet into --out/raw")
    parser.add_argument("--records", nargs="*", default=RECORDS)
    args = parser.parse_args()

    try:
        import wfdb
    except ImportError:
        print("error: this exporter needs the wfdb package (pip install wfdb)",
              file=sys.stderr)
        return 1

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.download:
        raw = out / "raw"
        raw.mkdir(exist_ok=True)
        wfdb.dl_database("mitdb", dl_dir=str(raw), records=args.records)
        src = raw
    elif args.wfdb_dir:
        src = Path(args.wfdb_dir)
    else:
        print("error: pass --download or --wfdb-dir", file=sys.stderr)
        return 1

    for rec in args.records:
        record = wfdb.rdrecord(str(src / rec))
        ann = wfdb.rdann(str(src / rec), "atr")
        sig = record.p_signal[:, 0]
        with open(out / f"{rec}.signal.csv", "w") as fh:
            fh.writelines(f"{i},{float(v)!r}\n" for i, v in enumerate(sig))
        with open(out / f"{rec}.annotations.csv", "w") as fh:
            for idx, sym in zip(ann.sample, ann.symbol):
                fh.write(f"{int(idx)},{sym}\n")
        print(f"exported {rec}: {len(sig)} samples, {len(ann.sample)} annotations")

    print(f"\ningest with:\n  tinyecg ingest \\")
    pairs = " \\\n".join(
        f"    --signal {out}/{r}.signal.csv --annotations {out}/{r}.annotations.csv"
        for r in args.records[:2]
    )
    print(pairs + " \\\n    ... --out beats.npz")
    return 0


if __name__ == "__main__":
    sys.exit(main())
