#!/usr/bin/env python3
"""Write the Tecator meat spectra as a tecator-grid text file.

The 215 spectra ship inside the `rdatasets` wheel (modeldata/meats). Pass a
wheel path, or let the script fetch one with `pip download`.
"""
import argparse
import io
import lzma
import pickle
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

MEMBER = "rdatasets/_data/modeldata/meats.pkl.compress"


def find_wheel(path):
    if path:
        return Path(path)
    tmp = Path(tempfile.mkdtemp())
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(tmp), "rdatasets"],
                   check=True)
    wheels = sorted(tmp.glob("rdatasets-*.whl"))
    if not wheels:
        sys.exit("pip download produced no rdatasets wheel")
    return wheels[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wheel", help="local rdatasets wheel")
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "tecator.txt"))
    args = ap.parse_args()

    with zipfile.ZipFile(find_wheel(args.wheel)) as z:
        frame = pickle.loads(lzma.decompress(z.read(MEMBER)))

    channels = [f"x_{i:03d}" for i in range(1, 101)]
    cols = channels + ["water", "fat", "protein"]
    missing = [c for c in cols if c not in frame.columns]
    if missing:
        sys.exit(f"unexpected layout, missing columns: {missing[:3]}")

    buf = io.StringIO()
    buf.write("# Tecator: 100 absorbances (850-1050 nm), water, fat, protein\n")
    for row in frame[cols].itertuples(index=False):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue())
    print(f"wrote {len(frame)} spectra to {out}")


if __name__ == "__main__":
    main()
