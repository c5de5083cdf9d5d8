"""
Download the white-wine quality and cardiotocography files from the UCI
repository into a data directory.

The cardiotocography workbook is converted to CSV so it can be read by the
`ctg_binary` ingest transform.

Usage: python scripts/fetch_uci.py [DATA_DIR]
"""
import os
import sys

import requests

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from varsel_engine.seed_data import CTG_SHEET, DATASET_URLS  # noqa: E402

DOWNLOAD_TIMEOUT = 60


def download(url: str, path: str) -> None:
    """Fetch url into path, raising on HTTP errors."""
    response = requests.get(url, timeout=DOWNLOAD_TIMEOUT)
    response.raise_for_status()
    with open(path, "wb") as handle:
        handle.write(response.content)


def convert_ctg(xls_path: str, csv_path: str) -> bool:
    try:
        import pandas as pd
        frame = pd.read_excel(xls_path, sheet_name=CTG_SHEET)
    except ImportError as e:
        print(f"⚠ Could not read the workbook ({e}).")
        print("  Install xlrd, or export the 'Raw Data' sheet to CSV by hand.")
        return False
    frame = frame.dropna(subset=["NSP"])
    frame.to_csv(csv_path, index=False)
    return True


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    data_dir = argv[0] if argv else "data"
    os.makedirs(data_dir, exist_ok=True)

    wine_path = os.path.join(data_dir, "winequality-white.csv")
    ctg_xls = os.path.join(data_dir, "CTG.xls")
    ctg_csv = os.path.join(data_dir, "CTG.csv")

    try:
        print("Downloading wine quality data...")
        download(DATASET_URLS["wine_white"], wine_path)
        print(f"  ✓ {wine_path}")
        print("Downloading cardiotocography data...")
        download(DATASET_URLS["ctg"], ctg_xls)
        print(f"  ✓ {ctg_xls}")
    except requests.exceptions.RequestException as e:
        print(f"\n❌ Download failed: {e}")
        return 2

    if convert_ctg(ctg_xls, ctg_csv):
        print(f"  ✓ {ctg_csv}")
    print(f"\nSet VARSEL_WINE_PATH={wine_path} and VARSEL_CTG_PATH={ctg_csv} to run the dataset tests.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
