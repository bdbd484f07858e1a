"""CSV export utilities."""
import io
from typing import Any

import pandas as pd

CORPUS_COLUMNS = [
    "name",
    "k",
    "tag",
    "case",
    "expected",
    "certificate_factors",
    "oracle_identity",
    "oracle_full_image_identity",
    "oracle_aborted",
    "contradiction",
    "detail",
]


def export_corpus_to_csv(results: list[dict[str, Any]]) -> str:
    """
    Export corpus cross-validation rows to CSV format.

    Args:
        results: Rows as produced by a corpus run

    Returns:
        CSV string
    """
    if not results:
        return "No results to export"

    # Oracle columns are blank when enumeration aborted
    flattened = []
    for result in results:
        flat = {column: result.get(column, "") for column in CORPUS_COLUMNS}
        for column in ("oracle_identity", "oracle_full_image_identity"):
            if flat[column] is None:
                flat[column] = ""
        flattened.append(flat)

    df = pd.DataFrame(flattened, columns=CORPUS_COLUMNS)
    csv_buffer = io.StringIO()
    df.to_csv(csv_buffer, index=False)
    return csv_buffer.getvalue()
