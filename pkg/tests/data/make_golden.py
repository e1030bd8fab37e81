"""Regenerate the golden interchange fixture (run from the repo root).

The fixture freezes one utterance's logits plus the boundary CSV and the
40 ms evaluation report the pipeline must reproduce bit-for-bit. The
decoded label pattern exercises a 3-frame Begin cluster, a 2-frame cluster
(floor-mid tie), a singleton, and an exact three-way tie row that must
break toward Begin.
"""

from pathlib import Path

import numpy as np

from segwords.evaluate import evaluate_corpus, format_report
from segwords.classifier import softmax
from segwords.logits_io import LogitsMatrix, write_logits
from segwords.postprocess import (BoundaryList, SelectionStrategy,
                                  boundary_times_from_frames, collapse_clusters,
                                  decode, write_boundaries)

HERE = Path(__file__).parent
UTT = "golden0"
FRAME_US = 25000

# target decode pattern (0=Begin, 1=Inside, 2=Outside), 24 frames
PATTERN = [2, 2, 0, 0, 0, 1, 1, 2, 2, 0, 0, 1, 1, 2, 2, 2, 0, 2, 2, 2, 2, 2, 2, 2]
TIE_FRAME = 20  # overwritten with an exact three-way tie; argmax -> Begin

# reference boundaries the report is scored against, seconds
REF_TIMES = [0.085, 0.25, 0.40]


def build_logits() -> LogitsMatrix:
    rows = np.full((len(PATTERN), 3), -1.0, dtype=np.float32)
    rows[:, 2] = 0.25  # mild Outside bias for non-dominant classes
    for j, cls in enumerate(PATTERN):
        rows[j] = [-1.0, -0.5, 0.3]
        rows[j, cls] = 2.5
    rows[TIE_FRAME] = [0.7, 0.7, 0.7]
    return LogitsMatrix(rows, FRAME_US, UTT)


def main() -> None:
    logits = build_logits()
    write_logits(logits, HERE / "golden.wseg")

    labels = decode(softmax(logits), logits.num_frames, frame_len=1)
    idx = collapse_clusters(labels, SelectionStrategy.MID)
    bounds = boundary_times_from_frames(idx, FRAME_US / 1e6, utterance_id=UTT)
    write_boundaries(HERE / "golden_boundaries.csv", [bounds])

    refs = {UTT: BoundaryList(np.array(REF_TIMES), utterance_id=UTT)}
    report = evaluate_corpus({UTT: bounds}, refs, 0.040)
    (HERE / "golden_report.txt").write_text(format_report(report))
    print("decoded pattern:", list(labels.labels))
    print("collapsed indices:", idx)
    print("boundaries:", bounds.times)
    print(format_report(report))


if __name__ == "__main__":
    main()
