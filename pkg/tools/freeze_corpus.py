"""Run every config in a corpus directory and freeze its deterministic report sections.

Usage: python tools/freeze_corpus.py [CORPUS_DIR]
"""
import json
import sys
from pathlib import Path

from adeglab.cli import SHIPPED_CORPUS
from adeglab.experiments import run


def main() -> None:
    corpus = Path(sys.argv[1]) if len(sys.argv) > 1 else SHIPPED_CORPUS
    for cfg_path in sorted(corpus.glob("*.config.json")):
        name = cfg_path.name[: -len(".config.json")]
        report = run(json.loads(cfg_path.read_text()))
        frozen = {k: report[k] for k in ("passed", "checks", "values")}
        (corpus / f"{name}.expected.json").write_text(json.dumps(frozen, indent=2, sort_keys=True) + "\n")
        print(f"{name}: passed={report['passed']} ({report['timing']['wall_seconds']:.2f}s)")


if __name__ == "__main__":
    main()
