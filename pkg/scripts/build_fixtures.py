"""Rebuild the recorded backend responses and the golden run outputs.

Two phases.  Phase one runs the pipeline against the in-process toy model
server with the response cache enabled, then copies the cache into
fixtures/backends/ (the replay store).  Phase two re-runs the pipeline
offline through fixture:// backends and freezes its artifacts and manifest
under fixtures/golden/.  The two runs must produce byte-identical
artifacts; anything else means nondeterminism and aborts the rebuild.

Usage: python3 scripts/build_fixtures.py
"""

from __future__ import annotations

import filecmp
import json
import os
import shutil
import sys
import tempfile
import threading
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "scripts"))

import toy_models  # noqa: E402
from genswap.gateway import ENV_PREFIX  # noqa: E402
from genswap.pipeline import RunPaths, load_config, run_pipeline  # noqa: E402

FIXTURES = ROOT / "fixtures"
BACKENDS_DIR = FIXTURES / "backends"
GOLDEN_DIR = FIXTURES / "golden"
RUN_CFG = FIXTURES / "run.cfg"


def clear_env_overrides() -> None:
    for name in list(os.environ):
        if name.startswith(ENV_PREFIX):
            del os.environ[name]


def compare_trees(left: Path, right: Path) -> list[str]:
    """Relative paths that differ (content or existence) between two trees."""
    diffs: list[str] = []
    left_files = {p.relative_to(left) for p in left.rglob("*") if p.is_file()}
    right_files = {p.relative_to(right) for p in right.rglob("*") if p.is_file()}
    for rel in sorted(left_files ^ right_files):
        diffs.append(f"only on one side: {rel}")
    for rel in sorted(left_files & right_files):
        if not filecmp.cmp(left / rel, right / rel, shallow=False):
            diffs.append(f"content differs: {rel}")
    return diffs


def main() -> int:
    os.chdir(ROOT)
    clear_env_overrides()

    server = toy_models.serve(0)
    port = server.server_address[1]
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base_url = f"http://127.0.0.1:{port}"
    print(f"toy model server on {base_url}")

    started = time.monotonic()
    with tempfile.TemporaryDirectory() as tmp:
        harvest_dir = Path(tmp) / "harvest"
        config = load_config(
            RUN_CFG,
            {
                "backends": {
                    cap: base_url
                    for cap in ("ner", "pos", "fill_mask", "translate")
                }
            },
        )
        run_pipeline(harvest_dir, config)
        server.shutdown()
        print(f"phase 1 (harvest) done in {time.monotonic() - started:.1f}s")

        if BACKENDS_DIR.exists():
            shutil.rmtree(BACKENDS_DIR)
        shutil.copytree(RunPaths(harvest_dir).cache_dir, BACKENDS_DIR)
        recorded = sum(1 for p in BACKENDS_DIR.rglob("*.json"))
        print(f"recorded {recorded} backend responses under {BACKENDS_DIR}")

        replay_started = time.monotonic()
        replay_dir = Path(tmp) / "replay"
        manifest = run_pipeline(replay_dir, load_config(RUN_CFG))
        replay_elapsed = time.monotonic() - replay_started
        print(f"phase 2 (replay) done in {replay_elapsed:.1f}s")

        diffs = compare_trees(
            RunPaths(harvest_dir).artifacts, RunPaths(replay_dir).artifacts
        )
        if diffs:
            for line in diffs:
                print(f"MISMATCH {line}", file=sys.stderr)
            print("harvest and replay artifacts differ; aborting", file=sys.stderr)
            return 1

        if GOLDEN_DIR.exists():
            shutil.rmtree(GOLDEN_DIR)
        GOLDEN_DIR.mkdir(parents=True)
        shutil.copytree(RunPaths(replay_dir).artifacts, GOLDEN_DIR / "artifacts")
        shutil.copy2(RunPaths(replay_dir).manifest, GOLDEN_DIR / "manifest.json")

    counts = manifest.get("counts", {})
    print("golden manifest counts:")
    print(json.dumps(counts, indent=2, sort_keys=True))
    if replay_elapsed >= 60:
        print(f"WARNING replay took {replay_elapsed:.1f}s (budget 60s)", file=sys.stderr)
    print(f"golden outputs frozen under {GOLDEN_DIR}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
