#!/usr/bin/env python3
"""Start a review service seeded with one synthetic run.

Development and test harness for the console: trains the pipeline on a
small synthetic corpus, ingests a test batch as run "seed", and serves
the API. The console (or its integration tests) points at the printed
port.
"""
import argparse
import sys
import tempfile
from pathlib import Path

import uvicorn
from fastapi.testclient import TestClient

from autoreview.corpus import call_to_dict, record_to_dict
from autoreview.pipeline import train_models
from autoreview.service import ServiceConfig, create_app
from autoreview.simulator import SimConfig, generate_split


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--train-calls", type=int, default=60)
    parser.add_argument("--test-calls", type=int, default=30)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--store", default=None)
    parser.add_argument("--token", default=None)
    args = parser.parse_args()

    cfg = SimConfig(splits={}, seed=args.seed)
    train_calls, train_records = generate_split(cfg, "train", args.train_calls)
    test_calls, test_records = generate_split(cfg, "test", args.test_calls)
    models, _ = train_models(train_calls, train_records)

    store_path = args.store or str(Path(tempfile.mkdtemp()) / "console.db")
    config = ServiceConfig(
        store_path=store_path,
        listen_host=args.host,
        listen_port=args.port,
        auth_token=args.token,
        synchronous_ingest=True,
    )
    app = create_app(config, models=models)

    headers = {"Authorization": f"Bearer {args.token}"} if args.token else {}
    with TestClient(app) as client:
        response = client.post(
            "/runs",
            json={
                "calls": [call_to_dict(c) for c in test_calls],
                "records": [record_to_dict(r) for r in test_records],
                "strategy": "Hybrid",
                "run_id": "seed",
            },
            headers=headers,
        )
        response.raise_for_status()
        print(f"seeded run: {response.json()}", file=sys.stderr, flush=True)

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
