"""Integration: the TypeScript scorer service behind the Python client.

Runs only when qa-service/dist is built (see qa-service/README.md); the
primary suite never requires it.
"""

import re
import shutil
import subprocess
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import pytest

from qaval.samples import generate_qa_dataset, write_qa_samples
from qaval.synthetic import make_synthetic_dataset
from qaval.wire import RemoteScorer

SERVICE_CLI = Path(__file__).resolve().parent.parent / "qa-service" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    not SERVICE_CLI.exists() or shutil.which("node") is None,
    reason="qa-service not built (run `npm run build` in qa-service/)",
)


@pytest.fixture(scope="module")
def service_endpoint(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("qa-service")
    data = make_synthetic_dataset(10, n_relations=6, seed=3)
    samples = generate_qa_dataset(data.bags, data.schema, neg_per_pos=2, seed=3)
    samples_path = tmp / "qa.jsonl"
    with open(samples_path, "w", encoding="utf-8") as f:
        write_qa_samples(samples, f)
    ckpt = tmp / "model.ckpt.json"
    subprocess.run(
        [
            "node", str(SERVICE_CLI), "finetune",
            "--samples", str(samples_path), "--out", str(ckpt),
            "--epochs", "2", "--lr", "0.03", "--seed", "1",
        ],
        check=True,
        capture_output=True,
        timeout=300,
    )
    proc = subprocess.Popen(
        ["node", str(SERVICE_CLI), "serve", "--checkpoint", str(ckpt), "--port", "0"],
        stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL,
        text=True,
    )
    try:
        line = proc.stdout.readline()
        match = re.search(r"listening on (\S+:\d+)", line)
        assert match, f"unexpected service banner: {line!r}"
        yield match.group(1), samples
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_protocol_conformance_under_concurrency(service_endpoint):
    """100 mixed requests: every response passes QaScore validation, matched by id."""
    endpoint, samples = service_endpoint
    jobs = [(s.question, s.context) for s in samples]
    while len(jobs) < 100:
        jobs.extend(jobs[: 100 - len(jobs)])
    with RemoteScorer(endpoint, timeout=120) as scorer:
        assert scorer.health_check()["ok"] is True
        with ThreadPoolExecutor(max_workers=10) as pool:
            # RemoteScorer raises unless the response is a valid QaScore
            # whose vectors match the context length, so each result here
            # has already passed the client-side validation
            scores = list(pool.map(lambda job: scorer.score(*job), jobs))
    assert len(scores) == 100
    for (question, context), score in zip(jobs, scores):
        assert len(score.p_start) == len(context.tokens)
        assert 0.0 <= score.p_ans <= 1.0


def test_responses_deterministic_across_connections(service_endpoint):
    endpoint, samples = service_endpoint
    sample = samples[0]
    with RemoteScorer(endpoint) as a, RemoteScorer(endpoint) as b:
        assert a.score(sample.question, sample.context) == b.score(sample.question, sample.context)
