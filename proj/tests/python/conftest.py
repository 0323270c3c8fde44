import datetime as dt
import json
import random

import pytest

CATEGORY_DAYS = {"Blocker": 0.2, "Critical": 1.0, "Major": 3.0, "Minor": 8.0}
WORDS = ["kibex", "mufox", "bedux", "lagax", "redix", "gibux", "sudex", "pebax", "rogax", "gadex"]


def _stamp(t):
    return t.strftime("%Y-%m-%dT%H:%M:%S.000Z")


def synthetic_issue(rng, i, project="PY"):
    priority = rng.choice(sorted(CATEGORY_DAYS))
    created = dt.datetime(2021, 1, 1) + dt.timedelta(hours=i)
    start = created + dt.timedelta(hours=rng.uniform(1, 20))
    resolved = start + dt.timedelta(days=CATEGORY_DAYS[priority] * rng.uniform(0.8, 1.2))
    closed = resolved + dt.timedelta(hours=3)
    return {
        "key": f"{project}-{i + 1}",
        "project": project,
        "summary": " ".join(rng.choice(WORDS) for _ in range(5)),
        "description": " ".join(rng.choice(WORDS) for _ in range(12)),
        "priority": priority,
        "issue_type": rng.choice(["Bug", "Task", "Improvement"]),
        "status": "Closed",
        "resolution": "Fixed",
        "assignee": f"dev{rng.randrange(5)}",
        "components": [rng.choice(["agent", "master", "docs"])],
        "labels": [rng.choice(["perf", "ui"])],
        "created_at": _stamp(created),
        "changelog": [
            {"at": _stamp(start), "field": "status", "from": "Open", "to": "In Progress"},
            {"at": _stamp(resolved), "field": "status", "from": "In Progress", "to": "Resolved"},
            {"at": _stamp(closed), "field": "status", "from": "Resolved", "to": "Closed"},
        ],
    }


@pytest.fixture(scope="session")
def dump_path(tmp_path_factory):
    rng = random.Random(5)
    path = tmp_path_factory.mktemp("data") / "dump.jsonl"
    with open(path, "w") as f:
        for i in range(300):
            f.write(json.dumps(synthetic_issue(rng, i)) + "\n")
        f.write("{broken\n")
    return path


@pytest.fixture(scope="session")
def fast_config():
    cfg = __import__("fixtime").default_config()
    cfg["text"]["embeddings"]["dimension"] = 20
    cfg["topics"]["k_range"] = {"k_min": 2, "k_max": 4}
    cfg["forest"]["n_trees"] = 20
    return cfg


@pytest.fixture(scope="session")
def corpus(dump_path, fast_config):
    corpus, _ = __import__("fixtime").ingest(dump_path, fast_config)
    return corpus


@pytest.fixture(scope="session")
def bundle(corpus, fast_config):
    return __import__("fixtime").train(corpus, fast_config)


@pytest.fixture
def new_issue():
    return {
        "key": "PY-NEW",
        "summary": "kibex redix crash",
        "priority": "Blocker",
        "issue_type": "Bug",
        "components": ["agent"],
        "labels": ["perf"],
        "assignee": "dev1",
    }
