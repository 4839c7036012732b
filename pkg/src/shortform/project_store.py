"""Project persistence: one directory per project.

Layout:
    <root>/<project_id>/project.json      full state, relative paths, no timestamps
    <root>/<project_id>/events.jsonl      replayable op log (generate + mutations)
    <root>/<project_id>/interactions.tsv  category<TAB>timestamp<TAB>entry_id
    <root>/<project_id>/keyframes|media|renders|previews/

``project.json`` is written deterministically so two runs with the same seed
produce byte-identical state, and replaying ``events.jsonl`` onto a fresh
ingest reproduces it exactly.
"""

from __future__ import annotations

import json
import os
from datetime import datetime, timezone

from .errors import NotFound
from .ingest import ProjectState


class ProjectStore:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    # -- paths ---------------------------------------------------------------

    def project_dir(self, project_id: str) -> str:
        return os.path.join(self.root, project_id)

    def create_project_dir(self, project_id: str) -> str:
        path = self.project_dir(project_id)
        os.makedirs(path, exist_ok=True)
        for sub in ("keyframes", "media", "renders", "previews"):
            os.makedirs(os.path.join(path, sub), exist_ok=True)
        return path

    def resolve(self, project_id: str, rel_path: str) -> str:
        return os.path.join(self.project_dir(project_id), rel_path)

    def exists(self, project_id: str) -> bool:
        return os.path.exists(os.path.join(self.project_dir(project_id), "project.json"))

    def list_projects(self) -> list[str]:
        if not os.path.isdir(self.root):
            return []
        return sorted(
            d for d in os.listdir(self.root) if self.exists(d)
        )

    # -- state ---------------------------------------------------------------

    def save(self, project: ProjectState) -> None:
        path = os.path.join(self.project_dir(project.project_id), "project.json")
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(project.to_dict(), f, indent=2)
            f.write("\n")
        os.replace(tmp, path)

    def load(self, project_id: str) -> ProjectState:
        path = os.path.join(self.project_dir(project_id), "project.json")
        if not os.path.exists(path):
            raise NotFound(f"no such project: {project_id}")
        with open(path, "r", encoding="utf-8") as f:
            return ProjectState.from_dict(json.load(f))

    def state_bytes(self, project_id: str) -> bytes:
        path = os.path.join(self.project_dir(project_id), "project.json")
        with open(path, "rb") as f:
            return f.read()

    # -- event log (replayable) ------------------------------------------------

    def append_event(self, project_id: str, op: str, payload: dict, revision: int) -> None:
        record = {
            "revision": revision,
            "op": op,
            "payload": payload,
            "ts": datetime.now(timezone.utc).isoformat(),
        }
        path = os.path.join(self.project_dir(project_id), "events.jsonl")
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record) + "\n")

    def read_events(self, project_id: str) -> list[dict]:
        path = os.path.join(self.project_dir(project_id), "events.jsonl")
        if not os.path.exists(path):
            return []
        with open(path, "r", encoding="utf-8") as f:
            return [json.loads(ln) for ln in f if ln.strip()]

    # -- interaction log (Table-style categories) ------------------------------

    def log_interaction(self, project_id: str, category: str, entry_id: str = "") -> None:
        path = os.path.join(self.project_dir(project_id), "interactions.tsv")
        ts = datetime.now(timezone.utc).isoformat()
        with open(path, "a", encoding="utf-8") as f:
            f.write(f"{category}\t{ts}\t{entry_id}\n")

    def read_interactions(self, project_id: str) -> list[tuple[str, str, str]]:
        path = os.path.join(self.project_dir(project_id), "interactions.tsv")
        if not os.path.exists(path):
            return []
        rows = []
        with open(path, "r", encoding="utf-8") as f:
            for ln in f:
                if ln.strip():
                    cat, ts, entry = ln.rstrip("\n").split("\t", 2)
                    rows.append((cat, ts, entry))
        return rows
