"""HTTP editing service: project lifecycle, generation, timeline mutation,
search, alternatives, alignment, and render jobs.

Concurrency model: reads are unrestricted; mutations are serialized per
project behind a lock plus an optimistic revision check (stale base_revision
gets 409 and never touches state). Render jobs run inline per request, newest
revision winning by construction. Only the six editing-interaction categories
are recorded in the interaction log; everything replayable lives in the
event log.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import ingest, mutations, pipeline, renderer
from .blender import BlendConfig
from .config import PipelineConfig
from .errors import Conflict, DomainError, NotFound, ShortformError
from .ingest import ProjectState
from .matcher import MatchConfig, score_pair
from .project_store import ProjectStore
from .providers import ProviderBundle, ProviderConfig, build_providers, cosine
from .renderer import RenderConfig
from .transcript import VisualConcept

ALIGN_WINDOW = 3
ALTERNATIVES_LIMIT = 20

_STATUS_BY_CODE = {
    "not_found": 404,
    "conflict": 409,
    "domain_error": 400,
    "parse_error": 422,
    "empty_timeline": 400,
    "insufficient_clips": 400,
    "no_speech": 400,
}


@dataclass
class SearchQuery:
    kind: str  # "text_prompt" | "by_keyframe"
    text: str | None = None
    clip_id: str | None = None
    limit: int = 0

    def __post_init__(self):
        if self.kind == "text_prompt" and not self.text:
            raise DomainError("text_prompt search requires text")
        if self.kind == "by_keyframe" and not self.clip_id:
            raise DomainError("by_keyframe search requires clip_id")
        if self.kind not in ("text_prompt", "by_keyframe"):
            raise DomainError(f"unknown search kind: {self.kind}")


class IngestBody(BaseModel):
    video: str
    project_id: str | None = None


class GenerateBody(BaseModel):
    guide_clip_ids: list[str] = []


class MutationBody(BaseModel):
    base_revision: int
    op: str
    payload: dict = {}


@dataclass
class EditService:
    store: ProjectStore
    providers: ProviderBundle
    cfg: PipelineConfig = field(default_factory=PipelineConfig)
    match_cfg: MatchConfig = field(default_factory=MatchConfig)
    blend_cfg: BlendConfig = field(default_factory=BlendConfig)
    render_cfg: RenderConfig = field(default_factory=RenderConfig)

    def __post_init__(self):
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._jobs: dict[str, dict] = {}
        self._job_seq = 0
        self._search_order: dict[str, list[str] | None] = {}

    def _lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    # -- lifecycle -----------------------------------------------------------

    def ingest(self, video: str, project_id: str | None = None) -> ProjectState:
        return ingest.ingest_video(video, self.providers, self.store, project_id)

    def generate(self, project_id: str, guide_clip_ids: tuple[str, ...], mode: str) -> ProjectState:
        with self._lock(project_id):
            project = self.store.load(project_id)
            result = pipeline.generate(
                project,
                self.store,
                self.providers,
                self.cfg,
                self.match_cfg,
                self.blend_cfg,
                mode=mode,
                guide_clip_ids=guide_clip_ids,
            )
            project = result.project
            project.revision += 1
            self.store.save(project)
            self.store.append_event(
                project_id,
                "generate",
                {"mode": mode, "guide_clip_ids": list(guide_clip_ids)},
                project.revision,
            )
            return project

    def mutate(self, project_id: str, base_revision: int, op: str, payload: dict) -> ProjectState:
        with self._lock(project_id):
            project = self.store.load(project_id)
            if base_revision != project.revision:
                raise Conflict(
                    f"base_revision {base_revision} != current {project.revision}; refetch"
                )
            mutated = mutations.apply_mutation(project, op, payload)
            mutated.revision += 1
            self.store.save(mutated)
            self.store.append_event(project_id, op, payload, mutated.revision)
            category = mutations.TABLE_CATEGORIES.get(op)
            if category:
                self.store.log_interaction(project_id, category, payload.get("entry_id", ""))
            return mutated

    # -- search / alternatives / align ----------------------------------------

    def search(self, project_id: str, q: SearchQuery) -> list[dict]:
        project = self.store.load(project_id)
        if q.kind == "text_prompt":
            probe = self.providers.joint_embedder.embed_image_text(text=q.text)
        else:
            clip = project.clip_by_id(q.clip_id)
            probe = self.providers.joint_embedder.embed_image_text(
                image=ingest.keyframe_path(project, self.store, clip.clip_id)
            )
        scored = []
        for clip in project.clips:
            vec = self.providers.joint_embedder.embed_image_text(
                image=ingest.keyframe_path(project, self.store, clip.clip_id)
            )
            scored.append((cosine(probe, vec), clip))
        ranked = sorted(scored, key=lambda t: -t[0])  # stable: ingest order on ties
        self._search_order[project_id] = [c.clip_id for _, c in ranked]
        out = [
            {"clip_id": c.clip_id, "score": round(s, 6), "speech": c.speech, "keyframe": c.keyframe}
            for s, c in ranked
        ]
        return out[: q.limit] if q.limit else out

    def revert_search(self, project_id: str) -> list[str]:
        project = self.store.load(project_id)
        self._search_order[project_id] = None
        return [c.clip_id for c in project.clips]

    def clip_order(self, project_id: str) -> list[str]:
        order = self._search_order.get(project_id)
        if order:
            return order
        return [c.clip_id for c in self.store.load(project_id).clips]

    def _find_entry(self, entry_id: str) -> tuple[ProjectState, int]:
        for pid in self.store.list_projects():
            project = self.store.load(pid)
            for i, entry in enumerate(project.timeline):
                if entry.entry_id == entry_id:
                    return project, i
        raise NotFound(f"unknown entry: {entry_id}")

    def alternatives(self, entry_id: str) -> list[dict]:
        project, idx = self._find_entry(entry_id)
        entry = project.timeline[idx]
        concept = next(
            (c for c in project.concepts if c.concept_id == entry.concept_id), None
        )
        if concept is None:
            phrase = entry.speech_text or ingest_speech_fallback(project, entry)
            mid = (entry.src_start_s + entry.src_end_s) / 2.0
            concept = VisualConcept(
                concept_id="query",
                phrase=phrase.strip() or "video",
                sentence_index=0,
                start=0,
                end=max(1, len(phrase)),
                rel_pos=min(1.0, max(0.0, mid / project.duration_s)),
            )
        scored = []
        for clip in project.clips:
            if clip.clip_id == entry.clip_id:
                continue
            vec = score_pair(
                concept,
                clip,
                ingest.keyframe_path(project, self.store, clip.clip_id),
                self.match_cfg,
                self.providers,
            )
            scored.append((vec.combined, clip))
        scored.sort(key=lambda t: (-t[0], t[1].start_s))
        return [
            {"clip_id": c.clip_id, "score": round(s, 6), "keyframe": c.keyframe}
            for s, c in scored[:ALTERNATIVES_LIMIT]
        ]

    def align(self, entry_id: str) -> dict:
        project, idx = self._find_entry(entry_id)
        entry = project.timeline[idx]
        clip_index = project.clip_index(entry.clip_id)
        lo = max(0, clip_index - ALIGN_WINDOW)
        hi = min(len(project.clips) - 1, clip_index + ALIGN_WINDOW)
        self.store.log_interaction(project.project_id, "Align", entry_id)
        return {
            "project_id": project.project_id,
            "clip_index": clip_index,
            "window": list(range(lo, hi + 1)),
        }

    # -- render jobs -----------------------------------------------------------

    def render_job(self, project_id: str) -> str:
        with self._lock(project_id):
            project = self.store.load(project_id)
            self._job_seq += 1
            job_id = f"job{self._job_seq:06d}"
            self.store.log_interaction(project_id, "Render", "")
            try:
                result = renderer.render(
                    project, self.store, self.providers, self.render_cfg, preset="full"
                )
                self._jobs[job_id] = {
                    "job_id": job_id,
                    "project_id": project_id,
                    "revision": project.revision,
                    "status": "completed",
                    "edl": os.path.relpath(result.edl_path, self.store.project_dir(project_id)),
                    "audio": os.path.relpath(result.audio_path, self.store.project_dir(project_id)),
                    "video": (
                        os.path.relpath(result.video_path, self.store.project_dir(project_id))
                        if result.video_path
                        else None
                    ),
                    "total_duration_s": round(result.total_duration_s, 3),
                    "error": None,
                }
            except ShortformError as exc:
                self._jobs[job_id] = {
                    "job_id": job_id,
                    "project_id": project_id,
                    "revision": project.revision,
                    "status": "failed",
                    "edl": None,
                    "audio": None,
                    "video": None,
                    "total_duration_s": None,
                    "error": {"code": exc.code, "message": str(exc)},
                }
            return job_id

    def job(self, job_id: str) -> dict:
        if job_id not in self._jobs:
            raise NotFound(f"unknown job: {job_id}")
        return self._jobs[job_id]


def ingest_speech_fallback(project: ProjectState, entry) -> str:
    words = [w.text for w in project.words if entry.src_start_s <= w.mid_s < entry.src_end_s]
    if words:
        return " ".join(words[:16])
    return project.clip_by_id(entry.clip_id).speech


# ---------------------------------------------------------------------------
# event replay (the serializability property made executable)


def replay_events(
    video_path: str,
    events: list[dict],
    store: ProjectStore,
    providers: ProviderBundle,
    cfg: PipelineConfig,
    match_cfg: MatchConfig,
    blend_cfg: BlendConfig,
    project_id: str | None = None,
) -> ProjectState:
    """Fresh ingest plus the logged op sequence reproduces the final state."""
    project = ingest.ingest_video(video_path, providers, store, project_id)
    for event in events:
        if event["op"] == "generate":
            result = pipeline.generate(
                project,
                store,
                providers,
                cfg,
                match_cfg,
                blend_cfg,
                mode=event["payload"]["mode"],
                guide_clip_ids=tuple(event["payload"].get("guide_clip_ids", ())),
            )
            project = result.project
        else:
            project = mutations.apply_mutation(project, event["op"], event["payload"])
        project.revision += 1
        store.save(project)
    return project


# ---------------------------------------------------------------------------
# FastAPI wiring


def create_app(
    store_root: str,
    provider_config: ProviderConfig | None = None,
    cfg: PipelineConfig | None = None,
    match_cfg: MatchConfig | None = None,
    blend_cfg: BlendConfig | None = None,
    render_cfg: RenderConfig | None = None,
) -> FastAPI:
    cfg = cfg or PipelineConfig()
    providers = build_providers(
        provider_config or ProviderConfig(),
        short_words_target=int(cfg.word_budget * 0.9),
    )
    svc = EditService(
        store=ProjectStore(store_root),
        providers=providers,
        cfg=cfg,
        match_cfg=match_cfg or MatchConfig(),
        blend_cfg=blend_cfg or BlendConfig(),
        render_cfg=render_cfg or RenderConfig(),
    )
    app = FastAPI(title="shortform edit service")
    app.state.service = svc

    @app.exception_handler(ShortformError)
    async def on_error(_request: Request, exc: ShortformError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(
            status_code=status, content={"error": {"code": exc.code, "message": str(exc)}}
        )

    @app.post("/projects")
    def create_project(body: IngestBody):
        project = svc.ingest(body.video, body.project_id)
        return project.to_dict()

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        doc = svc.store.load(project_id).to_dict()
        doc["clip_order"] = svc.clip_order(project_id)
        return doc

    @app.post("/projects/{project_id}/generate")
    def generate(project_id: str, body: GenerateBody, mode: str = "abstractive"):
        project = svc.generate(project_id, tuple(body.guide_clip_ids), mode)
        return {"revision": project.revision}

    @app.get("/projects/{project_id}/search")
    def search(
        project_id: str,
        kind: str = "text_prompt",
        text: str | None = None,
        clip_id: str | None = None,
        limit: int = 0,
    ):
        if kind == "revert":
            return {"clips": [{"clip_id": cid} for cid in svc.revert_search(project_id)]}
        q = SearchQuery(kind=kind, text=text, clip_id=clip_id, limit=limit)
        return {"clips": svc.search(project_id, q)}

    @app.get("/entries/{entry_id}/alternatives")
    def alternatives(entry_id: str):
        return {"clips": svc.alternatives(entry_id)}

    @app.get("/entries/{entry_id}/align")
    def align(entry_id: str):
        return svc.align(entry_id)

    @app.post("/projects/{project_id}/mutations")
    def mutate(project_id: str, body: MutationBody):
        project = svc.mutate(project_id, body.base_revision, body.op, body.payload)
        return {"revision": project.revision}

    @app.post("/projects/{project_id}/render")
    def render(project_id: str):
        job_id = svc.render_job(project_id)
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job(job_id: str):
        return svc.job(job_id)

    @app.get("/projects/{project_id}/interactions", response_class=PlainTextResponse)
    def interactions(project_id: str):
        rows = svc.store.read_interactions(project_id)
        return "".join(f"{c}\t{ts}\t{e}\n" for c, ts, e in rows)

    @app.get("/media/{project_id}/{rel_path:path}")
    def media_file(project_id: str, rel_path: str):
        path = svc.store.resolve(project_id, rel_path)
        if not os.path.isfile(path):
            raise NotFound(f"no media at {rel_path}")
        return FileResponse(path)

    return app
