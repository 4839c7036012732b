"""Timeline mutation ops: the editing verbs behind the service API.

``apply_mutation`` works on a deep copy of the project and either returns the
mutated copy or raises, so a rejected mutation can never leave partial state.
Entry ids come from the project's monotonic ``entry_seq`` counter, which keeps
replaying the event log byte-deterministic.

Trim granularity: extractive trims snap to word boundaries inside the entry's
source span; abstractive trims snap to 0.5 s steps.
"""

from __future__ import annotations

from .errors import DomainError
from .ingest import ProjectState
from .timeline import TimelineEntry

MUTATION_OPS = (
    "toggle_mode",
    "edit_speech",
    "set_speaker",
    "set_denoise",
    "trim",
    "extend",
    "reorder",
    "delete_entry",
    "add_clip",
    "replace_clip",
)

# Interaction-log categories; only these are recorded in interactions.tsv.
TABLE_CATEGORIES = {
    "edit_speech": "Edit Text",
    "add_clip": "Drag Shot",
    "reorder": "Drag Shot",
    "delete_entry": "Delete Shot",
    "trim": "Trim Shot",
    "extend": "Trim Shot",
}

ABSTRACTIVE_TRIM_STEP_S = 0.5


def _renumber(project: ProjectState) -> None:
    for i, entry in enumerate(project.timeline):
        entry.order_index = i


def _speech_for_span(project: ProjectState, start_s: float, end_s: float) -> str:
    words = [w.text for w in project.words if start_s <= w.mid_s < end_s]
    return " ".join(words)


def _snap_word_boundary(project: ProjectState, t: float, lo: float, hi: float) -> float:
    """Nearest word start/end within [lo, hi]; falls back to the raw time."""
    candidates = [lo, hi]
    for w in project.words:
        for b in (w.start_s, w.end_s):
            if lo <= b <= hi:
                candidates.append(b)
    return min(candidates, key=lambda b: (abs(b - t), b))


def _snap_step(t: float, step: float) -> float:
    return round(round(t / step) * step, 3)


def apply_mutation(project: ProjectState, op: str, payload: dict) -> ProjectState:
    """Apply one mutation to a copy of the project and return the copy."""
    if op not in MUTATION_OPS:
        raise DomainError(f"unknown mutation op: {op}")
    state = ProjectState.from_dict(project.to_dict())
    handler = _HANDLERS[op]
    handler(state, payload)
    for entry in state.timeline:
        entry.validate()
    _renumber(state)
    return state


def _toggle_mode(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    clip = state.clip_by_id(entry.clip_id)
    if entry.mode == "abstractive":
        entry.saved_speech_text = entry.speech_text
        entry.saved_voice_id = entry.voice_id
        entry.speech_text = None
        entry.voice_id = None
        entry.mode = "extractive"
        # back to the clip's own audio span
        entry.src_start_s, entry.src_end_s = clip.start_s, clip.end_s
        entry.trim_head_s = entry.trim_tail_s = 0.0
        entry.denoise = False
    else:
        seeded = entry.saved_speech_text or _speech_for_span(
            state, entry.src_start_s, entry.src_end_s
        ) or clip.speech
        if not seeded.strip():
            raise DomainError("no speech available to seed the abstractive entry")
        entry.mode = "abstractive"
        entry.speech_text = seeded
        entry.voice_id = entry.saved_voice_id or "default"
        entry.denoise = False


def _edit_speech(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    if entry.mode != "abstractive":
        raise DomainError("edit_speech applies to abstractive entries only")
    text = payload.get("text", "")
    if not text.strip():
        raise DomainError("speech text must be non-empty")
    entry.speech_text = text


def _set_speaker(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    if entry.mode != "abstractive":
        raise DomainError("set_speaker applies to abstractive entries only")
    voice = payload.get("voice_id", "")
    known = {"default"} | {s["voice_id"] for s in state.speakers}
    if voice not in known:
        raise DomainError(f"unknown voice: {voice}")
    entry.voice_id = voice


def _set_denoise(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    if entry.mode != "extractive":
        raise DomainError("set_denoise applies to extractive entries only")
    entry.denoise = bool(payload.get("denoise", False))


def _apply_trims(state: ProjectState, entry: TimelineEntry, head: float, tail: float) -> None:
    if entry.mode == "extractive":
        start = _snap_word_boundary(
            state, entry.src_start_s + head, entry.src_start_s, entry.src_end_s
        )
        end = _snap_word_boundary(
            state, entry.src_end_s - tail, entry.src_start_s, entry.src_end_s
        )
        head, tail = start - entry.src_start_s, entry.src_end_s - end
    else:
        head = _snap_step(head, ABSTRACTIVE_TRIM_STEP_S)
        tail = _snap_step(tail, ABSTRACTIVE_TRIM_STEP_S)
    if head < 0 or tail < 0:
        raise DomainError("trims must be >= 0")
    entry.trim_head_s = round(head, 3)
    entry.trim_tail_s = round(tail, 3)


def _trim(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    _apply_trims(
        state,
        entry,
        entry.trim_head_s + float(payload.get("head_s", 0.0)),
        entry.trim_tail_s + float(payload.get("tail_s", 0.0)),
    )


def _extend(state: ProjectState, payload: dict) -> None:
    """Extension reduces trims; it cannot reach past the entry's source span."""
    entry = state.entry_by_id(payload["entry_id"])
    _apply_trims(
        state,
        entry,
        max(0.0, entry.trim_head_s - float(payload.get("head_s", 0.0))),
        max(0.0, entry.trim_tail_s - float(payload.get("tail_s", 0.0))),
    )


def _reorder(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    new_index = int(payload["new_index"])
    if not (0 <= new_index < len(state.timeline)):
        raise DomainError(f"new_index out of range: {new_index}")
    state.timeline.remove(entry)
    state.timeline.insert(new_index, entry)


def _delete_entry(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    state.timeline.remove(entry)


def _add_clip(state: ProjectState, payload: dict) -> None:
    clip = state.clip_by_id(payload["clip_id"])
    index = int(payload.get("index", len(state.timeline)))
    if not (0 <= index <= len(state.timeline)):
        raise DomainError(f"index out of range: {index}")
    entry = TimelineEntry(
        entry_id=f"{state.project_id}:e{state.entry_seq:03d}",
        order_index=index,
        mode="extractive",
        clip_id=clip.clip_id,
        src_start_s=clip.start_s,
        src_end_s=clip.end_s,
    )
    state.entry_seq += 1
    state.timeline.insert(index, entry)


def _replace_clip(state: ProjectState, payload: dict) -> None:
    entry = state.entry_by_id(payload["entry_id"])
    clip = state.clip_by_id(payload["clip_id"])
    entry.clip_id = clip.clip_id
    entry.src_start_s, entry.src_end_s = clip.start_s, clip.end_s
    entry.trim_head_s = entry.trim_tail_s = 0.0


_HANDLERS = {
    "toggle_mode": _toggle_mode,
    "edit_speech": _edit_speech,
    "set_speaker": _set_speaker,
    "set_denoise": _set_denoise,
    "trim": _trim,
    "extend": _extend,
    "reorder": _reorder,
    "delete_entry": _delete_entry,
    "add_clip": _add_clip,
    "replace_clip": _replace_clip,
}
