// View state and reducer. UI state derives from service responses plus local
// selection; no pipeline logic lives client-side. Optimistic applies mirror
// the service's mutation semantics just long enough for the round-trip, after
// which the fresh project document replaces them wholesale.

import type { EntryDoc, MutationOp, ProjectDoc, RankedClip } from "./types";

export type LongFormView = "grid" | "list";

export interface PendingMutation {
  op: MutationOp;
  payload: Record<string, unknown>;
}

export interface ConflictInfo {
  op: MutationOp;
  payload: Record<string, unknown>;
  message: string;
}

export interface ViewState {
  project: ProjectDoc | null;
  clipOrder: string[];
  viewMode: LongFormView;
  selectedEntryId: string | null;
  selectedClipId: string | null;
  searchQuery: string;
  searchActive: boolean;
  pending: PendingMutation[];
  alternatives: { entryId: string; clips: RankedClip[] } | null;
  alignTarget: { clipIndex: number; window: number[] } | null;
  previewRevision: number | null;
  previewVideo: string | null;
  status: string;
  conflict: ConflictInfo | null;
}

export const initialState: ViewState = {
  project: null,
  clipOrder: [],
  viewMode: "grid",
  selectedEntryId: null,
  selectedClipId: null,
  searchQuery: "",
  searchActive: false,
  pending: [],
  alternatives: null,
  alignTarget: null,
  previewRevision: null,
  previewVideo: null,
  status: "",
  conflict: null,
};

export type Action =
  | { type: "project-loaded"; project: ProjectDoc }
  | { type: "project-reconciled"; project: ProjectDoc }
  | { type: "set-view-mode"; mode: LongFormView }
  | { type: "select-entry"; entryId: string | null }
  | { type: "select-clip"; clipId: string | null }
  | { type: "search-results"; query: string; order: string[] }
  | { type: "search-reverted" }
  | { type: "mutation-queued"; mutation: PendingMutation }
  | { type: "mutation-settled" }
  | { type: "alternatives-open"; entryId: string; clips: RankedClip[] }
  | { type: "alternatives-close" }
  | { type: "align-target"; clipIndex: number; window: number[] }
  | { type: "preview-ready"; revision: number; video: string | null }
  | { type: "status"; message: string }
  | { type: "conflict"; info: ConflictInfo | null };

export function applyLocalMutation(
  project: ProjectDoc,
  op: MutationOp,
  payload: Record<string, unknown>,
): ProjectDoc {
  // A cosmetic mirror of the server's semantics so the UI moves instantly;
  // the authoritative state arrives with the post-commit refetch.
  const timeline = project.timeline.map((e) => ({ ...e }));
  const entryId = payload.entry_id as string | undefined;
  const idx = timeline.findIndex((e) => e.entry_id === entryId);
  const renumber = (entries: EntryDoc[]) =>
    entries.map((e, i) => ({ ...e, order_index: i }));

  switch (op) {
    case "edit_speech":
      if (idx >= 0) timeline[idx].speech_text = payload.text as string;
      break;
    case "delete_entry":
      if (idx >= 0) timeline.splice(idx, 1);
      break;
    case "reorder": {
      if (idx >= 0) {
        const [entry] = timeline.splice(idx, 1);
        timeline.splice(payload.new_index as number, 0, entry);
      }
      break;
    }
    case "add_clip": {
      const clip = project.clips.find((c) => c.clip_id === payload.clip_id);
      if (clip) {
        const entry: EntryDoc = {
          entry_id: `${project.project_id}:e${String(project.entry_seq).padStart(3, "0")}`,
          order_index: 0,
          mode: "extractive",
          clip_id: clip.clip_id,
          src_start_s: clip.start_s,
          src_end_s: clip.end_s,
          speech_text: null,
          voice_id: null,
          trim_head_s: 0,
          trim_tail_s: 0,
          speed_factor: null,
          denoise: false,
          saved_speech_text: null,
          saved_voice_id: null,
          concept_id: null,
          segment_title: null,
        };
        timeline.splice((payload.index as number) ?? timeline.length, 0, entry);
      }
      break;
    }
    case "toggle_mode":
      if (idx >= 0) {
        const entry = timeline[idx];
        if (entry.mode === "abstractive") {
          entry.saved_speech_text = entry.speech_text;
          entry.saved_voice_id = entry.voice_id;
          entry.mode = "extractive";
          entry.speech_text = null;
          entry.voice_id = null;
        } else {
          entry.mode = "abstractive";
          entry.speech_text = entry.saved_speech_text ?? "";
          entry.voice_id = entry.saved_voice_id ?? "default";
        }
      }
      break;
    case "set_speaker":
      if (idx >= 0) timeline[idx].voice_id = payload.voice_id as string;
      break;
    case "set_denoise":
      if (idx >= 0) timeline[idx].denoise = Boolean(payload.denoise);
      break;
    case "trim":
      if (idx >= 0) {
        timeline[idx].trim_head_s += (payload.head_s as number) ?? 0;
        timeline[idx].trim_tail_s += (payload.tail_s as number) ?? 0;
      }
      break;
    case "extend":
      if (idx >= 0) {
        timeline[idx].trim_head_s = Math.max(
          0,
          timeline[idx].trim_head_s - ((payload.head_s as number) ?? 0),
        );
        timeline[idx].trim_tail_s = Math.max(
          0,
          timeline[idx].trim_tail_s - ((payload.tail_s as number) ?? 0),
        );
      }
      break;
    case "replace_clip": {
      const clip = project.clips.find((c) => c.clip_id === payload.clip_id);
      if (idx >= 0 && clip) {
        timeline[idx].clip_id = clip.clip_id;
        timeline[idx].src_start_s = clip.start_s;
        timeline[idx].src_end_s = clip.end_s;
        timeline[idx].trim_head_s = 0;
        timeline[idx].trim_tail_s = 0;
      }
      break;
    }
  }
  return { ...project, timeline: renumber(timeline) };
}

export function reducer(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "project-loaded":
      return {
        ...initialState,
        viewMode: state.viewMode,
        project: action.project,
        clipOrder:
          action.project.clip_order ?? action.project.clips.map((c) => c.clip_id),
        status: "",
      };
    case "project-reconciled":
      return {
        ...state,
        project: action.project,
        clipOrder:
          state.searchActive && state.clipOrder.length
            ? state.clipOrder
            : action.project.clip_order ?? action.project.clips.map((c) => c.clip_id),
        conflict: null,
      };
    case "set-view-mode":
      return { ...state, viewMode: action.mode };
    case "select-entry":
      return { ...state, selectedEntryId: action.entryId };
    case "select-clip":
      return { ...state, selectedClipId: action.clipId };
    case "search-results":
      return {
        ...state,
        searchQuery: action.query,
        searchActive: true,
        clipOrder: action.order,
      };
    case "search-reverted":
      return {
        ...state,
        searchQuery: "",
        searchActive: false,
        clipOrder: state.project ? state.project.clips.map((c) => c.clip_id) : [],
      };
    case "mutation-queued": {
      const project = state.project
        ? applyLocalMutation(state.project, action.mutation.op, action.mutation.payload)
        : null;
      return { ...state, project, pending: [...state.pending, action.mutation] };
    }
    case "mutation-settled":
      return { ...state, pending: state.pending.slice(1) };
    case "alternatives-open":
      return { ...state, alternatives: { entryId: action.entryId, clips: action.clips } };
    case "alternatives-close":
      return { ...state, alternatives: null };
    case "align-target":
      return { ...state, alignTarget: { clipIndex: action.clipIndex, window: action.window } };
    case "preview-ready":
      return { ...state, previewRevision: action.revision, previewVideo: action.video };
    case "status":
      return { ...state, status: action.message };
    case "conflict":
      return { ...state, conflict: action.info };
    default:
      return state;
  }
}
