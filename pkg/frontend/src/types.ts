// Service wire types. These mirror the JSON documents the editing service
// serves; the UI never derives pipeline state on its own.

export type EntryMode = "abstractive" | "extractive";

export interface ClipDoc {
  clip_id: string;
  start_s: number;
  end_s: number;
  keyframe: string;
  speech: string;
  rel_pos: number;
}

export interface EntryDoc {
  entry_id: string;
  order_index: number;
  mode: EntryMode;
  clip_id: string;
  src_start_s: number;
  src_end_s: number;
  speech_text: string | null;
  voice_id: string | null;
  trim_head_s: number;
  trim_tail_s: number;
  speed_factor: number | null;
  denoise: boolean;
  saved_speech_text: string | null;
  saved_voice_id: string | null;
  concept_id: string | null;
  segment_title: string | null;
}

export interface SpeakerDoc {
  speaker_id: string;
  voice_id: string;
}

export interface ProjectDoc {
  format_version: number;
  project_id: string;
  video: string;
  duration_s: number;
  fps: number;
  clips: ClipDoc[];
  words: unknown[];
  speakers: SpeakerDoc[];
  no_speech: boolean;
  short_transcript: { title: string; body: string } | null;
  concepts: unknown[];
  clip_descriptions: string[] | null;
  timeline: EntryDoc[];
  generated_mode: string | null;
  revision: number;
  entry_seq: number;
  clip_order?: string[];
}

export type MutationOp =
  | "toggle_mode"
  | "edit_speech"
  | "set_speaker"
  | "set_denoise"
  | "trim"
  | "extend"
  | "reorder"
  | "delete_entry"
  | "add_clip"
  | "replace_clip";

export interface RankedClip {
  clip_id: string;
  score: number;
  speech?: string;
  keyframe?: string;
}

export interface AlignResult {
  project_id: string;
  clip_index: number;
  window: number[];
}

export interface JobDoc {
  job_id: string;
  project_id: string;
  revision: number;
  status: "completed" | "failed";
  edl: string | null;
  audio: string | null;
  video: string | null;
  total_duration_s: number | null;
  error: { code: string; message: string } | null;
}

export type GenerateMode = "abstractive" | "extractive" | "mixed";
