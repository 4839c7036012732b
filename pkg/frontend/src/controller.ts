// Gesture layer: every user gesture maps to exactly one service call, and
// mutations are serialized so at most one is in flight. A Conflict response
// refetches the project and replays the user's intent once; a second failure
// surfaces as a merge prompt instead of silently dropping the edit.

import type { ApiClient } from "./api";
import { ConflictError } from "./api";
import type { Action, ViewState } from "./state";
import type { GenerateMode, MutationOp } from "./types";

export class EditorController {
  private chain: Promise<void> = Promise.resolve();

  constructor(
    private api: ApiClient,
    private dispatch: (a: Action) => void,
    private getState: () => ViewState,
  ) {}

  // -- lifecycle -------------------------------------------------------------

  async openProject(video: string, projectId?: string): Promise<void> {
    this.dispatch({ type: "status", message: "Ingesting video..." });
    const project = await this.api.ingest(video, projectId);
    this.dispatch({ type: "project-loaded", project });
  }

  async loadProject(projectId: string): Promise<void> {
    const project = await this.api.getProject(projectId);
    this.dispatch({ type: "project-loaded", project });
  }

  async generate(mode: GenerateMode, guideClipIds: string[] = []): Promise<void> {
    const project = this.requireProject();
    this.dispatch({ type: "status", message: `Generating (${mode})...` });
    await this.api.generate(project.project_id, mode, guideClipIds);
    await this.refetch();
    this.dispatch({ type: "status", message: "" });
  }

  // -- single-mutation gestures ----------------------------------------------

  editSpeech(entryId: string, text: string): Promise<void> {
    return this.submit("edit_speech", { entry_id: entryId, text });
  }

  toggleEntry(entryId: string): Promise<void> {
    return this.submit("toggle_mode", { entry_id: entryId });
  }

  setSpeaker(entryId: string, voiceId: string): Promise<void> {
    return this.submit("set_speaker", { entry_id: entryId, voice_id: voiceId });
  }

  setDenoise(entryId: string, denoise: boolean): Promise<void> {
    return this.submit("set_denoise", { entry_id: entryId, denoise });
  }

  trimEntry(entryId: string, headS: number, tailS: number): Promise<void> {
    return this.submit("trim", { entry_id: entryId, head_s: headS, tail_s: tailS });
  }

  extendEntry(entryId: string, headS: number, tailS: number): Promise<void> {
    return this.submit("extend", { entry_id: entryId, head_s: headS, tail_s: tailS });
  }

  dragClipToTimeline(clipId: string, index: number): Promise<void> {
    return this.submit("add_clip", { clip_id: clipId, index });
  }

  moveEntry(entryId: string, newIndex: number): Promise<void> {
    return this.submit("reorder", { entry_id: entryId, new_index: newIndex });
  }

  deleteEntry(entryId: string): Promise<void> {
    return this.submit("delete_entry", { entry_id: entryId });
  }

  chooseAlternative(entryId: string, clipId: string): Promise<void> {
    this.dispatch({ type: "alternatives-close" });
    return this.submit("replace_clip", { entry_id: entryId, clip_id: clipId });
  }

  retryMutation(op: MutationOp, payload: Record<string, unknown>): Promise<void> {
    // surfaced-conflict retry: re-offer the user's intent against fresh state
    return this.submit(op, payload);
  }

  // -- reads -------------------------------------------------------------------

  async align(entryId: string): Promise<void> {
    const result = await this.api.align(entryId);
    this.dispatch({
      type: "align-target",
      clipIndex: result.clip_index,
      window: result.window,
    });
  }

  async openAlternatives(entryId: string): Promise<void> {
    const clips = await this.api.alternatives(entryId);
    this.dispatch({ type: "alternatives-open", entryId, clips });
  }

  async runSearch(text: string): Promise<void> {
    const project = this.requireProject();
    const clips = await this.api.search(project.project_id, { kind: "text_prompt", text });
    this.dispatch({
      type: "search-results",
      query: text,
      order: clips.map((c) => c.clip_id),
    });
  }

  async searchByKeyframe(clipId: string): Promise<void> {
    const project = this.requireProject();
    const clips = await this.api.search(project.project_id, { kind: "by_keyframe", clipId });
    this.dispatch({
      type: "search-results",
      query: `~${clipId}`,
      order: clips.map((c) => c.clip_id),
    });
  }

  async revertSearch(): Promise<void> {
    const project = this.requireProject();
    await this.api.revertSearch(project.project_id);
    this.dispatch({ type: "search-reverted" });
  }

  // -- render ----------------------------------------------------------------

  async renderPreview(): Promise<void> {
    // always renders the latest revision: the job runs against fresh state
    const project = this.requireProject();
    this.dispatch({ type: "status", message: "Rendering..." });
    const jobId = await this.api.render(project.project_id);
    const job = await this.api.job(jobId);
    if (job.status === "failed") {
      this.dispatch({
        type: "status",
        message: `Render failed: ${job.error?.message ?? "unknown"}`,
      });
      return;
    }
    this.dispatch({
      type: "preview-ready",
      revision: job.revision,
      video: job.video ? this.api.mediaUrl(project.project_id, job.video) : null,
    });
    this.dispatch({ type: "status", message: "" });
  }

  // -- internals ----------------------------------------------------------------

  private requireProject() {
    const project = this.getState().project;
    if (!project) throw new Error("no project open");
    return project;
  }

  private submit(op: MutationOp, payload: Record<string, unknown>): Promise<void> {
    // serialize: at most one mutation in flight, issued in gesture order
    const run = this.chain.then(() => this.commit(op, payload, false));
    this.chain = run.catch(() => undefined);
    return run;
  }

  private async commit(
    op: MutationOp,
    payload: Record<string, unknown>,
    isReplay: boolean,
  ): Promise<void> {
    const project = this.requireProject();
    if (!isReplay) this.dispatch({ type: "mutation-queued", mutation: { op, payload } });
    try {
      await this.api.mutate(project.project_id, project.revision, op, payload);
      await this.refetch();
      this.dispatch({ type: "mutation-settled" });
    } catch (err) {
      if (err instanceof ConflictError && !isReplay) {
        await this.refetch(); // someone else moved the project; replay intent once
        await this.commit(op, payload, true);
        return;
      }
      this.dispatch({ type: "mutation-settled" });
      await this.refetch();
      this.dispatch({
        type: "conflict",
        info: { op, payload, message: err instanceof Error ? err.message : String(err) },
      });
    }
  }

  private async refetch(): Promise<void> {
    const project = this.requireProject();
    const doc = await this.api.getProject(project.project_id);
    this.dispatch({ type: "project-reconciled", project: doc });
  }
}
