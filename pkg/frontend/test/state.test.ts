import { describe, expect, it } from "vitest";

import { applyLocalMutation, initialState, reducer } from "../src/state";
import { makeProject } from "./fake-service";

describe("reducer", () => {
  it("loads a project and derives clip order", () => {
    const project = makeProject(4, 1);
    const state = reducer(initialState, { type: "project-loaded", project });
    expect(state.project).toEqual(project);
    expect(state.clipOrder).toEqual(["c000", "c001", "c002", "c003"]);
  });

  it("search results reorder clips; revert restores ingest order", () => {
    const project = makeProject(3, 0);
    let state = reducer(initialState, { type: "project-loaded", project });
    state = reducer(state, {
      type: "search-results",
      query: "pond",
      order: ["c002", "c000", "c001"],
    });
    expect(state.clipOrder).toEqual(["c002", "c000", "c001"]);
    expect(state.searchActive).toBe(true);
    state = reducer(state, { type: "search-reverted" });
    expect(state.clipOrder).toEqual(["c000", "c001", "c002"]);
    expect(state.searchActive).toBe(false);
  });

  it("reconcile keeps an active search order but refreshes the project", () => {
    const project = makeProject(3, 1);
    let state = reducer(initialState, { type: "project-loaded", project });
    state = reducer(state, {
      type: "search-results",
      query: "x",
      order: ["c002", "c001", "c000"],
    });
    const fresh = { ...makeProject(3, 1), revision: 7 };
    state = reducer(state, { type: "project-reconciled", project: fresh });
    expect(state.project?.revision).toBe(7);
    expect(state.clipOrder).toEqual(["c002", "c001", "c000"]);
  });

  it("queues and settles mutations in order", () => {
    const project = makeProject(4, 2);
    let state = reducer(initialState, { type: "project-loaded", project });
    state = reducer(state, {
      type: "mutation-queued",
      mutation: { op: "delete_entry", payload: { entry_id: "p1:e000" } },
    });
    state = reducer(state, {
      type: "mutation-queued",
      mutation: { op: "trim", payload: { entry_id: "p1:e001", head_s: 0.5 } },
    });
    expect(state.pending.map((p) => p.op)).toEqual(["delete_entry", "trim"]);
    state = reducer(state, { type: "mutation-settled" });
    expect(state.pending.map((p) => p.op)).toEqual(["trim"]);
  });
});

describe("optimistic mutation mirror", () => {
  const project = makeProject(6, 3);

  it("edit_speech rewrites the entry text", () => {
    const next = applyLocalMutation(project, "edit_speech", {
      entry_id: "p1:e001",
      text: "new words",
    });
    expect(next.timeline[1].speech_text).toBe("new words");
  });

  it("delete_entry removes and renumbers", () => {
    const next = applyLocalMutation(project, "delete_entry", { entry_id: "p1:e000" });
    expect(next.timeline).toHaveLength(2);
    expect(next.timeline.map((e) => e.order_index)).toEqual([0, 1]);
  });

  it("add_clip inserts an extractive entry at the drop index", () => {
    const next = applyLocalMutation(project, "add_clip", { clip_id: "c004", index: 1 });
    expect(next.timeline).toHaveLength(4);
    expect(next.timeline[1].mode).toBe("extractive");
    expect(next.timeline[1].clip_id).toBe("c004");
    expect(next.timeline[1].src_start_s).toBe(40);
  });

  it("reorder moves an entry to the target index", () => {
    const next = applyLocalMutation(project, "reorder", {
      entry_id: "p1:e002",
      new_index: 0,
    });
    expect(next.timeline[0].entry_id).toBe("p1:e002");
    expect(next.timeline.map((e) => e.order_index)).toEqual([0, 1, 2]);
  });

  it("toggle_mode stashes and restores speech", () => {
    const once = applyLocalMutation(project, "toggle_mode", { entry_id: "p1:e000" });
    expect(once.timeline[0].mode).toBe("extractive");
    expect(once.timeline[0].speech_text).toBeNull();
    const twice = applyLocalMutation(once, "toggle_mode", { entry_id: "p1:e000" });
    expect(twice.timeline[0].mode).toBe("abstractive");
    expect(twice.timeline[0].speech_text).toBe(project.timeline[0].speech_text);
  });

  it("trim accumulates and extend floors at zero", () => {
    let next = applyLocalMutation(project, "trim", {
      entry_id: "p1:e000",
      head_s: 1,
      tail_s: 0.5,
    });
    expect(next.timeline[0].trim_head_s).toBe(1);
    next = applyLocalMutation(next, "extend", { entry_id: "p1:e000", head_s: 5, tail_s: 0 });
    expect(next.timeline[0].trim_head_s).toBe(0);
    expect(next.timeline[0].trim_tail_s).toBe(0.5);
  });

  it("replace_clip swaps the visual and resets trims", () => {
    const next = applyLocalMutation(project, "replace_clip", {
      entry_id: "p1:e000",
      clip_id: "c005",
    });
    expect(next.timeline[0].clip_id).toBe("c005");
    expect(next.timeline[0].src_start_s).toBe(50);
    expect(next.timeline[0].speech_text).toBe(project.timeline[0].speech_text);
  });

  it("never mutates the input document", () => {
    const before = JSON.stringify(project);
    applyLocalMutation(project, "delete_entry", { entry_id: "p1:e000" });
    applyLocalMutation(project, "trim", { entry_id: "p1:e001", head_s: 2 });
    expect(JSON.stringify(project)).toBe(before);
  });
});
