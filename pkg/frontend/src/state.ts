/** Pure game state: every view is a function of the service's session resource. */

import type { ClickResult, SessionView } from './api.js';

export interface Marker {
  u: number;
  v: number;
  score: number;
}

export interface TaskResult {
  taskIndex: number;
  bestScore: number | null;
}

export type Phase = 'idle' | 'playing' | 'finished' | 'done';

export interface GameState {
  userId: string;
  taskCount: number;
  shotsMax: number;
  taskIndex: number;
  sessionId: string | null;
  markers: Marker[];
  bestScore: number | null;
  phase: Phase;
  results: TaskResult[];
}

export interface FieldRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function initialState(userId: string, taskCount: number, shotsMax: number): GameState {
  return {
    userId,
    taskCount,
    shotsMax,
    taskIndex: 1,
    sessionId: null,
    markers: [],
    bestScore: null,
    phase: 'idle',
    results: [],
  };
}

/** Rebuild the per-task part of the state from the service's view. */
export function hydrate(state: GameState, view: SessionView): GameState {
  return {
    ...state,
    taskIndex: view.task_index,
    sessionId: view.session_id,
    markers: view.clicks.map((c) => ({ u: c.x[0], v: c.x[1], score: c.score })),
    bestScore: view.best_score,
    phase: view.state === 'finished' ? 'finished' : 'playing',
  };
}

export function startSession(state: GameState, view: SessionView): GameState {
  return hydrate(state, view);
}

/** Append the acknowledged click; the service response is the only truth. */
export function applyClick(state: GameState, u: number, v: number, result: ClickResult): GameState {
  return {
    ...state,
    markers: [...state.markers, { u, v, score: result.score }],
    bestScore: result.best_score,
    phase: result.state === 'finished' ? 'finished' : 'playing',
  };
}

/** Record the finished task and advance, or close out the run. */
export function completeTask(state: GameState): GameState {
  const results = [...state.results, { taskIndex: state.taskIndex, bestScore: state.bestScore }];
  if (state.taskIndex >= state.taskCount) {
    return { ...state, results, sessionId: null, phase: 'done' };
  }
  return {
    ...state,
    results,
    taskIndex: state.taskIndex + 1,
    sessionId: null,
    markers: [],
    bestScore: null,
    phase: 'idle',
  };
}

export function shotsRemaining(state: GameState): number {
  return state.shotsMax - state.markers.length;
}

export function insideField(rect: FieldRect, px: number, py: number): boolean {
  return (
    px >= rect.left &&
    px <= rect.left + rect.width &&
    py >= rect.top &&
    py <= rect.top + rect.height
  );
}

/** No request leaves the client for out-of-field or post-budget clicks. */
export function canClick(state: GameState, rect: FieldRect, px: number, py: number): boolean {
  return (
    state.phase === 'playing' &&
    state.markers.length < state.shotsMax &&
    insideField(rect, px, py)
  );
}

/** Pixel to unit square; v grows upward while pixels grow downward. */
export function pixelToUnit(rect: FieldRect, px: number, py: number): [number, number] {
  const u = (px - rect.left) / rect.width;
  const v = 1 - (py - rect.top) / rect.height;
  return [clamp01(u), clamp01(v)];
}

export function unitToPixel(rect: FieldRect, u: number, v: number): [number, number] {
  return [rect.left + u * rect.width, rect.top + (1 - v) * rect.height];
}

function clamp01(value: number): number {
  return Math.min(1, Math.max(0, value));
}

/** Scores render with three decimals everywhere. */
export function formatScore(score: number | null): string {
  return score === null ? '-' : score.toFixed(3);
}

export interface StoredProgress {
  userId: string;
  taskIndex: number;
  sessionId: string | null;
  results: TaskResult[];
}

export function toStored(state: GameState): StoredProgress {
  return {
    userId: state.userId,
    taskIndex: state.taskIndex,
    sessionId: state.sessionId,
    results: state.results,
  };
}

/** Restore saved progress; markers and scores come from the service. */
export function fromStored(stored: StoredProgress, taskCount: number, shotsMax: number): GameState {
  const state = initialState(stored.userId, taskCount, shotsMax);
  return {
    ...state,
    taskIndex: stored.taskIndex,
    sessionId: stored.sessionId,
    results: stored.results,
    phase: stored.results.length >= taskCount ? 'done' : 'idle',
  };
}
