/** DOM wiring: one active session per tab, resumable from localStorage. */

import { ApiClient, ApiError } from './api.js';
import { render } from './render.js';
import {
  FieldRect,
  GameState,
  applyClick,
  canClick,
  completeTask,
  formatScore,
  fromStored,
  hydrate,
  initialState,
  pixelToUnit,
  shotsRemaining,
  startSession,
  toStored,
  StoredProgress,
} from './state.js';

const STORAGE_KEY = 'search-game-progress';

const client = new ApiClient('');

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const setupSection = el<HTMLElement>('setup');
const gameSection = el<HTMLElement>('game');
const summarySection = el<HTMLElement>('summary');
const userInput = el<HTMLInputElement>('user-id');
const startBtn = el<HTMLButtonElement>('start-btn');
const nextBtn = el<HTMLButtonElement>('next-btn');
const taskLabel = el<HTMLElement>('task-label');
const shotsLabel = el<HTMLElement>('shots-label');
const bestLabel = el<HTMLElement>('best-label');
const resultsList = el<HTMLElement>('results');
const toastBox = el<HTMLElement>('toast');
const canvas = el<HTMLCanvasElement>('field');

let state: GameState | null = null;

function fieldRect(): FieldRect {
  return { left: 0, top: 0, width: canvas.width, height: canvas.height };
}

function toast(message: string): void {
  toastBox.textContent = message;
  toastBox.classList.add('visible');
  window.setTimeout(() => toastBox.classList.remove('visible'), 2500);
}

function persist(): void {
  if (state) {
    localStorage.setItem(STORAGE_KEY, JSON.stringify(toStored(state)));
  }
}

function loadStored(): StoredProgress | null {
  const raw = localStorage.getItem(STORAGE_KEY);
  if (!raw) return null;
  try {
    return JSON.parse(raw) as StoredProgress;
  } catch {
    return null;
  }
}

function show(section: HTMLElement): void {
  for (const s of [setupSection, gameSection, summarySection]) {
    s.hidden = s !== section;
  }
}

function repaint(): void {
  if (!state) return;
  const ctx = canvas.getContext('2d');
  if (ctx) render(ctx, fieldRect(), state);
  taskLabel.textContent = `Task ${state.taskIndex} / ${state.taskCount}`;
  shotsLabel.textContent = `${shotsRemaining(state)} shots left`;
  bestLabel.textContent = `best ${formatScore(state.bestScore)}`;
  nextBtn.hidden = state.phase !== 'finished';
  nextBtn.textContent = state.taskIndex >= state.taskCount ? 'See summary' : 'Next task';
}

function showSummary(): void {
  if (!state) return;
  resultsList.innerHTML = '';
  for (const result of state.results) {
    const item = document.createElement('li');
    item.textContent = `Task ${result.taskIndex}: best ${formatScore(result.bestScore)}`;
    resultsList.appendChild(item);
  }
  show(summarySection);
}

async function startTask(): Promise<void> {
  if (!state) return;
  const view = await client.createSession(state.userId, state.taskIndex);
  state = startSession(state, view);
  persist();
  show(gameSection);
  repaint();
}

async function resume(stored: StoredProgress, taskCount: number, shotsMax: number): Promise<void> {
  state = fromStored(stored, taskCount, shotsMax);
  if (state.phase === 'done') {
    showSummary();
    return;
  }
  if (stored.sessionId) {
    try {
      const view = await client.session(stored.sessionId);
      state = hydrate(state, view);
      show(gameSection);
      repaint();
      return;
    } catch {
      // session unknown to the service; fall through to a fresh one
      state = { ...state, sessionId: null };
    }
  }
  await startTask();
}

async function onFieldClick(event: MouseEvent): Promise<void> {
  if (!state) return;
  const bounds = canvas.getBoundingClientRect();
  const px = ((event.clientX - bounds.left) / bounds.width) * canvas.width;
  const py = ((event.clientY - bounds.top) / bounds.height) * canvas.height;
  const rect = fieldRect();
  if (!canClick(state, rect, px, py)) return;
  const [u, v] = pixelToUnit(rect, px, py);
  const sessionId = state.sessionId;
  if (!sessionId) return;
  try {
    const result = await client.click(sessionId, u, v);
    state = applyClick(state, u, v, result);
    persist();
    repaint();
  } catch (error) {
    if (error instanceof ApiError && error.code === 'SessionFinished') {
      const view = await client.session(sessionId);
      state = hydrate(state, view);
      repaint();
    } else if (error instanceof ApiError) {
      toast(error.message);
    } else {
      toast('network error, click again to retry');
    }
  }
}

async function onNext(): Promise<void> {
  if (!state) return;
  state = completeTask(state);
  persist();
  if (state.phase === 'done') {
    showSummary();
  } else {
    await startTask();
  }
}

async function boot(): Promise<void> {
  const info = await client.tasks();
  canvas.addEventListener('click', (e) => void onFieldClick(e));
  nextBtn.addEventListener('click', () => void onNext());
  startBtn.addEventListener('click', () => {
    const userId = userInput.value.trim();
    if (!userId) {
      toast('enter a player id first');
      return;
    }
    state = initialState(userId, info.count, info.shots_max);
    persist();
    void startTask();
  });

  const stored = loadStored();
  if (stored && stored.userId) {
    await resume(stored, info.count, info.shots_max);
  } else {
    show(setupSection);
  }
}

void boot().catch(() => toast('service unreachable'));
