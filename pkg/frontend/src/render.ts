/** Canvas drawing for the game field; takes a minimal context so tests can stub it. */

import type { FieldRect, GameState } from './state.js';
import { formatScore, unitToPixel } from './state.js';

/** The subset of CanvasRenderingContext2D the renderer uses. */
export interface FieldContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export const FIELD_BG = '#10141c';
export const FIELD_BORDER = '#3b4252';
export const MARKER_COLOR = '#88c0d0';
export const BEST_COLOR = '#ebcb8b';
export const LABEL_COLOR = '#d8dee9';
export const MARKER_RADIUS = 5;

/** Blank square field; the landscape itself is never drawn. */
export function drawField(ctx: FieldContext, rect: FieldRect): void {
  ctx.clearRect(rect.left, rect.top, rect.width, rect.height);
  ctx.fillStyle = FIELD_BG;
  ctx.fillRect(rect.left, rect.top, rect.width, rect.height);
  ctx.strokeStyle = FIELD_BORDER;
  ctx.lineWidth = 1;
  ctx.strokeRect(rect.left + 0.5, rect.top + 0.5, rect.width - 1, rect.height - 1);
}

export function drawMarkers(ctx: FieldContext, rect: FieldRect, state: GameState): void {
  ctx.font = '11px system-ui, sans-serif';
  ctx.textAlign = 'center';
  ctx.textBaseline = 'bottom';
  for (const marker of state.markers) {
    const [px, py] = unitToPixel(rect, marker.u, marker.v);
    const isBest = state.bestScore !== null && marker.score === state.bestScore;
    ctx.beginPath();
    ctx.arc(px, py, MARKER_RADIUS, 0, 2 * Math.PI);
    ctx.fillStyle = isBest ? BEST_COLOR : MARKER_COLOR;
    ctx.fill();
    ctx.fillStyle = LABEL_COLOR;
    ctx.fillText(formatScore(marker.score), px, py - MARKER_RADIUS - 2);
  }
}

export function render(ctx: FieldContext, rect: FieldRect, state: GameState): void {
  drawField(ctx, rect);
  drawMarkers(ctx, rect, state);
}
