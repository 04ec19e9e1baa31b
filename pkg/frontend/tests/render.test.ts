import { describe, expect, it } from 'vitest';

import type { FieldContext } from '../src/render.js';
import { BEST_COLOR, MARKER_COLOR, render } from '../src/render.js';
import { hydrate, initialState } from '../src/state.js';
import type { SessionView } from '../src/api.js';

interface Op {
  op: string;
  args: unknown[];
}

/** Context stub that records every drawing call with the styles in effect. */
function recordingContext(): { ctx: FieldContext; ops: Op[] } {
  const ops: Op[] = [];
  const ctx = {
    fillStyle: '',
    strokeStyle: '',
    lineWidth: 0,
    font: '',
    textAlign: 'left' as CanvasTextAlign,
    textBaseline: 'alphabetic' as CanvasTextBaseline,
    clearRect: (...args: unknown[]) => ops.push({ op: 'clearRect', args }),
    fillRect: (...args: unknown[]) => ops.push({ op: 'fillRect', args }),
    strokeRect: (...args: unknown[]) => ops.push({ op: 'strokeRect', args }),
    beginPath: () => ops.push({ op: 'beginPath', args: [] }),
    arc: (...args: unknown[]) => ops.push({ op: 'arc', args }),
    fill: function (this: FieldContext) {
      ops.push({ op: 'fill', args: [this.fillStyle] });
    },
    stroke: () => ops.push({ op: 'stroke', args: [] }),
    fillText: (...args: unknown[]) => ops.push({ op: 'fillText', args }),
  } as FieldContext;
  return { ctx, ops };
}

const RECT = { left: 0, top: 0, width: 480, height: 480 };

function playing(clicks: SessionView['clicks'], best: number | null) {
  return hydrate(initialState('U01', 10, 20), {
    session_id: 's1',
    user_id: 'U01',
    task_index: 1,
    shots_used: clicks.length,
    shots_max: 20,
    best_score: best,
    state: 'active',
    clicks,
  });
}

describe('render', () => {
  it('draws an empty field for a fresh session', () => {
    const { ctx, ops } = recordingContext();
    render(ctx, RECT, playing([], null));
    expect(ops.some((o) => o.op === 'fillRect')).toBe(true);
    expect(ops.filter((o) => o.op === 'arc')).toHaveLength(0);
  });

  it('draws one marker per acknowledged click with a 3-decimal label', () => {
    const { ctx, ops } = recordingContext();
    render(
      ctx,
      RECT,
      playing(
        [
          { x: [0.5, 0.5], score: 1.23456, t: 1 },
          { x: [0.25, 0.75], score: -2, t: 2 },
          { x: [0.1, 0.1], score: 0.5, t: 3 },
        ],
        1.23456,
      ),
    );
    expect(ops.filter((o) => o.op === 'arc')).toHaveLength(3);
    const labels = ops.filter((o) => o.op === 'fillText').map((o) => o.args[0]);
    expect(labels).toEqual(['1.235', '-2.000', '0.500']);
  });

  it('positions markers with the v axis pointing up', () => {
    const { ctx, ops } = recordingContext();
    render(ctx, RECT, playing([{ x: [0.25, 0.75], score: 1, t: 1 }], 1));
    const arc = ops.find((o) => o.op === 'arc');
    expect(arc?.args[0]).toBe(120); // u = 0.25 of 480
    expect(arc?.args[1]).toBe(120); // v = 0.75 -> 120px from the top
  });

  it('highlights the best marker', () => {
    const { ctx, ops } = recordingContext();
    render(
      ctx,
      RECT,
      playing(
        [
          { x: [0.2, 0.2], score: 1, t: 1 },
          { x: [0.8, 0.8], score: 5, t: 2 },
        ],
        5,
      ),
    );
    const fills = ops.filter((o) => o.op === 'fill').map((o) => o.args[0]);
    expect(fills).toEqual([MARKER_COLOR, BEST_COLOR]);
  });
});
