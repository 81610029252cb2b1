/** Client-side session history: the buffered snapshot window, the scrub
 * cursor, and the labels placed so far. Pure model, no DOM. Every frame in
 * here arrived from the server; nothing is simulated locally. */
import type { Snapshot } from "./protocol.js";

export interface Label {
  tick: number;
  action: string;
}

export interface Segment {
  from: number;
  to: number;
  action: string;
}

export type ConnState = "connecting" | "open" | "closed";

export class Timeline {
  private frames: Snapshot[] = [];
  private cursorTick = 0;
  /** True while the user is scrubbing; push() stops yanking the cursor along. */
  following = true;
  labels: Label[] = [];
  conn: ConnState = "connecting";

  constructor(readonly capacity = 2000) {}

  /** Ingest one server frame. A tick at or before the buffered newest means
   * the server rewound; the stale future is discarded so the buffer always
   * describes the single history the server is on. */
  push(s: Snapshot): void {
    while (this.frames.length > 0) {
      const last = this.frames[this.frames.length - 1]!;
      if (last.tick < s.tick) break;
      this.frames.pop();
    }
    this.frames.push(s);
    if (this.frames.length > this.capacity) {
      this.frames.splice(0, this.frames.length - this.capacity);
    }
    if (this.following) this.cursorTick = s.tick;
    this.clampCursor();
  }

  get oldestTick(): number {
    return this.frames[0]?.tick ?? 0;
  }

  get newestTick(): number {
    return this.frames[this.frames.length - 1]?.tick ?? 0;
  }

  get size(): number {
    return this.frames.length;
  }

  get cursor(): number {
    return this.cursorTick;
  }

  /** Frame under the cursor: the latest buffered frame with tick <= cursor. */
  frameAtCursor(): Snapshot | undefined {
    let best: Snapshot | undefined;
    for (const f of this.frames) {
      if (f.tick > this.cursorTick) break;
      best = f;
    }
    return best ?? this.frames[0];
  }

  newest(): Snapshot | undefined {
    return this.frames[this.frames.length - 1];
  }

  seek(tick: number): void {
    this.following = false;
    this.cursorTick = tick;
    this.clampCursor();
  }

  follow(): void {
    this.following = true;
    this.cursorTick = this.newestTick;
  }

  /** How many ticks back the cursor sits, i.e. the n for a rewind request. */
  rewindSteps(): number {
    return this.newestTick - this.cursorTick;
  }

  /** Whether the cursor position is still inside the buffered window. A
   * cursor that fell off the left edge cannot be rewound to. */
  cursorBuffered(): boolean {
    return this.cursorTick >= this.oldestTick && this.cursorTick <= this.newestTick;
  }

  addLabel(tick: number, action: string): void {
    this.labels.push({ tick, action });
    this.labels.sort((a, b) => a.tick - b.tick);
  }

  /** Run-length encoding of the robot action over the buffered window, for
   * the color-coded timeline bar. */
  segments(): Segment[] {
    const out: Segment[] = [];
    for (const f of this.frames) {
      const last = out[out.length - 1];
      if (last && last.action === f.action) {
        last.to = f.tick;
      } else {
        out.push({ from: f.tick, to: f.tick, action: f.action });
      }
    }
    return out;
  }

  private clampCursor(): void {
    if (this.frames.length === 0) {
      this.cursorTick = 0;
      return;
    }
    if (this.cursorTick < this.oldestTick) this.cursorTick = this.oldestTick;
    if (this.cursorTick > this.newestTick) this.cursorTick = this.newestTick;
  }
}
