/** Bounded FIFO that drops the oldest entry on overflow. Sits between the
 * websocket and the render loop so a slow tab sheds stale frames instead of
 * rendering further and further behind the server. */
export class BoundedQueue<T> {
  private items: T[] = [];
  dropped = 0;

  constructor(readonly capacity: number) {
    if (!Number.isInteger(capacity) || capacity < 1) {
      throw new Error(`queue capacity must be a positive integer, got ${capacity}`);
    }
  }

  push(item: T): void {
    if (this.items.length === this.capacity) {
      this.items.shift();
      this.dropped++;
    }
    this.items.push(item);
  }

  /** Oldest entry, or undefined when empty. */
  shift(): T | undefined {
    return this.items.shift();
  }

  /** Newest entry, discarding everything older. */
  drainLatest(): T | undefined {
    const last = this.items[this.items.length - 1];
    if (this.items.length > 1) this.dropped += this.items.length - 1;
    this.items = [];
    return last;
  }

  get size(): number {
    return this.items.length;
  }
}
