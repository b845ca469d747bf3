/** Trailing-edge debounce: a burst of calls collapses to one, with the
 * last arguments winning. Slider drags emit one request, not one per
 * pixel. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, waitMs);
  };
}

/**
 * Request versioning for overlapping fetches: each dispatch takes a
 * ticket, and only the holder of the newest ticket may mutate the view.
 */
export class LatestGate {
  private version = 0;

  take(): number {
    this.version += 1;
    return this.version;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.version;
  }
}
