/** Per-panel request state with latest-wins semantics.
 *
 * Every issued request gets a monotonically increasing ticket; a response is
 * applied only if its ticket is still the newest, so an out-of-order (stale)
 * response can never overwrite the result of a newer request. On failure the
 * last good response is retained and the error is surfaced separately.
 */

export class PanelState<R> {
  private latestTicket = 0;
  response: R | null = null;
  error: string | null = null;
  inFlight = false;

  /** Run a request; resolves to true when its result was applied. */
  async run(task: () => Promise<R>): Promise<boolean> {
    const ticket = ++this.latestTicket;
    this.inFlight = true;
    try {
      const result = await task();
      if (ticket !== this.latestTicket) {
        return false; // a newer request superseded this one
      }
      this.response = result;
      this.error = null;
      return true;
    } catch (err) {
      if (ticket === this.latestTicket) {
        this.error = err instanceof Error ? err.message : String(err);
      }
      return false;
    } finally {
      if (ticket === this.latestTicket) {
        this.inFlight = false;
      }
    }
  }
}

/** Trailing-edge debounce; calling again within `ms` restarts the timer. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms = 250,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => fn(...args), ms);
  };
}
