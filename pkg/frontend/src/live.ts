// Newline-delimited JSON reader for the live session channel.
//
// Chunks arrive with arbitrary boundaries; lines are reassembled and parsed
// one JSON document at a time. The decoder is pull-free: feed() returns the
// documents completed by that chunk, so callers control pacing and tests
// can drive it synchronously.

export class NdjsonDecoder<T> {
  private buffer = "";

  feed(chunk: string): T[] {
    this.buffer += chunk;
    const docs: T[] = [];
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) {
        break;
      }
      const line = this.buffer.slice(0, nl).trim();
      this.buffer = this.buffer.slice(nl + 1);
      if (line.length > 0) {
        docs.push(JSON.parse(line) as T);
      }
    }
    return docs;
  }

  get pending(): number {
    return this.buffer.length;
  }
}

/**
 * Consume an NDJSON byte stream, invoking onDocument for each line.
 * Resolves when the stream ends; rejects on malformed JSON.
 */
export async function consumeNdjson<T>(
  body: ReadableStream<Uint8Array>,
  onDocument: (doc: T) => void
): Promise<number> {
  const decoder = new NdjsonDecoder<T>();
  const text = new TextDecoder();
  const reader = body.getReader();
  let count = 0;
  for (;;) {
    const { done, value } = await reader.read();
    if (done) {
      break;
    }
    for (const doc of decoder.feed(text.decode(value, { stream: true }))) {
      onDocument(doc);
      count += 1;
    }
  }
  return count;
}

/** Arrival-rate meter for the live view (updates per second). */
export class RateMeter {
  private timestamps: number[] = [];

  tick(nowMs: number): void {
    this.timestamps.push(nowMs);
  }

  get count(): number {
    return this.timestamps.length;
  }

  /** Mean rate over the whole observation, Hz. */
  rateHz(): number {
    if (this.timestamps.length < 2) {
      return 0;
    }
    const first = this.timestamps[0]!;
    const last = this.timestamps[this.timestamps.length - 1]!;
    if (last <= first) {
      return 0;
    }
    return ((this.timestamps.length - 1) * 1000) / (last - first);
  }
}
