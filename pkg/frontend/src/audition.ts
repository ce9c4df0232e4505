/**
 * A/B audition: gapless switching between the original upload and the last
 * processed render. Both slots share one playback clock, so toggling keeps
 * the position instead of restarting.
 *
 * Audio output goes through an injected Player so the model is testable
 * outside a browser; the default browser player lives in main.ts.
 */

export type Slot = "original" | "processed";

export interface Player {
  /** Begin playing a buffer from a position in seconds. */
  play(bytes: Uint8Array, offsetSeconds: number): void;
  stop(): void;
  /** Monotonic clock in seconds; advances while playing. */
  now(): number;
}

export class AbAudition {
  private buffers: Record<Slot, Uint8Array | null> = { original: null, processed: null };
  private active: Slot = "original";
  private playing = false;
  private startedAt = 0; // player clock when playback started
  private startOffset = 0; // seconds into the material at start

  constructor(private readonly player: Player) {}

  setBuffer(slot: Slot, bytes: Uint8Array | null): void {
    this.buffers[slot] = bytes;
  }

  /** A slot's control is disabled until its audio exists. */
  enabled(slot: Slot): boolean {
    return this.buffers[slot] !== null;
  }

  get activeSlot(): Slot {
    return this.active;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  /** Current position in seconds within the material. */
  position(): number {
    if (!this.playing) return this.startOffset;
    return this.startOffset + (this.player.now() - this.startedAt);
  }

  play(slot: Slot = this.active): void {
    const bytes = this.buffers[slot];
    if (!bytes) throw new Error(`${slot} slot is empty`);
    this.active = slot;
    this.startOffset = this.position();
    this.startedAt = this.player.now();
    this.playing = true;
    this.player.play(bytes, this.startOffset);
  }

  /** Switch slots; when playing, restart the other slot at the same clock position. */
  toggle(): Slot {
    const next: Slot = this.active === "original" ? "processed" : "original";
    if (!this.enabled(next)) throw new Error(`${next} slot is empty`);
    if (this.playing) {
      const pos = this.position();
      this.active = next;
      this.startOffset = pos;
      this.startedAt = this.player.now();
      this.player.play(this.buffers[next]!, pos);
    } else {
      this.active = next;
    }
    return next;
  }

  stop(): void {
    if (!this.playing) return;
    this.startOffset = this.position();
    this.playing = false;
    this.player.stop();
  }
}
