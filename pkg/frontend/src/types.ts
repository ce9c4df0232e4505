/** Wire types mirroring the service's /process and /presets schemas. */

export const DITHER_KINDS = ["npdf", "rpdf", "tpdf", "tpdf_iid", "mtpdf"] as const;
export type DitherKind = (typeof DITHER_KINDS)[number];

export type ContourPoint = [freqHz: number, gainDb: number];

export interface ShapingParams {
  contour?: ContourPoint[]; // omitted -> service default contour
  order: number;
  iterations: number;
  relax: number;
  select: "best" | "last";
  redraw_dither: boolean;
}

export interface ParamDoc {
  dither: DitherKind;
  alpha: number;
  seed: number;
  bits: number;
  full_scale: number;
  subtractive: boolean;
  normalize: boolean;
  shaping: ShapingParams | null;
  fundamental_hz: number | null;
}

export interface MetricRow {
  alpha: number;
  entropy_bits: number;
  cond_entropy_bits: number;
  mse: number;
  coded_bits_per_symbol: number;
  pwsnr_db: number;
  spur_db: number | null;
}

export interface SpectrumTrace {
  freq_hz: number[];
  mag_db: number[];
}

export interface ProcessResponse {
  metrics: MetricRow;
  audio_wav_base64: string;
  sample_rate: number;
  spectrum: { original: SpectrumTrace; processed: SpectrumTrace };
}

export interface ServiceError {
  error: string;
  message?: string;
}

export interface PresetDoc extends Partial<ParamDoc> {
  name?: string;
}

export function defaultParams(): ParamDoc {
  return {
    dither: "tpdf",
    alpha: 1.0,
    seed: 0,
    bits: 3,
    full_scale: 1.0,
    subtractive: false,
    normalize: true,
    shaping: null,
    fundamental_hz: null,
  };
}

/**
 * Validate a parameter document against the service schema. The session
 * refuses to send anything that fails here, so a bad control state surfaces
 * locally instead of as a 400 round trip.
 */
export function validateParams(doc: ParamDoc): string[] {
  const errors: string[] = [];
  if (!DITHER_KINDS.includes(doc.dither)) errors.push(`unknown dither ${doc.dither}`);
  if (!(doc.alpha >= 0 && doc.alpha <= 1)) errors.push("alpha must be in [0, 1]");
  if (!Number.isInteger(doc.seed) || doc.seed < 0) errors.push("seed must be a non-negative integer");
  if (!Number.isInteger(doc.bits) || doc.bits < 1 || doc.bits > 16) errors.push("bits must be 1..16");
  if (!(doc.full_scale > 0)) errors.push("full_scale must be positive");
  if (doc.shaping) {
    const s = doc.shaping;
    if (!Number.isInteger(s.order) || s.order < 4 || s.order % 2 !== 0)
      errors.push("shaping.order must be an even integer >= 4");
    if (!Number.isInteger(s.iterations) || s.iterations < 1)
      errors.push("shaping.iterations must be >= 1");
    if (!(s.relax > 0 && s.relax <= 1)) errors.push("shaping.relax must be in (0, 1]");
    if (s.contour) {
      for (let i = 1; i < s.contour.length; i++) {
        if (s.contour[i]![0] <= s.contour[i - 1]![0]) {
          errors.push("shaping.contour frequencies must be strictly increasing");
          break;
        }
      }
    }
  }
  if (doc.fundamental_hz !== null && !(doc.fundamental_hz > 0))
    errors.push("fundamental_hz must be positive when set");
  return errors;
}
