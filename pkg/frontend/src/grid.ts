/**
 * The attribute grid every scene draft is validated against.
 * Mirrors the scene/v1 producer's domains; edits outside these values
 * are rejected at input time.
 */

export const CAR_TYPES = [
  'sedan', 'sports car', 'smart car', 'coupe car', 'SUV',
] as const;

export const COLORS = [
  'white', 'black', 'grey', 'yellow', 'red', 'blue',
  'green', 'brown', 'pink', 'orange', 'purple',
] as const;

export const BACKGROUNDS = [
  'in forest', 'on beach', 'in city', 'on snowy street', 'on highway', 'near lake',
] as const;

export const PLACEMENTS = ['vertical', 'horizontal'] as const;

export const SCALES = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] as const;

export const HEIGHT_FACTORS = [0.8, 0.9, 1.0, 1.1, 1.2] as const;

export const ROTATION_STEP = 10;
export const ROTATION_MIN = -90;
export const ROTATION_MAX = 90;

/** Integer center ranges per placement: [xLo, xHi, zLo, zHi]. */
export const CENTER_RANGES: Record<string, [number, number, number, number]> = {
  horizontal: [-100, 100, -30, 0],
  vertical: [-30, 30, -100, 0],
};

export const ROAD_ARM_LENGTH = 400;
export const ROAD_ARM_WIDTH = 100;

export const DEFAULT_ORIGINAL_HEIGHT = 10.0;
export const DEFAULT_SEEDS = [0, 1, 2, 3, 4, 5, 6, 7, 8];

export const PROMPT_TEMPLATE =
  'cars are driving {background}, high resolution, high definition, high quality';

export type CarType = (typeof CAR_TYPES)[number];
export type Color = (typeof COLORS)[number];
export type Background = (typeof BACKGROUNDS)[number];
export type Placement = (typeof PLACEMENTS)[number];

export function onRoad(x: number, z: number): boolean {
  const hl = ROAD_ARM_LENGTH / 2;
  const hw = ROAD_ARM_WIDTH / 2;
  const onVertical = Math.abs(x) <= hw && Math.abs(z) <= hl;
  const onHorizontal = Math.abs(x) <= hl && Math.abs(z) <= hw;
  return onVertical || onHorizontal;
}

/** Wrap an angle into (-180, 180]. */
export function wrapDegrees(angle: number): number {
  if (angle > -180 && angle <= 180) return angle;
  return 180 - (((180 - angle) % 360) + 360) % 360;
}

export function snapHeading(heading: number): number {
  const snapped = Math.round(heading / ROTATION_STEP) * ROTATION_STEP;
  return Math.min(ROTATION_MAX, Math.max(ROTATION_MIN, snapped));
}
