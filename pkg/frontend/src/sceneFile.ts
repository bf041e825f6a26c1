/**
 * scene/v1 document import/export with the canonical field order the
 * CLI and service expect.  Exports are plain JSON; any file written
 * here loads unchanged on the Python side.
 */

import {
  BACKGROUNDS, CAR_TYPES, COLORS, DEFAULT_ORIGINAL_HEIGHT, DEFAULT_SEEDS,
  PLACEMENTS, PROMPT_TEMPLATE, SCALES,
} from './grid.js';

export interface CarDraft {
  car_type: string;
  color: string;
  center_x: number;
  center_z: number;
  heading_deg: number;
  height_factor: number;
  placement: string;
  original_height: number;
}

export interface SceneDraft {
  scene_id: string;
  background: string;
  scale: number;
  seeds: number[];
  prompt_template: string;
  cars: CarDraft[];
}

export function emptyDraft(sceneId = ''): SceneDraft {
  return {
    scene_id: sceneId,
    background: BACKGROUNDS[0],
    scale: 1.0,
    seeds: [...DEFAULT_SEEDS],
    prompt_template: PROMPT_TEMPLATE,
    cars: [],
  };
}

export function defaultCar(): CarDraft {
  return {
    car_type: CAR_TYPES[0],
    color: COLORS[4],
    center_x: 0,
    center_z: -50,
    heading_deg: 0,
    height_factor: 1.0,
    placement: PLACEMENTS[0],
    original_height: DEFAULT_ORIGINAL_HEIGHT,
  };
}

const CAR_FIELDS: (keyof CarDraft)[] = [
  'car_type', 'color', 'center_x', 'center_z', 'heading_deg',
  'height_factor', 'placement', 'original_height',
];

/** Canonical scene/v1 document with stable key order. */
export function toDocument(draft: SceneDraft): Record<string, unknown> {
  return {
    schema: 'scene/v1',
    scene_id: draft.scene_id,
    background: draft.background,
    scale: draft.scale,
    seeds: [...draft.seeds],
    prompt_template: draft.prompt_template,
    cars: draft.cars.map((car) => {
      const out: Record<string, unknown> = {};
      for (const field of CAR_FIELDS) out[field] = car[field];
      return out;
    }),
  };
}

export function exportScene(draft: SceneDraft): string {
  return JSON.stringify(toDocument(draft), null, 2) + '\n';
}

export class SceneFileError extends Error {}

export function importScene(text: string): SceneDraft {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new SceneFileError(`not valid JSON: ${err}`);
  }
  if (doc?.schema !== 'scene/v1') {
    throw new SceneFileError(`expected schema scene/v1, got ${doc?.schema}`);
  }
  if (!Array.isArray(doc.cars)) {
    throw new SceneFileError('cars must be a list');
  }
  const cars: CarDraft[] = doc.cars.map((car: any) => {
    for (const field of CAR_FIELDS) {
      if (car[field] === undefined) {
        throw new SceneFileError(`car misses field ${field}`);
      }
    }
    return {
      car_type: String(car.car_type),
      color: String(car.color),
      center_x: Number(car.center_x),
      center_z: Number(car.center_z),
      heading_deg: Number(car.heading_deg),
      height_factor: Number(car.height_factor),
      placement: String(car.placement),
      original_height: Number(car.original_height),
    };
  });
  if (!SCALES.includes(doc.scale)) {
    throw new SceneFileError(`scale ${doc.scale} not on the grid`);
  }
  return {
    scene_id: String(doc.scene_id ?? ''),
    background: String(doc.background),
    scale: Number(doc.scale),
    seeds: (doc.seeds as number[]).map(Number),
    prompt_template: String(doc.prompt_template),
    cars,
  };
}
