/**
 * Composer state: the scene draft, edit actions with grid validation,
 * an undo stack, service-fetched preview geometry, and evaluation
 * results with per-car deltas against the previous evaluation of the
 * same draft lineage.
 *
 * The store never computes geometry or scores itself; every displayed
 * number comes from the service through the injected client.
 */

import {
  BACKGROUNDS, CAR_TYPES, CENTER_RANGES, COLORS, HEIGHT_FACTORS,
  ROTATION_MAX, ROTATION_MIN, ROTATION_STEP, SCALES, snapHeading, wrapDegrees,
} from './grid.js';
import { CarDraft, SceneDraft, defaultCar, emptyDraft, exportScene } from './sceneFile.js';

export interface PreviewCar {
  index: number;
  car_type: string;
  color: string;
  depth: number;
  azimuth_deg: number;
  polar_deg: number;
  occlusion: number;
  footprint_px: [number, number][];
}

export interface PreviewGeometry {
  scene_id: string;
  base_size: number;
  cars: PreviewCar[];
}

export interface CarScore {
  index: number;
  confidence: number;
  display_box: { box: number[]; class: string; confidence: number } | null;
}

export interface EvaluationResult {
  revision: number;
  seed: number;
  perDetector: Record<string, { cars: CarScore[] } | { error: string }>;
}

export interface ScoreDelta {
  index: number;
  detector: string;
  confidence: number;
  delta: number | null;  // null on the first evaluation of a lineage
}

export interface ComposerClient {
  preview(doc: Record<string, unknown>): Promise<PreviewGeometry>;
  evaluate(doc: Record<string, unknown>, seed: number,
           detectors?: string[]): Promise<Record<string, any>>;
}

export type DraftEdit =
  | { kind: 'add-car' }
  | { kind: 'remove-car'; index: number }
  | { kind: 'move'; index: number; dx: number; dz: number }
  | { kind: 'place'; index: number; x: number; z: number }
  | { kind: 'rotate'; index: number; dHeading: number }
  | { kind: 'retype'; index: number; carType: string }
  | { kind: 'recolor'; index: number; color: string }
  | { kind: 'rescale'; index: number; heightFactor: number }
  | { kind: 'set-background'; background: string }
  | { kind: 'set-scale'; scale: number };

export type EditAction = DraftEdit | { kind: 'select-car'; index: number | null };

export class ValidationError extends Error {}

const UNDO_DEPTH = 50;

export class ComposerStore {
  draft: SceneDraft;
  selected: number | null = null;
  snapToGrid = true;
  preview: PreviewGeometry | null = null;
  lastEvaluation: EvaluationResult | null = null;
  previousEvaluation: EvaluationResult | null = null;
  revision = 0;
  private undoStack: string[] = [];
  private client: ComposerClient;

  constructor(client: ComposerClient, draft?: SceneDraft) {
    this.client = client;
    this.draft = draft ?? emptyDraft('draft-ui');
  }

  private snapshot() {
    this.undoStack.push(JSON.stringify(this.draft));
    if (this.undoStack.length > UNDO_DEPTH) this.undoStack.shift();
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  undo(): boolean {
    const prior = this.undoStack.pop();
    if (prior === undefined) return false;
    this.draft = JSON.parse(prior);
    this.revision += 1;
    if (this.selected !== null && this.selected >= this.draft.cars.length) {
      this.selected = null;
    }
    return true;
  }

  private car(index: number): CarDraft {
    const car = this.draft.cars[index];
    if (car === undefined) throw new ValidationError(`no car at index ${index}`);
    return car;
  }

  private clampCenter(car: CarDraft, x: number, z: number): [number, number] {
    if (this.snapToGrid) {
      x = Math.round(x);
      z = Math.round(z);
    }
    const [xLo, xHi, zLo, zHi] = CENTER_RANGES[car.placement];
    // the grid window plus the neighbor-offset margin used by samplers
    const margin = 45;
    x = Math.min(xHi + margin, Math.max(xLo - margin, x));
    z = Math.min(zHi + margin, Math.max(zLo - margin, z));
    return [x, z];
  }

  edit(action: EditAction): void {
    if (action.kind === 'select-car') {
      if (action.index !== null) this.car(action.index);
      this.selected = action.index;
      return;  // selection is not an undoable draft edit
    }
    this.snapshot();
    try {
      this.apply(action);
      this.revision += 1;
      this.preview = null;  // stale until re-fetched
    } catch (err) {
      this.undoStack.pop();  // rejected edits leave no history entry
      throw err;
    }
  }

  private apply(action: DraftEdit): void {
    switch (action.kind) {
      case 'add-car': {
        if (this.draft.cars.length >= 3) {
          throw new ValidationError('a scene holds at most 3 cars');
        }
        this.draft.cars.push(defaultCar());
        this.selected = this.draft.cars.length - 1;
        break;
      }
      case 'remove-car': {
        this.car(action.index);
        this.draft.cars.splice(action.index, 1);
        if (this.selected === action.index) this.selected = null;
        break;
      }
      case 'move': {
        const car = this.car(action.index);
        const [x, z] = this.clampCenter(car, car.center_x + action.dx,
                                        car.center_z + action.dz);
        car.center_x = x;
        car.center_z = z;
        break;
      }
      case 'place': {
        const car = this.car(action.index);
        const [x, z] = this.clampCenter(car, action.x, action.z);
        car.center_x = x;
        car.center_z = z;
        break;
      }
      case 'rotate': {
        const car = this.car(action.index);
        let heading = wrapDegrees(car.heading_deg + action.dHeading);
        if (this.snapToGrid) {
          heading = snapHeading(heading);
          if (heading < ROTATION_MIN || heading > ROTATION_MAX) {
            throw new ValidationError(
              `snapped heading must stay in [${ROTATION_MIN}, ${ROTATION_MAX}]`);
          }
          if (heading % ROTATION_STEP !== 0) {
            throw new ValidationError('heading must sit on the 10-degree grid');
          }
        }
        car.heading_deg = heading;
        break;
      }
      case 'retype': {
        if (!(CAR_TYPES as readonly string[]).includes(action.carType)) {
          throw new ValidationError(`unknown car type ${action.carType}`);
        }
        this.car(action.index).car_type = action.carType;
        break;
      }
      case 'recolor': {
        if (!(COLORS as readonly string[]).includes(action.color)) {
          throw new ValidationError(`unknown color ${action.color}`);
        }
        this.car(action.index).color = action.color;
        break;
      }
      case 'rescale': {
        if (!(HEIGHT_FACTORS as readonly number[]).includes(action.heightFactor)) {
          throw new ValidationError(
            `height factor ${action.heightFactor} not on the grid`);
        }
        this.car(action.index).height_factor = action.heightFactor;
        break;
      }
      case 'set-background': {
        if (!(BACKGROUNDS as readonly string[]).includes(action.background)) {
          throw new ValidationError(`unknown background ${action.background}`);
        }
        this.draft.background = action.background;
        break;
      }
      case 'set-scale': {
        if (!(SCALES as readonly number[]).includes(action.scale)) {
          throw new ValidationError(`scale ${action.scale} not on the grid`);
        }
        this.draft.scale = action.scale;
        break;
      }
      default: {
        const never: never = action;
        throw new ValidationError(`unknown action ${JSON.stringify(never)}`);
      }
    }
  }

  private document(): Record<string, unknown> {
    if (this.draft.cars.length === 0) {
      throw new ValidationError('draft has no cars; add one before this step');
    }
    return JSON.parse(exportScene(this.draft));
  }

  async refreshPreview(): Promise<PreviewGeometry> {
    this.preview = await this.client.preview(this.document());
    return this.preview;
  }

  async evaluateCurrent(seed = 0, detectors?: string[]): Promise<ScoreDelta[]> {
    const raw = await this.client.evaluate(this.document(), seed, detectors);
    const result: EvaluationResult = {
      revision: this.revision,
      seed,
      perDetector: raw['detectors'] ?? {},
    };
    this.previousEvaluation = this.lastEvaluation;
    this.lastEvaluation = result;
    return this.deltas();
  }

  /** Per-car confidence deltas vs the previous evaluation of this lineage. */
  deltas(): ScoreDelta[] {
    if (this.lastEvaluation === null) return [];
    const out: ScoreDelta[] = [];
    for (const [detector, payload] of Object.entries(this.lastEvaluation.perDetector)) {
      if ('error' in payload) continue;
      for (const car of payload.cars) {
        let delta: number | null = null;
        const prior = this.previousEvaluation?.perDetector[detector];
        if (prior && !('error' in prior)) {
          const before = prior.cars.find((c) => c.index === car.index);
          if (before) delta = car.confidence - before.confidence;
        }
        out.push({ index: car.index, detector,
                   confidence: car.confidence, delta });
      }
    }
    return out;
  }

  exportFile(): string {
    return exportScene(this.draft);
  }
}
