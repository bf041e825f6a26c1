import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

const HERE = dirname(fileURLToPath(import.meta.url));

import { ComposerStore } from '../src/state.js';
import type { ComposerClient, PreviewGeometry } from '../src/state.js';
import {
  SceneFileError, emptyDraft, exportScene, importScene, toDocument,
} from '../src/sceneFile.js';

const nullClient: ComposerClient = {
  async preview(): Promise<PreviewGeometry> {
    throw new Error('unused');
  },
  async evaluate(): Promise<Record<string, never>> {
    throw new Error('unused');
  },
};

/** The scripted composition behind the committed golden fixture. */
function composeFixtureScene(): ComposerStore {
  const store = new ComposerStore(nullClient, emptyDraft('ui-fixture'));
  store.edit({ kind: 'add-car' });
  store.edit({ kind: 'retype', index: 0, carType: 'sports car' });
  store.edit({ kind: 'recolor', index: 0, color: 'black' });
  store.edit({ kind: 'place', index: 0, x: -6, z: -55 });
  store.edit({ kind: 'rotate', index: 0, dHeading: 30 });
  store.edit({ kind: 'add-car' });
  store.edit({ kind: 'retype', index: 1, carType: 'SUV' });
  store.edit({ kind: 'recolor', index: 1, color: 'green' });
  store.edit({ kind: 'place', index: 1, x: 14, z: -80 });
  store.edit({ kind: 'rotate', index: 1, dHeading: -20 });
  store.edit({ kind: 'rescale', index: 1, heightFactor: 1.1 });
  store.edit({ kind: 'set-background', background: 'near lake' });
  store.edit({ kind: 'set-scale', scale: 2.0 });
  return store;
}

describe('scene/v1 export', () => {
  it('has the canonical field order', () => {
    const doc = toDocument(composeFixtureScene().draft);
    expect(Object.keys(doc)).toEqual([
      'schema', 'scene_id', 'background', 'scale', 'seeds',
      'prompt_template', 'cars',
    ]);
    const car = (doc['cars'] as Record<string, unknown>[])[0];
    expect(Object.keys(car)).toEqual([
      'car_type', 'color', 'center_x', 'center_z', 'heading_deg',
      'height_factor', 'placement', 'original_height',
    ]);
  });

  it('round-trips losslessly', () => {
    const draft = composeFixtureScene().draft;
    const back = importScene(exportScene(draft));
    expect(back).toEqual(draft);
  });

  it('matches the committed golden fixture byte for byte', () => {
    const exported = composeFixtureScene().exportFile();
    const golden = readFileSync(
      join(HERE, '..', 'fixtures', 'ui_exported_scene.json'), 'utf-8');
    expect(exported).toBe(golden);
  });

  it('rejects foreign schemas and malformed documents', () => {
    expect(() => importScene('{')).toThrow(SceneFileError);
    expect(() => importScene('{"schema": "scene/v2", "cars": []}'))
      .toThrow(SceneFileError);
    expect(() => importScene(JSON.stringify({
      schema: 'scene/v1', scene_id: '', background: 'in city', scale: 1.7,
      seeds: [0], prompt_template: 'p', cars: [],
    }))).toThrow(SceneFileError);
  });
});
