/**
 * Wires the store, service client, canvas, and panels together.
 * Geometric preview refreshes on every edit; realized images and
 * detector scores are fetched on demand so diffusion latency never
 * blocks composition.
 */

import { ServiceClient } from './api.js';
import { BevCanvas } from './canvas.js';
import {
  BACKGROUNDS, CAR_TYPES, COLORS, HEIGHT_FACTORS, SCALES,
} from './grid.js';
import { ComposerStore, ScoreDelta } from './state.js';

const SERVICE_URL = (window as any).BEV2EGO_SERVICE ?? 'http://127.0.0.1:8000';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fillSelect(select: HTMLSelectElement, options: readonly (string | number)[]) {
  select.innerHTML = '';
  for (const option of options) {
    const node = document.createElement('option');
    node.value = String(option);
    node.textContent = String(option);
    select.appendChild(node);
  }
}

function describeDelta(delta: ScoreDelta): string {
  const pct = (delta.confidence * 100).toFixed(0);
  if (delta.delta === null) return `${delta.detector} car ${delta.index}: ${pct}%`;
  const signed = (delta.delta * 100).toFixed(0);
  const badge = delta.delta < -0.005 ? ' [drop]' : delta.delta > 0.005 ? ' [gain]' : '';
  return `${delta.detector} car ${delta.index}: ${pct}% (Δ ${signed}%)${badge}`;
}

async function start() {
  const client = new ServiceClient(SERVICE_URL);
  const store = new ComposerStore(client);
  const canvas = new BevCanvas(el<HTMLCanvasElement>('bev'), store,
                               () => schedulePreview());

  fillSelect(el<HTMLSelectElement>('car-type'), CAR_TYPES);
  fillSelect(el<HTMLSelectElement>('car-color'), COLORS);
  fillSelect(el<HTMLSelectElement>('car-height'), HEIGHT_FACTORS);
  fillSelect(el<HTMLSelectElement>('background'), BACKGROUNDS);
  fillSelect(el<HTMLSelectElement>('scale'), SCALES);

  let previewTimer: ReturnType<typeof setTimeout> | null = null;
  function schedulePreview() {
    if (previewTimer) clearTimeout(previewTimer);
    previewTimer = setTimeout(async () => {
      if (store.draft.cars.length === 0) return;
      try {
        const preview = await store.refreshPreview();
        el('preview-json').textContent = JSON.stringify(preview.cars, null, 2);
      } catch (err) {
        el('status').textContent = `preview failed: ${err}`;
      }
    }, 120);
  }

  function selectedEdit(make: (index: number) => void) {
    if (store.selected === null) {
      el('status').textContent = 'select a car first';
      return;
    }
    try {
      make(store.selected);
      el('status').textContent = '';
    } catch (err) {
      el('status').textContent = String(err);
    }
    canvas.render();
    schedulePreview();
  }

  el('add-car').onclick = () => {
    try {
      store.edit({ kind: 'add-car' });
      el('status').textContent = '';
    } catch (err) {
      el('status').textContent = String(err);
    }
    canvas.render();
    schedulePreview();
  };
  el('remove-car').onclick = () =>
    selectedEdit((i) => store.edit({ kind: 'remove-car', index: i }));
  el('rotate-left').onclick = () =>
    selectedEdit((i) => store.edit({ kind: 'rotate', index: i, dHeading: -10 }));
  el('rotate-right').onclick = () =>
    selectedEdit((i) => store.edit({ kind: 'rotate', index: i, dHeading: 10 }));
  el<HTMLSelectElement>('car-type').onchange = (e) =>
    selectedEdit((i) => store.edit({
      kind: 'retype', index: i,
      carType: (e.target as HTMLSelectElement).value }));
  el<HTMLSelectElement>('car-color').onchange = (e) =>
    selectedEdit((i) => store.edit({
      kind: 'recolor', index: i,
      color: (e.target as HTMLSelectElement).value }));
  el<HTMLSelectElement>('car-height').onchange = (e) =>
    selectedEdit((i) => store.edit({
      kind: 'rescale', index: i,
      heightFactor: Number((e.target as HTMLSelectElement).value) }));
  el<HTMLSelectElement>('background').onchange = (e) => {
    store.edit({ kind: 'set-background',
                 background: (e.target as HTMLSelectElement).value });
    schedulePreview();
  };
  el<HTMLSelectElement>('scale').onchange = (e) => {
    store.edit({ kind: 'set-scale',
                 scale: Number((e.target as HTMLSelectElement).value) });
  };
  el<HTMLInputElement>('snap').onchange = (e) => {
    store.snapToGrid = (e.target as HTMLInputElement).checked;
  };
  el('undo').onclick = () => {
    store.undo();
    canvas.render();
    schedulePreview();
  };

  el('evaluate').onclick = async () => {
    el('status').textContent = 'scoring…';
    try {
      const deltas = await store.evaluateCurrent(0);
      el('scores').textContent = deltas.map(describeDelta).join('\n');
      el('status').textContent = '';
    } catch (err) {
      el('status').textContent = `evaluate failed: ${err}`;
    }
  };

  el('export').onclick = () => {
    const blob = new Blob([store.exportFile()], { type: 'application/json' });
    const url = URL.createObjectURL(blob);
    const link = document.createElement('a');
    link.href = url;
    link.download = `${store.draft.scene_id || 'scene'}.json`;
    link.click();
    URL.revokeObjectURL(url);
  };

  store.edit({ kind: 'add-car' });
  canvas.render();
  schedulePreview();
}

start().catch((err) => {
  document.body.textContent = `composer failed to start: ${err}`;
});
