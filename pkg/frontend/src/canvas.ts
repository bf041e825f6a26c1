/**
 * BEV canvas: draws the crossroad and car rectangles in scene units
 * with a zoomable units-to-pixels mapping, and turns pointer drags into
 * store edits.  Rendering only; all geometry numbers displayed in the
 * side panels come from the service preview.
 */

import { ROAD_ARM_LENGTH, ROAD_ARM_WIDTH } from './grid.js';
import type { ComposerStore } from './state.js';

const CAR_RGB: Record<string, string> = {
  white: '#f5f5f5', black: '#1c1c1c', grey: '#808080', yellow: '#e6d228',
  red: '#c81e1e', blue: '#1e3cc8', green: '#1ea03c', brown: '#785028',
  pink: '#f082b4', orange: '#eb8c1e', purple: '#8c28b4',
};

// visual footprint proportions per type (length/height ratio over width)
const CAR_LENGTH: Record<string, number> = {
  'sedan': 2.4, 'SUV': 2.2, 'coupe car': 2.3, 'sports car': 2.5,
  'smart car': 1.6,
};

export class BevCanvas {
  private zoom = 1.6;  // pixels per scene unit
  private dragging: number | null = null;

  constructor(private canvas: HTMLCanvasElement,
              private store: ComposerStore,
              private onEdit: () => void) {
    canvas.addEventListener('pointerdown', (e) => this.pointerDown(e));
    canvas.addEventListener('pointermove', (e) => this.pointerMove(e));
    canvas.addEventListener('pointerup', () => { this.dragging = null; });
    canvas.addEventListener('wheel', (e) => {
      e.preventDefault();
      this.zoom = Math.min(6, Math.max(0.5, this.zoom * (e.deltaY < 0 ? 1.1 : 0.9)));
      this.render();
    });
  }

  private toPixel(x: number, z: number): [number, number] {
    // +z points up on the canvas so "ahead of the camera" reads upward
    return [this.canvas.width / 2 + x * this.zoom,
            this.canvas.height / 2 - z * this.zoom];
  }

  private toScene(px: number, py: number): [number, number] {
    return [(px - this.canvas.width / 2) / this.zoom,
            (this.canvas.height / 2 - py) / this.zoom];
  }

  private carAt(px: number, py: number): number | null {
    const [x, z] = this.toScene(px, py);
    const cars = this.store.draft.cars;
    for (let i = cars.length - 1; i >= 0; i--) {
      const car = cars[i];
      const half = (CAR_LENGTH[car.car_type] ?? 2.2)
        * car.original_height * car.height_factor / 2;
      if (Math.abs(x - car.center_x) <= half
          && Math.abs(z - car.center_z) <= half) {
        return i;
      }
    }
    return null;
  }

  private pointerDown(e: PointerEvent) {
    const rect = this.canvas.getBoundingClientRect();
    const hit = this.carAt(e.clientX - rect.left, e.clientY - rect.top);
    this.store.edit({ kind: 'select-car', index: hit });
    this.dragging = hit;
    this.render();
  }

  private pointerMove(e: PointerEvent) {
    if (this.dragging === null) return;
    const rect = this.canvas.getBoundingClientRect();
    const [x, z] = this.toScene(e.clientX - rect.left, e.clientY - rect.top);
    this.store.edit({ kind: 'place', index: this.dragging, x, z });
    this.onEdit();
    this.render();
  }

  render() {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = '#23301f';
    ctx.fillRect(0, 0, width, height);

    // crossroad arms
    ctx.fillStyle = '#47474f';
    const hl = (ROAD_ARM_LENGTH / 2) * this.zoom;
    const hw = (ROAD_ARM_WIDTH / 2) * this.zoom;
    ctx.fillRect(width / 2 - hw, height / 2 - hl, 2 * hw, 2 * hl);
    ctx.fillRect(width / 2 - hl, height / 2 - hw, 2 * hl, 2 * hw);
    ctx.strokeStyle = '#d8d8a0';
    ctx.setLineDash([12, 10]);
    ctx.beginPath();
    ctx.moveTo(width / 2, height / 2 - hl);
    ctx.lineTo(width / 2, height / 2 + hl);
    ctx.moveTo(width / 2 - hl, height / 2);
    ctx.lineTo(width / 2 + hl, height / 2);
    ctx.stroke();
    ctx.setLineDash([]);

    // camera marker below the grid window
    const [cx, cy] = this.toPixel(0, -260);
    ctx.fillStyle = '#ffffff';
    ctx.beginPath();
    ctx.arc(cx, cy, 5, 0, 2 * Math.PI);
    ctx.fill();

    this.store.draft.cars.forEach((car, i) => {
      const [px, py] = this.toPixel(car.center_x, car.center_z);
      const length = (CAR_LENGTH[car.car_type] ?? 2.2)
        * car.original_height * car.height_factor * this.zoom;
      const carWidth = length * 0.45;
      ctx.save();
      ctx.translate(px, py);
      // heading 0 points along +z (up on the canvas)
      ctx.rotate((-car.heading_deg * Math.PI) / 180);
      ctx.fillStyle = CAR_RGB[car.color] ?? '#888888';
      ctx.fillRect(-carWidth / 2, -length / 2, carWidth, length);
      ctx.fillStyle = 'rgba(255,255,255,0.35)';
      ctx.fillRect(-carWidth / 2, -length / 2, carWidth, length * 0.22);
      if (i === this.store.selected) {
        ctx.strokeStyle = '#ffd400';
        ctx.lineWidth = 2;
        ctx.strokeRect(-carWidth / 2 - 3, -length / 2 - 3,
                       carWidth + 6, length + 6);
      }
      ctx.restore();
    });
  }
}
