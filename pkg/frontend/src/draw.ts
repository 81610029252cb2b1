/** Replays a display list onto a canvas with a fit-to-bounds transform.
 * Y is flipped so world +y is up. */
import type { Scene, Shape } from "./scene.js";

interface View {
  scale: number;
  ox: number;
  oy: number;
}

function fit(scene: Scene, w: number, h: number): View {
  const [minx, miny, maxx, maxy] = scene.bounds;
  const sx = w / (maxx - minx);
  const sy = h / (maxy - miny);
  const scale = Math.min(sx, sy);
  const ox = (w - (maxx - minx) * scale) / 2 - minx * scale;
  const oy = (h - (maxy - miny) * scale) / 2 + maxy * scale;
  return { scale, ox, oy };
}

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene, w: number, h: number): void {
  const v = fit(scene, w, h);
  const X = (x: number) => v.ox + x * v.scale;
  const Y = (y: number) => v.oy - y * v.scale;

  ctx.clearRect(0, 0, w, h);
  for (const s of scene.shapes) drawShape(ctx, s, X, Y, v.scale);
}

function drawShape(
  ctx: CanvasRenderingContext2D,
  s: Shape,
  X: (x: number) => number,
  Y: (y: number) => number,
  scale: number,
): void {
  ctx.strokeStyle = s.color;
  ctx.fillStyle = s.color;
  switch (s.kind) {
    case "segment": {
      ctx.lineWidth = s.width;
      ctx.beginPath();
      ctx.moveTo(X(s.a[0]), Y(s.a[1]));
      ctx.lineTo(X(s.b[0]), Y(s.b[1]));
      ctx.stroke();
      break;
    }
    case "circle": {
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(X(s.c[0]), Y(s.c[1]), s.r * scale, 0, Math.PI * 2);
      if (s.fill) ctx.fill();
      else ctx.stroke();
      break;
    }
    case "arrow": {
      ctx.lineWidth = 2;
      const x1 = X(s.from[0]), y1 = Y(s.from[1]);
      const x2 = X(s.to[0]), y2 = Y(s.to[1]);
      ctx.beginPath();
      ctx.moveTo(x1, y1);
      ctx.lineTo(x2, y2);
      ctx.stroke();
      const ang = Math.atan2(y2 - y1, x2 - x1);
      const head = 6;
      ctx.beginPath();
      ctx.moveTo(x2, y2);
      ctx.lineTo(x2 - head * Math.cos(ang - 0.45), y2 - head * Math.sin(ang - 0.45));
      ctx.lineTo(x2 - head * Math.cos(ang + 0.45), y2 - head * Math.sin(ang + 0.45));
      ctx.closePath();
      ctx.fill();
      break;
    }
    case "cross": {
      ctx.lineWidth = 2;
      const r = s.r * scale;
      const cx = X(s.c[0]), cy = Y(s.c[1]);
      ctx.beginPath();
      ctx.moveTo(cx - r, cy - r);
      ctx.lineTo(cx + r, cy + r);
      ctx.moveTo(cx - r, cy + r);
      ctx.lineTo(cx + r, cy - r);
      ctx.stroke();
      break;
    }
  }
}
