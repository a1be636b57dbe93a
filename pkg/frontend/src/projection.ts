// Orthographic projection of the streamed arm pose onto a 2D viewport.
//
// The world frame has the shoulder at the origin and the relaxed arm
// hanging along -z; the screen anchors the shoulder at a fixed point and
// draws the shoulder-elbow-wrist-hand polyline with segment lengths
// proportional to the real limb lengths (one scale for the whole figure,
// so angles survive the projection within the chosen plane).

import type { JointPose } from "./model.js";

export type ViewPlane = "front" | "side" | "top";

export interface Viewport {
  width: number;
  height: number;
  /** pixels per meter */
  scale: number;
  plane: ViewPlane;
}

export interface ScreenPoint {
  x: number;
  y: number;
}

export interface SkeletonDrawing {
  /** shoulder, elbow, wrist, hand tip in screen pixels */
  polyline: [ScreenPoint, ScreenPoint, ScreenPoint, ScreenPoint];
  /** where the shoulder is pinned, independent of the pose */
  anchor: ScreenPoint;
  plane: ViewPlane;
}

export class RenderError extends Error {}

export function project(p: readonly number[], plane: ViewPlane): ScreenPoint {
  const [x = 0, y = 0, z = 0] = p;
  switch (plane) {
    case "front": // viewer faces the patient: x right, z up
      return { x, y: -z };
    case "side": // viewer at the patient's side: y right, z up
      return { x: y, y: -z };
    case "top": // viewer above: x right, y toward the viewer's feet
      return { x, y };
  }
}

export function projectPose(pose: JointPose, viewport: Viewport): SkeletonDrawing {
  const { width, height, scale, plane } = viewport;
  if (
    !Number.isFinite(width) ||
    !Number.isFinite(height) ||
    !Number.isFinite(scale) ||
    width <= 0 ||
    height <= 0 ||
    scale <= 0
  ) {
    throw new RenderError(
      `degenerate viewport: ${width}x${height} at scale ${scale}`
    );
  }
  // The shoulder stays pinned: centered, in the upper quarter, so a full
  // reach down fits below it.
  const anchor: ScreenPoint = { x: width / 2, y: height / 4 };
  const joints = [pose.shoulder, pose.elbow, pose.wrist, pose.hand_tip];
  const polyline = joints.map((j) => {
    const p = project(j, plane);
    return { x: anchor.x + p.x * scale, y: anchor.y + p.y * scale };
  }) as SkeletonDrawing["polyline"];
  return { polyline, anchor, plane };
}

export function segmentLengths(drawing: SkeletonDrawing): [number, number, number] {
  const [s, e, w, h] = drawing.polyline;
  const d = (a: ScreenPoint, b: ScreenPoint) => Math.hypot(b.x - a.x, b.y - a.y);
  return [d(s, e), d(e, w), d(w, h)];
}

/** Interior angle at the middle point of three screen points, degrees. */
export function screenAngleDeg(
  a: ScreenPoint,
  b: ScreenPoint,
  c: ScreenPoint
): number {
  const v1 = { x: a.x - b.x, y: a.y - b.y };
  const v2 = { x: c.x - b.x, y: c.y - b.y };
  const dot = v1.x * v2.x + v1.y * v2.y;
  const n1 = Math.hypot(v1.x, v1.y);
  const n2 = Math.hypot(v2.x, v2.y);
  if (n1 === 0 || n2 === 0) {
    return 0;
  }
  const cos = Math.min(1, Math.max(-1, dot / (n1 * n2)));
  return (Math.acos(cos) * 180) / Math.PI;
}

/** SVG path string for the polyline, for direct use in the page. */
export function toSvgPath(drawing: SkeletonDrawing): string {
  return drawing.polyline
    .map((p, i) => `${i === 0 ? "M" : "L"} ${p.x.toFixed(1)} ${p.y.toFixed(1)}`)
    .join(" ");
}
