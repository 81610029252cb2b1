/** One stable color per action, shared by the scene, the timeline bar, and
 * the legend. Known actions get hand-picked colors; anything else hashes to
 * a hue so new domains still render distinguishably. */

const FIXED: Record<string, string> = {
  GoAlone: "#4c9f70",
  Follow: "#4169b0",
  Pass: "#c88a2d",
  Halt: "#c0392b",
};

export function actionColor(action: string): string {
  const fixed = FIXED[action];
  if (fixed) return fixed;
  let h = 0;
  for (let i = 0; i < action.length; i++) h = (h * 31 + action.charCodeAt(i)) >>> 0;
  return `hsl(${h % 360}, 55%, 45%)`;
}

export const DOOR_CLOSED = "#a33";
export const DOOR_OPEN = "#3a5";
export const WALL = "#555";
export const HUMAN = "#7a7a8c";
export const VELOCITY = "#aab";
export const GOAL = "#888";
