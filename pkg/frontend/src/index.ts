export * from "./types.js";
export { ApiClient, ApiError } from "./client.js";
export type { FetchLike } from "./client.js";
export { SessionView } from "./state.js";
export { buildScene, defaultView } from "./scene.js";
export type { Scene, SceneItem, SceneRect, ScenePath, SceneText, RenderView } from "./scene.js";
export { sceneToSvg } from "./svg.js";
export { buildChart, SERIES_COLORS } from "./chart.js";
export { identicon, fnv1a, IDENTICON_GRID } from "./identicon.js";
export {
  POSITIVE_COLOR,
  NEGATIVE_COLOR,
  TRANSLUCENT_OPACITY,
  signColor,
  activationColor,
  divergingColor,
} from "./colors.js";
export { mountApp } from "./app.js";
