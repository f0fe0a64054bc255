/** Minimal SVG plotting helpers shared by the two task pages. */

export interface Scale {
  toPxX(x: number): number;
  toPxY(y: number): number;
  fromPxY(py: number): number;
}

export interface PlotBox {
  width: number;
  height: number;
  margin: number;
}

export function makeScale(
  xDomain: [number, number],
  yDomain: [number, number],
  box: PlotBox,
): Scale {
  const { width, height, margin } = box;
  const innerW = width - 2 * margin;
  const innerH = height - 2 * margin;
  const [x0, x1] = xDomain;
  const [y0, y1] = yDomain;
  const spanX = x1 - x0 || 1;
  const spanY = y1 - y0 || 1;
  return {
    toPxX: (x) => margin + ((x - x0) / spanX) * innerW,
    toPxY: (y) => margin + (1 - (y - y0) / spanY) * innerH,
    fromPxY: (py) => y0 + (1 - (py - margin) / innerH) * spanY,
  };
}

export function extent(values: number[], pad = 0.1): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = -1;
    hi = 1;
  }
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export function polylinePoints(
  xs: number[],
  ys: number[],
  scale: Scale,
): string {
  return xs
    .map((x, i) => `${scale.toPxX(x).toFixed(2)},${scale.toPxY(ys[i]).toFixed(2)}`)
    .join(" ");
}
