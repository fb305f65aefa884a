import init, { costCurve, xiCurve, jumpHeatmap } from "./pkg/eikonal_lab_wasm.js";

const $ = (id) => document.getElementById(id);

function columns(flat, k) {
  const cols = Array.from({ length: k }, () => []);
  for (let i = 0; i < flat.length; i += k) {
    for (let j = 0; j < k; j++) cols[j].push(flat[i + j]);
  }
  return cols;
}

// Line plot of several series sharing one x column.
function plot(canvas, xs, series, hline) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.ys).concat(hline ?? []);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...all), Math.max(...all)];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(x0.toFixed(2), pad, h - pad + 14);
  ctx.fillText(x1.toFixed(2), w - pad - 20, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  if (hline !== undefined) {
    ctx.strokeStyle = "#c33";
    ctx.beginPath();
    ctx.moveTo(pad, py(hline));
    ctx.lineTo(w - pad, py(hline));
    ctx.stroke();
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function drawCost() {
  const [s, c, cubic] = columns(costCurve(Number($("cost-samples").value)), 3);
  plot($("cost"), s, [
    { ys: c, color: "#1565c0" },
    { ys: cubic, color: "#555", dash: [5, 4] },
  ]);
  const margin = Math.min(...c.map((v, i) => v - cubic[i]));
  $("cost-readout").textContent = `c(2) = ${c[c.length - 1].toFixed(4)}, smallest c - s³/6 = ${margin.toExponential(3)}`;
}

function drawXi() {
  const [beta, , ratio] = columns(xiCurve(Number($("xi-samples").value)), 3);
  plot($("xi"), beta, [{ ys: ratio, color: "#2e7d32" }], 1);
  $("xi-readout").textContent = `minimum ratio ${Math.min(...ratio).toFixed(5)}`;
}

function drawHeat() {
  const n = Number($("heat-n").value);
  const beta = Number($("heat-beta").value);
  const eps = Number($("heat-eps").value);
  const prod = $("heat-prod").checked;
  const v = jumpHeatmap(n, beta, eps, prod);
  const peak = Math.max(...v.map(Math.abs)) || 1;
  const canvas = $("heat");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  for (let iy = 0; iy < n; iy++) {
    for (let ix = 0; ix < n; ix++) {
      const t = v[iy * n + ix] / peak;
      // row 0 is the bottom edge of the square
      const k = 4 * ((n - 1 - iy) * n + ix);
      img.data[k] = t > 0 ? 255 : 255 * (1 + t);
      img.data[k + 1] = 255 * (1 - Math.abs(t));
      img.data[k + 2] = t < 0 ? 255 : 255 * (1 - t);
      img.data[k + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  const h = 1 / n;
  const total = v.reduce((a, b) => a + b, 0) * h * h;
  $("heat-readout").textContent = prod
    ? `mass ${total.toFixed(5)}; a unit jump line carries (2 sin β)³/6 = ${(Math.pow(2 * Math.sin(beta), 3) / 6).toFixed(5)}`
    : `defect 1 - |m_ε|², peak ${peak.toFixed(4)}`;
}

function guard(f) {
  return () => {
    try {
      f();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
    }
  };
}

await init();
guard(drawCost)();
guard(drawXi)();
guard(drawHeat)();
$("cost-samples").addEventListener("change", guard(drawCost));
$("xi-samples").addEventListener("change", guard(drawXi));
for (const id of ["heat-n", "heat-beta", "heat-eps", "heat-prod"]) {
  $(id).addEventListener("input", guard(drawHeat));
}
