import init, { convergent_table, gap_series, family_density } from "./pkg/statchar_web.js";

const $ = (id) => document.getElementById(id);

function fail(el, e) {
  el.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(e.message ?? e);
  el.appendChild(p);
}

// Axes in data coordinates; `ys` maps a value to a canvas y.
function frame(canvas, xmax, ymin, ymax, ylabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 36;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, 6, w - pad - 6, h - pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(ylabel, 4, 14);
  ctx.fillText(String(ymax), 4, 26);
  ctx.fillText(String(ymin), 4, h - pad);
  ctx.fillText("N = " + xmax, w - 80, h - 10);
  const xs = (x) => pad + (x / xmax) * (w - pad - 6);
  const ys = (y) => 6 + (1 - (y - ymin) / (ymax - ymin)) * (h - pad);
  return { ctx, xs, ys };
}

function line(f, pts, colour) {
  f.ctx.strokeStyle = colour;
  f.ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? f.ctx.lineTo(f.xs(x), f.ys(y)) : f.ctx.moveTo(f.xs(x), f.ys(y))));
  f.ctx.stroke();
}

function showTable() {
  const out = $("cf-out");
  try {
    const t = JSON.parse(convergent_table($("cf-alpha").value, Number($("cf-n").value)));
    const rows = t.convergents
      .map((c) => `<tr><td>${c.index}</td><td>${c.index ? t.digits[c.index - 1] : ""}</td><td>${c.p}</td><td>${c.q}</td></tr>`)
      .join("");
    out.innerHTML = `<table><tr><th>n</th><th>a<sub>n</sub></th><th>p<sub>n</sub></th><th>q<sub>n</sub></th></tr>${rows}</table>`;
  } catch (e) {
    fail(out, e);
  }
}

function showSeries() {
  const info = $("gs-info");
  const n = Number($("gs-n").value);
  const eps = Number($("gs-eps").value);
  try {
    const s = JSON.parse(gap_series($("gs-alpha").value, $("gs-nu").value, n, $("gs-eps").value));
    info.textContent = `verdict ${s.verdict}; λ̂ ≈ ${s.lambda?.toFixed(4)}, m = ${s.m}, i₀ = ${s.i0}; ` +
      `exceptional density at N: ${s.exceptional.at(-1)[1].toFixed(4)}`;
    const f = frame($("gs-norms"), n, 0, 0.5, "‖q_n β‖");
    f.ctx.fillStyle = "#1f5fa8";
    for (const [k, lo, hi] of s.points) {
      f.ctx.fillRect(f.xs(k), f.ys(hi), 1.5, Math.max(1.5, f.ys(lo) - f.ys(hi)));
    }
    line(f, [[0, eps], [n, eps]], "#c33");
    const g = frame($("gs-density"), n, 0, 1, "exceptional");
    line(g, s.exceptional, "#c33");
    line(g, [[0, 0.05], [n, 0.05]], "#999");
  } catch (e) {
    fail(info, e);
  }
}

function showDensity() {
  const info = $("fd-info");
  const n = Number($("fd-n").value);
  try {
    const d = JSON.parse(family_density($("fd-nu").value, Number($("fd-s1").value), n));
    info.textContent = `${d.intervals.length} intervals up to N; density of the gaps at N: ${d.outside.at(-1)[1].toFixed(5)}`;
    const f = frame($("fd-plot"), n, 0, 1, "density");
    line(f, d.inside, "#1f5fa8");
    line(f, d.outside, "#c33");
  } catch (e) {
    fail(info, e);
  }
}

await init();
$("cf-go").onclick = showTable;
$("gs-go").onclick = showSeries;
$("fd-go").onclick = showDensity;
showTable();
