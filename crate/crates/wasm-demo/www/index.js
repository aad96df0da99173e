import init, { synth_series, difference_explorer, partition_preview, dtw_align } from "./pkg/smaml_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let series = [];

function extent(values) {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

function scales(canvas, n, lo, hi, pad = 10) {
  const w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  return {
    x: (i) => pad + (n <= 1 ? 0 : (i / (n - 1)) * w),
    y: (v) => pad + h - ((v - lo) / (hi - lo)) * h,
  };
}

function line(ctx, values, sx, sy, color, offset = 0) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  values.forEach((v, i) => (i === 0 ? ctx.moveTo(sx(i + offset), sy(v)) : ctx.lineTo(sx(i + offset), sy(v))));
  ctx.stroke();
}

function drawDiff() {
  const d = num("d");
  $("dval").textContent = d;
  const view = JSON.parse(difference_explorer(new Float64Array(series), 2));
  const order = view.orders[Math.min(d, view.orders.length - 1)];
  const rows = view.orders.map((o) => {
    if (!o.adf) return `d=${o.d}  ADF n/a`;
    return `d=${o.d}  stat ${o.adf.statistic.toFixed(3)}  crit5% ${o.adf.critical_5pct.toFixed(3)}  lag ${o.adf.lag}  ${o.adf.stationary ? "stationary" : "unit root"}`;
  });
  rows.push(`suggested order: ${view.suggested_d ?? "none"}`);
  $("adf").textContent = rows.join("\n");

  const canvas = $("diffPlot"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const [lo, hi] = extent(order.values);
  const s = scales(canvas, series.length, lo, hi);
  if (lo < 0 && hi > 0) {
    ctx.strokeStyle = "#ddd";
    ctx.beginPath(); ctx.moveTo(0, s.y(0)); ctx.lineTo(canvas.width, s.y(0)); ctx.stroke();
  }
  line(ctx, order.values, s.x, s.y, "#1f77b4", d);
}

function drawPartition() {
  const inputLen = num("inputLen"), k = num("k");
  const target = Math.max(1, Math.floor(inputLen / 4));
  const windows = series.length - inputLen - target + 1;
  const n = Math.max(1, Math.min(10, windows - k));
  $("task").max = n - 1;
  const t = Math.min(num("task"), n - 1);
  $("taskval").textContent = t;
  const view = JSON.parse(partition_preview(new Float64Array(series), inputLen, k, n, $("strategy").value, 7n));
  const task = view.tasks[t];
  $("partInfo").textContent =
    `${view.windows} windows, target length ${view.target_len}\n` +
    `query ends at ${task.query_origin}; support ends at ${task.support_origins.join(", ")}`;

  const canvas = $("partPlot"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const [lo, hi] = extent(series);
  const s = scales(canvas, series.length, lo, hi);
  const band = (origin, color) => {
    const a = s.x(origin - inputLen + 1), b = s.x(origin + view.target_len);
    ctx.fillStyle = color;
    ctx.fillRect(a, 0, b - a, canvas.height);
  };
  task.support_origins.forEach((o) => band(o, "rgba(44,160,44,0.18)"));
  band(task.query_origin, "rgba(214,39,40,0.25)");
  line(ctx, series, s.x, s.y, "#333");
}

function drawDtw() {
  const shift = num("shift");
  $("shiftval").textContent = shift;
  const m = 48;
  const a = Array.from({ length: m }, (_, i) => Math.sin((2 * Math.PI * i) / 24));
  const b = Array.from({ length: m }, (_, i) => 0.8 * Math.sin((2 * Math.PI * (i - shift)) / 24));
  const view = JSON.parse(dtw_align(new Float64Array(a), new Float64Array(b)));
  $("dtwInfo").textContent = `cost ${view.cost.toFixed(4)}, path length ${view.path.length}`;

  const canvas = $("dtwPlot"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const half = canvas.height / 2;
  const sx = (i) => 10 + (i / (m - 1)) * (canvas.width - 20);
  const ya = (v) => half / 2 - v * (half / 2 - 12);
  const yb = (v) => half + half / 2 - v * (half / 2 - 12);
  ctx.strokeStyle = "rgba(0,0,0,0.15)";
  for (const [i, j] of view.path) {
    ctx.beginPath(); ctx.moveTo(sx(i), ya(a[i])); ctx.lineTo(sx(j), yb(b[j])); ctx.stroke();
  }
  line(ctx, a, sx, ya, "#1f77b4");
  line(ctx, b, sx, yb, "#ff7f0e");
}

function guard(f) {
  return () => {
    try { f(); $("error").textContent = ""; } catch (e) { $("error").textContent = String(e.message ?? e); }
  };
}

const regenerate = guard(() => {
  series = JSON.parse(synth_series(num("len"), num("slope"), num("amp"), num("period"), num("ar"), num("sigma"), BigInt(num("seed"))));
  drawDiff();
  drawPartition();
});

await init();
for (const id of ["len", "slope", "amp", "period", "ar", "sigma", "seed"]) $(id).addEventListener("change", regenerate);
$("d").addEventListener("input", guard(drawDiff));
for (const id of ["strategy", "inputLen", "k"]) $(id).addEventListener("change", guard(drawPartition));
$("task").addEventListener("input", guard(drawPartition));
$("shift").addEventListener("input", guard(drawDtw));
regenerate();
guard(drawDtw)();
