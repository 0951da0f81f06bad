import init, { demoData, intervalBand, findOutliers, rankModels } from "./pkg/liftcal_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let data = null;
let flagged = [];

function axes(ctx, w, h, pad, xr, yr) {
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0])) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - yr[0]) / (yr[1] - yr[0])) * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#666";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const x = xr[0] + ((xr[1] - xr[0]) * i) / 4;
    const y = yr[0] + ((yr[1] - yr[0]) * i) / 4;
    ctx.fillText(x.toFixed(2), sx(x) - 12, h - pad + 14);
    ctx.fillText(y.toFixed(2), 2, sy(y) + 4);
  }
  return [sx, sy];
}

function range(values) {
  let lo = Math.min(...values), hi = Math.max(...values);
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

function drawScatter(band) {
  const c = $("scatter"), ctx = c.getContext("2d");
  const ys = [...data.calib.y, ...data.test.y, ...band.lower, ...band.upper];
  const [sx, sy] = axes(ctx, c.width, c.height, 40, range(band.f_hat), range(ys));

  ctx.fillStyle = "rgba(80,130,200,0.18)";
  ctx.beginPath();
  band.f_hat.forEach((f, i) => (i ? ctx.lineTo(sx(f), sy(band.upper[i])) : ctx.moveTo(sx(f), sy(band.upper[i]))));
  for (let i = band.f_hat.length - 1; i >= 0; i--) ctx.lineTo(sx(band.f_hat[i]), sy(band.lower[i]));
  ctx.fill();

  ctx.strokeStyle = "#2b5fa8";
  ctx.beginPath();
  band.f_hat.forEach((f, i) => (i ? ctx.lineTo(sx(f), sy(band.center[i])) : ctx.moveTo(sx(f), sy(band.center[i]))));
  ctx.stroke();

  ctx.fillStyle = "rgba(0,0,0,0.25)";
  data.test.f_hat.forEach((f, i) => ctx.fillRect(sx(f) - 1, sy(data.test.y[i]) - 1, 2, 2));
  ctx.fillStyle = "#1c3f73";
  data.calib.f_hat.forEach((f, i) => {
    ctx.beginPath();
    ctx.arc(sx(f), sy(data.calib.y[i]), 2.5, 0, 2 * Math.PI);
    ctx.fill();
  });
  ctx.strokeStyle = "#c0392b";
  ctx.lineWidth = 1.5;
  for (const i of flagged) {
    ctx.beginPath();
    ctx.arc(sx(data.calib.f_hat[i]), sy(data.calib.y[i]), 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.lineWidth = 1;
}

function drawReliability(band) {
  const c = $("reliability"), ctx = c.getContext("2d");
  const [sx, sy] = axes(ctx, c.width, c.height, 36, [0, 1], [0, 1]);
  ctx.strokeStyle = "#bbb";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(sx(0), sy(0));
  ctx.lineTo(sx(1), sy(1));
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = "#2b5fa8";
  ctx.fillStyle = "#2b5fa8";
  ctx.beginPath();
  band.levels.forEach((l, i) => (i ? ctx.lineTo(sx(l), sy(band.empirical[i])) : ctx.moveTo(sx(l), sy(band.empirical[i]))));
  ctx.stroke();
  band.levels.forEach((l, i) => {
    ctx.beginPath();
    ctx.arc(sx(l), sy(band.empirical[i]), 3, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function drawRanking() {
  const f = data.calib.f_hat;
  const models = [
    { label: "raw predictions", predictions: f },
    { label: "rescaled (2f - 1)", predictions: f.map((v) => 2 * v - 1) },
    { label: "wiggly (f + sin 5f)", predictions: f.map((v) => v + Math.sin(5 * v)) },
    { label: "squared (f^2)", predictions: f.map((v) => v * v) },
    { label: "sign only", predictions: f.map((v) => Math.sign(v)) },
  ];
  const ranked = JSON.parse(rankModels(Float64Array.from(data.calib.y), JSON.stringify(models), "identity"));
  const body = $("rank").querySelector("tbody");
  body.innerHTML = "";
  for (const m of ranked.slice().reverse()) {
    const tr = document.createElement("tr");
    const r = m.report;
    const cells = r
      ? [m.model_id, r.lcd.toFixed(4), r.lift.beta0.toFixed(3), r.lift.beta1.toFixed(3)]
      : [m.model_id, m.error, "", ""];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    body.appendChild(tr);
  }
}

function refresh() {
  $("status").textContent = "";
  try {
    const band = JSON.parse(
      intervalBand(
        Float64Array.from(data.calib.y),
        Float64Array.from(data.calib.f_hat),
        Float64Array.from(data.test.y),
        Float64Array.from(data.test.f_hat),
        num("alpha"),
        120,
      ),
    );
    drawScatter(band);
    drawReliability(band);
    drawRanking();
    const fit = band.fit;
    $("fitinfo").textContent =
      `lift: y = ${fit.beta0_hat.toFixed(3)} + ${fit.beta1_hat.toFixed(3)} f,  R² = ${band.r_squared.toFixed(3)},  ` +
      `test coverage ${(100 * band.coverage).toFixed(1)}% at nominal ${(100 * (1 - num("alpha"))).toFixed(1)}%` +
      (data.outliers.length ? `,  injected outliers: ${data.outliers.join(", ")}` : "");
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

function regenerate() {
  try {
    data = JSON.parse(demoData(num("n"), 2000, num("b0"), num("b1"), num("sigma"), num("nout"), num("seed")));
    flagged = [];
    refresh();
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

function flag() {
  try {
    const r = JSON.parse(findOutliers(Float64Array.from(data.calib.y), Float64Array.from(data.calib.f_hat), 50));
    flagged = r.outlier_indices;
    refresh();
    $("status").textContent = `lambda = ${r.lambda.toFixed(3)}, flagged ${flagged.length}: ${flagged.join(", ")}`;
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

await init();
$("go").addEventListener("click", regenerate);
$("flag").addEventListener("click", flag);
$("alpha").addEventListener("change", refresh);
regenerate();
