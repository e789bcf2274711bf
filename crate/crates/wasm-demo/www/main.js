import init, { ts_diagram, efficiency_vs_q, steady_distribution } from "./pkg/pce_wasm_demo.js";

const PAD = 56;

function values(section) {
  const out = {};
  for (const input of section.querySelectorAll("input")) {
    out[input.name] = input.type === "checkbox" ? input.checked : Number(input.value);
  }
  return out;
}

function frame(ctx, xs, ys, xlabel, ylabel) {
  const { width: w, height: h } = ctx.canvas;
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = (x) => PAD + ((x - x0) / (x1 - x0)) * (w - 2 * PAD);
  const sy = (y) => h - PAD + ((y0 - y) / (y1 - y0)) * (h - 2 * PAD);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(PAD, PAD, w - 2 * PAD, h - 2 * PAD);
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(xlabel, w / 2 - 30, h - 12);
  ctx.fillText(ylabel, 6, PAD - 12);
  ctx.fillText(fmt(x0), PAD, h - PAD + 16);
  ctx.fillText(fmt(x1), w - PAD - 40, h - PAD + 16);
  ctx.fillText(fmt(y0), 4, h - PAD);
  ctx.fillText(fmt(y1), 4, PAD + 10);
  return { sx, sy };
}

function extent(v) {
  let lo = Math.min(...v);
  let hi = Math.max(...v);
  if (hi === lo) {
    const d = Math.abs(hi) * 0.05 || 1;
    lo -= d;
    hi += d;
  }
  const m = (hi - lo) * 0.05;
  return [lo - m, hi + m];
}

function fmt(x) {
  return Math.abs(x) >= 1e4 || (Math.abs(x) < 1e-2 && x !== 0) ? x.toExponential(3) : x.toFixed(3);
}

function fail(section, err) {
  const out = section.querySelector(".readout");
  out.className = "readout error";
  out.textContent = String(err);
}

function report(section, text) {
  const out = section.querySelector(".readout");
  out.className = "readout";
  out.textContent = text;
}

function drawTs() {
  const section = document.getElementById("ts");
  const v = values(section);
  const q = v.lossless ? Infinity : v.log10_q;
  let d;
  try {
    d = JSON.parse(ts_diagram(v.t_h, v.t_l, v.strength, v.phase, q, 48));
  } catch (e) {
    return fail(section, e);
  }
  const ctx = section.querySelector("canvas").getContext("2d");
  const s = d.samples.map((p) => p.entropy);
  const t = d.samples.map((p) => p.t_eff);
  const { sx, sy } = frame(ctx, s, t, "S (J/K)", "T' (K)");
  const colors = ["#c0392b", "#7f8c8d", "#2471a3", "#7f8c8d"];
  for (let stroke = 1; stroke <= 4; stroke++) {
    const pts = d.samples.filter((p) => p.stroke === stroke);
    ctx.strokeStyle = colors[stroke - 1];
    ctx.lineWidth = 2;
    ctx.beginPath();
    pts.forEach((p, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, sx(p.entropy), sy(p.t_eff)));
    ctx.stroke();
  }
  report(
    section,
    `T_h' = ${fmt(d.t_h_eff)} K   T_l' = ${fmt(d.t_l_eff)} K   zeta_h = ${fmt(d.zeta_h)}   zeta_l = ${fmt(d.zeta_l)}\n` +
      `eta = ${fmt(d.eta)}   (1 - T_l/T_h = ${fmt(d.carnot)})`,
  );
}

function drawEta() {
  const section = document.getElementById("eta");
  const v = values(section);
  let rows;
  try {
    rows = JSON.parse(efficiency_vs_q(v.t_h, v.t_l, v.strength, v.phase, v.q_min, v.q_max, 61));
  } catch (e) {
    return fail(section, e);
  }
  const finite = rows.filter((r) => r.log10_q !== null && r.eta !== null);
  const lossless = rows.find((r) => r.log10_q === null);
  if (!finite.length) {
    return fail(section, rows.map((r) => r.error).find(Boolean) || "no valid points");
  }
  const ctx = section.querySelector("canvas").getContext("2d");
  const ys = finite.map((r) => r.eta);
  if (lossless.eta !== null) ys.push(lossless.eta);
  const { sx, sy } = frame(ctx, finite.map((r) => r.log10_q), ys, "log10 Q", "eta");
  ctx.strokeStyle = "#2471a3";
  ctx.lineWidth = 2;
  ctx.beginPath();
  finite.forEach((r, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, sx(r.log10_q), sy(r.eta)));
  ctx.stroke();
  if (lossless.eta !== null) {
    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "#c0392b";
    ctx.beginPath();
    ctx.moveTo(PAD, sy(lossless.eta));
    ctx.lineTo(ctx.canvas.width - PAD, sy(lossless.eta));
    ctx.stroke();
    ctx.setLineDash([]);
  }
  const skipped = rows.length - 1 - finite.length;
  report(
    section,
    `lossless eta = ${lossless.eta === null ? lossless.error : fmt(lossless.eta)} (dashed)` +
      (skipped ? `   ${skipped} grid points outside the model` : ""),
  );
}

function drawDist() {
  const section = document.getElementById("dist");
  const v = values(section);
  let d;
  try {
    d = JSON.parse(steady_distribution(v.p_e, v.xi, v.phase, v.lambda_tau, v.loss, v.n_max));
  } catch (e) {
    return fail(section, e);
  }
  const ctx = section.querySelector("canvas").getContext("2d");
  const n = d.populations.map((_, i) => i);
  const { sx, sy } = frame(ctx, n, [0, ...d.populations], "n", "P(n)");
  const bar = Math.max(1, (ctx.canvas.width - 2 * PAD) / n.length - 1);
  ctx.fillStyle = "#2471a3";
  d.populations.forEach((p, i) => ctx.fillRect(sx(i) - bar / 2, sy(p), bar, sy(0) - sy(p)));
  const gap = Math.abs(d.mean_photon - d.analytic_mean_photon) / (d.analytic_mean_photon || 1);
  report(
    section,
    `<n> master equation = ${fmt(d.mean_photon)}   rate equation = ${fmt(d.analytic_mean_photon)}   relative gap = ${fmt(gap)}`,
  );
}

await init();
const panels = { ts: drawTs, eta: drawEta, dist: drawDist };
for (const [id, draw] of Object.entries(panels)) {
  document.getElementById(id).addEventListener("input", draw);
  draw();
}
