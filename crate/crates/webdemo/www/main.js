// Page glue for the solver demo. Expects the wasm-bindgen output of the
// wide-webdemo crate in ./pkg (see the crate README for the build line).

import init, { demo_presets, solve_demo, sweep_demo } from "./pkg/wide_webdemo.js";

const ui = {
  preset: document.getElementById("preset"),
  eps: document.getElementById("eps"),
  epsLabel: document.getElementById("epsLabel"),
  mode: document.getElementById("mode"),
  amp: document.getElementById("amp"),
  solve: document.getElementById("solve"),
  sweep: document.getElementById("sweep"),
  status: document.getElementById("status"),
  solveStats: document.getElementById("solveStats"),
  sweepStats: document.getElementById("sweepStats"),
  fieldCanvas: document.getElementById("fieldCanvas"),
  energyCanvas: document.getElementById("energyCanvas"),
  sweepCanvas: document.getElementById("sweepCanvas"),
};

// eps slider is logarithmic between 0.025 and 0.4
const epsOf = (v) => 0.025 * Math.pow(16, Number(v));
const NODES = 64;
const HORIZON = 1.0;
const STEPS = 400;

let solution = null;
let animation = null;

function busy(on, text) {
  ui.solve.disabled = on;
  ui.sweep.disabled = on;
  ui.status.textContent = text || "";
}

function drawAxes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#2b313a";
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
}

function startFieldAnimation() {
  if (animation) cancelAnimationFrame(animation);
  const canvas = ui.fieldCanvas;
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  const s = solution;
  const n = s.nodes;
  const coords = s.coords();
  const field = s.field();
  const oracle = s.oracle();
  const times = s.times();
  const amp = Math.max(1.2 * Number(ui.amp.value), 0.5);
  const xOf = (x) => (x / coords[n - 1]) * (W - 20) + 10;
  const yOf = (v) => H / 2 - (v / amp) * (H / 2 - 15);
  const layerMs = 2500 / s.layers;
  let start = null;

  function frame(stamp) {
    if (start === null) start = stamp;
    const j = Math.floor(((stamp - start) / layerMs) % s.layers);
    drawAxes(ctx, W, H);

    // truncation tail marker on the time bar
    const tailFrac = s.window / times[times.length - 1];
    ctx.fillStyle = "#20242b";
    ctx.fillRect(10 + (W - 20) * tailFrac, H - 8, (W - 20) * (1 - tailFrac), 4);
    ctx.fillStyle = "#3a5a80";
    ctx.fillRect(10, H - 8, (W - 20) * (j / s.layers), 4);

    const plot = (data, dashed, color) => {
      ctx.strokeStyle = color;
      ctx.setLineDash(dashed ? [6, 5] : []);
      ctx.beginPath();
      for (let i = 0; i < n; i++) {
        const px = xOf(coords[i]);
        const py = yOf(data[j * n + i]);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      }
      ctx.stroke();
      ctx.setLineDash([]);
    };
    plot(oracle, true, "#d9a860");
    plot(field, false, "#6db2f0");

    ctx.fillStyle = "#98a3b0";
    ctx.font = "12px sans-serif";
    ctx.fillText(`t = ${times[j].toFixed(3)}`, 16, 18);
    animation = requestAnimationFrame(frame);
  }
  animation = requestAnimationFrame(frame);
}

function drawEnergy() {
  const canvas = ui.energyCanvas;
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  drawAxes(ctx, W, H);
  const s = solution;
  const times = s.times();
  const total = s.energy_total();
  const dissipated = s.cumulative_dissipation();
  const sTimes = s.rescaled_times();
  const approx = s.approx_energy();
  const tMax = times[times.length - 1];
  const extended = total.map((e, j) => e + dissipated[j]);
  const eMax = Math.max(...extended, ...approx) * 1.15 + 1e-12;
  const xOf = (t) => (t / tMax) * (W - 30) + 15;
  const yOf = (e) => H - 15 - (e / eMax) * (H - 30);

  const curve = (ts, es, color, scale) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    for (let j = 0; j < es.length; j++) {
      const px = xOf(ts[j] * scale);
      const py = yOf(es[j]);
      if (j === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    }
    ctx.stroke();
  };
  curve(times, total, "#8fd0a0", 1);
  if (dissipated[dissipated.length - 1] > 1e-12) {
    curve(times, extended, "#d9a860", 1);
  }
  // approximate energy lives on s = t/eps; draw it on the physical axis
  curve(sTimes, approx, "#b08ae8", s.eps);

  ctx.fillStyle = "#98a3b0";
  ctx.font = "12px sans-serif";
  ctx.fillText("E(0)", 18, yOf(total[0]) - 6);
  ctx.strokeStyle = "#3a4150";
  ctx.setLineDash([3, 4]);
  ctx.beginPath();
  ctx.moveTo(15, yOf(total[0]));
  ctx.lineTo(W - 15, yOf(total[0]));
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawSweep(sweep) {
  const canvas = ui.sweepCanvas;
  const ctx = canvas.getContext("2d");
  const { width: W, height: H } = canvas;
  drawAxes(ctx, W, H);
  const eps = sweep.epsilons();
  const errs = sweep.errors();
  const lx = eps.map(Math.log10);
  const ly = errs.map((e) => Math.log10(Math.max(e, 1e-16)));
  const xMin = Math.min(...lx), xMax = Math.max(...lx);
  const yMin = Math.min(...ly), yMax = Math.max(...ly);
  const xOf = (v) => ((v - xMin) / (xMax - xMin + 1e-12)) * (W - 60) + 40;
  const yOf = (v) => H - 30 - ((v - yMin) / (yMax - yMin + 1e-12)) * (H - 55);

  ctx.strokeStyle = "#6db2f0";
  ctx.beginPath();
  for (let i = 0; i < lx.length; i++) {
    if (i === 0) ctx.moveTo(xOf(lx[i]), yOf(ly[i]));
    else ctx.lineTo(xOf(lx[i]), yOf(ly[i]));
  }
  ctx.stroke();
  ctx.fillStyle = "#6db2f0";
  for (let i = 0; i < lx.length; i++) {
    ctx.beginPath();
    ctx.arc(xOf(lx[i]), yOf(ly[i]), 3.5, 0, 7);
    ctx.fill();
  }
  ctx.fillStyle = "#98a3b0";
  ctx.font = "12px sans-serif";
  for (let i = 0; i < eps.length; i++) {
    ctx.fillText(eps[i].toPrecision(2), xOf(lx[i]) - 12, H - 12);
  }
  ctx.fillText("log error vs log eps", 40, 18);
}

async function solveNow() {
  busy(true, "minimizing...");
  await new Promise((r) => setTimeout(r, 20));
  try {
    const eps = epsOf(ui.eps.value);
    solution = solve_demo(
      ui.preset.value, eps, NODES, HORIZON, STEPS,
      BigInt(ui.mode.value), Number(ui.amp.value),
    );
    ui.solveStats.textContent =
      `converged in ${solution.iterations} iterations; ` +
      `F = ${solution.value.toExponential(3)}; ` +
      `relative distance to reference ${(100 * solution.relative_distance).toFixed(2)}%`;
    startFieldAnimation();
    drawEnergy();
    busy(false);
  } catch (e) {
    busy(false, String(e));
  }
}

async function sweepNow() {
  busy(true, "running eps-continuation...");
  await new Promise((r) => setTimeout(r, 20));
  try {
    const sweep = sweep_demo(
      ui.preset.value, 0.4, 5, NODES, HORIZON, STEPS,
      BigInt(ui.mode.value), Number(ui.amp.value),
    );
    drawSweep(sweep);
    ui.sweepStats.textContent = `fitted slope ${sweep.slope.toFixed(3)}`;
    busy(false);
  } catch (e) {
    busy(false, String(e));
  }
}

async function main() {
  await init();
  for (const name of demo_presets()) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    ui.preset.appendChild(option);
  }
  ui.eps.addEventListener("input", () => {
    ui.epsLabel.textContent = epsOf(ui.eps.value).toFixed(3);
  });
  ui.epsLabel.textContent = epsOf(ui.eps.value).toFixed(3);
  ui.solve.addEventListener("click", solveNow);
  ui.sweep.addEventListener("click", sweepNow);
  await solveNow();
}

main();
