import init, { preset, cascadeCurve, shiftDecay, eigenspaceSummary } from "./pkg/cuntz_lab_web.js";

const $ = (id) => document.getElementById(id);
const colors = ["#1f5fbf", "#c0392b", "#27ae60", "#8e44ad"];

function show(id, f) {
  $("bank-error").textContent = "";
  try {
    $(id).textContent = f();
  } catch (e) {
    $(id).textContent = "";
    $("bank-error").textContent = String(e);
  }
}

function plot(canvas, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 24;
  ctx.clearRect(0, 0, w, h);
  const pts = series.flat();
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(0, ...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#aaa";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0));
  ctx.lineTo(w - pad, sy(0));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(`${x0}`, pad, h - 6);
  ctx.fillText(`${x1}`, w - pad - 20, h - 6);
  ctx.fillText(y1.toPrecision(3), 2, pad - 6);
  series.forEach((s, i) => {
    ctx.strokeStyle = colors[i % colors.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.forEach(([x, y], k) => (k === 0 ? ctx.moveTo(sx(x), sy(y)) : ctx.lineTo(sx(x), sy(y))));
    ctx.stroke();
  });
}

function loadPreset() {
  $("bank").value = preset($("preset").value);
}

function runCascade() {
  show("cascade-out", () => {
    const r = JSON.parse(cascadeCurve($("bank").value, +$("iters").value, +$("grid").value));
    plot($("cascade-plot"), [r.phi, ...r.psi]);
    return `‖φ‖ = ${r.norm.toFixed(6)}   supp φ ⊆ [${r.support.join(", ")}]   (blue φ, others ψ_i)`;
  });
}

function runDecay() {
  show("decay-out", () => {
    const d = Array.from(shiftDecay($("bank").value, +$("j").value, $("vec").value, +$("kmax").value));
    plot($("decay-plot"), [d.map((v, k) => [k, v])]);
    return d.map((v, k) => `k = ${k}: ${v.toExponential(4)}`).join("\n");
  });
}

function runEigen() {
  show("eigen-out", () => JSON.stringify(JSON.parse(eigenspaceSummary($("bank").value, +$("window").value)), null, 2));
}

await init();
$("preset").addEventListener("change", () => {
  loadPreset();
  runCascade();
  runEigen();
});
$("run-cascade").addEventListener("click", runCascade);
$("run-decay").addEventListener("click", runDecay);
$("run-eigen").addEventListener("click", runEigen);
loadPreset();
runCascade();
runDecay();
runEigen();
