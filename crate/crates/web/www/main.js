// SPDX-License-Identifier: Apache-2.0
import init, * as snn from "./pkg/snn_web.js";

const $ = (id) => document.getElementById(id);
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const PAD = { l: 70, r: 10, t: 14, b: 22 };

function call(fn, ...args) {
  try {
    return { ok: JSON.parse(fn(...args)) };
  } catch (e) {
    return { err: String(e) };
  }
}

function frame(canvas) {
  const g = canvas.getContext("2d");
  g.clearRect(0, 0, canvas.width, canvas.height);
  g.font = "11px monospace";
  return g;
}

function xAxis(g, canvas, n) {
  const w = canvas.width - PAD.l - PAD.r;
  const x = (c) => PAD.l + (n <= 1 ? 0 : (c * w) / (n - 1));
  g.fillStyle = "#666";
  const step = Math.max(1, Math.ceil(n / 30));
  for (let c = 0; c < n; c += step) g.fillText(String(c), x(c) - 4, canvas.height - 6);
  return x;
}

function drawRaster(trace) {
  const canvas = $("raster");
  const g = frame(canvas);
  const n = trace.cycles.length;
  const x = xAxis(g, canvas, n);
  const rowH = (canvas.height - PAD.t - PAD.b) / trace.neurons.length;
  trace.neurons.forEach((name, i) => {
    const y = PAD.t + i * rowH + rowH / 2;
    g.fillStyle = "#333";
    g.fillText(name, 4, y + 4);
    g.strokeStyle = "#eee";
    g.beginPath(); g.moveTo(PAD.l, y); g.lineTo(canvas.width - PAD.r, y); g.stroke();
  });
  trace.cycles.forEach((row) => {
    row.fired.forEach((name) => {
      const i = trace.neurons.indexOf(name);
      const y = PAD.t + i * rowH;
      g.fillStyle = PALETTE[i % PALETTE.length];
      g.fillRect(x(row.cycle) - 2, y + 3, 4, rowH - 6);
    });
  });
}

function drawLines(canvas, labels, series, n, extra) {
  const g = frame(canvas);
  const x = xAxis(g, canvas, n);
  const all = series.flat().concat(extra ? extra.flat() : []);
  let lo = Math.min(0, ...all), hi = Math.max(1, ...all);
  if (lo === hi) hi = lo + 1;
  const h = canvas.height - PAD.t - PAD.b;
  const y = (v) => PAD.t + ((hi - v) * h) / (hi - lo);
  g.fillStyle = "#666";
  g.fillText(String(hi), 4, y(hi) + 4);
  g.fillText(String(lo), 4, y(lo));
  g.strokeStyle = "#ccc";
  g.beginPath(); g.moveTo(PAD.l, y(0)); g.lineTo(canvas.width - PAD.r, y(0)); g.stroke();
  series.forEach((s, i) => {
    g.strokeStyle = PALETTE[i % PALETTE.length];
    g.beginPath();
    s.forEach((v, c) => (c === 0 ? g.moveTo(x(c), y(v)) : g.lineTo(x(c), y(v))));
    g.stroke();
    g.fillStyle = g.strokeStyle;
    g.fillText(labels[i], canvas.width - PAD.r - 90, PAD.t + 12 * (i + 1));
  });
}

function runSimulation() {
  $("run-error").textContent = "";
  const r = call(snn.simulate, $("hw").value, $("net").value, $("stim").value, Number($("cycles").value));
  if (r.err) {
    $("run-error").textContent = r.err;
    return;
  }
  const t = r.ok;
  const n = t.cycles.length;
  drawRaster(t);
  const charges = t.neurons.map((_, i) => t.cycles.map((row) => row.charges[i]));
  drawLines($("charges"), t.neurons, charges, n);
  const weights = t.synapses.map((_, k) => t.weights.map((row) => row[k]));
  drawLines($("weights"), t.synapses, weights, n);
}

function loadFixture() {
  const r = call(snn.fixtureSources, $("fixture").value);
  if (r.err) return;
  $("hw").value = r.ok.hardware;
  $("net").value = r.ok.network;
  $("stim").value = r.ok.stimulus;
  $("cycles").value = r.ok.cycles;
  const meta = FIXTURES.find((f) => f.name === $("fixture").value);
  $("notes").textContent = meta ? meta.notes : "";
  runSimulation();
}

function checkFixture() {
  const r = call(snn.checkFixture, $("fixture").value);
  if (r.err) {
    $("check-status").textContent = r.err;
    return;
  }
  const c = r.ok;
  $("check-status").innerHTML = c.passed
    ? `<span class="ok">every cell matches (${c.expected.cycles.length} cycles)</span>`
    : `<span class="err">${c.divergence.text}</span>`;
  const names = c.expected.neurons;
  let html = "<table><tr><th>cycle</th><th>fired</th>" + names.map((n) => `<th>${n}</th>`).join("") + "</tr>";
  c.expected.cycles.forEach((e, t) => {
    const a = c.actual.cycles[t] || { fired: [], charges: [] };
    const firedBad = e.fired.join() !== a.fired.join();
    html += `<tr><td>${e.cycle}</td><td class="${firedBad ? "bad" : ""}">${a.fired.join(",") || "-"}</td>`;
    e.charges.forEach((v, i) => {
      const bad = a.charges[i] !== v;
      html += `<td class="${bad ? "bad" : ""}" title="expected ${v}">${a.charges[i]}</td>`;
    });
    html += "</tr>";
  });
  $("check-table").innerHTML = html + "</table>";
}

function computeSizing() {
  const r = call(snn.sizing, Number($("w").value), Number($("s").value), Number($("c").value), $("table").value);
  if (r.err) {
    $("size-out").innerHTML = `<span class="err">${r.err}</span>`;
    return;
  }
  $("size-out").textContent = `minimum accumulator width: ${r.ok.accumulator_width} bits`;
  const gaps = r.ok.stdp.map((p) => p.gap);
  const pot = r.ok.stdp.map((p) => p.potentiation ?? 0);
  const dep = r.ok.stdp.map((p) => p.depression ?? 0);
  drawLines($("curve"), ["potentiation", "depression"], [pot, dep], gaps.length);
}

let FIXTURES = [];

await init();
FIXTURES = JSON.parse(snn.fixtures());
for (const f of FIXTURES) {
  const o = document.createElement("option");
  o.value = o.textContent = f.name;
  $("fixture").appendChild(o);
}
$("fixture").addEventListener("change", loadFixture);
$("run").addEventListener("click", runSimulation);
$("check").addEventListener("click", checkFixture);
$("size").addEventListener("click", computeSizing);
loadFixture();
computeSizing();
