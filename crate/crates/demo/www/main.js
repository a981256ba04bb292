import init, { design, ergodic, isi } from "./pkg/chanshort_demo.js";

const $ = (id) => document.getElementById(id);
const bits = () => $("bits").checked;
const COLORS = ["#222", "#1f77b4", "#d62728", "#2ca02c"];

function matrixTable(name, rows) {
  const t = document.createElement("table");
  t.className = "m";
  t.createCaption().textContent = name;
  const real = rows.flat().every(([, im]) => Math.abs(im) < 1e-12);
  for (const row of rows) {
    const tr = t.insertRow();
    for (const [re, im] of row) {
      const td = tr.insertCell();
      td.textContent = real
        ? re.toFixed(4)
        : `${re.toFixed(3)}${im < 0 ? "-" : "+"}${Math.abs(im).toFixed(3)}i`;
      if (re < -1e-9) td.className = "neg";
    }
  }
  return t;
}

function showError(el, e) {
  el.replaceChildren();
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(e.message ?? e);
  el.append(p);
}

function runDesign() {
  const out = $("d-out");
  try {
    const d = JSON.parse(
      design($("d-channel").value, Number($("d-n0").value), Number($("d-k").value), $("d-blocks").value, bits()),
    );
    out.replaceChildren();
    const head = document.createElement("p");
    const indefinite = d.lambda_min < -1e-10;
    head.innerHTML = `channel ${d.n_r}&times;${d.n_t}, memory L=${d.channel_memory}; ` +
      `&lambda;<sub>min</sub>(G<sub>r</sub>) = <b class="${indefinite ? "neg" : ""}">${d.lambda_min.toFixed(5)}</b>` +
      (indefinite ? " (indefinite: no classical F<sup>H</sup>F receiver reaches this)" : "");
    out.append(head, matrixTable("B", d.b), matrixTable("G_r", d.g_r), matrixTable("H_r", d.h_r));
    const r = d.rates;
    const rows = r.kind === "banded"
      ? [["full", r.i_full], ["MMSE", r.i_mmse], ["GMI, functional", r.gmi_functional], ["GMI, log det", r.gmi_logdet],
        ["GMI, column removal", r.gmi_column_removal], ["GMI, chain rule", r.gmi_chain]]
      : [["full", r.i_full], ["MMSE", r.i_mmse], ["GMI, functional", r.gmi_functional], ["GMI, log det", r.gmi_logdet],
        ["GMI, block chain rule", r.block_rate]];
    const t = document.createElement("table");
    t.className = "m";
    t.createCaption().textContent = `rates (${d.units})`;
    for (const [k, v] of rows) {
      const tr = t.insertRow();
      tr.insertCell().textContent = k;
      tr.insertCell().textContent = v.toFixed(6);
    }
    out.append(t);
  } catch (e) {
    showError(out, e);
  }
}

function plot(canvas, x, series, ylabel) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 150, T = 15, B = 40;
  ctx.clearRect(0, 0, W, H);
  const ys = series.flatMap((s) => s.values).filter(Number.isFinite);
  let y0 = Math.min(0, ...ys), y1 = Math.max(...ys);
  if (y1 <= y0) y1 = y0 + 1;
  const x0 = x[0], x1 = x[x.length - 1] === x0 ? x0 + 1 : x[x.length - 1];
  const px = (v) => L + ((v - x0) / (x1 - x0)) * (W - L - R);
  const py = (v) => H - B - ((v - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#eee";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  for (let i = 0; i <= 5; i++) {
    const v = y0 + ((y1 - y0) * i) / 5;
    ctx.beginPath(); ctx.moveTo(L, py(v)); ctx.lineTo(W - R, py(v)); ctx.stroke();
    ctx.fillText(v.toFixed(2), 8, py(v) + 4);
  }
  for (const v of x) ctx.fillText(String(v), px(v) - 8, H - B + 15);
  ctx.fillText("SNR (dB)", (W - R) / 2, H - 8);
  ctx.save(); ctx.translate(12, T + 60); ctx.rotate(-Math.PI / 2); ctx.fillText(ylabel, -40, 0); ctx.restore();

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    s.values.forEach((v, j) => (j ? ctx.lineTo(px(x[j]), py(v)) : ctx.moveTo(px(x[j]), py(v))));
    ctx.stroke();
    ctx.setLineDash([]);
    s.values.forEach((v, j) => ctx.fillRect(px(x[j]) - 2, py(v) - 2, 4, 4));
    ctx.fillText(s.name, W - R + 10, T + 16 * i + 10);
  });
}

function runErgodic() {
  const out = $("e-out");
  try {
    const blocks = $("e-blocks").value;
    const s = JSON.parse(ergodic(
      Number($("e-nr").value), Number($("e-nt").value), Number($("e-k").value), blocks,
      Number($("e-trials").value), BigInt($("e-seed").value), $("e-snr").value, bits(),
    ));
    const label = blocks.trim() ? `blocks ${blocks}` : `K=${$("e-k").value}`;
    const names = { full: "full MI", direct: `GMI ${label}`, shortcut: "GMI shortcut" };
    plot($("e-plot"), s.snr_db,
      s.curves.map((c) => ({ ...c, name: names[c.name] ?? c.name, dash: c.name === "shortcut" ? [5, 4] : [] })),
      `rate (${s.units})`);
    const notes = Object.fromEntries(s.notes);
    out.textContent = `high-SNR slope over the last two points: measured ${notes.slope_direct?.toFixed(3)}, ` +
      `predicted ${notes.slope_theory}`;
  } catch (e) {
    showError(out, e);
  }
}

function runIsi() {
  const out = $("i-out");
  try {
    const s = JSON.parse(isi(
      Number($("i-beta").value), Number($("i-nt").value), Number($("i-taps").value),
      Number($("i-k").value), $("i-snr").value, bits(),
    ));
    const rates = s.curves.filter((c) => c.name !== "lambda_min");
    plot($("i-plot"), s.snr_db, rates.map((c) => ({ ...c, dash: c.name === "classical" ? [5, 4] : [] })),
      `rate per symbol (${s.units})`);
    const onset = s.notes.find(([k]) => k === "indefinite_onset");
    out.textContent = onset
      ? `G_r first becomes indefinite at ${onset[1]} dB; from there the classical receiver falls below the optimum.`
      : "G_r stays positive semidefinite on this grid, so the classical receiver matches the optimum.";
  } catch (e) {
    showError(out, e);
  }
}

await init();
$("d-run").onclick = runDesign;
$("e-run").onclick = runErgodic;
$("i-run").onclick = runIsi;
$("bits").onchange = () => { runDesign(); };
runDesign();
