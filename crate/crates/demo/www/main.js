import init, { synth, rank, budget, importance } from "./pkg/cbs_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const SVG = "http://www.w3.org/2000/svg";

function svgEl(name, attrs, text) {
  const el = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  if (text !== undefined) el.textContent = text;
  return el;
}

function htmlTable(header, rows, numeric = []) {
  const t = document.createElement("table");
  const head = t.createTHead().insertRow();
  for (const h of header) head.appendChild(document.createElement("th")).textContent = h;
  const body = t.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    row.forEach((cell, i) => {
      const td = tr.insertCell();
      td.textContent = cell;
      if (numeric.includes(i)) td.className = "num";
    });
  }
  return t;
}

function run(fn) {
  $("error").textContent = "";
  try {
    fn();
  } catch (e) {
    $("error").textContent = String(e);
  }
}

function generate() {
  const doc = JSON.parse(synth($("hps").value, num("datasets"), num("rho"), num("seed")));
  $("space").value = doc.space;
  $("scores").value = doc.scores;
}

function showRanking() {
  const doc = JSON.parse(rank($("space").value, $("scores").value, num("threshold"), $("split").value, num("top")));
  const rows = doc.entries.map((e) => [
    e.rank, ...e.values, e.s_sum.toFixed(4), e.coverage_size,
    e.coverage.map((c) => `${c.dataset}/${c.train_size}`).join(" "),
  ]);
  const n = doc.hyperparameters.length;
  const out = $("ranking");
  out.replaceChildren();
  out.appendChild(document.createElement("p")).textContent =
    `${doc.total} candidates over ${doc.contexts.length} contexts` +
    (doc.skipped.length ? `, ${doc.skipped.length} degenerate contexts skipped` : "");
  out.appendChild(htmlTable(["rank", ...doc.hyperparameters, "S_n", "|coverage|", "coverage"], rows, [0, n + 1, n + 2]));
}

function showBudget() {
  const doc = JSON.parse(budget($("space").value, $("scores").value, num("threshold"), num("budget-max")));
  const svg = $("curve");
  svg.replaceChildren();
  const W = +svg.getAttribute("width"), H = +svg.getAttribute("height");
  const m = { l: 50, r: 20, t: 15, b: 35 };
  const pts = doc.points;
  const lo = Math.min(...pts.map((p) => p.mean)), hi = Math.max(...pts.map((p) => p.mean));
  const y0 = Math.max(0, lo - (hi - lo || 0.01) * 0.2), y1 = Math.min(1, hi + (hi - lo || 0.01) * 0.2);
  const x = (k) => m.l + ((k - 1) / Math.max(1, pts.length - 1)) * (W - m.l - m.r);
  const y = (v) => H - m.b - ((v - y0) / (y1 - y0 || 1)) * (H - m.t - m.b);

  svg.appendChild(svgEl("line", { x1: m.l, y1: H - m.b, x2: W - m.r, y2: H - m.b, stroke: "#999" }));
  svg.appendChild(svgEl("line", { x1: m.l, y1: m.t, x2: m.l, y2: H - m.b, stroke: "#999" }));
  for (let i = 0; i <= 4; i++) {
    const v = y0 + ((y1 - y0) * i) / 4;
    svg.appendChild(svgEl("text", { x: m.l - 6, y: y(v) + 4, "text-anchor": "end" }, v.toFixed(3)));
  }
  for (const p of pts) svg.appendChild(svgEl("text", { x: x(p.k), y: H - m.b + 15, "text-anchor": "middle" }, p.k));
  svg.appendChild(svgEl("text", { x: (W + m.l) / 2, y: H - 4, "text-anchor": "middle" }, "budget k"));
  svg.appendChild(svgEl("polyline", {
    points: pts.map((p) => `${x(p.k)},${y(p.mean)}`).join(" "), fill: "none", stroke: "#2563eb", "stroke-width": 2,
  }));
  for (const p of pts) {
    const dot = svgEl("circle", { cx: x(p.k), cy: y(p.mean), r: 3.5, fill: "#2563eb" });
    dot.appendChild(svgEl("title", {}, `k=${p.k}: ${p.mean.toFixed(4)}`));
    svg.appendChild(dot);
  }
}

function heatmap(entry) {
  const cell = 22, labelW = 70, units = entry.vectors.map((v) => v.unit);
  const w = labelW + entry.domain.length * cell, h = 20 + units.length * cell;
  const svg = svgEl("svg", { width: w, height: h });
  entry.domain.forEach((d, j) =>
    svg.appendChild(svgEl("text", { x: labelW + j * cell + cell / 2, y: 13, "text-anchor": "middle" }, d)));
  entry.vectors.forEach((v, i) => {
    svg.appendChild(svgEl("text", { x: labelW - 4, y: 20 + i * cell + 15, "text-anchor": "end" }, v.unit));
    v.probabilities.forEach((p, j) => {
      const r = svgEl("rect", {
        x: labelW + j * cell, y: 20 + i * cell, width: cell - 1, height: cell - 1,
        fill: `rgba(37, 99, 235, ${p.toFixed(3)})`, stroke: "#eee",
      });
      r.appendChild(svgEl("title", {}, `${v.unit}, ${entry.hp}=${entry.domain[j]}: ${p.toFixed(3)}`));
      svg.appendChild(r);
    });
  });
  return svg;
}

function showImportance() {
  const reports = JSON.parse(importance($("space").value, $("scores").value, num("permutations"), num("perm-seed")));
  const out = $("importance-out");
  out.replaceChildren();
  for (const rep of reports) {
    const label = rep.scope.mode === "train_size" ? `train_size ${rep.scope.train_size}` : "combined";
    out.appendChild(document.createElement("h3")).textContent = label;
    const rows = rep.entries.map((e) => [
      e.hp,
      e.js_score === null ? "-" : e.js_score.toFixed(4),
      e.js_pval === null ? "-" : e.js_pval.toFixed(3),
      e.error ?? "",
    ]);
    out.appendChild(htmlTable(["hp", "js_score", "js_pval", "error"], rows, [1, 2]));
    const maps = document.createElement("div");
    for (const e of rep.entries.filter((e) => e.vectors.length)) {
      const box = maps.appendChild(document.createElement("div"));
      box.className = "heat";
      box.appendChild(document.createElement("div")).textContent = `${e.hp}: share of top set per value`;
      box.appendChild(heatmap(e));
    }
    out.appendChild(maps);
  }
}

await init();
$("generate").onclick = () => run(generate);
$("rank").onclick = () => run(showRanking);
$("budget").onclick = () => run(showBudget);
$("importance").onclick = () => run(showImportance);
run(() => { generate(); showRanking(); showBudget(); });
