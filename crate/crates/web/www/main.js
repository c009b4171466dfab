import init, { vpbHeatmap, piHeatmap, ltmOrbit, wassersteinMatching } from "./pkg/vpb_web.js";

const PAD = 28;
const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

// Maps data coordinates onto a canvas with an axis margin.
function frame(canvas, xmax, ymax) {
  const w = canvas.width - 2 * PAD, h = canvas.height - 2 * PAD;
  return {
    ctx: canvas.getContext("2d"),
    x: (v) => PAD + (v / xmax) * w,
    y: (v) => canvas.height - PAD - (v / ymax) * h,
    inv: (px, py) => [((px - PAD) / w) * xmax, ((canvas.height - PAD - py) / h) * ymax],
    xmax, ymax,
  };
}

function axes(f, xlabel, ylabel) {
  const { ctx } = f;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(f.x(0), f.y(f.ymax));
  ctx.lineTo(f.x(0), f.y(0));
  ctx.lineTo(f.x(f.xmax), f.y(0));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(xlabel, f.x(f.xmax) - 40, f.y(0) + 18);
  ctx.fillText(ylabel, 2, PAD - 10);
  ctx.fillText(f.xmax.toFixed(2), f.x(f.xmax) - 20, f.y(0) + 12);
  ctx.fillText(f.ymax.toFixed(2), 2, f.y(f.ymax) + 4);
}

function dot(f, [b, p], color, r = 3.5) {
  f.ctx.fillStyle = color;
  f.ctx.beginPath();
  f.ctx.arc(f.x(b), f.y(p), r, 0, 2 * Math.PI);
  f.ctx.fill();
}

function eventPoint(f, ev) {
  const r = ev.target.getBoundingClientRect();
  const [b, p] = f.inv(ev.clientX - r.left, ev.clientY - r.top);
  return [Math.max(0, b), Math.max(0, p)];
}

function removeNearest(points, q) {
  if (!points.length) return;
  let best = 0;
  points.forEach((pt, i) => {
    if (Math.hypot(pt[0] - q[0], pt[1] - q[1]) < Math.hypot(points[best][0] - q[0], points[best][1] - q[1])) best = i;
  });
  points.splice(best, 1);
}

function call(fn, msg) {
  try {
    msg.textContent = "";
    msg.className = "";
    return JSON.parse(fn());
  } catch (e) {
    msg.textContent = String(e);
    msg.className = "err";
    return null;
  }
}

// Diagram to vector.
const BMAX = 2, PMAX = 1;
const vecPoints = [[0.4, 0.3], [1.0, 0.7], [1.5, 0.15]];

function drawVec() {
  const df = frame($("vec-diagram"), BMAX, PMAX);
  const method = $("vec-method").value;
  const g = Math.max(1, Math.round(num("vec-grid")));
  const json = JSON.stringify(vecPoints);
  const heat = call(
    () => (method === "vpb"
      ? vpbHeatmap(json, num("vec-tau"), g, g, BMAX, PMAX)
      : piHeatmap(json, num("vec-sigma"), g, g, BMAX, PMAX)),
    $("vec-msg"),
  );
  axes(df, "birth", "persistence");
  if (heat) {
    df.ctx.strokeStyle = "rgba(31,119,180,.6)";
    for (const [x0, x1, y0, y1] of heat.squares) {
      df.ctx.strokeRect(df.x(x0), df.y(y1), df.x(x1) - df.x(x0), df.y(y0) - df.y(y1));
    }
  }
  vecPoints.forEach((p) => dot(df, p, "#1f77b4"));
  if (!heat) return;

  const canvas = $("vec-heat");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const max = Math.max(...heat.values, 1e-300);
  const cw = (canvas.width - 2 * PAD) / heat.nx, ch = (canvas.height - 2 * PAD) / heat.ny;
  for (let j = 0; j < heat.ny; j++) {
    for (let i = 0; i < heat.nx; i++) {
      const t = heat.values[j * heat.nx + i] / max;
      ctx.fillStyle = `rgb(${255 - 200 * t},${255 - 150 * t},${255 - 40 * t})`;
      ctx.fillRect(PAD + i * cw, canvas.height - PAD - (j + 1) * ch, cw + 0.5, ch + 0.5);
    }
  }
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const r = heat.region;
  ctx.fillText(`[${r.x0.toFixed(2)}, ${r.x1.toFixed(2)}] x [${r.y0.toFixed(2)}, ${r.y1.toFixed(2)}]`, PAD, canvas.height - 8);
  ctx.fillText(`max ${max.toExponential(3)}` + (heat.sigma ? `  sigma ${heat.sigma.toFixed(3)}` : ""), PAD, 16);
}

function wireVec() {
  const canvas = $("vec-diagram");
  canvas.addEventListener("click", (ev) => {
    const q = eventPoint(frame(canvas, BMAX, PMAX), ev);
    if (ev.shiftKey) removeNearest(vecPoints, q);
    else vecPoints.push(q);
    drawVec();
  });
  for (const id of ["vec-method", "vec-tau", "vec-sigma", "vec-grid"]) $(id).addEventListener("input", drawVec);
  $("vec-clear").addEventListener("click", () => { vecPoints.length = 0; drawVec(); });
}

// Orbit and H1.
function drawLtm() {
  const res = call(
    () => ltmOrbit(num("ltm-r"), Math.round(num("ltm-len")), num("ltm-x0"), num("ltm-y0"), num("ltm-cap")),
    $("ltm-msg"),
  );
  if (!res) return;
  const of = frame($("ltm-orbit"), 1, 1);
  axes(of, "x", "y");
  res.points.forEach((p) => dot(of, p, "#333", 1.5));
  const bmax = Math.max(0.05, ...res.diagram.map((d) => d[0])) * 1.1;
  const pmax = Math.max(0.05, ...res.diagram.map((d) => d[1])) * 1.1;
  const df = frame($("ltm-diagram"), bmax, pmax);
  axes(df, "birth", "persistence");
  res.diagram.forEach((p) => dot(df, p, "#d62728"));
  $("ltm-msg").className = "";
  $("ltm-msg").textContent = `${res.points.length} points, ${res.diagram.length} H1 classes`;
}

// Matching.
const MB = 2, MP = 1;
const diagA = [[0.3, 0.5], [1.2, 0.8]];
const diagB = [[0.5, 0.4], [1.0, 0.6], [1.6, 0.1]];

function drawMatch() {
  const f = frame($("match-canvas"), MB, MP);
  axes(f, "birth", "persistence");
  const out = $("match-out");
  const res = call(() => wassersteinMatching(JSON.stringify(diagA), JSON.stringify(diagB), num("match-p")), out);
  if (res) {
    f.ctx.strokeStyle = "#555";
    f.ctx.setLineDash([4, 3]);
    for (const pr of res.pairs) {
      f.ctx.beginPath();
      f.ctx.moveTo(f.x(pr.from[0]), f.y(pr.from[1]));
      f.ctx.lineTo(f.x(pr.to[0]), f.y(pr.to[1]));
      f.ctx.stroke();
    }
    f.ctx.setLineDash([]);
    out.className = "";
    out.textContent = `W = ${res.cost.toFixed(6)}\n` + res.pairs
      .map((pr) => `${pr.from_point === null ? "axis" : "A" + pr.from_point} -> ${pr.to_point === null ? "axis" : "B" + pr.to_point}`)
      .join("\n");
  }
  diagA.forEach((p) => dot(f, p, "#1f77b4"));
  diagB.forEach((p) => dot(f, p, "#d62728"));
}

function wireMatch() {
  const canvas = $("match-canvas");
  canvas.addEventListener("click", (ev) => {
    const target = document.querySelector("input[name=match-side]:checked").value === "a" ? diagA : diagB;
    const q = eventPoint(frame(canvas, MB, MP), ev);
    if (ev.shiftKey) removeNearest(target, q);
    else target.push(q);
    drawMatch();
  });
  $("match-p").addEventListener("input", drawMatch);
  $("match-clear").addEventListener("click", () => { diagA.length = 0; diagB.length = 0; drawMatch(); });
}

await init();
wireVec();
drawVec();
$("ltm-run").addEventListener("click", drawLtm);
drawLtm();
wireMatch();
drawMatch();
