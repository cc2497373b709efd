import init, {
  benchmark_series,
  trapping_demo,
  attractor_scatter,
  model_table,
  system_names,
} from "./pkg/rigode_wasm.js";

await init();

const $ = (id) => document.getElementById(id);

// ---- shared plotting helpers ------------------------------------------

function frame(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
}

function scaler(lo, hi, a, b) {
  const d = hi - lo || 1;
  return (v) => a + ((v - lo) / d) * (b - a);
}

function axisLabels(ctx, sx, sy, xr, yr, h, pad) {
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  for (let i = 0; i <= 4; i++) {
    const x = xr[0] + (i / 4) * (xr[1] - xr[0]);
    ctx.fillText(x.toPrecision(3), sx(x) - 10, h - pad.b + 14);
    const y = yr[0] + (i / 4) * (yr[1] - yr[0]);
    ctx.fillText(y.toPrecision(3), 4, sy(y) + 4);
  }
}

// ---- 1: tightness curves ----------------------------------------------

function drawBenchmark() {
  const data = benchmark_series(
    $("bm-system").value,
    Number($("bm-order").value),
    Number($("bm-step").value),
    Number($("bm-time").value),
  );
  const canvas = $("bm-canvas");
  const ctx = canvas.getContext("2d");
  const pad = { l: 48, r: 12, t: 12, b: 26 };
  frame(ctx, canvas.width, canvas.height, pad);
  if (data.length === 0) {
    ctx.fillStyle = "#b00020";
    ctx.fillText("run failed (enclosure rejected this step size?)", pad.l + 10, pad.t + 20);
    return;
  }
  const ts = [], slo = [], sho = [];
  for (let i = 0; i < data.length; i += 3) {
    ts.push(data[i]); slo.push(data[i + 1]); sho.push(data[i + 2]);
  }
  const ymin = Math.min(...slo, ...sho), ymax = Math.max(...slo, ...sho);
  const sx = scaler(ts[0], ts[ts.length - 1], pad.l, canvas.width - pad.r);
  const sy = scaler(ymin, ymax, canvas.height - pad.b, pad.t);
  axisLabels(ctx, sx, sy, [ts[0], ts[ts.length - 1]], [ymin, ymax], canvas.height, pad);

  const line = (ys, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    ys.forEach((v, i) => (i ? ctx.lineTo(sx(ts[i]), sy(v)) : ctx.moveTo(sx(ts[i]), sy(v))));
    ctx.stroke();
  };
  line(slo, "#c05000");
  line(sho, "#0050c0");
  ctx.fillStyle = "#c05000"; ctx.fillText("explicit (predictor only)", pad.l + 12, pad.t + 16);
  ctx.fillStyle = "#0050c0"; ctx.fillText("predictor + corrector", pad.l + 12, pad.t + 32);
}

// ---- 2: trapping region ------------------------------------------------

let scatterCache = null;

function drawTrapping() {
  $("trap-status").textContent = "computing…";
  $("trap-status").className = "";
  // let the status paint before the wasm call blocks the thread
  setTimeout(() => {
    const res = JSON.parse(
      trapping_demo(
        Number($("trap-pieces").value),
        Number($("trap-order").value),
        Number($("trap-tol").value),
      ),
    );
    if (!scatterCache) scatterCache = attractor_scatter(1500);

    const canvas = $("trap-canvas");
    const ctx = canvas.getContext("2d");
    const pad = { l: 56, r: 12, t: 12, b: 26 };
    frame(ctx, canvas.width, canvas.height, pad);

    const my = 0.32, mz = 0.0009; // view margins around B
    const sx = scaler(res.b_y[0] - my, res.b_y[1] + my, pad.l, canvas.width - pad.r);
    const sy = scaler(res.b_z[0] - mz, res.b_z[1] + mz, canvas.height - pad.b, pad.t);
    axisLabels(ctx, sx, sy,
      [res.b_y[0] - my, res.b_y[1] + my],
      [res.b_z[0] - mz, res.b_z[1] + mz], canvas.height, pad);

    // backdrop scatter
    ctx.fillStyle = "rgba(120,120,120,.45)";
    for (let i = 0; i < scatterCache.length; i += 2) {
      ctx.fillRect(sx(scatterCache[i]) - 1, sy(scatterCache[i + 1]) - 1, 2, 2);
    }

    // the candidate box B
    ctx.strokeStyle = "#b00020";
    ctx.lineWidth = 2;
    ctx.strokeRect(
      sx(res.b_y[0]), sy(res.b_z[1]),
      sx(res.b_y[1]) - sx(res.b_y[0]), sy(res.b_z[0]) - sy(res.b_z[1]),
    );

    // image enclosures
    for (const p of res.pieces) {
      if (p.error) continue;
      ctx.fillStyle = p.inside ? "rgba(20,140,60,.35)" : "rgba(220,60,20,.55)";
      const x0 = sx(p.image_y[0]), x1 = sx(p.image_y[1]);
      const y0 = sy(p.image_z[1]), y1 = sy(p.image_z[0]);
      ctx.fillRect(x0, y0, Math.max(x1 - x0, 1.5), Math.max(y1 - y0, 1.5));
    }

    const failures = res.pieces.filter((p) => !p.inside).length;
    const el = $("trap-status");
    el.textContent = res.verified
      ? "verified: every image strictly inside"
      : `${failures}/${res.pieces.length} pieces not contained (raise order / slabs)`;
    el.className = res.verified ? "ok" : "bad";
  }, 30);
}

// ---- 3: order models ----------------------------------------------------

function drawModels() {
  const t = model_table(Number($("model-n").value), Number($("model-cf").value), 30);
  const canvas = $("model-canvas");
  const ctx = canvas.getContext("2d");
  const pad = { l: 48, r: 12, t: 12, b: 26 };
  frame(ctx, canvas.width, canvas.height, pad);
  const ms = [], gs = [], ratios = [];
  for (let i = 0; i < t.length; i += 3) {
    ms.push(t[i]); gs.push(t[i + 1]); ratios.push(t[i + 2]);
  }
  const ymax = Math.max(2.05, ...ratios);
  const sx = scaler(ms[0], ms[ms.length - 1], pad.l, canvas.width - pad.r);
  const sy = scaler(0.9, ymax, canvas.height - pad.b, pad.t);
  axisLabels(ctx, sx, sy, [ms[0], ms[ms.length - 1]], [0.9, ymax], canvas.height, pad);

  ctx.strokeStyle = "#bbb";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(pad.l, sy(2)); ctx.lineTo(canvas.width - pad.r, sy(2));
  ctx.stroke();
  ctx.setLineDash([]);

  const line = (ys, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    ys.forEach((v, i) => (i ? ctx.lineTo(sx(ms[i]), sy(v)) : ctx.moveTo(sx(ms[i]), sy(v))));
    ctx.stroke();
  };
  line(gs, "#0050c0");
  line(ratios, "#c05000");
  ctx.fillStyle = "#0050c0"; ctx.fillText("step-ratio g(m), limit 2", pad.l + 12, pad.t + 16);
  ctx.fillStyle = "#c05000"; ctx.fillText("cost ratio per step", pad.l + 12, pad.t + 32);
}

// ---- wiring -------------------------------------------------------------

for (const name of system_names().split(",")) {
  const opt = document.createElement("option");
  opt.value = opt.textContent = name;
  $("bm-system").appendChild(opt);
}
$("bm-run").onclick = drawBenchmark;
$("trap-run").onclick = drawTrapping;
$("model-run").onclick = drawModels;

drawBenchmark();
drawModels();
drawTrapping();
