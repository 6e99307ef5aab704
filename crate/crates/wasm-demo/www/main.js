import init, { trajectory, lineshape, master_vs_model } from "./pkg/fano_tunnel_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function plot(canvas, x, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const ys = series.flatMap((s) => s.y);
  let lo = Math.min(...ys), hi = Math.max(...ys);
  if (hi - lo < 1e-12) { hi += 0.5; lo -= 0.5; }
  const x0 = x[0], x1 = x[x.length - 1];
  const px = (v) => pad + ((v - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (v) => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, pad + 4);
  ctx.fillText(lo.toPrecision(3), 2, h - pad + 4);
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 14);
  if (lo < 0 && hi > 0) {
    ctx.strokeStyle = "#ddd";
    ctx.beginPath(); ctx.moveTo(pad, py(0)); ctx.lineTo(w - pad, py(0)); ctx.stroke();
  }
  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v))));
    ctx.stroke();
  });
}

function legend(el, names) {
  el.innerHTML = names
    .map((n, k) => `<span style="color:${COLORS[k % COLORS.length]}">&#9632; ${n}</span>`)
    .join("");
}

function panel(id, run) {
  const root = document.getElementById(id);
  const value = (name) => {
    const el = root.querySelector(`[name=${name}]`);
    return el.type === "checkbox" ? el.checked : el.tagName === "SELECT" ? el.value : Number(el.value);
  };
  const info = root.querySelector(".info");
  const go = () => {
    info.classList.remove("error");
    try {
      run(value, root.querySelector("canvas"), root.querySelector(".legend"), info);
    } catch (e) {
      info.classList.add("error");
      info.textContent = String(e.message ?? e);
    }
  };
  root.querySelector("button").addEventListener("click", go);
  go();
}

await init();

panel("traj", (v, canvas, leg, info) => {
  const r = JSON.parse(trajectory(v("gamma"), v("gamma_prime"), v("epsilon"), v("single"), v("t_end"), v("n"), v("method")));
  const series = [{ y: r.p }, { y: r.delta }];
  const names = ["P", "delta"];
  if (!r.rates_error) {
    series.push({ y: r.r_d }, { y: r.r_u });
    names.push("R_d", "R_u");
  }
  plot(canvas, r.t, series);
  legend(leg, names);
  info.textContent = r.rates_error
    ? `Rates unavailable: ${r.rates_error}. Use more points to resolve the initial transient.`
    : `P(t_end) = ${r.p[r.p.length - 1].toFixed(6)}`;
});

panel("line", (v, canvas, leg, info) => {
  const r = JSON.parse(lineshape(v("gamma"), v("epsilon"), v("e0"), v("band_top"), v("span"), 400));
  plot(canvas, r.e, [{ y: r.exact }, { y: r.breit_wigner }]);
  legend(leg, ["exact density", "Breit-Wigner"]);
  info.textContent = `resonance ${r.resonance.toFixed(6)}, width ${r.width.toFixed(6)}, total weight ${r.completeness.toFixed(9)}`;
});

panel("cmp", (v, canvas, leg, info) => {
  const r = JSON.parse(master_vs_model(v("gamma"), v("gamma_prime"), v("epsilon"), v("t_end"), 401));
  plot(canvas, r.t, [{ y: r.model }, { y: r.master }]);
  legend(leg, ["exact model", "master equation"]);
  const f = (x) => x.toExponential(2);
  info.textContent =
    `RMS fit residuals. Model: two-exponential ${f(r.model_fits[0])}, single ${f(r.model_fits[1])}. ` +
    `Master: two-exponential ${f(r.master_fits[0])}, single ${f(r.master_fits[1])}.`;
});
