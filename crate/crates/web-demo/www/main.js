import init, { reconstructSpikes, haarDenoise, evidenceProfile } from "./pkg/robust_bcs_web.js";

const value = (form, name) => form.querySelector(`[name=${name}]`).value;
const num = (form, name) => Number(value(form, name));

function plot(canvas, series, { logX = false, xs = null } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.ys.filter(Number.isFinite));
  const lo = Math.min(...all), hi = Math.max(...all);
  const span = hi - lo || 1;
  const n = series[0].ys.length;
  const xOf = (i) => {
    if (!xs) return (i / (n - 1)) * (w - 20) + 10;
    const t = logX ? xs.map(Math.log10) : xs;
    return ((t[i] - t[0]) / (t[n - 1] - t[0])) * (w - 20) + 10;
  };
  const yOf = (v) => h - 10 - ((v - lo) / span) * (h - 20);
  for (const s of series) {
    ctx.strokeStyle = s.colour;
    ctx.beginPath();
    s.ys.forEach((v, i) => (i ? ctx.lineTo(xOf(i), yOf(v)) : ctx.moveTo(xOf(i), yOf(v))));
    ctx.stroke();
  }
}

function wire(id, run) {
  const form = document.getElementById(id);
  const out = form.querySelector(".out");
  form.querySelector("button").addEventListener("click", () => {
    try {
      const t0 = performance.now();
      const text = run(form, form.querySelector("canvas"));
      out.textContent = `${text}  (${(performance.now() - t0).toFixed(0)} ms)`;
    } catch (e) {
      out.textContent = `error: ${e.message ?? e}`;
    }
  });
}

function chirp(n, noise) {
  const gauss = () => Math.sqrt(-2 * Math.log(1 - Math.random())) * Math.cos(2 * Math.PI * Math.random());
  const clean = Array.from({ length: n }, (_, i) => Math.sin((2 * Math.PI * 8 * i * i) / (n * n)));
  return { clean, noisy: clean.map((v) => v + noise * gauss()) };
}

await init();

wire("recon", (f, canvas) => {
  const r = reconstructSpikes(num(f, "n"), num(f, "spikes"), value(f, "kind"), num(f, "k"),
    num(f, "noise"), value(f, "variant"), BigInt(num(f, "seed")));
  const est = r.estimate, bars = r.errorBars;
  plot(canvas, [
    { ys: Array.from(r.original), colour: "#999" },
    { ys: Array.from(est, (v, i) => v + bars[i]), colour: "#f3b0b0" },
    { ys: Array.from(est, (v, i) => v - bars[i]), colour: "#f3b0b0" },
    { ys: Array.from(est), colour: "#c0392b" },
  ]);
  return `RE = ${r.reconError.toExponential(3)}, ${r.modelSize} terms, sigma2 = ${r.sigma2.toExponential(3)}`;
});

wire("denoise", (f, canvas) => {
  const { clean, noisy } = chirp(num(f, "n"), num(f, "noise"));
  const res = Array.from(haarDenoise(Float64Array.from(noisy), num(f, "tau")));
  const kept = res.pop();
  const err = (a) => Math.sqrt(a.reduce((s, v, i) => s + (v - clean[i]) ** 2, 0) / a.length);
  plot(canvas, [
    { ys: noisy, colour: "#bbb" },
    { ys: clean, colour: "#2c3e50" },
    { ys: res, colour: "#c0392b" },
  ]);
  return `${kept} of ${res.length} coefficients kept; RMS error ${err(noisy).toFixed(4)} -> ${err(res).toFixed(4)}`;
});

wire("profile", (f, canvas) => {
  const flat = evidenceProfile(num(f, "n"), num(f, "spikes"), num(f, "k"), num(f, "noise"),
    BigInt(num(f, "seed")), 121);
  const xs = [], ys = [];
  for (let i = 0; i < flat.length; i += 2) { xs.push(flat[i]); ys.push(flat[i + 1]); }
  plot(canvas, [{ ys, colour: "#2980b9" }], { logX: true, xs });
  const best = ys.indexOf(Math.max(...ys));
  return `peak at sigma2 = ${xs[best].toExponential(3)} (fitted ${xs[60].toExponential(3)})`;
});
