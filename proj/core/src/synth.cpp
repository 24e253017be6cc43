#include "evf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "evf/errors.hpp"
#include "evf/rng.hpp"

namespace evf {

namespace {

constexpr double kLiquid = 205.0;
constexpr double kVapor = 55.0;
constexpr double kTwoPi = 6.283185307179586476925286766559;

double smoothstep(double edge0, double edge1, double x) {
  double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double wrap(double v, double extent) {
  v = std::fmod(v, extent);
  return v < 0 ? v + extent : v;
}

struct Canvas {
  int w, h;
  std::vector<double> px;
  Canvas(int w_, int h_) : w(w_), h(h_), px(std::size_t(w_) * h_) {}
  void fill(double v) { std::fill(px.begin(), px.end(), v); }
  double& at(int y, int x) { return px[std::size_t(y) * w + x]; }
  // Darken toward `target` with weight m in [0,1].
  void darken(int y, int x, double m, double target = kVapor) {
    double& v = px[std::size_t(y) * w + x];
    v = v + (target - v) * m;
  }
};

struct Disc {
  double x0, y0, r, vx, vy_amp, vy_freq, phase;
};

struct EllipseBubble {
  double x0, y0, a, b, vx;
};

// --- per-regime constant bundles, drawn once from the seed ---

struct RegimeConstants {
  std::vector<Disc> discs;             // B
  std::vector<EllipseBubble> ellipses; // EB
  double plug_period = 0, plug_speed = 0, plug_phase = 0;          // S
  double ss_level = 0, ss_drift_amp = 0, ss_drift_freq = 0;        // SS
  double sw_amp = 0, sw_lambda = 0, sw_speed = 0, sw_phase = 0;    // SW
  double film_lambda1 = 0, film_lambda2 = 0, film_speed = 0,
         film_phase1 = 0, film_phase2 = 0, core_lambda = 0, core_speed = 0;  // A
  std::vector<int> u_modes;            // U: active sub-morphology per frame
  std::vector<double> u_flicker;       // U: per-frame brightness offset
};

std::vector<Disc> make_discs(Rng& rng, const SynthParams& p, int count, double rmin, double rmax) {
  std::vector<Disc> discs;
  discs.reserve(count);
  for (int i = 0; i < count; ++i) {
    Disc d;
    d.x0 = rng.uniform(0, p.width);
    d.y0 = rng.uniform(0, p.height);
    d.r = rng.uniform(rmin, rmax);
    d.vx = p.flow_speed * rng.uniform(0.8, 1.25);
    d.vy_amp = 1.2 * rng.uniform(0.4, 1.0);
    d.vy_freq = 0.25 * rng.uniform(0.6, 1.4) * (p.flow_speed == 0 ? 0.0 : 1.0);
    d.phase = rng.uniform(0, kTwoPi);
    discs.push_back(d);
  }
  return discs;
}

RegimeConstants make_constants(const SynthParams& p) {
  Rng rng(p.seed * 0x9e3779b97f4a7c15ULL + std::uint64_t(regime_code(p.regime)));
  RegimeConstants c;
  const double area = double(p.width) * p.height;

  // Bubbly: many small discs everywhere.
  int nb = std::max(4, int(p.feature_density * area / 70.0));
  {
    Rng r = rng.fork(1);
    c.discs = make_discs(r, p, nb, 1.8, 3.2);
  }

  // Elongated bubbly: fewer, stretched bubbles clustered in the mid band.
  {
    Rng r = rng.fork(2);
    int ne = std::max(3, nb / 3);
    int clusters = std::max(1, ne / 3);
    for (int i = 0; i < ne; ++i) {
      int cidx = int(r.uniform_int(clusters));
      double cx = wrap(0.13 * area * cidx / clusters + r.uniform(0, p.width / double(clusters)) +
                           cidx * p.width / double(clusters),
                       p.width);
      EllipseBubble e;
      e.x0 = wrap(cx + r.uniform(-4.0, 4.0), p.width);
      e.y0 = p.height * r.uniform(0.32, 0.68);
      e.a = r.uniform(6.0, 11.0);
      e.b = r.uniform(2.0, 3.2);
      e.vx = p.flow_speed * r.uniform(0.9, 1.15);
      c.ellipses.push_back(e);
    }
  }

  {
    Rng r = rng.fork(3);
    c.plug_period = std::max(16.0, p.width / 2.0) * r.uniform(0.9, 1.1);
    c.plug_speed = 2.0 * p.flow_speed;
    c.plug_phase = r.uniform(0, c.plug_period);
  }
  {
    Rng r = rng.fork(4);
    c.ss_level = p.height * r.uniform(0.48, 0.56);
    c.ss_drift_amp = 1.6;
    c.ss_drift_freq = (p.flow_speed / 110.0) * r.uniform(0.9, 1.1);
  }
  {
    Rng r = rng.fork(5);
    c.sw_amp = 0.1 * p.height * r.uniform(0.9, 1.2);
    c.sw_lambda = p.width / r.uniform(2.0, 2.6);
    c.sw_speed = 1.4 * p.flow_speed;
    c.sw_phase = r.uniform(0, kTwoPi);
  }
  {
    Rng r = rng.fork(6);
    c.film_lambda1 = p.width / r.uniform(1.6, 2.2);
    c.film_lambda2 = p.width / r.uniform(2.4, 3.2);
    c.film_speed = 1.6 * p.flow_speed;
    c.film_phase1 = r.uniform(0, kTwoPi);
    c.film_phase2 = r.uniform(0, kTwoPi);
    c.core_lambda = p.width / r.uniform(3.0, 4.0);
    c.core_speed = 2.2 * p.flow_speed;
  }

  // Unstable: seeded switching schedule plus a bursty brightness flicker.
  {
    Rng r = rng.fork(7);
    c.u_modes.resize(p.frame_count);
    c.u_flicker.resize(p.frame_count);
    const int modes[4] = {0, 1, 2, 3};  // bubbly, slug, wavy, annular
    int k = 0;
    while (k < p.frame_count) {
      int seg = 6 + int(r.uniform_int(13));
      int mode = modes[r.uniform_int(4)];
      for (int j = 0; j < seg && k < p.frame_count; ++j, ++k) c.u_modes[k] = mode;
    }
    double level = 0.0;
    double scale = p.flow_speed == 0 ? 0.0 : 1.0;
    for (int i = 0; i < p.frame_count; ++i) {
      level = 0.9 * level + scale * r.uniform(-3.0, 3.0);
      c.u_flicker[i] = level;
    }
  }
  return c;
}

// --- renderers ---

void render_discs(Canvas& f, const std::vector<Disc>& discs, int k) {
  for (const Disc& d : discs) {
    double cx = wrap(d.x0 + d.vx * k, f.w);
    double cy = wrap(d.y0 + d.vy_amp * std::sin(d.vy_freq * k + d.phase), f.h);
    int x_lo = int(std::floor(cx - d.r - 1.5)), x_hi = int(std::ceil(cx + d.r + 1.5));
    int y_lo = int(std::floor(cy - d.r - 1.5)), y_hi = int(std::ceil(cy + d.r + 1.5));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        double dist = std::hypot(x - cx, y - cy);
        double m = 1.0 - smoothstep(d.r - 0.9, d.r + 0.9, dist);
        if (m > 0)
          f.darken(int(wrap(y, f.h)), int(wrap(x, f.w)), 0.95 * m);
      }
    }
  }
}

void render_ellipses(Canvas& f, const std::vector<EllipseBubble>& es, int k) {
  for (const EllipseBubble& e : es) {
    double cx = wrap(e.x0 + e.vx * k, f.w);
    int x_lo = int(std::floor(cx - e.a - 1.5)), x_hi = int(std::ceil(cx + e.a + 1.5));
    int y_lo = int(std::floor(e.y0 - e.b - 1.5)), y_hi = int(std::ceil(e.y0 + e.b + 1.5));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        double q = std::hypot((x - cx) / e.a, (y - e.y0) / e.b);
        double m = 1.0 - smoothstep(1.0 - 0.9 / e.b, 1.0 + 0.9 / e.b, q);
        if (m > 0)
          f.darken(int(wrap(y, f.h)), int(wrap(x, f.w)), 0.92 * m);
      }
    }
  }
}

void render_slug(Canvas& f, const RegimeConstants& c, int k) {
  const double y_top = 0.12 * f.h, y_bot = 0.88 * f.h;
  const double wobble = 0.6 * std::sin(0.21 * c.plug_speed * k);
  for (int x = 0; x < f.w; ++x) {
    double u = wrap(x - c.plug_speed * k + c.plug_phase, c.plug_period) / c.plug_period;
    // rounded plug occupying roughly half the period
    double along = smoothstep(0.03, 0.14, u) * (1.0 - smoothstep(0.52, 0.63, u));
    if (along <= 0) continue;
    for (int y = 0; y < f.h; ++y) {
      double vert = smoothstep(y_top - 1.2 + wobble, y_top + 1.2 + wobble, double(y)) *
                    (1.0 - smoothstep(y_bot - 1.2 - wobble, y_bot + 1.2 - wobble, double(y)));
      double m = along * vert;
      if (m > 0) f.darken(y, x, 0.93 * m);
    }
  }
}

void render_stratified(Canvas& f, double level, double amp, double lambda, double phase_px, int) {
  for (int x = 0; x < f.w; ++x) {
    double y_if = level + (amp == 0 ? 0.0 : amp * std::sin(kTwoPi * (x - phase_px) / lambda));
    for (int y = 0; y < f.h; ++y) {
      // vapor above the interface, liquid below
      double m = 1.0 - smoothstep(y_if - 1.4, y_if + 1.4, double(y));
      if (m > 0) f.darken(y, x, 0.9 * m);
    }
  }
}

void render_annular(Canvas& f, const RegimeConstants& c, int k) {
  for (int x = 0; x < f.w; ++x) {
    double tau_t = 2.2 + 0.9 * std::sin(kTwoPi * (x - c.film_speed * k) / c.film_lambda1 + c.film_phase1);
    double tau_b = 2.2 + 0.9 * std::sin(kTwoPi * (x - 0.8 * c.film_speed * k) / c.film_lambda2 + c.film_phase2);
    double ripple_x = 0.5 * (1.0 + std::sin(kTwoPi * (x - c.core_speed * k) / c.core_lambda));
    for (int y = 0; y < f.h; ++y) {
      double top = 1.0 - smoothstep(tau_t - 1.0, tau_t + 1.0, double(y));
      double bot = smoothstep(f.h - 1 - tau_b - 1.0, f.h - 1 - tau_b + 1.0, double(y));
      double film = std::max(top, bot);
      if (film > 0) f.darken(y, x, 0.95 * film);
      if (film < 0.5) {
        double ripple_y = 0.5 * (1.0 + std::sin(kTwoPi * y / (f.h / 3.0)));
        f.at(y, x) -= 26.0 * ripple_x * ripple_y * (1.0 - film);
      }
    }
  }
}

void render_frame(Canvas& f, const SynthParams& p, const RegimeConstants& c, int k) {
  f.fill(kLiquid);
  switch (p.regime) {
    case FlowRegime::B:
      render_discs(f, c.discs, k);
      break;
    case FlowRegime::EB:
      render_ellipses(f, c.ellipses, k);
      break;
    case FlowRegime::S:
      render_slug(f, c, k);
      break;
    case FlowRegime::SS: {
      double drift = c.ss_drift_amp * std::sin(kTwoPi * c.ss_drift_freq * k);
      render_stratified(f, c.ss_level + drift, 0.0, 1.0, 0.0, k);
      break;
    }
    case FlowRegime::SW:
      render_stratified(f, p.height * 0.5, c.sw_amp, c.sw_lambda,
                        c.sw_speed * k + c.sw_phase * c.sw_lambda / kTwoPi, k);
      break;
    case FlowRegime::A:
      render_annular(f, c, k);
      break;
    case FlowRegime::U: {
      switch (c.u_modes[k]) {
        case 0: render_discs(f, c.discs, k); break;
        case 1: render_slug(f, c, k); break;
        case 2:
          render_stratified(f, p.height * 0.5, c.sw_amp, c.sw_lambda,
                            c.sw_speed * k + c.sw_phase * c.sw_lambda / kTwoPi, k);
          break;
        default: render_annular(f, c, k); break;
      }
      for (double& v : f.px) v += c.u_flicker[k];
      break;
    }
  }
}

}  // namespace

SynthResult synth_regime(const SynthParams& p) {
  if (p.width <= 0 || p.height <= 0 || p.frame_count <= 0)
    throw InvalidParams("synth extents must be positive");
  if (p.fps <= 0) throw InvalidParams("fps must be positive");
  if (p.feature_density <= 0 || p.feature_density > 1)
    throw InvalidParams("feature_density must be in (0, 1]");
  if (p.flow_speed < 0) throw InvalidParams("flow_speed must be non-negative");

  RegimeConstants constants = make_constants(p);

  SynthResult out;
  out.frames.width = p.width;
  out.frames.height = p.height;
  out.frames.dt_us = std::max<std::uint64_t>(1, std::llround(1e6 / p.fps));
  out.frames.t0_us = 0;
  out.frames.frames.reserve(p.frame_count);
  out.labels.assign(p.frame_count, p.regime);

  Canvas canvas(p.width, p.height);
  for (int k = 0; k < p.frame_count; ++k) {
    render_frame(canvas, p, constants, k);
    std::vector<std::uint8_t> frame(canvas.px.size());
    for (std::size_t i = 0; i < frame.size(); ++i)
      frame[i] = static_cast<std::uint8_t>(std::clamp(std::lround(canvas.px[i]), 0L, 255L));
    out.frames.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace evf
