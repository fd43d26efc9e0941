#include "memtrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "memtrack/error.hpp"

namespace memtrack {

std::string to_string(Tier tier) {
  switch (tier) {
    case Tier::Easy: return "easy";
    case Tier::Medium: return "medium";
    case Tier::DriftHeavy: return "drift";
  }
  return "easy";
}

Tier parse_tier(const std::string& name) {
  if (name == "easy") return Tier::Easy;
  if (name == "medium") return Tier::Medium;
  if (name == "drift" || name == "drift-heavy") return Tier::DriftHeavy;
  throw ConfigError("unknown tier '" + name + "'");
}

void SyntheticSpec::validate() const {
  MEMTRACK_EXPECTS(width >= 16 && height >= 16, "synthetic: canvas too small");
  MEMTRACK_EXPECTS(length >= 1, "synthetic: empty sequence");
  MEMTRACK_EXPECTS(target_width > 2.0 && target_height > 2.0, "synthetic: target too small");
  MEMTRACK_EXPECTS(scale_amplitude >= 0.0 && scale_amplitude < 0.5, "synthetic: scale amplitude out of range");
  const double max_w = target_width * (1.0 + scale_amplitude), max_h = target_height * (1.0 + scale_amplitude);
  MEMTRACK_EXPECTS(max_w < static_cast<double>(width) && max_h < static_cast<double>(height),
                   "synthetic: target larger than canvas");
  MEMTRACK_EXPECTS(drift >= 0.0 && drift <= 1.0, "synthetic: drift must lie in [0,1]");
  MEMTRACK_EXPECTS(jitter >= 0.0 && scale_period > 0.0, "synthetic: bad jitter or period");
  for (const auto& o : occlusions) {
    MEMTRACK_EXPECTS(o.coverage >= 0.0 && o.coverage <= 1.0, "synthetic: occlusion coverage out of range");
  }
}

namespace {

// Triangle-wave reflection of x into [lo, hi].
double bounce(double x, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return (lo + hi) / 2.0;
  double y = std::fmod(x - lo, 2.0 * span);
  if (y < 0.0) y += 2.0 * span;
  return lo + (y <= span ? y : 2.0 * span - y);
}

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

std::array<float, 3> SyntheticVideo::shade(const Texture& t, double u, double v) {
  std::array<float, 3> out{};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double c = t.base[ch];
    for (std::size_t k = 0; k < 3; ++k) {
      c += 0.5 * t.colors[k][ch] *
           std::sin(2.0 * std::numbers::pi * (t.freq_u[k] * u + t.freq_v[k] * v) + t.phase[k]);
    }
    out[ch] = clamp01(c);
  }
  return out;
}

SyntheticVideo::SyntheticVideo(SyntheticSpec spec, std::string name) : spec_(std::move(spec)), name_(std::move(name)) {
  spec_.validate();
  std::mt19937_64 rng(spec_.seed * 0x2545f4914f6cdd1dULL + 17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto texture = [&](double saturation) {
    Texture t;
    for (auto& b : t.base) b = static_cast<float>(0.2 + 0.6 * unit(rng));
    for (auto& c : t.colors) {
      for (auto& ch : c) ch = static_cast<float>(saturation * (unit(rng) * 2.0 - 1.0));
    }
    for (std::size_t k = 0; k < 3; ++k) {
      t.freq_u[k] = (0.5 + 2.0 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
      t.freq_v[k] = 0.5 + 2.0 * unit(rng);
      t.phase[k] = 2.0 * std::numbers::pi * unit(rng);
    }
    return t;
  };

  const double W = static_cast<double>(spec_.width), H = static_cast<double>(spec_.height);
  // Smooth tinted background with faint high-frequency grain.
  const Texture bg = texture(0.25);
  background_ = Image(spec_.width, spec_.height);
  std::normal_distribution<double> grain(0.0, 0.02);
  for (std::size_t y = 0; y < spec_.height; ++y) {
    for (std::size_t x = 0; x < spec_.width; ++x) {
      const auto c = shade(bg, (static_cast<double>(x) + 0.5) / W * 1.5, (static_cast<double>(y) + 0.5) / H * 1.5);
      for (std::size_t ch = 0; ch < 3; ++ch) background_.at(x, y, ch) = clamp01(c[ch] + grain(rng));
    }
  }

  start_look_ = texture(0.8);
  end_look_ = texture(0.8);
  for (std::size_t i = 0; i < spec_.distractors; ++i) {
    Mover m;
    m.w = spec_.target_width * (0.7 + 0.6 * unit(rng));
    m.h = spec_.target_height * (0.7 + 0.6 * unit(rng));
    m.x = m.w / 2.0 + unit(rng) * (W - m.w);
    m.y = m.h / 2.0 + unit(rng) * (H - m.h);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const double speed = 0.3 + 1.2 * unit(rng);
    m.vx = speed * std::cos(angle);
    m.vy = speed * std::sin(angle);
    m.texture = texture(0.8);
    distractors_.push_back(m);
  }

  const double max_w = spec_.target_width * (1.0 + spec_.scale_amplitude);
  const double max_h = spec_.target_height * (1.0 + spec_.scale_amplitude);
  std::normal_distribution<double> noise(0.0, 1.0);
  boxes_.reserve(spec_.length);
  for (std::size_t t = 0; t < spec_.length; ++t) {
    const double td = static_cast<double>(t);
    const double s = 1.0 + spec_.scale_amplitude * std::sin(2.0 * std::numbers::pi * td / spec_.scale_period);
    const double w = spec_.target_width * s, h = spec_.target_height * s;
    double cx = bounce(spec_.start_x + spec_.velocity_x * td, max_w / 2.0, W - max_w / 2.0);
    double cy = bounce(spec_.start_y + spec_.velocity_y * td, max_h / 2.0, H - max_h / 2.0);
    const double jx = noise(rng), jy = noise(rng);
    if (t > 0) {
      cx += spec_.jitter * jx;
      cy += spec_.jitter * jy;
    }
    cx = std::clamp(cx, w / 2.0, W - w / 2.0);
    cy = std::clamp(cy, h / 2.0, H - h / 2.0);
    boxes_.push_back({cx, cy, w, h});
  }
}

std::vector<std::array<double, 4>> SyntheticVideo::occluders(std::size_t index) const {
  std::vector<std::array<double, 4>> out;
  const auto& b = boxes_.at(index);
  for (const auto& o : spec_.occlusions) {
    if (index < o.start || index >= o.start + o.duration || o.coverage <= 0.0) continue;
    const double x0 = b.corner_x(), y0 = b.corner_y();
    // Full height, leftmost `coverage` of the width, with a one-pixel margin
    // so rasterization never hides less than requested.
    out.push_back({x0 - 1.0, y0 - 1.0, x0 + o.coverage * b.width + 1.0, y0 + b.height + 1.0});
  }
  return out;
}

Image SyntheticVideo::frame(std::size_t index) const {
  MEMTRACK_EXPECTS(index < spec_.length, "synthetic: frame index out of range");
  Image img = background_;
  const double td = static_cast<double>(index);
  const double W = static_cast<double>(spec_.width), H = static_cast<double>(spec_.height);

  auto paint = [&](double cx, double cy, double w, double h, double exponent, auto&& color) {
    const long x0 = std::max(0L, static_cast<long>(std::floor(cx - w / 2.0)));
    const long x1 = std::min(static_cast<long>(spec_.width) - 1, static_cast<long>(std::ceil(cx + w / 2.0)));
    const long y0 = std::max(0L, static_cast<long>(std::floor(cy - h / 2.0)));
    const long y1 = std::min(static_cast<long>(spec_.height) - 1, static_cast<long>(std::ceil(cy + h / 2.0)));
    for (long y = y0; y <= y1; ++y) {
      for (long x = x0; x <= x1; ++x) {
        const double u = (static_cast<double>(x) + 0.5 - (cx - w / 2.0)) / w;
        const double v = (static_cast<double>(y) + 0.5 - (cy - h / 2.0)) / h;
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
        if (std::pow(std::abs(2.0 * u - 1.0), exponent) + std::pow(std::abs(2.0 * v - 1.0), exponent) > 1.0) continue;
        const auto c = color(u, v);
        for (std::size_t ch = 0; ch < 3; ++ch) img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), ch) = c[ch];
      }
    }
  };

  for (const auto& m : distractors_) {
    const double cx = bounce(m.x + m.vx * td, m.w / 2.0, W - m.w / 2.0);
    const double cy = bounce(m.y + m.vy * td, m.h / 2.0, H - m.h / 2.0);
    paint(cx, cy, m.w, m.h, 4.0, [&](double u, double v) { return shade(m.texture, u, v); });
  }

  const double alpha = spec_.length > 1 ? spec_.drift * td / static_cast<double>(spec_.length - 1) : 0.0;
  const auto& b = boxes_[index];
  // Rounded rectangle morphing towards an ellipse as the appearance drifts.
  const double exponent = 8.0 - 6.0 * alpha;
  paint(b.cx, b.cy, b.width, b.height, exponent, [&](double u, double v) {
    const auto a = shade(start_look_, u, v);
    const auto e = shade(end_look_, u, v);
    std::array<float, 3> c{};
    for (std::size_t ch = 0; ch < 3; ++ch) c[ch] = static_cast<float>((1.0 - alpha) * a[ch] + alpha * e[ch]);
    return c;
  });

  for (const auto& r : occluders(index)) {
    const long x0 = std::max(0L, static_cast<long>(std::floor(r[0])));
    const long x1 = std::min(static_cast<long>(spec_.width), static_cast<long>(std::ceil(r[2])));
    const long y0 = std::max(0L, static_cast<long>(std::floor(r[1])));
    const long y1 = std::min(static_cast<long>(spec_.height), static_cast<long>(std::ceil(r[3])));
    for (long y = y0; y < y1; ++y) {
      for (long x = x0; x < x1; ++x) {
        const float stripe = ((x / 3 + y / 3) % 2 == 0) ? 0.35f : 0.45f;
        for (std::size_t ch = 0; ch < 3; ++ch) img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), ch) = stripe;
      }
    }
  }
  quantize_8bit(img);
  return img;
}

SyntheticSpec tier_spec(Tier tier, std::uint64_t seed, std::size_t length) {
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(tier) * 7919ULL + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  SyntheticSpec s;
  s.seed = seed;
  s.length = length;
  s.target_width = between(18.0, 30.0);
  s.target_height = between(18.0, 30.0);
  s.start_x = between(50.0, 110.0);
  s.start_y = between(50.0, 110.0);
  const double angle = between(0.0, 2.0 * std::numbers::pi);
  double speed = 0.0;
  const double occlusion_start = between(30.0, 80.0);
  switch (tier) {
    case Tier::Easy:
      speed = between(0.3, 1.0);
      s.jitter = 0.3;
      s.scale_amplitude = 0.05;
      s.distractors = unit(rng) < 0.5 ? 0 : 1;
      break;
    case Tier::Medium:
      speed = between(1.0, 2.0);
      s.jitter = 0.8;
      s.scale_amplitude = 0.12;
      s.drift = 0.3;
      s.distractors = 2;
      s.occlusions.push_back({static_cast<std::size_t>(occlusion_start), 8, 0.4});
      break;
    case Tier::DriftHeavy:
      speed = between(0.6, 1.5);
      s.jitter = 0.5;
      s.scale_amplitude = 0.1;
      s.drift = 1.0;
      s.distractors = 1;
      s.occlusions.push_back({static_cast<std::size_t>(occlusion_start), 6, 0.3});
      break;
  }
  s.velocity_x = speed * std::cos(angle);
  s.velocity_y = speed * std::sin(angle);
  s.scale_period = between(40.0, 90.0);
  return s;
}

namespace {

SuiteEntry make_entry(Tier tier, std::uint64_t seed, std::size_t length) {
  char name[48];
  std::snprintf(name, sizeof name, "seq%04llu_%s", static_cast<unsigned long long>(seed), to_string(tier).c_str());
  return {name, tier, tier_spec(tier, seed, length)};
}

}  // namespace

std::vector<SuiteEntry> benchmark_suite(std::size_t count, std::size_t length) {
  std::vector<SuiteEntry> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto tier = static_cast<Tier>(std::min<std::size_t>(2, i * 3 / count));
    out.push_back(make_entry(tier, i, length));
  }
  return out;
}

std::vector<SuiteEntry> training_suite(std::size_t count, std::size_t length, std::uint64_t first_seed) {
  std::vector<SuiteEntry> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_entry(static_cast<Tier>(i % 3), first_seed + i, length));
  return out;
}

}  // namespace memtrack
