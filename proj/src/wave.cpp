#include "wecmarl/wave.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wecmarl/rng.hpp"

namespace wecmarl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Unnormalized JONSWAP shape: fp^4 f^-5 exp(-1.25 (fp/f)^4) gamma^r.
double jonswap_shape(double f, double fp, double gamma) {
  const double sigma = (f <= fp) ? 0.07 : 0.09;
  const double df = (f - fp) / (sigma * fp);
  const double r = std::exp(-0.5 * df * df);
  return std::pow(fp, 4) * std::pow(f, -5.0) *
         std::exp(-1.25 * std::pow(fp / f, 4)) * std::pow(gamma, r);
}

// Composite Simpson over [a, b] with n (even) intervals.
template <typename F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Normalization constant so that Hs = 4 sqrt(m0) holds exactly, with m0
// integrated over [fp/8, 16 fp] (all of the energy to fp64 accuracy).
double normalization_constant(const WaveSpectrumParams& p) {
  const double fp = p.peak_frequency_hz();
  const double m0_shape = simpson(
      [&](double f) { return jonswap_shape(f, fp, p.peak_enhancement); },
      fp / 8.0, 16.0 * fp, 16384);
  const double hs = p.significant_height_m;
  return hs * hs / (16.0 * m0_shape);
}

}  // namespace

void WaveSpectrumParams::validate() const {
  if (!(significant_height_m > 0))
    throw std::invalid_argument("wave: Hs must be > 0");
  if (!(peak_period_s > 0))
    throw std::invalid_argument("wave: Tp must be > 0");
  if (!(peak_enhancement >= 1))
    throw std::invalid_argument("wave: gamma must be >= 1");
  if (n_components < 1)
    throw std::invalid_argument("wave: n_components must be >= 1");
  const double fp = peak_frequency_hz();
  if (!(band_min_hz() > 0) || !(band_min_hz() < fp) || !(band_max_hz() > fp))
    throw std::invalid_argument("wave: band must satisfy 0 < f_min < 1/Tp < f_max");
}

void WaveEpisode::validate() const {
  // The component list is the ground truth for at(); the spectrum params are
  // descriptive metadata. Zero-energy episodes (still water) are legal, so
  // only spectra with actual energy are held to the parameter contract.
  if (params.significant_height_m > 0) params.validate();
  if (!(duration_s > 0)) throw std::invalid_argument("wave: duration must be > 0");
  double prev = 0;
  for (const auto& c : components) {
    if (!(c.frequency_hz > prev))
      throw std::invalid_argument("wave: component frequencies must be strictly increasing");
    if (c.amplitude_m < 0)
      throw std::invalid_argument("wave: amplitudes must be >= 0");
    if (c.phase_rad < 0 || c.phase_rad >= kTwoPi)
      throw std::invalid_argument("wave: phases must lie in [0, 2pi)");
    prev = c.frequency_hz;
  }
}

double jonswap_density(double f_hz, const WaveSpectrumParams& params) {
  if (!(f_hz > 0)) throw std::domain_error("jonswap_density: f must be > 0");
  params.validate();
  const double fp = params.peak_frequency_hz();
  return normalization_constant(params) *
         jonswap_shape(f_hz, fp, params.peak_enhancement);
}

double spectrum_band_energy(const WaveSpectrumParams& params) {
  params.validate();
  const double fp = params.peak_frequency_hz();
  const double c = normalization_constant(params);
  return c * simpson(
                 [&](double f) {
                   return jonswap_shape(f, fp, params.peak_enhancement);
                 },
                 params.band_min_hz(), params.band_max_hz(), 16384);
}

WaveEpisode synthesize_episode(const WaveSpectrumParams& params,
                               std::uint64_t seed, double duration_s) {
  params.validate();
  if (!(duration_s > 0))
    throw std::invalid_argument("synthesize_episode: duration must be > 0");

  const double fp = params.peak_frequency_hz();
  const double c = normalization_constant(params);
  const int n = params.n_components;
  const double f_lo = params.band_min_hz();
  const double df = (params.band_max_hz() - f_lo) / n;

  WaveEpisode ep;
  ep.params = params;
  ep.seed = seed;
  ep.duration_s = duration_s;
  ep.components.resize(n);

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double f = f_lo + (i + 0.5) * df;  // bin midpoint
    const double s = c * jonswap_shape(f, fp, params.peak_enhancement);
    ep.components[i].frequency_hz = f;
    ep.components[i].amplitude_m = std::sqrt(2.0 * s * df);
    ep.components[i].phase_rad = rng.uniform() * kTwoPi;
  }
  return ep;
}

WaveEpisode monochromatic_episode(double amplitude_m, double period_s,
                                  double phase_rad, double duration_s) {
  if (!(amplitude_m >= 0) || !(period_s > 0) || !(duration_s > 0))
    throw std::invalid_argument("monochromatic_episode: invalid parameters");
  WaveEpisode ep;
  ep.params.significant_height_m = 2.0 * std::sqrt(2.0) * amplitude_m;
  ep.params.peak_period_s = period_s;
  ep.params.peak_enhancement = 1.0;
  ep.params.n_components = 1;
  ep.seed = 0;
  ep.duration_s = duration_s;
  ep.components.push_back(
      {1.0 / period_s, amplitude_m,
       std::fmod(std::fmod(phase_rad, kTwoPi) + kTwoPi, kTwoPi)});
  return ep;
}

WaveSample WaveEpisode::at(double t) const {
  if (t < 0 || t > duration_s)
    throw std::domain_error("WaveEpisode::at: t outside [0, duration]");
  WaveSample s;
  for (const auto& c : components) {
    const double w = kTwoPi * c.frequency_hz;
    const double arg = w * t + c.phase_rad;
    const double cs = std::cos(arg), sn = std::sin(arg);
    s.elevation += c.amplitude_m * cs;
    s.rate -= c.amplitude_m * w * sn;
    s.acceleration -= c.amplitude_m * w * w * cs;
  }
  return s;
}

void write_episode_csv(const WaveEpisode& episode, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_episode_csv: cannot open " + path);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# hs=%.17g tp=%.17g gamma=%.17g n=%d fmin=%.17g fmax=%.17g "
                "seed=%llu duration=%.17g dt_sample=%.17g\n",
                episode.params.significant_height_m,
                episode.params.peak_period_s, episode.params.peak_enhancement,
                episode.params.n_components, episode.params.band_min_hz(),
                episode.params.band_max_hz(),
                static_cast<unsigned long long>(episode.seed),
                episode.duration_s, episode.dt_sample_s);
  out << buf << "frequency_hz,amplitude_m,phase_rad\n";
  for (const auto& c : episode.components) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", c.frequency_hz,
                  c.amplitude_m, c.phase_rad);
    out << buf;
  }
}

WaveEpisode read_episode_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_episode_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("read_episode_csv: missing header in " + path);

  WaveEpisode ep;
  unsigned long long seed = 0;
  int n = 0;
  double fmin = 0, fmax = 0;
  if (std::sscanf(line.c_str(),
                  "# hs=%lg tp=%lg gamma=%lg n=%d fmin=%lg fmax=%lg "
                  "seed=%llu duration=%lg dt_sample=%lg",
                  &ep.params.significant_height_m, &ep.params.peak_period_s,
                  &ep.params.peak_enhancement, &n, &fmin, &fmax, &seed,
                  &ep.duration_s, &ep.dt_sample_s) != 9)
    throw std::runtime_error("read_episode_csv: malformed header in " + path);
  ep.params.n_components = n;
  ep.params.freq_min_hz = fmin;
  ep.params.freq_max_hz = fmax;
  ep.seed = seed;

  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    WaveComponent c;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &c.frequency_hz,
                    &c.amplitude_m, &c.phase_rad) != 3)
      throw std::runtime_error("read_episode_csv: malformed row in " + path);
    ep.components.push_back(c);
  }
  return ep;
}

}  // namespace wecmarl
