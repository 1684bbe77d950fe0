#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wecmarl {

// JONSWAP spectrum parameters. The synthesis band defaults to
// [0.4/Tp, 4/Tp], which carries >99% of the spectral energy.
struct WaveSpectrumParams {
  double significant_height_m = 2.0;  // Hs
  double peak_period_s = 10.0;        // Tp
  double peak_enhancement = 3.3;      // gamma
  int n_components = 256;
  double freq_min_hz = 0.0;  // 0 -> default 0.4/Tp
  double freq_max_hz = 0.0;  // 0 -> default 4/Tp

  double peak_frequency_hz() const { return 1.0 / peak_period_s; }
  double band_min_hz() const {
    return freq_min_hz > 0 ? freq_min_hz : 0.4 / peak_period_s;
  }
  double band_max_hz() const {
    return freq_max_hz > 0 ? freq_max_hz : 4.0 / peak_period_s;
  }
  void validate() const;  // throws std::invalid_argument
};

struct WaveComponent {
  double frequency_hz = 0;
  double amplitude_m = 0;
  double phase_rad = 0;
};

struct WaveSample {
  double elevation = 0;     // z  [m]
  double rate = 0;          // dz/dt  [m/s]
  double acceleration = 0;  // d2z/dt2  [m/s2]
};

// Immutable superposition of cosine components; fully determined by
// (params, seed).
struct WaveEpisode {
  WaveSpectrumParams params;
  std::uint64_t seed = 0;
  std::vector<WaveComponent> components;
  double duration_s = 0;
  double dt_sample_s = 0.05;

  // Exact elevation and its analytic first/second derivatives at time t.
  // Throws std::domain_error outside [0, duration].
  WaveSample at(double t) const;

  void validate() const;
};

// Spectral density S(f) in m^2 s.  Throws std::domain_error for f <= 0.
double jonswap_density(double f_hz, const WaveSpectrumParams& params);

// Energy integral of S over the synthesis band (fine composite Simpson).
double spectrum_band_energy(const WaveSpectrumParams& params);

WaveEpisode synthesize_episode(const WaveSpectrumParams& params,
                               std::uint64_t seed, double duration_s);

// Degenerate single-component episode (regular wave).
WaveEpisode monochromatic_episode(double amplitude_m, double period_s,
                                  double phase_rad, double duration_s);

// Component-table CSV with a '#'-prefixed header recording params and seed.
void write_episode_csv(const WaveEpisode& episode, const std::string& path);
WaveEpisode read_episode_csv(const std::string& path);

}  // namespace wecmarl
