#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wecmarl/rng.hpp"
#include "wecmarl/wave.hpp"

using namespace wecmarl;

namespace {

WaveSpectrumParams default_params() {
  WaveSpectrumParams p;
  p.significant_height_m = 2.0;
  p.peak_period_s = 10.0;
  p.peak_enhancement = 3.3;
  p.n_components = 256;
  return p;
}

// Sample standard deviation of elevation over the episode.
double empirical_stddev(const WaveEpisode& ep, double dt) {
  double sum = 0, sum2 = 0;
  int n = 0;
  for (double t = 0; t <= ep.duration_s; t += dt, ++n) {
    const double z = ep.at(t).elevation;
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  return std::sqrt(sum2 / n - mean * mean);
}

}  // namespace

TEST_SUITE("wave") {

TEST_CASE("jonswap density matches quadrature-pinned reference values") {
  // Reference values from tests/oracles/jonswap_peak.py (scipy.integrate.quad
  // of the same closed form, normalized so Hs = 4 sqrt(m0)).
  auto p = default_params();
  const double fp = p.peak_frequency_hz();
  CHECK(jonswap_density(fp, p) == doctest::Approx(7.750078012548685).epsilon(1e-7));
  CHECK(jonswap_density(2 * fp, p) == doctest::Approx(0.23690869580984253).epsilon(1e-7));
  CHECK(jonswap_density(0.8 * fp, p) == doctest::Approx(1.206705185082248).epsilon(1e-7));
}

TEST_CASE("high-frequency tail decays below 1e-3 of the peak") {
  auto p = default_params();
  const double fp = p.peak_frequency_hz();
  CHECK(jonswap_density(10 * fp, p) < 1e-3 * jonswap_density(fp, p));
}

TEST_CASE("gamma=1 reduces to the Pierson-Moskowitz-shaped base spectrum") {
  auto p = default_params();
  p.peak_enhancement = 1.0;
  const double fp = p.peak_frequency_hz();

  // Independent evaluation of the base shape with its own normalization.
  auto pm_shape = [fp](double f) {
    return std::pow(fp, 4) * std::pow(f, -5.0) *
           std::exp(-1.25 * std::pow(fp / f, 4));
  };
  const int n = 16384;
  const double a = fp / 8, b = 16 * fp, h = (b - a) / n;
  double m0 = pm_shape(a) + pm_shape(b);
  for (int i = 1; i < n; ++i) m0 += pm_shape(a + i * h) * (i % 2 ? 4.0 : 2.0);
  m0 *= h / 3.0;
  const double c = p.significant_height_m * p.significant_height_m / (16.0 * m0);

  for (double f : {0.5 * fp, 0.9 * fp, fp, 1.3 * fp, 2.0 * fp, 3.7 * fp}) {
    CHECK(jonswap_density(f, p) == doctest::Approx(c * pm_shape(f)).epsilon(1e-12));
  }
}

TEST_CASE("density rejects non-positive frequency") {
  auto p = default_params();
  CHECK_THROWS_AS(jonswap_density(0.0, p), std::domain_error);
  CHECK_THROWS_AS(jonswap_density(-0.1, p), std::domain_error);
}

TEST_CASE("invalid spectrum parameters are rejected") {
  auto p = default_params();
  p.peak_period_s = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_params();
  p.peak_enhancement = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_params();
  p.freq_min_hz = 0.2;  // above fp = 0.1
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("synthesis is deterministic in (params, seed)") {
  auto p = default_params();
  const auto a = synthesize_episode(p, 42, 200.0);
  const auto b = synthesize_episode(p, 42, 200.0);
  REQUIRE(a.components.size() == b.components.size());
  for (size_t i = 0; i < a.components.size(); ++i) {
    CHECK(a.components[i].frequency_hz == b.components[i].frequency_hz);
    CHECK(a.components[i].amplitude_m == b.components[i].amplitude_m);
    CHECK(a.components[i].phase_rad == b.components[i].phase_rad);
  }
  const auto c = synthesize_episode(p, 43, 200.0);
  CHECK(a.components[0].phase_rad != c.components[0].phase_rad);
}

TEST_CASE("episode invariants hold for synthesized episodes") {
  auto ep = synthesize_episode(default_params(), 7, 100.0);
  CHECK_NOTHROW(ep.validate());
}

TEST_CASE("mean empirical Hs over 100 seeds within 5% of target") {
  auto p = default_params();
  double acc = 0;
  const int n_eps = 100;
  for (int s = 0; s < n_eps; ++s) {
    const auto ep = synthesize_episode(p, 1000 + s, 200.0);
    acc += 4.0 * empirical_stddev(ep, 0.25);
  }
  const double mean_hs = acc / n_eps;
  CHECK(mean_hs == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("single-component band around fp degenerates to a sinusoid at Tp") {
  auto p = default_params();
  p.n_components = 1;
  p.freq_min_hz = 0.95 * p.peak_frequency_hz();
  p.freq_max_hz = 1.05 * p.peak_frequency_hz();
  const auto ep = synthesize_episode(p, 5, 100.0);
  REQUIRE(ep.components.size() == 1);
  CHECK(ep.components[0].frequency_hz ==
        doctest::Approx(p.peak_frequency_hz()).epsilon(1e-12));

  // Empirical period via zero upcrossings.
  double t_first = -1, t_last = -1;
  int crossings = 0;
  double prev = ep.at(0.0).elevation;
  for (double t = 0.01; t <= 90.0; t += 0.01) {
    const double z = ep.at(t).elevation;
    if (prev < 0 && z >= 0) {
      if (t_first < 0) t_first = t;
      t_last = t;
      ++crossings;
    }
    prev = z;
  }
  REQUIRE(crossings >= 2);
  const double period = (t_last - t_first) / (crossings - 1);
  CHECK(period == doctest::Approx(p.peak_period_s).epsilon(0.01));
}

TEST_CASE("elevation of a single cosine at phase 0") {
  const auto ep = monochromatic_episode(1.0, 10.0, 0.0, 50.0);
  const auto s = ep.at(0.0);
  const double w = 2.0 * M_PI * 0.1;
  CHECK(s.elevation == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.rate == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.acceleration == doctest::Approx(-w * w).epsilon(1e-12));
}

TEST_CASE("analytic derivatives agree with central finite differences") {
  const auto ep = synthesize_episode(default_params(), 11, 100.0);
  const double h = 1e-4;
  for (double t : {1.0, 17.3, 42.42, 80.0}) {
    const auto s = ep.at(t);
    const double fd_rate =
        (ep.at(t + h).elevation - ep.at(t - h).elevation) / (2 * h);
    const double fd_acc = (ep.at(t + h).rate - ep.at(t - h).rate) / (2 * h);
    CHECK(s.rate == doctest::Approx(fd_rate).epsilon(1e-5));
    CHECK(s.acceleration == doctest::Approx(fd_acc).epsilon(1e-5));
  }
}

TEST_CASE("elevation rejects out-of-range times") {
  const auto ep = synthesize_episode(default_params(), 3, 10.0);
  CHECK_THROWS_AS(ep.at(-0.1), std::domain_error);
  CHECK_THROWS_AS(ep.at(10.1), std::domain_error);
}

TEST_CASE("Parseval: component energy matches band integral") {
  auto p = default_params();
  REQUIRE(p.n_components >= 256);
  const auto ep = synthesize_episode(p, 19, 10.0);
  double comp_energy = 0;
  for (const auto& c : ep.components)
    comp_energy += 0.5 * c.amplitude_m * c.amplitude_m;
  const double band = spectrum_band_energy(p);
  CHECK(comp_energy == doctest::Approx(band).epsilon(1e-3));
}

TEST_CASE("long-episode elevation mean stays near zero") {
  auto p = default_params();
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const auto ep = synthesize_episode(p, seed, 2000.0);
    double sum = 0;
    int n = 0;
    for (double t = 0; t <= ep.duration_s; t += 0.5, ++n) sum += ep.at(t).elevation;
    CHECK(std::abs(sum / n) < 0.05 * p.significant_height_m);
  }
}

TEST_CASE("episode CSV round-trips exactly and writes identical bytes") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "wecmarl_wave_test";
  fs::create_directories(dir);
  const auto path = (dir / "ep.csv").string();

  const auto ep = synthesize_episode(default_params(), 77, 120.0);
  write_episode_csv(ep, path);
  const auto back = read_episode_csv(path);
  REQUIRE(back.components.size() == ep.components.size());
  for (size_t i = 0; i < ep.components.size(); ++i) {
    CHECK(back.components[i].frequency_hz == ep.components[i].frequency_hz);
    CHECK(back.components[i].amplitude_m == ep.components[i].amplitude_m);
    CHECK(back.components[i].phase_rad == ep.components[i].phase_rad);
  }
  CHECK(back.seed == ep.seed);
  CHECK(back.duration_s == ep.duration_s);

  const auto path2 = (dir / "ep2.csv").string();
  write_episode_csv(ep, path2);
  std::ifstream f1(path), f2(path2);
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  fs::remove_all(dir);
}

}  // TEST_SUITE
