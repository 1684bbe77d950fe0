#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wecmarl/baseline.hpp"
#include "wecmarl/presets.hpp"
#include "wecmarl/rl.hpp"
#include "wecmarl/sim.hpp"

namespace wecmarl {

// A controller maps the live simulator to three generator commands; a
// provider binds one to a wave period so baselines can retune per period.
using ControllerFn = std::function<Vec3(const WecSimulator&)>;
using ControllerProvider = std::function<ControllerFn(double period_s)>;

enum class WaveKind { Jonswap, Monochromatic };

// Seeded simulator episodes for one plant across a set of wave periods. The
// plant spring is retuned to resonance at each period, so every controller
// (learned or baseline) rides identical hardware; the impedance-matched
// damping that falls out of the tuning defines the SD baseline per period.
class WecEpisodeFactory {
 public:
  WecEpisodeFactory(Plant plant, SimConfig sim, std::vector<double> periods_s,
                    double wave_height_m, double episode_duration_s,
                    WaveKind kind = WaveKind::Jonswap);

  // Training draw: the seed picks both the period and the wave realisation.
  WecSimulator make(std::uint64_t episode_seed) const;
  // Evaluation draw at a fixed period.
  WecSimulator make_at(double period_s, std::uint64_t episode_seed) const;

  double period_for_seed(std::uint64_t episode_seed) const;
  const Plant& plant_at(double period_s) const;
  const ResonantTuning& tuning_at(double period_s) const;
  double sd_damping(double period_s) const;

  const std::vector<double>& periods() const { return periods_; }
  double wave_height() const { return wave_height_m_; }
  double episode_duration() const { return duration_s_; }
  const SimConfig& sim_config() const { return sim_; }
  WaveKind wave_kind() const { return kind_; }

 private:
  int period_index(double period_s) const;

  SimConfig sim_;
  std::vector<double> periods_;
  double wave_height_m_ = 0;
  double duration_s_ = 0;
  WaveKind kind_ = WaveKind::Jonswap;
  std::vector<Plant> plants_;           // per period, spring retuned
  std::vector<ResonantTuning> tunings_;
};

struct EvalProtocol {
  std::vector<double> periods_s = {8, 9, 10, 11, 12, 13, 14, 15, 16};
  double wave_height_m = 2.0;
  int episodes_per_period = 20;
  double episode_duration_s = 200.0;
  double warmup_s = 20.0;  // excluded from power averaging
  std::uint64_t seed_base = 20260101;
  WaveKind wave = WaveKind::Jonswap;
  int workers = 1;

  void validate() const;  // throws std::invalid_argument
  std::uint64_t episode_seed(int period_index, int episode) const;
};

struct PeriodPower {
  double period_s = 0;
  double mean_total_w = 0;
  double se_total_w = 0;          // standard error over episodes
  Vec3 mean_leg_w = Vec3::Zero();
  Vec3 se_leg_w = Vec3::Zero();
  int episodes = 0;
  int excluded = 0;  // episodes dropped due to simulator faults
};

struct EvalResult {
  EvalProtocol protocol;
  std::vector<PeriodPower> periods;

  double mean_power() const;  // arithmetic mean across periods
};

// Mean captured power (W) over the rest of one episode, warmup excluded;
// per-leg means returned through leg_power when given.
double episode_mean_power(WecSimulator& sim, const ControllerFn& controller,
                          double warmup_s, Vec3* leg_power = nullptr);

// Runs the paired-seed protocol: every controller under the same protocol
// sees identical episode seeds, so power differences are controller-only.
EvalResult evaluate(const ControllerProvider& controller, const Plant& plant,
                    const SimConfig& sim, const EvalProtocol& protocol);

// Period-tuned spring-damper baseline and the do-nothing control.
ControllerProvider sd_baseline_provider(const Plant& plant);
ControllerProvider zero_provider();

struct GainRow {
  double period_s = 0;
  double controller_w = 0;
  double baseline_w = 0;
  double gain_pct = 0;  // 100 * (ctrl - base) / base
};

struct GainTable {
  std::vector<GainRow> rows;
  double avg_gain_pct = 0;  // arithmetic mean over periods
};

// Throws std::invalid_argument when the two results used different
// protocols (the comparison would not be paired).
GainTable gain_table(const EvalResult& controller, const EvalResult& baseline);

std::string eval_csv(const EvalResult& result);
std::string gain_table_csv(const GainTable& table);
std::string gain_plot_data(const GainTable& table);  // "period,gain" series

// Sensor build-out study: trains a fresh two-agent controller per
// observation stage under identical budgets and seeds, then tabulates each
// stage's gain over the SD baseline.
struct AblationConfig {
  std::vector<int> layout_stages = {1, 2, 3, 4};
  std::uint64_t seed = 1;
  std::uint64_t train_steps = 200000;  // per stage
  int hidden = 64;
  A3cConfig a3c;
  double train_episode_s = 120.0;
  int workers = 1;
  EvalProtocol protocol;
};

struct AblationResult {
  std::vector<int> layout_stages;
  std::vector<GainTable> tables;  // parallel to layout_stages
};

AblationResult state_design_ablation(const Plant& plant, const SimConfig& sim,
                                     const AblationConfig& cfg);
std::string ablation_csv(const AblationResult& result);

}  // namespace wecmarl
