#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wecmarl/eval.hpp"
#include "wecmarl/marl.hpp"
#include "wecmarl/search.hpp"
#include "wecmarl/wave.hpp"

namespace wecmarl {

// Where the training episodes come from and how the two-agent runner is
// dimensioned; everything else about training lives in A3cConfig and the
// schedule.
struct TrainingSetup {
  std::string plant = "decoupled";  // "decoupled" | "coupled"
  std::vector<double> periods_s = {8, 10, 12, 14, 16};
  double wave_height_m = 2.0;
  std::string wave = "jonswap";  // "jonswap" | "monochromatic"
  double episode_duration_s = 120.0;
  std::vector<double> held_out_periods_s = {8, 10, 12, 14, 16};
  double held_out_duration_s = 60.0;
  int hidden = 256;
  int eval_episodes_per_period = 2;
  double eval_warmup_s = 20.0;
  double max_fault_rate = 0.01;

  void validate() const;
  WaveKind wave_kind() const;
};

// Declarative schedule description; build() turns it into executable stages.
struct ScheduleSetup {
  std::string type = "canonical";  // "canonical" | "ping_pong" | "stages"
  std::uint64_t hybrid_steps = 200000;
  std::uint64_t align_steps = 200000;
  std::uint64_t skip_steps = 150000;
  int skip_rounds = 2;
  std::uint64_t eval_interval = 0;  // 0 = one evaluation per stage budget
  SaturationDetector saturation;
  double round_min_rel_improvement = 0.01;
  std::vector<TrainingStage> stages;  // used when type == "stages"

  TrainingSchedule build() const;  // throws std::invalid_argument
};

struct SearchSetup {
  std::string space = "lr_gamma";  // "lr_gamma" | "eta_pair" | "custom"
  SearchSpace custom;
  int budget = 30;
  std::string strategy = "surrogate";
  SurrogateConfig surrogate;
  std::uint64_t trial_train_steps = 20000;  // training budget per trial

  SearchSpace resolve_space() const;
};

struct AblationSetup {
  std::vector<int> layout_stages = {1, 2, 3, 4};
  std::uint64_t train_steps = 200000;
  int hidden = 64;
  double train_episode_s = 120.0;
};

// The one config artifact every subcommand reads: a JSON object with one
// section per module, flag overrides applied on top.
struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = "out";
  WaveSpectrumParams wave;  // generate-waves section
  SimConfig sim;
  ObservationLayout layout;
  A3cConfig a3c;
  TeamCoefficients eta;
  TrainingSetup training;
  ScheduleSetup schedule;
  EvalProtocol protocol;
  SearchSetup search;
  AblationSetup ablation;

  void validate() const;
  Plant plant() const;  // resolves training.plant
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_json(const RunConfig& cfg);  // full round-trip dump

}  // namespace wecmarl
