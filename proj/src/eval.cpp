#include "wecmarl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "wecmarl/marl.hpp"
#include "wecmarl/rng.hpp"
#include "wecmarl/util.hpp"

namespace wecmarl {

namespace {
constexpr std::uint64_t kPeriodSalt = 0x5045524453454c00ull;
constexpr std::uint64_t kPhaseSalt = 0x50484153454d4f4eull;
constexpr std::uint64_t kEvalSalt = 0x45564c5f45500000ull;
}  // namespace

WecEpisodeFactory::WecEpisodeFactory(Plant plant, SimConfig sim,
                                     std::vector<double> periods_s,
                                     double wave_height_m,
                                     double episode_duration_s, WaveKind kind)
    : sim_(sim),
      periods_(std::move(periods_s)),
      wave_height_m_(wave_height_m),
      duration_s_(episode_duration_s),
      kind_(kind) {
  sim_.validate();
  if (periods_.empty())
    throw std::invalid_argument("episode factory: no wave periods");
  for (double p : periods_)
    if (!(p > 0)) throw std::invalid_argument("episode factory: period <= 0");
  if (!(wave_height_m_ > 0))
    throw std::invalid_argument("episode factory: wave height must be > 0");
  if (!(duration_s_ > 0))
    throw std::invalid_argument("episode factory: duration must be > 0");
  plants_.reserve(periods_.size());
  tunings_.reserve(periods_.size());
  for (double p : periods_) {
    ResonantTuning tuning = tune_for_resonance(plant.geometry, plant.pto, p);
    plants_.push_back(Plant{plant.geometry, tuning.pto});
    tunings_.push_back(std::move(tuning));
  }
}

int WecEpisodeFactory::period_index(double period_s) const {
  for (size_t i = 0; i < periods_.size(); ++i)
    if (std::abs(periods_[i] - period_s) < 1e-9) return static_cast<int>(i);
  throw std::invalid_argument("episode factory: unknown wave period " +
                              format_double(period_s));
}

double WecEpisodeFactory::period_for_seed(std::uint64_t episode_seed) const {
  Rng r(mix_seed(episode_seed, kPeriodSalt));
  const auto n = periods_.size();
  const auto idx = std::min<size_t>(static_cast<size_t>(r.uniform() * n), n - 1);
  return periods_[idx];
}

const Plant& WecEpisodeFactory::plant_at(double period_s) const {
  return plants_[static_cast<size_t>(period_index(period_s))];
}

const ResonantTuning& WecEpisodeFactory::tuning_at(double period_s) const {
  return tunings_[static_cast<size_t>(period_index(period_s))];
}

double WecEpisodeFactory::sd_damping(double period_s) const {
  return tuning_at(period_s).damping;
}

WecSimulator WecEpisodeFactory::make_at(double period_s,
                                        std::uint64_t episode_seed) const {
  const Plant& plant = plant_at(period_s);
  WaveEpisode wave;
  if (kind_ == WaveKind::Jonswap) {
    WaveSpectrumParams params;
    params.significant_height_m = wave_height_m_;
    params.peak_period_s = period_s;
    wave = synthesize_episode(params, episode_seed, duration_s_);
  } else {
    Rng r(mix_seed(episode_seed, kPhaseSalt));
    const double phase = 2.0 * M_PI * r.uniform();
    wave = monochromatic_episode(0.5 * wave_height_m_, period_s, phase,
                                 duration_s_);
  }
  return WecSimulator(plant.geometry, plant.pto, sim_, std::move(wave));
}

WecSimulator WecEpisodeFactory::make(std::uint64_t episode_seed) const {
  return make_at(period_for_seed(episode_seed), episode_seed);
}

void EvalProtocol::validate() const {
  if (periods_s.empty()) throw std::invalid_argument("protocol: no periods");
  for (double p : periods_s)
    if (!(p > 0)) throw std::invalid_argument("protocol: period <= 0");
  if (episodes_per_period < 1)
    throw std::invalid_argument("protocol: episodes_per_period < 1");
  if (!(episode_duration_s > 0))
    throw std::invalid_argument("protocol: episode duration <= 0");
  if (warmup_s < 0 || warmup_s >= episode_duration_s)
    throw std::invalid_argument("protocol: warmup outside [0, duration)");
  if (!(wave_height_m > 0))
    throw std::invalid_argument("protocol: wave height <= 0");
  if (workers < 1) throw std::invalid_argument("protocol: workers < 1");
}

std::uint64_t EvalProtocol::episode_seed(int period_index, int episode) const {
  return mix_seed(seed_base, kEvalSalt +
                                 static_cast<std::uint64_t>(period_index) *
                                     100003ull +
                                 static_cast<std::uint64_t>(episode));
}

double EvalResult::mean_power() const {
  if (periods.empty()) return 0;
  double sum = 0;
  for (const auto& p : periods) sum += p.mean_total_w;
  return sum / static_cast<double>(periods.size());
}

double episode_mean_power(WecSimulator& sim, const ControllerFn& controller,
                          double warmup_s, Vec3* leg_power) {
  const double dt = sim.sim_config().dt_control;
  const int total = sim.max_steps();
  const int warm = std::clamp(
      static_cast<int>(std::ceil(warmup_s / dt - 1e-9)), 0, total);
  Vec3 energy = Vec3::Zero();
  for (int s = sim.steps_taken(); s < total; ++s) {
    const ControlStepResult r = sim.step(controller(sim));
    if (s >= warm) energy += r.leg_energy;
  }
  const double span = (total - warm) * dt;
  const Vec3 leg = span > 0 ? Vec3(energy / span) : Vec3(Vec3::Zero());
  if (leg_power) *leg_power = leg;
  return leg.sum();
}

EvalResult evaluate(const ControllerProvider& controller, const Plant& plant,
                    const SimConfig& sim, const EvalProtocol& protocol) {
  protocol.validate();
  const WecEpisodeFactory factory(plant, sim, protocol.periods_s,
                                  protocol.wave_height_m,
                                  protocol.episode_duration_s, protocol.wave);
  EvalResult out;
  out.protocol = protocol;
  for (size_t pi = 0; pi < protocol.periods_s.size(); ++pi) {
    const double period = protocol.periods_s[pi];
    const ControllerFn ctrl = controller(period);
    const int n = protocol.episodes_per_period;
    std::vector<double> totals(static_cast<size_t>(n), 0.0);
    std::vector<Vec3> legs(static_cast<size_t>(n), Vec3::Zero());
    std::vector<char> ok(static_cast<size_t>(n), 0);

    auto run_episode = [&](int e) {
      try {
        WecSimulator s =
            factory.make_at(period, protocol.episode_seed(static_cast<int>(pi), e));
        Vec3 leg;
        totals[static_cast<size_t>(e)] =
            episode_mean_power(s, ctrl, protocol.warmup_s, &leg);
        legs[static_cast<size_t>(e)] = leg;
        ok[static_cast<size_t>(e)] = 1;
      } catch (const std::exception&) {
        ok[static_cast<size_t>(e)] = 0;
      }
    };

    if (protocol.workers > 1) {
      std::vector<std::thread> pool;
      const int w = std::min(protocol.workers, n);
      pool.reserve(static_cast<size_t>(w));
      for (int t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
          for (int e = t; e < n; e += w) run_episode(e);
        });
      for (auto& t : pool) t.join();
    } else {
      for (int e = 0; e < n; ++e) run_episode(e);
    }

    // Aggregate in episode order so threading never changes the result.
    PeriodPower pp;
    pp.period_s = period;
    int used = 0;
    for (int e = 0; e < n; ++e) {
      if (!ok[static_cast<size_t>(e)]) continue;
      ++used;
      pp.mean_total_w += totals[static_cast<size_t>(e)];
      pp.mean_leg_w += legs[static_cast<size_t>(e)];
    }
    pp.episodes = used;
    pp.excluded = n - used;
    if (used > 0) {
      pp.mean_total_w /= used;
      pp.mean_leg_w /= used;
    }
    if (used > 1) {
      double var = 0;
      Vec3 var_leg = Vec3::Zero();
      for (int e = 0; e < n; ++e) {
        if (!ok[static_cast<size_t>(e)]) continue;
        const double d = totals[static_cast<size_t>(e)] - pp.mean_total_w;
        var += d * d;
        const Vec3 dl = legs[static_cast<size_t>(e)] - pp.mean_leg_w;
        var_leg += dl.cwiseProduct(dl);
      }
      var /= (used - 1);
      var_leg /= (used - 1);
      pp.se_total_w = std::sqrt(var / used);
      pp.se_leg_w = (var_leg / used).cwiseSqrt();
    }
    out.periods.push_back(pp);
  }
  return out;
}

ControllerProvider sd_baseline_provider(const Plant& plant) {
  return [plant](double period_s) -> ControllerFn {
    const ResonantTuning tuning =
        tune_for_resonance(plant.geometry, plant.pto, period_s);
    const SdController sd{tuning.damping};
    return [sd](const WecSimulator& sim) {
      return sd.action(sim.state().ext_rate);
    };
  };
}

ControllerProvider zero_provider() {
  return [](double) -> ControllerFn {
    return [](const WecSimulator&) { return Vec3(Vec3::Zero()); };
  };
}

namespace {

bool same_protocol(const EvalProtocol& a, const EvalProtocol& b) {
  return a.periods_s == b.periods_s && a.wave_height_m == b.wave_height_m &&
         a.episodes_per_period == b.episodes_per_period &&
         a.episode_duration_s == b.episode_duration_s &&
         a.warmup_s == b.warmup_s && a.seed_base == b.seed_base &&
         a.wave == b.wave;
}

}  // namespace

GainTable gain_table(const EvalResult& controller, const EvalResult& baseline) {
  if (!same_protocol(controller.protocol, baseline.protocol) ||
      controller.periods.size() != baseline.periods.size())
    throw std::invalid_argument(
        "gain table: results come from different protocols");
  GainTable table;
  double sum = 0;
  for (size_t i = 0; i < controller.periods.size(); ++i) {
    GainRow row;
    row.period_s = controller.periods[i].period_s;
    row.controller_w = controller.periods[i].mean_total_w;
    row.baseline_w = baseline.periods[i].mean_total_w;
    row.gain_pct = (row.controller_w == row.baseline_w)
                       ? 0.0
                       : 100.0 * (row.controller_w - row.baseline_w) /
                             row.baseline_w;
    sum += row.gain_pct;
    table.rows.push_back(row);
  }
  table.avg_gain_pct =
      table.rows.empty() ? 0.0 : sum / static_cast<double>(table.rows.size());
  return table;
}

std::string eval_csv(const EvalResult& result) {
  std::string out = csv_row({"period_s", "mean_total_w", "se_total_w",
                             "mean_leg0_w", "mean_leg1_w", "mean_leg2_w",
                             "episodes", "excluded"});
  for (const auto& p : result.periods)
    out += csv_row({format_double(p.period_s), format_double(p.mean_total_w),
                    format_double(p.se_total_w), format_double(p.mean_leg_w[0]),
                    format_double(p.mean_leg_w[1]),
                    format_double(p.mean_leg_w[2]), std::to_string(p.episodes),
                    std::to_string(p.excluded)});
  return out;
}

std::string gain_table_csv(const GainTable& table) {
  std::string out =
      csv_row({"period_s", "controller_w", "baseline_w", "gain_pct"});
  for (const auto& r : table.rows)
    out += csv_row({format_double(r.period_s), format_double(r.controller_w),
                    format_double(r.baseline_w), format_double(r.gain_pct)});
  out += csv_row({"avg", "", "", format_double(table.avg_gain_pct)});
  return out;
}

std::string gain_plot_data(const GainTable& table) {
  std::string out = csv_row({"period_s", "gain_pct"});
  for (const auto& r : table.rows)
    out += csv_row({format_double(r.period_s), format_double(r.gain_pct)});
  return out;
}

AblationResult state_design_ablation(const Plant& plant, const SimConfig& sim,
                                     const AblationConfig& cfg) {
  cfg.protocol.validate();
  if (cfg.layout_stages.empty())
    throw std::invalid_argument("ablation: no layout stages");

  const EvalResult baseline =
      evaluate(sd_baseline_provider(plant), plant, sim, cfg.protocol);

  AblationResult out;
  for (int stage_n : cfg.layout_stages) {
    const ObservationLayout layout = ObservationLayout::stage(stage_n);

    WecEpisodeFactory train(plant, sim, cfg.protocol.periods_s,
                            cfg.protocol.wave_height_m, cfg.train_episode_s,
                            cfg.protocol.wave);
    WecEpisodeFactory held(plant, sim, cfg.protocol.periods_s,
                           cfg.protocol.wave_height_m,
                           std::min(cfg.protocol.episode_duration_s, 60.0),
                           cfg.protocol.wave);

    A3cConfig a3c = cfg.a3c;
    a3c.action_scale = plant.pto.gen_force_limit;

    ScheduleContext ctx{train,
                        held,
                        layout,
                        make_observation_scales(plant.geometry, plant.pto),
                        cfg.hidden,
                        a3c,
                        TeamCoefficients{},
                        cfg.seed,
                        cfg.workers};

    TrainingStage align;
    align.kind = StageKind::Align;
    align.trainable = {AgentRole::Front, AgentRole::Back};
    align.step_budget = cfg.train_steps;
    align.eval_interval = std::max<std::uint64_t>(cfg.train_steps / 8, 1);
    align.stop_on_saturation = false;
    align.label = "ablation_stage_" + std::to_string(stage_n);

    ScheduleRunner runner(std::move(ctx));
    runner.run_stage(align);
    const ComposedSpec best = runner.best_spec().value();

    const EvalResult res = evaluate(composed_provider(best, plant), plant,
                                    sim, cfg.protocol);
    out.layout_stages.push_back(stage_n);
    out.tables.push_back(gain_table(res, baseline));
  }
  return out;
}

std::string ablation_csv(const AblationResult& result) {
  std::string out = csv_row(
      {"layout_stage", "period_s", "controller_w", "baseline_w", "gain_pct"});
  for (size_t i = 0; i < result.tables.size(); ++i) {
    const std::string stage = std::to_string(result.layout_stages[i]);
    for (const auto& r : result.tables[i].rows)
      out += csv_row({stage, format_double(r.period_s),
                      format_double(r.controller_w),
                      format_double(r.baseline_w), format_double(r.gain_pct)});
    out += csv_row(
        {stage, "avg", "", "", format_double(result.tables[i].avg_gain_pct)});
  }
  return out;
}

}  // namespace wecmarl
