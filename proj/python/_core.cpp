// Python bindings for the toolkit's main operations: wave synthesis, the
// surrogate simulator with its spring-damper baseline, schedule training,
// paired evaluation, and hyperparameter search. The surface is deliberately
// functional — configs travel as the same JSON documents the CLI reads.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "wecmarl/baseline.hpp"
#include "wecmarl/config.hpp"
#include "wecmarl/eval.hpp"
#include "wecmarl/marl.hpp"
#include "wecmarl/presets.hpp"
#include "wecmarl/rl.hpp"
#include "wecmarl/search.hpp"
#include "wecmarl/sim.hpp"
#include "wecmarl/util.hpp"
#include "wecmarl/wave.hpp"

namespace py = pybind11;
using namespace wecmarl;

namespace {

Plant plant_by_name(const std::string& name) {
  if (name == "decoupled") return make_decoupled_plant();
  if (name == "coupled") return make_coupled_plant();
  throw std::invalid_argument("unknown plant: " + name +
                              " (expected 'decoupled' or 'coupled')");
}

ScheduleContext context_from(const RunConfig& cfg,
                             const std::string& artifacts_dir) {
  const Plant plant = cfg.plant();
  ScheduleContext ctx{
      WecEpisodeFactory(plant, cfg.sim, cfg.training.periods_s,
                        cfg.training.wave_height_m,
                        cfg.training.episode_duration_s,
                        cfg.training.wave_kind()),
      WecEpisodeFactory(plant, cfg.sim, cfg.training.held_out_periods_s,
                        cfg.training.wave_height_m,
                        cfg.training.held_out_duration_s,
                        cfg.training.wave_kind()),
      cfg.layout,
      make_observation_scales(plant.geometry, plant.pto),
      cfg.training.hidden,
      cfg.a3c,
      cfg.eta,
      cfg.seed,
      cfg.workers};
  ctx.eval_episodes_per_period = cfg.training.eval_episodes_per_period;
  ctx.eval_warmup_s = cfg.training.eval_warmup_s;
  ctx.max_fault_rate = cfg.training.max_fault_rate;
  ctx.artifacts_dir = artifacts_dir;
  return ctx;
}

ComposedSpec spec_from(const RunConfig& cfg, const std::string& front_path,
                       const std::string& back_path) {
  const Plant plant = cfg.plant();
  ComposedSpec spec;
  spec.layout = cfg.layout;
  spec.scales = make_observation_scales(plant.geometry, plant.pto);
  spec.hidden = cfg.training.hidden;
  spec.action_scale = cfg.a3c.action_scale;
  const ActorCriticNet net = spec.make_net();
  const auto slot = [&](const std::string& path) {
    return path.empty() ? LegSource::baseline()
                        : LegSource::policy(load_params(path, net));
  };
  spec.front = slot(front_path);
  spec.back = slot(back_path);
  spec.validate();
  return spec;
}

py::dict eval_to_dict(const EvalResult& res) {
  py::list periods, power;
  for (const auto& p : res.periods) {
    periods.append(p.period_s);
    power.append(p.mean_total_w);
  }
  py::dict d;
  d["periods_s"] = periods;
  d["mean_power_w"] = power;
  d["overall_mean_w"] = res.mean_power();
  return d;
}

py::dict wave_elevation(double significant_height_m, double peak_period_s,
                        std::uint64_t seed, double duration_s) {
  WaveSpectrumParams wp;
  wp.significant_height_m = significant_height_m;
  wp.peak_period_s = peak_period_s;
  const WaveEpisode ep = synthesize_episode(wp, seed, duration_s);
  std::vector<double> t, z;
  for (double time = 0; time <= ep.duration_s; time += ep.dt_sample_s) {
    t.push_back(time);
    z.push_back(ep.at(time).elevation);
  }
  py::dict d;
  d["time_s"] = std::move(t);
  d["elevation_m"] = std::move(z);
  d["n_components"] = ep.components.size();
  return d;
}

double spectrum_energy(double significant_height_m, double peak_period_s) {
  WaveSpectrumParams wp;
  wp.significant_height_m = significant_height_m;
  wp.peak_period_s = peak_period_s;
  return spectrum_band_energy(wp);
}

double impedance_bound(const std::string& plant, double amplitude_m,
                       double period_s) {
  return impedance_matching_bound(plant_by_name(plant).geometry, amplitude_m,
                                  period_s);
}

py::dict sd_episode(const std::string& plant_name, double period_s,
                    double wave_height_m, std::uint64_t seed,
                    double duration_s, double warmup_s, bool monochromatic) {
  const Plant plant = plant_by_name(plant_name);
  SimConfig sc;
  WecEpisodeFactory factory(
      plant, sc, {period_s}, wave_height_m, duration_s,
      monochromatic ? WaveKind::Monochromatic : WaveKind::Jonswap);
  WecSimulator sim = factory.make_at(period_s, seed);
  const SdController sd{factory.sd_damping(period_s)};
  const double mean_power = episode_mean_power(
      sim,
      [&](const WecSimulator& s) { return sd.action(s.state().ext_rate); },
      warmup_s);
  const auto& led = sim.ledger();
  const double lhs = sim.mechanical_energy();
  const double rhs = led.excitation_work - led.radiation_dissipated -
                     led.generator_captured.sum();
  const double scale =
      std::max(1.0, std::abs(led.excitation_work) + led.radiation_dissipated +
                        led.generator_captured.cwiseAbs().sum());
  py::dict d;
  d["mean_power_w"] = mean_power;
  d["sd_damping"] = factory.sd_damping(period_s);
  d["excitation_work_j"] = led.excitation_work;
  d["radiation_dissipated_j"] = led.radiation_dissipated;
  d["captured_j"] = led.generator_captured.sum();
  d["mechanical_energy_j"] = lhs;
  d["energy_residual"] = std::abs(lhs - rhs) / scale;
  return d;
}

py::dict train(const std::string& config_json,
               const std::string& artifacts_dir) {
  const RunConfig cfg = parse_run_config(config_json);
  cfg.validate();
  ScheduleRunner runner(context_from(cfg, artifacts_dir));
  const auto reports = runner.run(cfg.schedule.build());

  py::list stages;
  for (const auto& r : reports) {
    py::dict s;
    s["label"] = r.label;
    s["steps_used"] = r.steps_used;
    s["faults"] = r.faults;
    s["stage_best_w"] = r.stage_best;
    s["overall_best_w"] = r.overall_best_after;
    s["saturated"] = r.saturated;
    s["eval_history_w"] = r.eval_history;
    s["front_hash"] = r.front_hash_after;
    s["back_hash"] = r.back_hash_after;
    stages.append(std::move(s));
  }
  py::dict d;
  d["stages"] = stages;
  d["overall_best_w"] = runner.overall_best();
  d["artifacts_dir"] = artifacts_dir;
  return d;
}

py::dict evaluate_composed(const std::string& config_json,
                           const std::string& front_path,
                           const std::string& back_path) {
  const RunConfig cfg = parse_run_config(config_json);
  cfg.validate();
  const Plant plant = cfg.plant();
  const EvalResult res =
      evaluate(composed_provider(spec_from(cfg, front_path, back_path), plant),
               plant, cfg.sim, cfg.protocol);
  return eval_to_dict(res);
}

py::dict gain_vs_baseline(const std::string& config_json,
                          const std::string& front_path,
                          const std::string& back_path) {
  const RunConfig cfg = parse_run_config(config_json);
  cfg.validate();
  const Plant plant = cfg.plant();
  const EvalResult ours =
      evaluate(composed_provider(spec_from(cfg, front_path, back_path), plant),
               plant, cfg.sim, cfg.protocol);
  const EvalResult base =
      evaluate(sd_baseline_provider(plant), plant, cfg.sim, cfg.protocol);
  const GainTable table = gain_table(ours, base);

  py::list rows;
  for (const auto& r : table.rows) {
    py::dict row;
    row["period_s"] = r.period_s;
    row["controller_w"] = r.controller_w;
    row["baseline_w"] = r.baseline_w;
    row["gain_pct"] = r.gain_pct;
    rows.append(std::move(row));
  }
  py::dict d;
  d["rows"] = rows;
  d["avg_gain_pct"] = table.avg_gain_pct;
  return d;
}

py::dict hyper_search(const py::function& objective, int budget,
                      const std::string& strategy, std::uint64_t seed,
                      const std::string& space) {
  SearchConfig cfg;
  if (space == "lr_gamma")
    cfg.space = lr_gamma_space();
  else if (space == "eta_pair")
    cfg.space = eta_pair_space();
  else
    throw std::invalid_argument("unknown space: " + space);
  cfg.budget = budget;
  if (strategy == "random")
    cfg.strategy = SearchStrategy::Random;
  else if (strategy == "surrogate")
    cfg.strategy = SearchStrategy::Surrogate;
  else
    throw std::invalid_argument("unknown strategy: " + strategy);
  cfg.seed = seed;

  const SearchResult res = run_search(
      cfg, [&](const VectorXd& point, std::uint64_t trial_seed) -> double {
        std::vector<double> p(point.data(), point.data() + point.size());
        return objective(p, trial_seed).cast<double>();
      });
  if (!res.has_best) throw std::runtime_error("no trial completed");

  py::dict d;
  d["best_point"] = std::vector<double>(
      res.best.point.data(), res.best.point.data() + res.best.point.size());
  d["best_objective"] = res.best.objective;
  d["trials"] = res.history.size();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wave energy converter multi-agent control toolkit";

  m.def("default_config", [] { return run_config_json(RunConfig{}); },
        "Full default configuration as a JSON document.");
  m.def(
      "normalize_config",
      [](const std::string& text) {
        const RunConfig cfg = parse_run_config(text);
        cfg.validate();
        return run_config_json(cfg);
      },
      py::arg("config_json"),
      "Parses, validates, and re-serialises a configuration document.");

  m.def("wave_elevation", &wave_elevation, py::arg("significant_height_m"),
        py::arg("peak_period_s"), py::arg("seed"), py::arg("duration_s"),
        "Sampled surface elevation of one seeded irregular-wave episode.");
  m.def("spectrum_energy", &spectrum_energy, py::arg("significant_height_m"),
        py::arg("peak_period_s"),
        "Energy integral of the wave spectrum over the synthesis band.");

  m.def("impedance_bound", &impedance_bound, py::arg("plant"),
        py::arg("amplitude_m"), py::arg("period_s"),
        "Theoretical mean-power cap for a regular wave of the given "
        "amplitude and period.");
  m.def("sd_episode", &sd_episode, py::arg("plant"), py::arg("period_s"),
        py::arg("wave_height_m") = 2.0, py::arg("seed") = 1,
        py::arg("duration_s") = 120.0, py::arg("warmup_s") = 20.0,
        py::arg("monochromatic") = false,
        "Runs one episode under the period-tuned spring-damper baseline and "
        "returns mean power plus the closed energy ledger.");
  m.def("shaped_reward", &shaped_reward, py::arg("own_power_w"),
        py::arg("others_power_w"), py::arg("eta"),
        "Cooperation-shaped reward: own + eta * others.");

  m.def("train", &train, py::arg("config_json"), py::arg("artifacts_dir") = "",
        "Runs the configured training schedule; returns per-stage reports "
        "and the best held-out score.");
  m.def("evaluate", &evaluate_composed, py::arg("config_json"),
        py::arg("front_params_path") = "", py::arg("back_params_path") = "",
        "Paired-seed evaluation of a composed controller; empty paths mean "
        "the spring-damper baseline in that slot.");
  m.def("gain_vs_baseline", &gain_vs_baseline, py::arg("config_json"),
        py::arg("front_params_path") = "", py::arg("back_params_path") = "",
        "Per-period power gain of a composed controller over the tuned "
        "spring-damper baseline under paired seeds.");

  m.def("hyper_search", &hyper_search, py::arg("objective"),
        py::arg("budget") = 30, py::arg("strategy") = "surrogate",
        py::arg("seed") = 1, py::arg("space") = "lr_gamma",
        "Budgeted hyperparameter search over a named space; the objective "
        "receives (point, seed) and returns a score to maximise.");
}
