#include "wecmarl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace wecmarl {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad("section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known)
      bad("unknown key '" + it.key() + "' in section '" + section + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      j.at(key).get_to(out);
    } catch (const json::exception& e) {
      bad(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

// Enumerations all serialize as lowercase names.
std::string integrator_name(SimConfig::Integrator i) {
  return i == SimConfig::Integrator::Rk4 ? "rk4" : "sie";
}
SimConfig::Integrator parse_integrator(const std::string& s) {
  if (s == "sie") return SimConfig::Integrator::SemiImplicitEuler;
  if (s == "rk4") return SimConfig::Integrator::Rk4;
  bad("unknown integrator '" + s + "' (expected sie|rk4)");
}

std::string optimizer_name(A3cConfig::Optimizer o) {
  return o == A3cConfig::Optimizer::Adam ? "adam" : "sgd";
}
A3cConfig::Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return A3cConfig::Optimizer::Sgd;
  if (s == "adam") return A3cConfig::Optimizer::Adam;
  bad("unknown optimizer '" + s + "' (expected sgd|adam)");
}

std::string wave_kind_name(WaveKind k) {
  return k == WaveKind::Monochromatic ? "monochromatic" : "jonswap";
}
WaveKind parse_wave_kind(const std::string& s) {
  if (s == "jonswap") return WaveKind::Jonswap;
  if (s == "monochromatic") return WaveKind::Monochromatic;
  bad("unknown wave kind '" + s + "' (expected jonswap|monochromatic)");
}

std::string stage_kind_name(StageKind k) {
  switch (k) {
    case StageKind::HybridInit: return "hybrid_init";
    case StageKind::Align: return "align";
    case StageKind::Skip: return "skip";
  }
  return "?";
}
StageKind parse_stage_kind(const std::string& s) {
  if (s == "hybrid_init") return StageKind::HybridInit;
  if (s == "align") return StageKind::Align;
  if (s == "skip") return StageKind::Skip;
  bad("unknown stage kind '" + s + "' (expected hybrid_init|align|skip)");
}

std::string role_name(AgentRole r) {
  return r == AgentRole::Front ? "front" : "back";
}
AgentRole parse_role(const std::string& s) {
  if (s == "front") return AgentRole::Front;
  if (s == "back") return AgentRole::Back;
  bad("unknown agent role '" + s + "' (expected front|back)");
}

// Section loaders ------------------------------------------------------------

void load_wave(const json& j, WaveSpectrumParams& w) {
  check_keys(j, "wave",
             {"significant_height_m", "peak_period_s", "peak_enhancement",
              "n_components", "freq_min_hz", "freq_max_hz"});
  read(j, "significant_height_m", w.significant_height_m);
  read(j, "peak_period_s", w.peak_period_s);
  read(j, "peak_enhancement", w.peak_enhancement);
  read(j, "n_components", w.n_components);
  read(j, "freq_min_hz", w.freq_min_hz);
  read(j, "freq_max_hz", w.freq_max_hz);
}

void load_sim(const json& j, SimConfig& s) {
  check_keys(j, "sim", {"dt_sim", "dt_control", "integrator"});
  read(j, "dt_sim", s.dt_sim);
  read(j, "dt_control", s.dt_control);
  if (j.contains("integrator"))
    s.integrator = parse_integrator(j.at("integrator").get<std::string>());
}

void load_layout(const json& j, ObservationLayout& l) {
  check_keys(j, "layout", {"stage", "tether", "accel", "tension"});
  if (j.contains("stage")) {
    if (j.size() != 1)
      bad("layout: 'stage' excludes the individual toggles");
    const int n = j.at("stage").get<int>();
    if (n < 1 || n > 4) bad("layout: stage must be 1..4");
    l = ObservationLayout::stage(n);
    return;
  }
  read(j, "tether", l.tether);
  read(j, "accel", l.accel);
  read(j, "tension", l.tension);
}

void load_a3c(const json& j, A3cConfig& a) {
  check_keys(j, "a3c",
             {"gamma", "learning_rate", "n_steps", "entropy_coef",
              "value_coef", "grad_clip", "action_scale", "log_std_min",
              "log_std_max", "init_log_std", "reward_scale", "optimizer",
              "adam_beta1", "adam_beta2", "adam_eps"});
  read(j, "gamma", a.gamma);
  read(j, "learning_rate", a.learning_rate);
  read(j, "n_steps", a.n_steps);
  read(j, "entropy_coef", a.entropy_coef);
  read(j, "value_coef", a.value_coef);
  read(j, "grad_clip", a.grad_clip);
  read(j, "action_scale", a.action_scale);
  read(j, "log_std_min", a.log_std_min);
  read(j, "log_std_max", a.log_std_max);
  read(j, "init_log_std", a.init_log_std);
  read(j, "reward_scale", a.reward_scale);
  if (j.contains("optimizer"))
    a.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  read(j, "adam_beta1", a.adam_beta1);
  read(j, "adam_beta2", a.adam_beta2);
  read(j, "adam_eps", a.adam_eps);
}

void load_eta(const json& j, TeamCoefficients& e) {
  check_keys(j, "eta", {"front", "back"});
  read(j, "front", e.front);
  read(j, "back", e.back);
}

void load_training(const json& j, TrainingSetup& t) {
  check_keys(j, "training",
             {"plant", "periods_s", "wave_height_m", "wave",
              "episode_duration_s", "held_out_periods_s",
              "held_out_duration_s", "hidden", "eval_episodes_per_period",
              "eval_warmup_s", "max_fault_rate"});
  read(j, "plant", t.plant);
  read(j, "periods_s", t.periods_s);
  read(j, "wave_height_m", t.wave_height_m);
  read(j, "wave", t.wave);
  read(j, "episode_duration_s", t.episode_duration_s);
  read(j, "held_out_periods_s", t.held_out_periods_s);
  read(j, "held_out_duration_s", t.held_out_duration_s);
  read(j, "hidden", t.hidden);
  read(j, "eval_episodes_per_period", t.eval_episodes_per_period);
  read(j, "eval_warmup_s", t.eval_warmup_s);
  read(j, "max_fault_rate", t.max_fault_rate);
}

void load_saturation(const json& j, SaturationDetector& d) {
  check_keys(j, "saturation", {"window", "min_rel_improvement"});
  read(j, "window", d.window);
  read(j, "min_rel_improvement", d.min_rel_improvement);
}

TrainingStage load_stage(const json& j) {
  check_keys(j, "schedule.stages[]",
             {"kind", "trainable", "step_budget", "eval_interval",
              "stop_on_saturation", "saturation", "round", "label"});
  TrainingStage s;
  if (j.contains("kind"))
    s.kind = parse_stage_kind(j.at("kind").get<std::string>());
  if (j.contains("trainable")) {
    s.trainable.clear();
    for (const auto& r : j.at("trainable"))
      s.trainable.push_back(parse_role(r.get<std::string>()));
  }
  read(j, "step_budget", s.step_budget);
  read(j, "eval_interval", s.eval_interval);
  read(j, "stop_on_saturation", s.stop_on_saturation);
  if (j.contains("saturation")) load_saturation(j.at("saturation"), s.detector);
  read(j, "round", s.round);
  read(j, "label", s.label);
  return s;
}

void load_schedule(const json& j, ScheduleSetup& s) {
  check_keys(j, "schedule",
             {"type", "hybrid_steps", "align_steps", "skip_steps",
              "skip_rounds", "eval_interval", "saturation",
              "round_min_rel_improvement", "stages"});
  read(j, "type", s.type);
  read(j, "hybrid_steps", s.hybrid_steps);
  read(j, "align_steps", s.align_steps);
  read(j, "skip_steps", s.skip_steps);
  read(j, "skip_rounds", s.skip_rounds);
  read(j, "eval_interval", s.eval_interval);
  if (j.contains("saturation")) load_saturation(j.at("saturation"), s.saturation);
  read(j, "round_min_rel_improvement", s.round_min_rel_improvement);
  if (j.contains("stages")) {
    s.stages.clear();
    for (const auto& stage : j.at("stages"))
      s.stages.push_back(load_stage(stage));
  }
}

void load_protocol(const json& j, EvalProtocol& p) {
  check_keys(j, "protocol",
             {"periods_s", "wave_height_m", "episodes_per_period",
              "episode_duration_s", "warmup_s", "seed_base", "wave",
              "workers"});
  read(j, "periods_s", p.periods_s);
  read(j, "wave_height_m", p.wave_height_m);
  read(j, "episodes_per_period", p.episodes_per_period);
  read(j, "episode_duration_s", p.episode_duration_s);
  read(j, "warmup_s", p.warmup_s);
  read(j, "seed_base", p.seed_base);
  if (j.contains("wave"))
    p.wave = parse_wave_kind(j.at("wave").get<std::string>());
  read(j, "workers", p.workers);
}

void load_search(const json& j, SearchSetup& s) {
  check_keys(j, "search",
             {"space", "dimensions", "budget", "strategy", "surrogate",
              "trial_train_steps"});
  read(j, "space", s.space);
  if (j.contains("dimensions")) {
    s.custom.dims.clear();
    for (const auto& dj : j.at("dimensions")) {
      check_keys(dj, "search.dimensions[]", {"name", "low", "high", "log"});
      SearchDimension d;
      read(dj, "name", d.name);
      read(dj, "low", d.low);
      read(dj, "high", d.high);
      read(dj, "log", d.log_scale);
      s.custom.dims.push_back(std::move(d));
    }
  }
  read(j, "budget", s.budget);
  read(j, "strategy", s.strategy);
  if (j.contains("surrogate")) {
    const json& sj = j.at("surrogate");
    check_keys(sj, "search.surrogate", {"warmup", "candidates",
                                        "kernel_width"});
    read(sj, "warmup", s.surrogate.warmup);
    read(sj, "candidates", s.surrogate.candidates);
    read(sj, "kernel_width", s.surrogate.kernel_width);
  }
  read(j, "trial_train_steps", s.trial_train_steps);
}

void load_ablation(const json& j, AblationSetup& a) {
  check_keys(j, "ablation",
             {"layout_stages", "train_steps", "hidden", "train_episode_s"});
  read(j, "layout_stages", a.layout_stages);
  read(j, "train_steps", a.train_steps);
  read(j, "hidden", a.hidden);
  read(j, "train_episode_s", a.train_episode_s);
}

}  // namespace

void TrainingSetup::validate() const {
  if (plant != "decoupled" && plant != "coupled")
    bad("training.plant must be decoupled|coupled");
  if (periods_s.empty() || held_out_periods_s.empty())
    bad("training: period lists must not be empty");
  for (double p : periods_s)
    if (!(p > 0)) bad("training: periods must be positive");
  for (double p : held_out_periods_s)
    if (!(p > 0)) bad("training: held-out periods must be positive");
  if (!(wave_height_m > 0)) bad("training: wave height must be positive");
  (void)wave_kind();
  if (!(episode_duration_s > 0) || !(held_out_duration_s > 0))
    bad("training: durations must be positive");
  if (hidden < 1) bad("training: hidden must be >= 1");
  if (eval_episodes_per_period < 1)
    bad("training: eval episodes must be >= 1");
  if (!(eval_warmup_s >= 0) || eval_warmup_s >= held_out_duration_s)
    bad("training: eval warmup must fit the held-out episodes");
  if (!(max_fault_rate >= 0)) bad("training: negative fault rate");
}

WaveKind TrainingSetup::wave_kind() const { return parse_wave_kind(wave); }

TrainingSchedule ScheduleSetup::build() const {
  TrainingSchedule schedule;
  if (type == "canonical") {
    schedule = canonical_schedule(hybrid_steps, align_steps, skip_steps,
                                  skip_rounds, eval_interval, saturation);
  } else if (type == "ping_pong") {
    schedule = ping_pong_schedule(skip_rounds, skip_steps, saturation,
                                  AgentRole::Front, eval_interval);
  } else if (type == "stages") {
    schedule.stages = stages;
  } else {
    bad("schedule.type must be canonical|ping_pong|stages");
  }
  schedule.round_min_rel_improvement = round_min_rel_improvement;
  schedule.validate();
  return schedule;
}

SearchSpace SearchSetup::resolve_space() const {
  if (space == "lr_gamma") return lr_gamma_space();
  if (space == "eta_pair") return eta_pair_space();
  if (space == "custom") {
    custom.validate();
    return custom;
  }
  bad("search.space must be lr_gamma|eta_pair|custom");
}

void RunConfig::validate() const {
  if (workers < 1) bad("workers must be >= 1");
  if (output_dir.empty()) bad("output_dir must not be empty");
  wave.validate();
  sim.validate();
  a3c.validate();
  eta.validate();
  training.validate();
  protocol.validate();
  (void)schedule.build();
  (void)search.resolve_space();
  search.surrogate.validate();
  if (search.budget < 1) bad("search.budget must be >= 1");
  (void)parse_strategy(search.strategy);
  if (ablation.layout_stages.empty()) bad("ablation: no layout stages");
  for (int s : ablation.layout_stages)
    if (s < 1 || s > 4) bad("ablation: layout stages must be 1..4");
  if (ablation.train_steps < 1) bad("ablation: train_steps must be >= 1");
  if (ablation.hidden < 1) bad("ablation: hidden must be >= 1");
  if (!(ablation.train_episode_s > 0))
    bad("ablation: train episode duration must be positive");
}

Plant RunConfig::plant() const {
  if (training.plant == "coupled") return make_coupled_plant();
  if (training.plant == "decoupled") return make_decoupled_plant();
  bad("training.plant must be decoupled|coupled");
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "<top level>",
             {"seed", "workers", "output_dir", "wave", "sim", "layout",
              "a3c", "eta", "training", "schedule", "protocol", "search",
              "ablation"});
  RunConfig cfg;
  read(j, "seed", cfg.seed);
  read(j, "workers", cfg.workers);
  read(j, "output_dir", cfg.output_dir);
  if (j.contains("wave")) load_wave(j.at("wave"), cfg.wave);
  if (j.contains("sim")) load_sim(j.at("sim"), cfg.sim);
  if (j.contains("layout")) load_layout(j.at("layout"), cfg.layout);
  if (j.contains("a3c")) load_a3c(j.at("a3c"), cfg.a3c);
  if (j.contains("eta")) load_eta(j.at("eta"), cfg.eta);
  if (j.contains("training")) load_training(j.at("training"), cfg.training);
  if (j.contains("schedule")) load_schedule(j.at("schedule"), cfg.schedule);
  if (j.contains("protocol")) load_protocol(j.at("protocol"), cfg.protocol);
  if (j.contains("search")) load_search(j.at("search"), cfg.search);
  if (j.contains("ablation")) load_ablation(j.at("ablation"), cfg.ablation);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir;
  j["wave"] = {{"significant_height_m", cfg.wave.significant_height_m},
               {"peak_period_s", cfg.wave.peak_period_s},
               {"peak_enhancement", cfg.wave.peak_enhancement},
               {"n_components", cfg.wave.n_components},
               {"freq_min_hz", cfg.wave.freq_min_hz},
               {"freq_max_hz", cfg.wave.freq_max_hz}};
  j["sim"] = {{"dt_sim", cfg.sim.dt_sim},
              {"dt_control", cfg.sim.dt_control},
              {"integrator", integrator_name(cfg.sim.integrator)}};
  j["layout"] = {{"tether", cfg.layout.tether},
                 {"accel", cfg.layout.accel},
                 {"tension", cfg.layout.tension}};
  j["a3c"] = {{"gamma", cfg.a3c.gamma},
              {"learning_rate", cfg.a3c.learning_rate},
              {"n_steps", cfg.a3c.n_steps},
              {"entropy_coef", cfg.a3c.entropy_coef},
              {"value_coef", cfg.a3c.value_coef},
              {"grad_clip", cfg.a3c.grad_clip},
              {"action_scale", cfg.a3c.action_scale},
              {"log_std_min", cfg.a3c.log_std_min},
              {"log_std_max", cfg.a3c.log_std_max},
              {"init_log_std", cfg.a3c.init_log_std},
              {"reward_scale", cfg.a3c.reward_scale},
              {"optimizer", optimizer_name(cfg.a3c.optimizer)},
              {"adam_beta1", cfg.a3c.adam_beta1},
              {"adam_beta2", cfg.a3c.adam_beta2},
              {"adam_eps", cfg.a3c.adam_eps}};
  j["eta"] = {{"front", cfg.eta.front}, {"back", cfg.eta.back}};
  j["training"] = {{"plant", cfg.training.plant},
                   {"periods_s", cfg.training.periods_s},
                   {"wave_height_m", cfg.training.wave_height_m},
                   {"wave", cfg.training.wave},
                   {"episode_duration_s", cfg.training.episode_duration_s},
                   {"held_out_periods_s", cfg.training.held_out_periods_s},
                   {"held_out_duration_s", cfg.training.held_out_duration_s},
                   {"hidden", cfg.training.hidden},
                   {"eval_episodes_per_period",
                    cfg.training.eval_episodes_per_period},
                   {"eval_warmup_s", cfg.training.eval_warmup_s},
                   {"max_fault_rate", cfg.training.max_fault_rate}};
  json stages = json::array();
  for (const TrainingStage& s : cfg.schedule.stages) {
    json roles = json::array();
    for (AgentRole r : s.trainable) roles.push_back(role_name(r));
    stages.push_back({{"kind", stage_kind_name(s.kind)},
                      {"trainable", roles},
                      {"step_budget", s.step_budget},
                      {"eval_interval", s.eval_interval},
                      {"stop_on_saturation", s.stop_on_saturation},
                      {"saturation",
                       {{"window", s.detector.window},
                        {"min_rel_improvement",
                         s.detector.min_rel_improvement}}},
                      {"round", s.round},
                      {"label", s.label}});
  }
  j["schedule"] = {{"type", cfg.schedule.type},
                   {"hybrid_steps", cfg.schedule.hybrid_steps},
                   {"align_steps", cfg.schedule.align_steps},
                   {"skip_steps", cfg.schedule.skip_steps},
                   {"skip_rounds", cfg.schedule.skip_rounds},
                   {"eval_interval", cfg.schedule.eval_interval},
                   {"saturation",
                    {{"window", cfg.schedule.saturation.window},
                     {"min_rel_improvement",
                      cfg.schedule.saturation.min_rel_improvement}}},
                   {"round_min_rel_improvement",
                    cfg.schedule.round_min_rel_improvement},
                   {"stages", stages}};
  j["protocol"] = {{"periods_s", cfg.protocol.periods_s},
                   {"wave_height_m", cfg.protocol.wave_height_m},
                   {"episodes_per_period", cfg.protocol.episodes_per_period},
                   {"episode_duration_s", cfg.protocol.episode_duration_s},
                   {"warmup_s", cfg.protocol.warmup_s},
                   {"seed_base", cfg.protocol.seed_base},
                   {"wave", wave_kind_name(cfg.protocol.wave)},
                   {"workers", cfg.protocol.workers}};
  json dims = json::array();
  for (const SearchDimension& d : cfg.search.custom.dims)
    dims.push_back({{"name", d.name},
                    {"low", d.low},
                    {"high", d.high},
                    {"log", d.log_scale}});
  j["search"] = {{"space", cfg.search.space},
                 {"dimensions", dims},
                 {"budget", cfg.search.budget},
                 {"strategy", cfg.search.strategy},
                 {"surrogate",
                  {{"warmup", cfg.search.surrogate.warmup},
                   {"candidates", cfg.search.surrogate.candidates},
                   {"kernel_width", cfg.search.surrogate.kernel_width}}},
                 {"trial_train_steps", cfg.search.trial_train_steps}};
  j["ablation"] = {{"layout_stages", cfg.ablation.layout_stages},
                   {"train_steps", cfg.ablation.train_steps},
                   {"hidden", cfg.ablation.hidden},
                   {"train_episode_s", cfg.ablation.train_episode_s}};
  return j.dump(2) + "\n";
}

}  // namespace wecmarl
