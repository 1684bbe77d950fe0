#include <fstream>

#include "doctest.h"
#include "wecmarl/config.hpp"

using namespace wecmarl;

TEST_SUITE("config") {
  TEST_CASE("an empty object yields the documented defaults") {
    const RunConfig cfg = parse_run_config("{}");
    CHECK(cfg.seed == 1);
    CHECK(cfg.workers == 1);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.sim.dt_sim == 0.05);
    CHECK(cfg.a3c.gamma == 0.99);
    CHECK(cfg.eta.front == -0.6);
    CHECK(cfg.eta.back == 0.8);
    CHECK(cfg.layout.dimension() == 33);
    CHECK(cfg.training.plant == "decoupled");
    CHECK(cfg.schedule.type == "canonical");
    CHECK(cfg.protocol.periods_s.size() == 9);
  }

  TEST_CASE("sections override their fields and build real objects") {
    const char* text = R"({
      "seed": 99,
      "workers": 3,
      "sim": {"dt_sim": 0.01, "dt_control": 0.1, "integrator": "rk4"},
      "layout": {"stage": 2},
      "a3c": {"optimizer": "adam", "learning_rate": 3e-4},
      "eta": {"front": 0.2, "back": -0.4},
      "training": {"plant": "coupled", "hidden": 32},
      "schedule": {"type": "ping_pong", "skip_rounds": 2, "skip_steps": 500}
    })";
    const RunConfig cfg = parse_run_config(text);
    CHECK(cfg.seed == 99);
    CHECK(cfg.sim.integrator == SimConfig::Integrator::Rk4);
    CHECK(cfg.layout.dimension() == 20);
    CHECK(cfg.a3c.optimizer == A3cConfig::Optimizer::Adam);
    CHECK(cfg.a3c.learning_rate == 3e-4);
    CHECK(cfg.eta.front == 0.2);
    CHECK(cfg.plant().geometry.added_mass(0, 4) != 0.0);  // coupled preset

    const TrainingSchedule sched = cfg.schedule.build();
    REQUIRE(sched.stages.size() == 4);
    for (const auto& s : sched.stages) {
      CHECK(s.kind == StageKind::Skip);
      CHECK(s.step_budget == 500);
    }
  }

  TEST_CASE("explicit stage lists are parsed stage by stage") {
    const char* text = R"({
      "schedule": {
        "type": "stages",
        "stages": [
          {"kind": "hybrid_init", "trainable": ["front"], "step_budget": 100,
           "label": "warm_front"},
          {"kind": "align", "trainable": ["front", "back"], "step_budget": 200,
           "label": "joint", "saturation": {"window": 3}}
        ]
      }
    })";
    const RunConfig cfg = parse_run_config(text);
    const TrainingSchedule sched = cfg.schedule.build();
    REQUIRE(sched.stages.size() == 2);
    CHECK(sched.stages[0].kind == StageKind::HybridInit);
    CHECK(sched.stages[0].trainable ==
          std::vector<AgentRole>{AgentRole::Front});
    CHECK(sched.stages[0].label == "warm_front");
    CHECK(sched.stages[1].detector.window == 3);
  }

  TEST_CASE("typos and invalid values are named, not ignored") {
    CHECK_THROWS_WITH_AS((void)parse_run_config(R"({"a3c": {"gama": 0.9}})"),
                         doctest::Contains("gama"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_run_config(R"({"wokers": 2})"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)parse_run_config(R"({"workers": 0})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (void)parse_run_config(R"({"sim": {"integrator": "euler"}})"),
        std::invalid_argument);
    CHECK_THROWS_AS((void)parse_run_config(R"({"layout": {"stage": 5}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (void)parse_run_config(R"({"layout": {"stage": 2, "accel": true}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)parse_run_config(R"({"training": {"plant": "monohull"}})"),
        std::invalid_argument);
    CHECK_THROWS_AS((void)parse_run_config(R"({"eta": {"front": 2.0}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)parse_run_config("not json"),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)parse_run_config(R"({"a3c": {"gamma": "high"}})"),
                    std::invalid_argument);
  }

  TEST_CASE("a full dump re-parses to the same configuration") {
    RunConfig cfg = parse_run_config("{}");
    cfg.seed = 1234;
    cfg.a3c.learning_rate = 7.5e-5;
    cfg.training.plant = "coupled";
    cfg.search.space = "eta_pair";
    cfg.schedule.type = "stages";
    TrainingStage st;
    st.kind = StageKind::Align;
    st.trainable = {AgentRole::Front, AgentRole::Back};
    st.step_budget = 42;
    st.label = "only";
    cfg.schedule.stages = {st};

    const std::string text = run_config_json(cfg);
    const RunConfig back = parse_run_config(text);
    CHECK(back.seed == 1234);
    CHECK(back.a3c.learning_rate == 7.5e-5);
    CHECK(back.training.plant == "coupled");
    CHECK(back.search.space == "eta_pair");
    CHECK(back.schedule.stages.size() == 1);
    CHECK(back.schedule.stages[0].step_budget == 42);
    CHECK(run_config_json(back) == text);  // fixpoint
  }

  TEST_CASE("the shipped config files load and validate") {
    const RunConfig defaults = load_run_config(WECMARL_CONFIG_DIR
                                               "/default.json");
    CHECK(defaults.training.plant == "decoupled");
    CHECK(defaults.schedule.build().stages.size() >= 3);

    const RunConfig canonical = load_run_config(WECMARL_CONFIG_DIR
                                                "/schedule_canonical.json");
    CHECK(canonical.training.plant == "coupled");
    const TrainingSchedule sched = canonical.schedule.build();
    REQUIRE(sched.stages.size() == 3 + 2 * 3);
    CHECK(sched.stages[0].kind == StageKind::HybridInit);
    CHECK(sched.stages[2].kind == StageKind::Align);
    CHECK(sched.stages[3].kind == StageKind::Skip);

    CHECK_THROWS_AS((void)load_run_config("/no/such/config.json"),
                    std::runtime_error);
  }
}
