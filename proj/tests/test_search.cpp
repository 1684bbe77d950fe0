#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wecmarl/search.hpp"

using namespace wecmarl;

namespace {

bool in_bounds(const VectorXd& x, const SearchSpace& space) {
  for (int k = 0; k < space.dimension(); ++k) {
    const auto& d = space.dims[static_cast<size_t>(k)];
    if (x[k] < d.low - 1e-12 || x[k] > d.high + 1e-12) return false;
  }
  return true;
}

Trial make_trial(int id, VectorXd point, double objective) {
  Trial t;
  t.id = id;
  t.point = std::move(point);
  t.objective = objective;
  t.status = TrialStatus::Complete;
  return t;
}

}  // namespace

TEST_SUITE("search") {
  TEST_CASE("dimension scaling round-trips and respects the log transform") {
    SearchDimension lin{"x", -2.0, 6.0, false};
    CHECK(lin.from_unit(lin.to_unit(3.5)) == doctest::Approx(3.5));
    CHECK(lin.from_unit(0.0) == -2.0);
    CHECK(lin.from_unit(1.0) == 6.0);

    SearchDimension lr{"lr", 1e-6, 1e-2, true};
    CHECK(lr.from_unit(0.5) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(lr.to_unit(1e-4) == doctest::Approx(0.5).epsilon(1e-12));

    SearchDimension point{"p", 3.0, 3.0, false};
    CHECK(point.from_unit(0.7) == 3.0);  // degenerate single-value dimension

    CHECK_THROWS_AS((SearchDimension{"bad", 2.0, 1.0, false}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((SearchDimension{"bad", 0.0, 1.0, true}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((SearchDimension{"", 0.0, 1.0, false}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS(SearchSpace{}.validate(), std::invalid_argument);
    CHECK_THROWS_AS((SearchSpace{{{"a", 0, 1, false}, {"a", 0, 1, false}}}
                         .validate()),
                    std::invalid_argument);
  }

  TEST_CASE("the canned spaces match the training knobs") {
    const SearchSpace lg = lr_gamma_space();
    REQUIRE(lg.dimension() == 2);
    CHECK(lg.dims[0].name == "learning_rate");
    CHECK(lg.dims[0].log_scale);
    CHECK(lg.dims[1].low == 0.8);
    CHECK(lg.dims[1].high == 0.999);

    const SearchSpace eta = eta_pair_space();
    REQUIRE(eta.dimension() == 2);
    for (const auto& d : eta.dims) {
      CHECK(d.low == -1.0);
      CHECK(d.high == 1.0);
      CHECK_FALSE(d.log_scale);
    }
    CHECK(parse_strategy("random") == SearchStrategy::Random);
    CHECK(parse_strategy(strategy_name(SearchStrategy::Surrogate)) ==
          SearchStrategy::Surrogate);
    CHECK_THROWS_AS((void)parse_strategy("grid"), std::invalid_argument);
  }

  TEST_CASE("random suggestions are reproducible and stay in bounds") {
    const SearchSpace space = lr_gamma_space();
    Rng a(42), b(42);
    const VectorXd pa = suggest({}, space, SearchStrategy::Random, a);
    const VectorXd pb = suggest({}, space, SearchStrategy::Random, b);
    CHECK(pa == pb);

    Rng rng(7);
    for (int i = 0; i < 200; ++i)
      CHECK(in_bounds(suggest({}, space, SearchStrategy::Random, rng), space));
  }

  TEST_CASE("a single-point space always yields that point") {
    const SearchSpace space{
        {{"a", 2.5, 2.5, false}, {"b", -1.0, -1.0, false}}};
    Rng rng(3);
    std::vector<Trial> history;
    for (int i = 0; i < 12; ++i) {
      const VectorXd p = suggest(history, space, SearchStrategy::Surrogate,
                                 rng);
      CHECK(p[0] == 2.5);
      CHECK(p[1] == -1.0);
      history.push_back(make_trial(i, p, 1.0));
    }
  }

  TEST_CASE("surrogate suggestions never leave the box") {
    const SearchSpace space = eta_pair_space();
    Rng rng(11);
    std::vector<Trial> history;
    for (int i = 0; i < 40; ++i) {
      const VectorXd p =
          suggest(history, space, SearchStrategy::Surrogate, rng);
      CHECK(in_bounds(p, space));
      // A wavy objective with plateaus, to stress the fit.
      const double y = std::sin(3 * p[0]) + 0.2 * p[1];
      history.push_back(make_trial(i, p, y));
    }
  }

  TEST_CASE("surrogate suggestions are deterministic given history and seed") {
    const SearchSpace space = lr_gamma_space();
    std::vector<Trial> history;
    Rng seeder(5);
    for (int i = 0; i < 15; ++i) {
      const VectorXd p = suggest(history, space, SearchStrategy::Random,
                                 seeder);
      history.push_back(make_trial(i, p, -std::abs(p[1] - 0.9)));
    }
    Rng a(99), b(99);
    CHECK(suggest(history, space, SearchStrategy::Surrogate, a) ==
          suggest(history, space, SearchStrategy::Surrogate, b));
  }

  TEST_CASE("surrogate suggestions pile into an obvious basin") {
    const SearchSpace space{
        {{"u", 0.0, 1.0, false}, {"v", 0.0, 1.0, false}}};
    const auto objective = [](const VectorXd& p) {
      return -((p[0] - 0.3) * (p[0] - 0.3) + (p[1] - 0.7) * (p[1] - 0.7));
    };
    std::vector<Trial> history;
    Rng rng(17);
    for (int i = 0; i < 12; ++i) {
      const VectorXd p = suggest(history, space, SearchStrategy::Random, rng);
      history.push_back(make_trial(i, p, objective(p)));
    }
    int close = 0;
    for (int i = 0; i < 10; ++i) {
      const VectorXd p =
          suggest(history, space, SearchStrategy::Surrogate, rng);
      const double dist = std::hypot(p[0] - 0.3, p[1] - 0.7);
      if (dist < 0.28) ++close;  // top-quartile region of the bowl
      history.push_back(
          make_trial(static_cast<int>(history.size()), p, objective(p)));
    }
    CHECK(close >= 6);
  }

  TEST_CASE("a one-trial budget returns that trial") {
    SearchConfig cfg;
    cfg.space = eta_pair_space();
    cfg.budget = 1;
    cfg.strategy = SearchStrategy::Random;
    cfg.seed = 21;
    const SearchResult res = run_search(
        cfg, [](const VectorXd& p, std::uint64_t) { return p.sum(); });
    REQUIRE(res.history.size() == 1);
    CHECK(res.has_best);
    CHECK(res.best.id == 0);
    CHECK(res.best.objective == res.history[0].point.sum());
    CHECK(res.history[0].seed == 21);
  }

  TEST_CASE("failing trials are recorded and the search keeps going") {
    SearchConfig cfg;
    cfg.space = SearchSpace{{{"x", 0.0, 1.0, false}}};
    cfg.budget = 30;
    cfg.strategy = SearchStrategy::Random;
    cfg.seed = 4;
    const SearchResult res =
        run_search(cfg, [](const VectorXd& p, std::uint64_t) {
          if (p[0] < 0.3) throw std::runtime_error("diverged");
          if (p[0] > 0.9) return std::nan("");  // also a failure
          return p[0];
        });
    REQUIRE(res.history.size() == 30);
    int failed = 0;
    for (const Trial& t : res.history) {
      if (t.status == TrialStatus::Failed) {
        ++failed;
        CHECK(!std::isfinite(t.objective));
      } else {
        CHECK(t.objective >= 0.3);
        CHECK(t.objective <= 0.9);
      }
    }
    CHECK(failed > 0);
    CHECK(res.has_best);
    CHECK(res.best.status == TrialStatus::Complete);
  }

  TEST_CASE("the surrogate search lands on the synthetic optimum") {
    const auto objective = [](const VectorXd& p, std::uint64_t) {
      const double dlr = std::log10(p[0]) + 4.0;
      const double dg = p[1] - 0.97;
      return -(dlr * dlr) - 100.0 * dg * dg;
    };
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
      SearchConfig cfg;
      cfg.space = lr_gamma_space();
      cfg.budget = 60;
      cfg.strategy = SearchStrategy::Surrogate;
      cfg.seed = seed;
      const SearchResult res = run_search(cfg, objective);
      REQUIRE(res.has_best);
      CHECK(std::abs(std::log10(res.best.point[0]) + 4.0) < 0.5);
      CHECK(std::abs(res.best.point[1] - 0.97) < 0.02);
    }
  }

  TEST_CASE("history survives a round trip through csv") {
    const SearchSpace space = lr_gamma_space();
    std::vector<Trial> history;
    Rng rng(9);
    for (int i = 0; i < 6; ++i) {
      const VectorXd p = suggest(history, space, SearchStrategy::Random, rng);
      Trial t = make_trial(i, p, 1.25e-3 * i);
      t.seed = 77;
      if (i == 3) {
        t.status = TrialStatus::Failed;
        t.objective = std::nan("");
      }
      history.push_back(std::move(t));
    }
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "search_rt.csv";
    std::ofstream(path) << history_csv(space, history);
    const std::vector<Trial> loaded = load_history_csv(path.string(), space);
    REQUIRE(loaded.size() == history.size());
    for (size_t i = 0; i < history.size(); ++i) {
      CHECK(loaded[i].id == history[i].id);
      CHECK(loaded[i].point == history[i].point);
      CHECK(loaded[i].seed == history[i].seed);
      CHECK(loaded[i].status == history[i].status);
      if (loaded[i].status == TrialStatus::Complete)
        CHECK(loaded[i].objective == history[i].objective);
    }
    fs::remove(path);
  }

  TEST_CASE("a truncated history resumes into the identical search") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "search_resume_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto objective = [](const VectorXd& p, std::uint64_t) {
      return -std::abs(p[0] - 0.4);
    };

    SearchConfig cfg;
    cfg.space = SearchSpace{{{"x", 0.0, 1.0, false}}};
    cfg.budget = 12;
    cfg.strategy = SearchStrategy::Random;
    cfg.seed = 31;
    cfg.history_csv = (dir / "history.csv").string();
    const SearchResult full = run_search(cfg, objective);
    REQUIRE(full.history.size() == 12);

    // Chop the persisted history down to 7 trials and resume.
    std::ofstream(cfg.history_csv)
        << history_csv(cfg.space, std::vector<Trial>(full.history.begin(),
                                                     full.history.begin() + 7));
    const SearchResult resumed = run_search(cfg, objective);
    REQUIRE(resumed.history.size() == 12);
    for (size_t i = 0; i < 12; ++i) {
      CHECK(resumed.history[i].point == full.history[i].point);
      CHECK(resumed.history[i].objective == full.history[i].objective);
    }

    // A history already at or over budget is rejected.
    SearchConfig over = cfg;
    over.budget = 5;
    CHECK_THROWS_AS((void)run_search(over, objective), std::invalid_argument);
    fs::remove_all(dir);
  }
}
