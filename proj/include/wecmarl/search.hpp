#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wecmarl/rng.hpp"

namespace wecmarl {

using Eigen::VectorXd;

// One tunable quantity. Log-scaled dimensions search uniformly in log space
// (learning rates); linear ones in natural units. low == high degenerates to
// a single admissible value.
struct SearchDimension {
  std::string name;
  double low = 0;
  double high = 1;
  bool log_scale = false;

  void validate() const;           // throws std::invalid_argument
  double to_unit(double v) const;  // natural -> [0, 1] in scaled coords
  double from_unit(double u) const;
};

struct SearchSpace {
  std::vector<SearchDimension> dims;

  void validate() const;  // non-empty, valid dims, unique names
  int dimension() const { return static_cast<int>(dims.size()); }
};

// The two pairings the training runs actually sweep.
SearchSpace lr_gamma_space();  // learning rate (log) x discount factor
SearchSpace eta_pair_space();  // front/back cooperation coefficients

enum class TrialStatus { Complete, Failed };

struct Trial {
  int id = 0;
  VectorXd point;  // natural units, one entry per dimension
  double objective = 0;  // maximized; finite iff status == Complete
  TrialStatus status = TrialStatus::Complete;
  std::uint64_t seed = 0;  // seed handed to the objective runner
};

enum class SearchStrategy { Random, Surrogate };

SearchStrategy parse_strategy(const std::string& name);
std::string strategy_name(SearchStrategy s);

// Expected-improvement acquisition over a Gaussian-kernel regression of the
// completed trials, evaluated on a random candidate set. A stand-in for a
// full Bayesian machinery that behaves sensibly at two-digit budgets.
struct SurrogateConfig {
  int warmup = 8;             // random suggestions before the surrogate fits
  int candidates = 256;       // acquisition samples per suggestion
  double kernel_width = 0.15; // in unit-cube coordinates

  void validate() const;
};

// Deterministic given (history, rng state): all randomness flows through rng.
VectorXd suggest(const std::vector<Trial>& history, const SearchSpace& space,
                 SearchStrategy strategy, Rng& rng,
                 const SurrogateConfig& surrogate = {});

// point in natural units, seed for common-random-number evaluation. Throwing
// or returning a non-finite value marks the trial failed; the search goes on.
using ObjectiveFn =
    std::function<double(const VectorXd& point, std::uint64_t seed)>;

struct SearchConfig {
  SearchSpace space;
  int budget = 20;  // total trials, including any resumed ones
  SearchStrategy strategy = SearchStrategy::Surrogate;
  std::uint64_t seed = 1;
  SurrogateConfig surrogate;
  // When set, the trial history lands here after every trial and an existing
  // file is picked up to resume an interrupted search.
  std::string history_csv;

  void validate() const;
};

struct SearchResult {
  std::vector<Trial> history;
  Trial best;  // highest objective among completed trials
  bool has_best = false;
};

SearchResult run_search(const SearchConfig& cfg, const ObjectiveFn& objective);

std::string history_csv(const SearchSpace& space,
                        const std::vector<Trial>& history);
std::vector<Trial> load_history_csv(const std::string& path,
                                    const SearchSpace& space);

}  // namespace wecmarl
