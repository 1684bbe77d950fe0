#include "wecmarl/search.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wecmarl/util.hpp"

namespace wecmarl {

void SearchDimension::validate() const {
  if (name.empty()) throw std::invalid_argument("search dim: unnamed");
  if (!std::isfinite(low) || !std::isfinite(high) || low > high)
    throw std::invalid_argument("search dim '" + name + "': bad bounds");
  if (log_scale && !(low > 0))
    throw std::invalid_argument("search dim '" + name +
                                "': log scale needs positive bounds");
}

double SearchDimension::to_unit(double v) const {
  if (high == low) return 0.0;
  if (log_scale) return (std::log(v) - std::log(low)) /
                        (std::log(high) - std::log(low));
  return (v - low) / (high - low);
}

double SearchDimension::from_unit(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (high == low) return low;
  if (log_scale)
    return std::exp(std::log(low) + u * (std::log(high) - std::log(low)));
  return low + u * (high - low);
}

void SearchSpace::validate() const {
  if (dims.empty()) throw std::invalid_argument("search space: no dimensions");
  for (size_t i = 0; i < dims.size(); ++i) {
    dims[i].validate();
    for (size_t j = i + 1; j < dims.size(); ++j)
      if (dims[i].name == dims[j].name)
        throw std::invalid_argument("search space: duplicate dimension '" +
                                    dims[i].name + "'");
  }
}

SearchSpace lr_gamma_space() {
  return SearchSpace{{{"learning_rate", 1e-6, 1e-2, true},
                      {"gamma", 0.8, 0.999, false}}};
}

SearchSpace eta_pair_space() {
  return SearchSpace{
      {{"eta_front", -1.0, 1.0, false}, {"eta_back", -1.0, 1.0, false}}};
}

SearchStrategy parse_strategy(const std::string& name) {
  if (name == "random") return SearchStrategy::Random;
  if (name == "surrogate") return SearchStrategy::Surrogate;
  throw std::invalid_argument("unknown search strategy '" + name + "'");
}

std::string strategy_name(SearchStrategy s) {
  return s == SearchStrategy::Random ? "random" : "surrogate";
}

void SurrogateConfig::validate() const {
  if (warmup < 1 || candidates < 1 || !(kernel_width > 0))
    throw std::invalid_argument("surrogate config: bad settings");
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

VectorXd random_unit_point(int d, Rng& rng) {
  VectorXd u(d);
  for (int k = 0; k < d; ++k) u[k] = rng.uniform();
  return u;
}

VectorXd to_natural(const VectorXd& u, const SearchSpace& space) {
  VectorXd x(space.dimension());
  for (int k = 0; k < space.dimension(); ++k)
    x[k] = space.dims[static_cast<size_t>(k)].from_unit(u[k]);
  return x;
}

// Gaussian-kernel regression of the completed trials in unit coordinates,
// with a confidence that collapses next to observed points.
struct KernelModel {
  std::vector<VectorXd> xs;  // unit coords
  std::vector<double> ys;
  double width = 0.15;
  double residual_scale = 0;
  double y_best = 0;

  struct Fit {
    double mean = 0;
    double sigma = 0;
  };

  Fit predict(const VectorXd& u) const {
    double wsum = 0, wy = 0, wmax = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const double d2 = (u - xs[i]).squaredNorm();
      const double w = std::exp(-0.5 * d2 / (width * width));
      wsum += w;
      wy += w * ys[i];
      wmax = std::max(wmax, w);
    }
    Fit fit;
    fit.mean = wsum > 0 ? wy / wsum : 0.0;
    fit.sigma = residual_scale * std::sqrt(std::max(0.0, 1.0 - wmax)) + 1e-9;
    return fit;
  }

  double expected_improvement(const VectorXd& u) const {
    const Fit f = predict(u);
    const double z = (f.mean - y_best) / f.sigma;
    return f.sigma * (z * normal_cdf(z) + normal_pdf(z));
  }
};

KernelModel fit_model(const std::vector<Trial>& history,
                      const SearchSpace& space, const SurrogateConfig& cfg) {
  KernelModel m;
  m.width = cfg.kernel_width;
  for (const Trial& t : history) {
    if (t.status != TrialStatus::Complete) continue;
    VectorXd u(space.dimension());
    for (int k = 0; k < space.dimension(); ++k)
      u[k] = space.dims[static_cast<size_t>(k)].to_unit(t.point[k]);
    m.xs.push_back(std::move(u));
    m.ys.push_back(t.objective);
  }
  m.y_best = *std::max_element(m.ys.begin(), m.ys.end());

  // Spread of the leave-in residuals sets the exploration scale; fall back
  // to the objective spread when the fit is degenerate.
  double ss = 0;
  for (size_t i = 0; i < m.xs.size(); ++i) {
    const double r = m.ys[i] - m.predict(m.xs[i]).mean;
    ss += r * r;
  }
  m.residual_scale = std::sqrt(ss / static_cast<double>(m.xs.size()));
  const auto [lo, hi] = std::minmax_element(m.ys.begin(), m.ys.end());
  const double spread = *hi - *lo;
  if (!(m.residual_scale > 1e-12 * std::max(1.0, std::abs(*hi))))
    m.residual_scale = std::max(spread, 1e-6);
  return m;
}

}  // namespace

VectorXd suggest(const std::vector<Trial>& history, const SearchSpace& space,
                 SearchStrategy strategy, Rng& rng,
                 const SurrogateConfig& surrogate) {
  space.validate();
  surrogate.validate();
  const int d = space.dimension();

  int complete = 0;
  for (const Trial& t : history)
    if (t.status == TrialStatus::Complete) ++complete;

  if (strategy == SearchStrategy::Random || complete < surrogate.warmup)
    return to_natural(random_unit_point(d, rng), space);

  const KernelModel model = fit_model(history, space, surrogate);
  VectorXd best_u = random_unit_point(d, rng);
  double best_ei = model.expected_improvement(best_u);
  for (int c = 1; c < surrogate.candidates; ++c) {
    const VectorXd u = random_unit_point(d, rng);
    const double ei = model.expected_improvement(u);
    if (ei > best_ei) {
      best_ei = ei;
      best_u = u;
    }
  }
  return to_natural(best_u, space);
}

void SearchConfig::validate() const {
  space.validate();
  surrogate.validate();
  if (budget < 1) throw std::invalid_argument("search: budget < 1");
}

std::string history_csv(const SearchSpace& space,
                        const std::vector<Trial>& history) {
  std::vector<std::string> header{"trial"};
  for (const auto& dim : space.dims) header.push_back(dim.name);
  header.insert(header.end(), {"objective", "seed", "status"});
  std::string out = csv_row(header);
  for (const Trial& t : history) {
    std::vector<std::string> row{std::to_string(t.id)};
    for (int k = 0; k < space.dimension(); ++k)
      row.push_back(format_double(t.point[k], 17));
    const bool ok = t.status == TrialStatus::Complete;
    row.push_back(ok ? format_double(t.objective, 17) : "");
    row.push_back(std::to_string(t.seed));
    row.push_back(ok ? "complete" : "failed");
    out += csv_row(row);
  }
  return out;
}

std::vector<Trial> load_history_csv(const std::string& path,
                                    const SearchSpace& space) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read search history: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty search history: " + path);

  const int d = space.dimension();
  std::vector<Trial> history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    // trailing empty objective field
    if (static_cast<int>(fields.size()) == d + 3)
      fields.insert(fields.begin() + 1 + d, "");
    if (static_cast<int>(fields.size()) != d + 4)
      throw std::runtime_error("malformed search history row: " + line);

    Trial t;
    t.id = std::stoi(fields[0]);
    t.point = VectorXd(d);
    for (int k = 0; k < d; ++k)
      t.point[k] = std::stod(fields[static_cast<size_t>(1 + k)]);
    t.seed = std::stoull(fields[static_cast<size_t>(d + 2)]);
    const std::string& status = fields[static_cast<size_t>(d + 3)];
    if (status == "complete") {
      t.status = TrialStatus::Complete;
      t.objective = std::stod(fields[static_cast<size_t>(d + 1)]);
    } else if (status == "failed") {
      t.status = TrialStatus::Failed;
      t.objective = std::numeric_limits<double>::quiet_NaN();
    } else {
      throw std::runtime_error("unknown trial status '" + status + "'");
    }
    history.push_back(std::move(t));
  }
  return history;
}

namespace {

constexpr std::uint64_t kSuggestSalt = 0x5355474745535400ull;

void persist(const SearchConfig& cfg, const std::vector<Trial>& history) {
  if (cfg.history_csv.empty()) return;
  const std::filesystem::path path(cfg.history_csv);
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write search history: " +
                             cfg.history_csv);
  out << history_csv(cfg.space, history);
}

}  // namespace

SearchResult run_search(const SearchConfig& cfg, const ObjectiveFn& objective) {
  cfg.validate();
  if (!objective) throw std::invalid_argument("search: no objective");

  SearchResult result;
  if (!cfg.history_csv.empty() &&
      std::filesystem::exists(cfg.history_csv)) {
    result.history = load_history_csv(cfg.history_csv, cfg.space);
    if (static_cast<int>(result.history.size()) > cfg.budget)
      throw std::invalid_argument(
          "search: resumed history already exceeds the budget");
  }

  for (int id = static_cast<int>(result.history.size()); id < cfg.budget;
       ++id) {
    Rng rng(mix_seed(cfg.seed, kSuggestSalt + static_cast<std::uint64_t>(id)));
    Trial t;
    t.id = id;
    t.point = suggest(result.history, cfg.space, cfg.strategy, rng,
                      cfg.surrogate);
    t.seed = cfg.seed;  // common random numbers across trials
    try {
      const double y = objective(t.point, t.seed);
      if (std::isfinite(y)) {
        t.objective = y;
        t.status = TrialStatus::Complete;
      } else {
        t.objective = std::numeric_limits<double>::quiet_NaN();
        t.status = TrialStatus::Failed;
      }
    } catch (const std::exception&) {
      t.objective = std::numeric_limits<double>::quiet_NaN();
      t.status = TrialStatus::Failed;
    }
    result.history.push_back(std::move(t));
    persist(cfg, result.history);
  }

  for (const Trial& t : result.history) {
    if (t.status != TrialStatus::Complete) continue;
    if (!result.has_best || t.objective > result.best.objective) {
      result.best = t;
      result.has_best = true;
    }
  }
  return result;
}

}  // namespace wecmarl
