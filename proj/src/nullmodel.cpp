#include "nullnet/nullmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "nullnet/error.hpp"

namespace nullnet {

std::string to_string(NullModelMode mode) {
  return mode == NullModelMode::exact ? "exact" : "chung-lu";
}

std::string to_string(NullModelChoice choice) {
  switch (choice) {
    case NullModelChoice::exact: return "exact";
    case NullModelChoice::chung_lu: return "chung-lu";
    case NullModelChoice::auto_select: return "auto";
  }
  return "auto";
}

NullModelChoice parse_null_model_choice(const std::string& text) {
  if (text == "exact") return NullModelChoice::exact;
  if (text == "chung-lu" || text == "chung_lu") return NullModelChoice::chung_lu;
  if (text == "auto") return NullModelChoice::auto_select;
  throw Error(ErrorCode::invalid_argument, "unknown null model '" + text + "'");
}

double BicmParams::probability_from(double xi, double ya) const {
  if (mode == NullModelMode::chung_lu) return std::min(1.0, xi * ya);
  const double t = xi * ya;
  if (std::isinf(t)) return 1.0;
  return t / (1.0 + t);
}

double BicmParams::link_probability(NodeIndex i, NodeIndex alpha) const {
  if (i >= x.size() || alpha >= y.size())
    throw Error(ErrorCode::invalid_argument, "link index out of range");
  return probability_from(x[i], y[alpha]);
}

double BicmParams::expected_degree(Layer layer, NodeIndex node) const {
  double s = 0.0;
  if (layer == Layer::left) {
    for (double ya : y) s += probability_from(x.at(node), ya);
  } else {
    for (double xi : x) s += probability_from(xi, y.at(node));
  }
  return s;
}

namespace {

/// Distinct values with multiplicities; nodes sharing a degree share a
/// multiplier, so sums over a layer collapse to sums over these groups.
struct ValueGroups {
  std::vector<double> value;
  std::vector<double> count;
};

ValueGroups group_values(const std::vector<double>& values) {
  std::map<double, double> m;
  for (double v : values) m[v] += 1.0;
  ValueGroups g;
  for (const auto& [v, c] : m) {
    g.value.push_back(v);
    g.count.push_back(c);
  }
  return g;
}

struct DegreeClasses {
  std::vector<double> degree;     // distinct non-zero degrees
  std::vector<double> count;      // nodes per class
  std::vector<int> class_of;      // per node, -1 for isolated nodes
  std::size_t non_isolated = 0;
};

DegreeClasses classify(const std::vector<std::int64_t>& degrees) {
  DegreeClasses dc;
  std::map<std::int64_t, int> index;
  for (auto k : degrees)
    if (k > 0) index.emplace(k, 0);
  int next = 0;
  for (auto& [k, idx] : index) {
    idx = next++;
    dc.degree.push_back(static_cast<double>(k));
    dc.count.push_back(0.0);
  }
  dc.class_of.resize(degrees.size(), -1);
  for (std::size_t v = 0; v < degrees.size(); ++v) {
    if (degrees[v] == 0) continue;
    const int c = index.at(degrees[v]);
    dc.class_of[v] = c;
    dc.count[c] += 1.0;
    ++dc.non_isolated;
  }
  return dc;
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// Class-reduced maximum-likelihood solve in log-multiplier coordinates:
/// theta_x[a] = ln x_a, theta_y[b] = ln y_b.
class ClassSolver {
 public:
  ClassSolver(const DegreeClasses& left, const DegreeClasses& right, const FitOptions& opt)
      : L_(left), R_(right), opt_(opt) {}

  void solve(FitDiagnostics& diag) {
    const std::size_t A = L_.degree.size(), B = R_.degree.size();
    double m = 0.0;
    for (std::size_t a = 0; a < A; ++a) m += L_.degree[a] * L_.count[a];
    tx_.resize(A);
    ty_.resize(B);
    for (std::size_t a = 0; a < A; ++a) tx_[a] = std::log(L_.degree[a] / std::sqrt(m));
    for (std::size_t b = 0; b < B; ++b) ty_[b] = std::log(R_.degree[b] / std::sqrt(m));

    double res = residual();
    double best = res;
    int iter = 0;
    std::vector<double> history{res};
    bool stalled = false;

    while (iter < opt_.max_iter && res > opt_.tol && !stalled) {
      fixed_point_sweep();
      ++iter;
      res = residual();
      if (!std::isfinite(res)) {
        stalled = true;
        break;
      }
      best = std::min(best, res);
      history.push_back(res);
      // Linear convergence slower than ~0.93 per sweep hands over to Newton.
      if (history.size() > 20 && res > 0.5 * history[history.size() - 11]) stalled = true;
    }
    diag.method = "fixed_point";

    if (res > opt_.tol && iter < opt_.max_iter) {
      diag.method = "newton";
      if (!std::isfinite(res)) {
        for (std::size_t a = 0; a < A; ++a) tx_[a] = std::log(L_.degree[a] / std::sqrt(m));
        for (std::size_t b = 0; b < B; ++b) ty_[b] = std::log(R_.degree[b] / std::sqrt(m));
        res = residual();
      }
      while (iter < opt_.max_iter && res > opt_.tol) {
        const bool progressed = newton_step();
        ++iter;
        ++diag.newton_steps;
        res = residual();
        best = std::min(best, res);
        if (!progressed) break;
      }
    }
    diag.iterations = iter;
    diag.max_residual = res;
    if (!(res <= opt_.tol))
      throw ConvergenceError("null model fit did not converge (best residual " +
                                 std::to_string(best) + ")",
                             best, iter);
  }

  double x(int a) const { return std::exp(tx_[a]); }
  double y(int b) const { return std::exp(ty_[b]); }

 private:
  double p(std::size_t a, std::size_t b) const { return sigmoid(tx_[a] + ty_[b]); }

  double residual() const {
    const std::size_t A = tx_.size(), B = ty_.size();
    std::vector<double> col(B, 0.0);
    double worst = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double pab = p(a, b);
        row += R_.count[b] * pab;
        col[b] += L_.count[a] * pab;
      }
      worst = std::max(worst, std::abs(row - L_.degree[a]));
    }
    for (std::size_t b = 0; b < B; ++b) worst = std::max(worst, std::abs(col[b] - R_.degree[b]));
    if (std::isnan(worst)) return std::numeric_limits<double>::infinity();
    return worst;
  }

  void fixed_point_sweep() {
    const std::size_t A = tx_.size(), B = ty_.size();
    for (std::size_t a = 0; a < A; ++a) {
      // sum_b d_b y_b / (1 + x_a y_b) = sum_b d_b p_ab / x_a
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b) s += R_.count[b] * sigmoid(tx_[a] + ty_[b]) * std::exp(-tx_[a]);
      tx_[a] = std::log(L_.degree[a]) - std::log(s);
    }
    for (std::size_t b = 0; b < B; ++b) {
      double s = 0.0;
      for (std::size_t a = 0; a < A; ++a) s += L_.count[a] * sigmoid(tx_[a] + ty_[b]) * std::exp(-ty_[b]);
      ty_[b] = std::log(R_.degree[b]) - std::log(s);
    }
  }

  /// Negative log-likelihood of the class-reduced model.
  double objective(const std::vector<double>& tx, const std::vector<double>& ty) const {
    double f = 0.0;
    for (std::size_t a = 0; a < tx.size(); ++a) f -= L_.count[a] * L_.degree[a] * tx[a];
    for (std::size_t b = 0; b < ty.size(); ++b) f -= R_.count[b] * R_.degree[b] * ty[b];
    for (std::size_t a = 0; a < tx.size(); ++a)
      for (std::size_t b = 0; b < ty.size(); ++b)
        f += L_.count[a] * R_.count[b] * softplus(tx[a] + ty[b]);
    return f;
  }

  Eigen::VectorXd gradient(const std::vector<double>& tx, const std::vector<double>& ty) const {
    const std::size_t A = tx.size(), B = ty.size();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A + B - 1));
    std::vector<double> col(B, 0.0);
    for (std::size_t a = 0; a < A; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double pab = sigmoid(tx[a] + ty[b]);
        row += R_.count[b] * pab;
        col[b] += L_.count[a] * pab;
      }
      g[static_cast<Eigen::Index>(a)] = L_.count[a] * (row - L_.degree[a]);
    }
    for (std::size_t b = 1; b < B; ++b)
      g[static_cast<Eigen::Index>(A + b - 1)] = R_.count[b] * (col[b] - R_.degree[b]);
    return g;
  }

  /// One damped Newton step with the gauge fixed by holding ty_[0].
  bool newton_step() {
    const std::size_t A = tx_.size(), B = ty_.size();
    const auto n = static_cast<Eigen::Index>(A + B - 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t b = 0; b < B; ++b) {
        const double pab = p(a, b);
        const double w = pab * (1.0 - pab);
        const auto ia = static_cast<Eigen::Index>(a);
        H(ia, ia) += L_.count[a] * R_.count[b] * w;
        if (b == 0) continue;
        const auto ib = static_cast<Eigen::Index>(A + b - 1);
        H(ib, ib) += L_.count[a] * R_.count[b] * w;
        H(ia, ib) += L_.count[a] * R_.count[b] * w;
        H(ib, ia) += L_.count[a] * R_.count[b] * w;
      }
    }
    const Eigen::VectorXd g = gradient(tx_, ty_);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = -ldlt.solve(g);
    if (step.size() != n || !step.allFinite()) {
      const double ridge = 1e-10 * std::max(1.0, H.diagonal().maxCoeff());
      step = -(H + ridge * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(g);
    }
    if (!step.allFinite()) return false;

    const double f0 = objective(tx_, ty_);
    const double g0 = g.norm();
    const double slope = g.dot(step);
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      std::vector<double> tx = tx_, ty = ty_;
      for (std::size_t a = 0; a < A; ++a) tx[a] += t * step[static_cast<Eigen::Index>(a)];
      for (std::size_t b = 1; b < B; ++b) ty[b] += t * step[static_cast<Eigen::Index>(A + b - 1)];
      const double f1 = objective(tx, ty);
      // Near the optimum f stops resolving decreases; the gradient norm still does.
      if (f1 <= f0 + 1e-4 * t * slope || gradient(tx, ty).norm() < g0) {
        tx_ = std::move(tx);
        ty_ = std::move(ty);
        return true;
      }
    }
    return false;
  }

  const DegreeClasses& L_;
  const DegreeClasses& R_;
  const FitOptions& opt_;
  std::vector<double> tx_, ty_;
};

std::size_t count_capped_pairs(const std::vector<std::int64_t>& left,
                               const std::vector<std::int64_t>& right, std::int64_t m) {
  std::vector<std::int64_t> sorted = right;
  std::sort(sorted.begin(), sorted.end());
  std::size_t capped = 0;
  for (auto k : left) {
    if (k <= 0) continue;
    // k * k_a > m  <=>  k_a > floor(m / k)
    const std::int64_t bound = m / k;
    capped += static_cast<std::size_t>(sorted.end() -
                                       std::upper_bound(sorted.begin(), sorted.end(), bound));
  }
  return capped;
}

}  // namespace

BicmParams fit_bicm(const BipartiteGraph& g, const FitOptions& options) {
  if (!(options.tol > 0)) throw Error(ErrorCode::invalid_argument, "tol must be positive");
  if (g.n_edges() == 0) throw Error(ErrorCode::empty_input, "cannot fit an edgeless graph");

  BicmParams params;
  params.mode = NullModelMode::exact;
  params.left_degrees = degrees(g, Layer::left).values;
  params.right_degrees = degrees(g, Layer::right).values;
  params.n_edges = static_cast<std::int64_t>(g.n_edges());

  const DegreeClasses left = classify(params.left_degrees);
  const DegreeClasses right = classify(params.right_degrees);
  for (std::size_t i = 0; i < params.left_degrees.size(); ++i)
    if (params.left_degrees[i] == static_cast<std::int64_t>(right.non_isolated))
      throw Error(ErrorCode::degenerate_degree,
                  "degenerate degree: node '" + g.left_ids()[i] + "' links every opposite node");
  for (std::size_t a = 0; a < params.right_degrees.size(); ++a)
    if (params.right_degrees[a] == static_cast<std::int64_t>(left.non_isolated))
      throw Error(ErrorCode::degenerate_degree,
                  "degenerate degree: node '" + g.right_ids()[a] + "' links every opposite node");

  ClassSolver solver(left, right, options);
  solver.solve(params.diagnostics);

  params.x.resize(params.left_degrees.size(), 0.0);
  params.y.resize(params.right_degrees.size(), 0.0);
  for (std::size_t i = 0; i < params.x.size(); ++i)
    if (left.class_of[i] >= 0) params.x[i] = solver.x(left.class_of[i]);
  for (std::size_t a = 0; a < params.y.size(); ++a)
    if (right.class_of[a] >= 0) params.y[a] = solver.y(right.class_of[a]);
  params.diagnostics.max_residual = max_degree_residual(params);
  return params;
}

BicmParams fit_chung_lu(const BipartiteGraph& g, const FitOptions& options) {
  if (g.n_edges() == 0) throw Error(ErrorCode::empty_input, "cannot fit an edgeless graph");
  BicmParams params;
  params.mode = NullModelMode::chung_lu;
  params.left_degrees = degrees(g, Layer::left).values;
  params.right_degrees = degrees(g, Layer::right).values;
  params.n_edges = static_cast<std::int64_t>(g.n_edges());
  const double root_m = std::sqrt(static_cast<double>(params.n_edges));
  params.x.reserve(params.left_degrees.size());
  params.y.reserve(params.right_degrees.size());
  for (auto k : params.left_degrees) params.x.push_back(static_cast<double>(k) / root_m);
  for (auto k : params.right_degrees) params.y.push_back(static_cast<double>(k) / root_m);

  auto& diag = params.diagnostics;
  diag.method = "chung_lu";
  const double rho = connectance(g);
  if (rho >= options.sparse_threshold)
    diag.warnings.push_back("connectance " + std::to_string(rho) +
                            " is not below the sparse threshold " +
                            std::to_string(options.sparse_threshold));
  diag.capped_pairs =
      count_capped_pairs(params.left_degrees, params.right_degrees, params.n_edges);
  if (diag.capped_pairs > 0)
    diag.warnings.push_back(std::to_string(diag.capped_pairs) +
                            " link probabilities exceeded 1 and were capped");
  diag.max_residual = max_degree_residual(params);
  return params;
}

BicmParams fit_null_model(const BipartiteGraph& g, NullModelChoice choice,
                          const FitOptions& options) {
  switch (choice) {
    case NullModelChoice::exact: return fit_bicm(g, options);
    case NullModelChoice::chung_lu: return fit_chung_lu(g, options);
    case NullModelChoice::auto_select: break;
  }
  if (g.n_edges() == 0) throw Error(ErrorCode::empty_input, "cannot fit an edgeless graph");
  if (connectance(g) < options.sparse_threshold) return fit_chung_lu(g, options);
  try {
    return fit_bicm(g, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_degree) throw;
    BicmParams p = fit_chung_lu(g, options);
    p.diagnostics.warnings.insert(p.diagnostics.warnings.begin(),
                                  std::string("exact fit unavailable, using chung-lu: ") +
                                      e.what());
    return p;
  }
}

double max_degree_residual(const BicmParams& params) {
  const auto ygroups = group_values(params.y);
  const auto xgroups = group_values(params.x);
  double worst = 0.0;
  for (std::size_t i = 0; i < params.x.size(); ++i) {
    double s = 0.0;
    for (std::size_t b = 0; b < ygroups.value.size(); ++b)
      s += ygroups.count[b] * params.probability_from(params.x[i], ygroups.value[b]);
    worst = std::max(worst, std::abs(s - static_cast<double>(params.left_degrees[i])));
  }
  for (std::size_t a = 0; a < params.y.size(); ++a) {
    double s = 0.0;
    for (std::size_t g = 0; g < xgroups.value.size(); ++g)
      s += xgroups.count[g] * params.probability_from(xgroups.value[g], params.y[a]);
    worst = std::max(worst, std::abs(s - static_cast<double>(params.right_degrees[a])));
  }
  return worst;
}

double bicm_log_likelihood(const BipartiteGraph& g, const BicmParams& params) {
  if (params.n_left() != g.n_left() || params.n_right() != g.n_right())
    throw Error(ErrorCode::invalid_argument, "params do not match graph");
  const auto ygroups = group_values(params.y);
  double ll = 0.0;
  for (NodeIndex i = 0; i < g.n_left(); ++i) {
    for (std::size_t b = 0; b < ygroups.value.size(); ++b)
      ll += ygroups.count[b] * std::log1p(-params.probability_from(params.x[i], ygroups.value[b]));
    for (NodeIndex a : g.right_neighbors(i)) {
      const double p = params.probability_from(params.x[i], params.y[a]);
      ll += std::log(p) - std::log1p(-p);
    }
  }
  return ll;
}

namespace {

nlohmann::json diagnostics_json(const FitDiagnostics& d) {
  return {{"iterations", d.iterations},
          {"newton_steps", d.newton_steps},
          {"max_residual", d.max_residual},
          {"method", d.method},
          {"capped_pairs", d.capped_pairs},
          {"warnings", d.warnings}};
}

FitDiagnostics diagnostics_from(const nlohmann::json& j) {
  FitDiagnostics d;
  d.iterations = j.value("iterations", 0);
  d.newton_steps = j.value("newton_steps", 0);
  d.max_residual = j.value("max_residual", 0.0);
  d.method = j.value("method", "");
  d.capped_pairs = j.value("capped_pairs", std::size_t{0});
  d.warnings = j.value("warnings", std::vector<std::string>{});
  return d;
}

BicmParams empty_block(std::vector<std::int64_t> left, std::vector<std::int64_t> right) {
  BicmParams p;
  p.mode = NullModelMode::chung_lu;
  p.x.assign(left.size(), 0.0);
  p.y.assign(right.size(), 0.0);
  p.left_degrees = std::move(left);
  p.right_degrees = std::move(right);
  p.diagnostics.method = "empty";
  return p;
}

}  // namespace

nlohmann::json to_json(const BicmParams& params) {
  return {{"model", "bicm"},
          {"mode", to_string(params.mode)},
          {"n_edges", params.n_edges},
          {"x", params.x},
          {"y", params.y},
          {"left_degrees", params.left_degrees},
          {"right_degrees", params.right_degrees},
          {"diagnostics", diagnostics_json(params.diagnostics)}};
}

BicmParams bicm_from_json(const nlohmann::json& doc) {
  try {
    BicmParams p;
    const auto mode = doc.at("mode").get<std::string>();
    if (mode == "exact") {
      p.mode = NullModelMode::exact;
    } else if (mode == "chung-lu") {
      p.mode = NullModelMode::chung_lu;
    } else {
      throw Error(ErrorCode::parse, "unknown null model mode '" + mode + "'");
    }
    p.n_edges = doc.at("n_edges").get<std::int64_t>();
    p.x = doc.at("x").get<std::vector<double>>();
    p.y = doc.at("y").get<std::vector<double>>();
    p.left_degrees = doc.at("left_degrees").get<std::vector<std::int64_t>>();
    p.right_degrees = doc.at("right_degrees").get<std::vector<std::int64_t>>();
    p.diagnostics = diagnostics_from(doc.value("diagnostics", nlohmann::json::object()));
    if (p.x.size() != p.left_degrees.size() || p.y.size() != p.right_degrees.size())
      throw Error(ErrorCode::parse, "multiplier and degree arrays differ in length");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("invalid BiCM parameters: ") + e.what());
  }
}

double BidcmParams::authorship_probability(NodeIndex i, NodeIndex alpha) const {
  if (i >= n_users() || alpha >= n_posts)
    throw Error(ErrorCode::invalid_argument, "link index out of range");
  if (closed_form) return static_cast<double>(user_out[i]) / static_cast<double>(n_posts);
  return authorship.link_probability(i, alpha);
}

double BidcmParams::retweet_probability(NodeIndex i, NodeIndex alpha) const {
  if (i >= n_users() || alpha >= n_posts)
    throw Error(ErrorCode::invalid_argument, "link index out of range");
  return retweet.link_probability(i, alpha);
}

BidcmParams fit_bidcm(const DirectedBipartiteGraph& g, const BidcmOptions& options) {
  if (g.n_posts() == 0) throw Error(ErrorCode::empty_input, "no posts in directed graph");
  BidcmParams p;
  p.user_out = degrees(g, Layer::left, Direction::out).values;
  p.user_in = degrees(g, Layer::left, Direction::in).values;
  p.post_out = degrees(g, Layer::right, Direction::out).values;
  p.n_posts = g.n_posts();

  const auto post_in = degrees(g, Layer::right, Direction::in);
  const bool unit_in = std::all_of(post_in.values.begin(), post_in.values.end(),
                                   [](std::int64_t k) { return k == 1; });
  if (!unit_in) throw Error(ErrorCode::invalid_argument, "posts must have exactly one author");

  p.closed_form = !options.general_authorship;
  if (options.general_authorship) {
    // Tight enough that probabilities agree with k_out / N_posts to ~1e-12.
    FitOptions tight = options.fit;
    tight.tol = std::min(tight.tol, 1e-12);
    p.authorship = fit_bicm(g.authorship(), tight);
  } else {
    p.authorship = empty_block(p.user_out, post_in.values);
    p.authorship.diagnostics.method = "closed_form";
  }

  if (g.retweets().n_edges() == 0) {
    p.retweet = empty_block(p.user_in, p.post_out);
  } else {
    p.retweet = fit_null_model(g.retweets(), options.retweet_model, options.fit);
  }
  return p;
}

nlohmann::json to_json(const BidcmParams& params) {
  nlohmann::json j = {{"model", "bidcm"},
                      {"n_posts", params.n_posts},
                      {"closed_form", params.closed_form},
                      {"user_out", params.user_out},
                      {"user_in", params.user_in},
                      {"post_out", params.post_out},
                      {"retweet", to_json(params.retweet)}};
  if (!params.closed_form) j["authorship"] = to_json(params.authorship);
  return j;
}

BidcmParams bidcm_from_json(const nlohmann::json& doc) {
  try {
    BidcmParams p;
    p.n_posts = doc.at("n_posts").get<std::size_t>();
    p.closed_form = doc.at("closed_form").get<bool>();
    p.user_out = doc.at("user_out").get<std::vector<std::int64_t>>();
    p.user_in = doc.at("user_in").get<std::vector<std::int64_t>>();
    p.post_out = doc.at("post_out").get<std::vector<std::int64_t>>();
    const auto& rt = doc.at("retweet");
    p.retweet = rt.at("diagnostics").value("method", "") == "empty"
                    ? empty_block(p.user_in, p.post_out)
                    : bicm_from_json(rt);
    if (p.closed_form) {
      p.authorship = empty_block(p.user_out, std::vector<std::int64_t>(p.n_posts, 1));
      p.authorship.diagnostics.method = "closed_form";
    } else {
      p.authorship = bicm_from_json(doc.at("authorship"));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("invalid BiDCM parameters: ") + e.what());
  }
}

}  // namespace nullnet
