#include "signoise/scaling_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "signoise/errors.hpp"
#include "signoise/metrics.hpp"
#include "signoise/optimize.hpp"

namespace signoise {

double huber(double residual, double delta) {
  const double a = std::fabs(residual);
  if (a <= delta) return 0.5 * residual * residual;
  return delta * (a - 0.5 * delta);
}

double predict_loss(const PowerLawFit& fit, double params, double tokens) {
  return fit.A / std::pow(params, fit.alpha) + fit.B / std::pow(tokens, fit.beta) + fit.E;
}

double power_law_objective(const PowerLawFit& fit, std::span<const ScalingPoint> points,
                           double delta) {
  double acc = 0.0;
  for (const auto& p : points)
    acc += huber(std::log(predict_loss(fit, p.params, p.tokens)) - std::log(p.loss), delta);
  return acc;
}

namespace {

struct LogPoint {
  double log_n, log_d, log_loss;
};

// Parameter vector: (log A, log B, E, alpha, beta). E, alpha and beta enter
// through their absolute values, which keeps them nonnegative without
// introducing a flat region at the bound.
struct PowerObjective {
  std::vector<LogPoint> pts;
  double delta;

  double operator()(std::span<const double> x) const {
    const double log_a = x[0], log_b = x[1], e = std::fabs(x[2]);
    const double alpha = std::fabs(x[3]), beta = std::fabs(x[4]);
    double acc = 0.0;
    for (const auto& p : pts) {
      const double pred = std::exp(log_a - alpha * p.log_n) + std::exp(log_b - beta * p.log_d) + e;
      acc += huber(std::log(pred) - p.log_loss, delta);
    }
    return acc;
  }
};

PowerLawFit to_fit(std::span<const double> x, double f, bool converged) {
  PowerLawFit fit;
  fit.A = std::exp(x[0]);
  fit.B = std::exp(x[1]);
  fit.E = std::fabs(x[2]);
  fit.alpha = std::fabs(x[3]);
  fit.beta = std::fabs(x[4]);
  fit.fit_loss = f;
  fit.converged = converged;
  return fit;
}

void check_points(std::span<const ScalingPoint> points) {
  if (points.size() < 5) throw DomainError("power-law fit needs at least 5 points");
  std::vector<double> ns, ds;
  for (const auto& p : points) {
    if (!(p.params > 0 && p.tokens > 0)) throw DomainError("scaling points need N > 0 and D > 0");
    if (!(std::isfinite(p.loss) && p.loss > 0))
      throw DomainError("scaling points need a finite positive loss");
    ns.push_back(p.params);
    ds.push_back(p.tokens);
  }
  std::sort(ns.begin(), ns.end());
  std::sort(ds.begin(), ds.end());
  if (std::unique(ns.begin(), ns.end()) - ns.begin() < 2 ||
      std::unique(ds.begin(), ds.end()) - ds.begin() < 2)
    throw DomainError("power-law fit needs at least 2 distinct N and 2 distinct D");
}

}  // namespace

PowerLawFit fit_power_law(std::span<const ScalingPoint> points, const PowerLawFitOptions& options) {
  check_points(points);
  if (!(options.delta > 0)) throw DomainError("Huber delta must be > 0");
  PowerObjective objective{{}, options.delta};
  double min_loss = points.front().loss;
  for (const auto& p : points) {
    objective.pts.push_back({std::log(p.params), std::log(p.tokens), std::log(p.loss)});
    min_loss = std::min(min_loss, p.loss);
  }
  const optimize::Objective f = std::cref(objective);

  std::vector<std::vector<double>> starts;
  starts.reserve(options.grid.size());
  for (double la : options.grid.log_a)
    for (double lb : options.grid.log_b)
      for (double ef : options.grid.e_fraction)
        for (double al : options.grid.alpha)
          for (double be : options.grid.beta) starts.push_back({la, lb, ef * min_loss, al, be});
  if (starts.empty()) throw DomainError("power-law fit grid is empty");

  const auto step_for = [&](const std::vector<double>& x0) {
    return std::vector<double>{1.0, 1.0, std::max(0.1 * std::fabs(x0[2]), 0.05 * min_loss), 0.1, 0.1};
  };

  // Screen: a budgeted descent from every grid start.
  struct Candidate {
    std::vector<double> x;
    double f;
    double start_f;
  };
  std::vector<Candidate> screened;
  screened.reserve(starts.size());
  double best_start_f = std::numeric_limits<double>::infinity();
  for (const auto& x0 : starts) {
    optimize::NelderMeadOptions nm;
    nm.ftol = options.ftol;
    nm.max_evaluations = options.screen_evaluations;
    nm.initial_step = step_for(x0);
    nm.restart = false;
    const double f0 = objective(x0);
    best_start_f = std::min(best_start_f, f0);
    auto r = optimize::nelder_mead(f, x0, nm);
    screened.push_back({std::move(r.x), r.f, f0});
  }
  // Stable order so ties resolve by grid position.
  std::vector<std::size_t> order(screened.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return screened[a].f < screened[b].f; });

  // Polish the most promising candidates to convergence.
  std::vector<double> best_x = screened[order.front()].x;
  double best_f = screened[order.front()].f;
  bool best_converged = false;
  const std::size_t polish = std::min(options.polish_candidates, order.size());
  for (std::size_t c = 0; c < polish; ++c) {
    const auto& cand = screened[order[c]];
    optimize::NelderMeadOptions nm;
    nm.ftol = options.ftol;
    nm.max_evaluations = options.max_evaluations;
    nm.initial_step = step_for(cand.x);
    nm.restart = true;
    auto r = optimize::nelder_mead(f, cand.x, nm);
    if (r.f < best_f || (r.f == best_f && !best_converged)) {
      best_f = r.f;
      best_x = r.x;
      best_converged = r.converged;
    }
  }
  // Never worse than any grid start.
  if (best_f > best_start_f) {
    const auto it = std::min_element(screened.begin(), screened.end(),
                                     [](const auto& a, const auto& b) { return a.start_f < b.start_f; });
    best_x = starts[static_cast<std::size_t>(it - screened.begin())];
    best_f = best_start_f;
  }
  return to_fit(best_x, best_f, best_converged);
}

double predict_metric(const SigmoidFit& fit, double loss) {
  return fit.a / (1.0 + std::exp(-fit.k * (loss - fit.L0))) + fit.b;
}

double predict_metric(const ScalingChain& chain, double params, double tokens) {
  return predict_metric(chain.sigmoid, predict_loss(chain.power, params, tokens));
}

SigmoidFit fit_sigmoid(std::span<const std::pair<double, double>> loss_metric) {
  if (loss_metric.size() < 4) throw DomainError("sigmoid fit needs at least 4 (loss, metric) pairs");
  std::vector<double> ls, ms;
  for (const auto& [l, m] : loss_metric) {
    if (!std::isfinite(l) || !std::isfinite(m)) throw DomainError("sigmoid fit input must be finite");
    ls.push_back(l);
    ms.push_back(m);
  }
  const auto [mn, mx] = std::minmax_element(ms.begin(), ms.end());
  const double range = *mx - *mn;
  const double l_mean = std::accumulate(ls.begin(), ls.end(), 0.0) / static_cast<double>(ls.size());
  const double m_mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  double cov = 0.0;
  for (std::size_t i = 0; i < ls.size(); ++i) cov += (ls[i] - l_mean) * (ms[i] - m_mean);
  const double k_sign = cov < 0 ? -1.0 : 1.0;
  const double median_loss = quantile(ls, 0.5);

  optimize::LeastSquaresProblem prob;
  prob.n_params = 4;
  prob.n_residuals = ls.size();
  prob.residuals = [&](std::span<const double> x, std::span<double> r) {
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-x[2] * (ls[i] - x[3])));
      r[i] = x[0] * s + x[1] - ms[i];
    }
  };
  prob.jacobian = [&](std::span<const double> x, std::span<double> j) {
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-x[2] * (ls[i] - x[3])));
      const double ds = s * (1.0 - s);
      j[i * 4 + 0] = s;
      j[i * 4 + 1] = 1.0;
      j[i * 4 + 2] = x[0] * ds * (ls[i] - x[3]);
      j[i * 4 + 3] = -x[0] * ds * x[2];
    }
  };
  const double inf = std::numeric_limits<double>::infinity();
  prob.lower = {0.0, -inf, -inf, -inf};
  prob.upper = {range > 0 ? 1.5 * range : 1.0, inf, inf, inf};

  // The prescribed start uses |k| = 1; larger magnitudes are tried too and the
  // lowest residual wins.
  optimize::Result best;
  for (double mag : {1.0, 3.0, 10.0}) {
    auto r = optimize::levenberg_marquardt(prob, {range, *mn, k_sign * mag, median_loss});
    if (r.f < best.f) best = std::move(r);
  }
  SigmoidFit fit;
  fit.a = best.x[0];
  fit.b = best.x[1];
  fit.k = best.x[2];
  fit.L0 = best.x[3];
  fit.fit_loss = best.f;
  fit.converged = best.converged;
  return fit;
}

double prediction_error(double predicted, double actual) {
  if (actual == 0.0) throw DomainError("prediction error is undefined for a zero true value");
  return std::fabs(predicted - actual) / std::fabs(actual);
}

double target_noise_bound(const EvalStore& store, std::string_view target_model,
                          std::string_view benchmark, std::string_view metric, std::size_t n) {
  return noise_final_n(store, target_model, benchmark, metric, n).value;
}

std::vector<ScalingPoint> ladder_points(const EvalStore& store,
                                        std::span<const std::string> ladder_ids,
                                        std::string_view benchmark, std::string_view loss_metric,
                                        std::string_view metric, const Scoring& scoring) {
  std::vector<ScalingPoint> out;
  for (const auto& id : ladder_ids) {
    const auto& meta = store.model(id);
    const auto loss_curve = store.curve(id, benchmark, loss_metric);
    const auto metric_curve = store.curve(id, benchmark, metric);
    const std::size_t need = scoring.kind == ScoringKind::final ? 1 : scoring.k;
    if (loss_curve.size() < need) throw InsufficientCheckpointsError(loss_curve.size(), need, {id});
    ScalingPoint p;
    p.params = meta.params;
    p.tokens = meta.tokens;
    p.loss = score_curve(loss_curve, scoring);
    if (metric_curve.size() >= need) p.metric = score_curve(metric_curve, scoring);
    out.push_back(p);
  }
  return out;
}

ScalingChain fit_chain(std::span<const ScalingPoint> points, const PowerLawFitOptions& options) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& p : points)
    if (p.metric) pairs.emplace_back(p.loss, *p.metric);
  return {fit_power_law(points, options), fit_sigmoid(pairs)};
}

ScalingFitReport scaling_fit_report(const EvalStore& store, const ScalingFitRequest& req) {
  const auto points = ladder_points(store, req.ladder_ids, req.benchmark, req.loss_metric,
                                    req.metric, req.ladder_scoring);
  ScalingFitReport rep;
  rep.benchmark = req.benchmark;
  rep.metric = req.metric;
  rep.chain = fit_chain(points, req.fit_options);

  const auto& target = store.model(req.target_id);
  const auto target_curve = store.curve(req.target_id, req.benchmark, req.metric);
  const std::size_t need = req.target_scoring.kind == ScoringKind::final ? 1 : req.target_scoring.k;
  if (target_curve.size() < need)
    throw InsufficientCheckpointsError(target_curve.size(), need, {req.target_id});
  rep.actual = score_curve(target_curve, req.target_scoring);
  rep.predicted = predict_metric(rep.chain, target.params, target.tokens);
  rep.rel_error = prediction_error(rep.predicted, rep.actual);
  rep.target_noise = target_noise_bound(store, req.target_id, req.benchmark, req.metric,
                                        req.target_window);
  rep.within_noise = within_noise(rep.rel_error, rep.target_noise);
  return rep;
}

}  // namespace signoise
