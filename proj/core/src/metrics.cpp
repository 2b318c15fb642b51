#include "vra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vra/error.hpp"

namespace vra {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* metric) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(metric) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 (0-based) share ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double plcc(std::span<const double> pred, std::span<const double> gt) {
  require_same_length(pred, gt, "plcc");
  if (pred.size() < 2) throw UndefinedMetricError("plcc: need at least 2 points");
  const double mp = mean_of(pred);
  const double mg = mean_of(gt);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i] - mp;
    const double dy = gt[i] - mg;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw UndefinedMetricError("plcc: predictions are constant");
  if (syy == 0.0) throw UndefinedMetricError("plcc: ground truth is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double srcc(std::span<const double> pred, std::span<const double> gt) {
  require_same_length(pred, gt, "srcc");
  if (pred.size() < 3) throw UndefinedMetricError("srcc: need at least 3 points");
  if (std::all_of(gt.begin(), gt.end(), [&](double v) { return v == gt.front(); }))
    throw UndefinedMetricError("srcc: ground truth is constant");
  if (std::all_of(pred.begin(), pred.end(), [&](double v) { return v == pred.front(); }))
    throw UndefinedMetricError("srcc: predictions are constant");
  const auto rp = average_ranks(pred);
  const auto rg = average_ranks(gt);
  return plcc(rp, rg);
}

double rmse(std::span<const double> pred, std::span<const double> gt) {
  require_same_length(pred, gt, "rmse");
  if (pred.empty()) throw UndefinedMetricError("rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - gt[i]) * (pred[i] - gt[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

// ---------------------------------------------------------------- logistic

double LogisticFit::operator()(double x) const noexcept {
  const double scale = std::max(std::abs(beta4), std::numeric_limits<double>::min());
  return beta2 + (beta1 - beta2) / (1.0 + std::exp(-(x - beta3) / scale));
}

std::vector<double> LogisticFit::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (*this)(x[i]);
  return out;
}

LogisticResult fit_logistic4(std::span<const double> pred, std::span<const double> gt) {
  require_same_length(pred, gt, "fit_logistic4");
  LogisticResult identity;
  identity.fit.converged = false;
  identity.remapped.assign(pred.begin(), pred.end());
  identity.fallback = true;

  const double spread = sample_std(pred);
  if (pred.size() < kLogisticMinPoints || !(spread > 0.0)) return identity;

  auto sse = [&](const std::vector<double>& b) {
    const LogisticFit fit{b[0], b[1], b[2], b[3]};
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double r = fit(pred[i]) - gt[i];
      s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::max();
  };

  std::vector<double> start = {*std::max_element(gt.begin(), gt.end()),
                               *std::min_element(gt.begin(), gt.end()), median_of(pred), spread};
  NelderMeadResult best = nelder_mead(sse, start);
  for (int r = 0; r < kLogisticRestarts; ++r) {
    NelderMeadResult next = nelder_mead(sse, best.x);
    if (next.value <= best.value) best = std::move(next);
  }

  const LogisticFit fit{best.x[0], best.x[1], best.x[2], best.x[3], true};
  const bool finite = std::all_of(best.x.begin(), best.x.end(), [](double v) { return std::isfinite(v); });
  double identity_sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) identity_sse += (pred[i] - gt[i]) * (pred[i] - gt[i]);
  // A remap that fits worse than the raw predictions is rejected.
  if (!finite || std::abs(fit.beta4) == 0.0 || best.value > identity_sse) return identity;

  LogisticResult out;
  out.fit = fit;
  out.remapped = fit.apply(pred);
  return out;
}

// ---------------------------------------------------------------- Nelder-Mead

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = start[i] != 0.0 ? options.initial_step * std::abs(start[i]) : options.initial_step;
    simplex[i + 1][i] += step;
  }
  std::vector<double> values(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n);
  auto point_along = [&](double t) {
    // centroid + t * (centroid - worst)
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (centroid[k] - simplex[order[n]][k]);
    return p;
  };

  bool converged = false;
  while (evals < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const double fbest = values[order[0]];
    const double fworst = values[order[n]];
    double diameter = 0.0;
    double xnorm = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        diameter = std::max(diameter, std::abs(simplex[order[i]][k] - simplex[order[0]][k]));
    for (double v : simplex[order[0]]) xnorm = std::max(xnorm, std::abs(v));
    if (fworst - fbest <= options.f_tolerance * (std::abs(fbest) + options.f_tolerance) &&
        diameter <= options.x_tolerance * (1.0 + xnorm)) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k] / static_cast<double>(n);

    const auto reflected = point_along(1.0);
    const double fr = eval(reflected);
    if (fr < fbest) {
      const auto expanded = point_along(2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[order[n]] = expanded;
        values[order[n]] = fe;
      } else {
        simplex[order[n]] = reflected;
        values[order[n]] = fr;
      }
      continue;
    }
    if (fr < values[order[n - 1]]) {
      simplex[order[n]] = reflected;
      values[order[n]] = fr;
      continue;
    }
    const bool outside = fr < fworst;
    const auto contracted = point_along(outside ? 0.5 : -0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : fworst)) {
      simplex[order[n]] = contracted;
      values[order[n]] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 1; i <= n; ++i) {
      auto& v = simplex[order[i]];
      for (std::size_t k = 0; k < n; ++k) v[k] = simplex[order[0]][k] + 0.5 * (v[k] - simplex[order[0]][k]);
      values[order[i]] = eval(v);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], evals, converged};
}

}  // namespace vra
