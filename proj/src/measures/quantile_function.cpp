#include "wassbary/quantile_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wassbary/error.hpp"

namespace wassbary {

QuantileFunction::QuantileFunction(std::vector<double> probs, std::vector<double> start,
                                   std::vector<double> end)
    : probs_(std::move(probs)), start_(std::move(start)), end_(std::move(end)) {
  require(!start_.empty(), ErrorKind::Domain, "quantile function needs at least one segment");
  require(probs_.size() == start_.size() + 1 && end_.size() == start_.size(), ErrorKind::Shape,
          "quantile function breakpoints do not match segments");
  require(probs_.front() == 0.0 && probs_.back() == 1.0, ErrorKind::Domain,
          "quantile function must span [0, 1]");
  for (std::size_t k = 0; k < start_.size(); ++k) {
    require(probs_[k] < probs_[k + 1], ErrorKind::Domain, "quantile breakpoints must increase");
    require(std::isfinite(start_[k]) && std::isfinite(end_[k]), ErrorKind::Domain,
            "quantile values must be finite");
    require(start_[k] <= end_[k], ErrorKind::Domain, "quantile function must be nondecreasing");
    if (k + 1 < start_.size())
      require(end_[k] <= start_[k + 1], ErrorKind::Domain, "quantile function must be nondecreasing");
  }
}

QuantileFunction QuantileFunction::step(std::span<const double> values) {
  require(!values.empty(), ErrorKind::Domain, "empty measure");
  const std::size_t m = values.size();
  std::vector<double> probs(m + 1);
  for (std::size_t k = 0; k <= m; ++k) probs[k] = static_cast<double>(k) / static_cast<double>(m);
  probs[m] = 1.0;
  std::vector<double> v(values.begin(), values.end());
  return QuantileFunction(std::move(probs), v, v);
}

QuantileFunction QuantileFunction::from_cells(std::span<const double> edges,
                                              std::span<const double> masses) {
  require(edges.size() == masses.size() + 1, ErrorKind::Shape, "cell edges do not match masses");
  double total = 0.0;
  for (double w : masses) {
    require(w >= 0.0 && std::isfinite(w), ErrorKind::Domain, "cell masses must be nonnegative");
    total += w;
  }
  require(total > 0.0, ErrorKind::Domain, "cell masses sum to zero");
  std::vector<double> probs{0.0}, start, end;
  double running = 0.0;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    if (masses[k] <= 0.0) continue;
    running += masses[k];
    double p = running / total;
    if (p <= probs.back()) continue;
    probs.push_back(p);
    start.push_back(edges[k]);
    end.push_back(edges[k + 1]);
  }
  probs.back() = 1.0;
  return QuantileFunction(std::move(probs), std::move(start), std::move(end));
}

double QuantileFunction::value_in(std::size_t k, double q) const {
  if (q <= probs_[k]) return start_[k];
  if (q >= probs_[k + 1]) return end_[k];
  double t = (q - probs_[k]) / (probs_[k + 1] - probs_[k]);
  return start_[k] + (end_[k] - start_[k]) * t;
}

double QuantileFunction::operator()(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  auto it = std::upper_bound(probs_.begin(), probs_.end(), q);
  std::size_t k = it == probs_.begin() ? 0 : static_cast<std::size_t>(it - probs_.begin()) - 1;
  k = std::min(k, segments() - 1);
  return value_in(k, q);
}

double QuantileFunction::left_limit(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  auto it = std::lower_bound(probs_.begin(), probs_.end(), q);
  std::size_t k = it == probs_.begin() ? 0 : static_cast<std::size_t>(it - probs_.begin()) - 1;
  k = std::min(k, segments() - 1);
  return value_in(k, q);
}

double QuantileFunction::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < segments(); ++k)
    s += (probs_[k + 1] - probs_[k]) * 0.5 * (start_[k] + end_[k]);
  return s;
}

double QuantileFunction::second_moment() const {
  double s = 0.0;
  for (std::size_t k = 0; k < segments(); ++k) {
    double a = start_[k], b = end_[k];
    s += (probs_[k + 1] - probs_[k]) * (a * a + a * b + b * b) / 3.0;
  }
  return s;
}

double QuantileFunction::cdf(double x) const {
  double p = 0.0;
  for (std::size_t k = 0; k < segments(); ++k) {
    double w = probs_[k + 1] - probs_[k];
    if (x >= end_[k]) {
      p += w;
    } else if (x > start_[k]) {
      p += w * (x - start_[k]) / (end_[k] - start_[k]);
    } else {
      break;
    }
  }
  return std::min(p, 1.0);
}

double QuantileFunction::sup_density() const {
  double best = 0.0;
  for (std::size_t k = 0; k < segments(); ++k) {
    double width = end_[k] - start_[k];
    if (width <= 0.0) return std::numeric_limits<double>::infinity();
    best = std::max(best, (probs_[k + 1] - probs_[k]) / width);
  }
  return best;
}

std::vector<double> QuantileFunction::cell_masses(std::span<const double> edges) const {
  require(edges.size() >= 2, ErrorKind::Shape, "need at least one cell");
  const std::size_t cells = edges.size() - 1;
  std::vector<double> out(cells, 0.0);
  auto cell_of = [&](double x) -> std::size_t {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    if (it == edges.begin()) return 0;
    return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, cells - 1);
  };
  for (std::size_t k = 0; k < segments(); ++k) {
    const double w = probs_[k + 1] - probs_[k];
    const double a = start_[k], b = end_[k];
    if (b <= a) {
      out[cell_of(a)] += w;
      continue;
    }
    // Pieces of the segment below the first edge or above the last one are
    // folded into the end cells.
    if (a < edges.front()) out[0] += w * (std::min(b, edges.front()) - a) / (b - a);
    if (b > edges.back()) out[cells - 1] += w * (b - std::max(a, edges.back())) / (b - a);
    for (std::size_t c = cell_of(std::max(a, edges.front())); c < cells && edges[c] < b; ++c) {
      double lo = std::max(a, edges[c]);
      double hi = std::min(b, edges[c + 1]);
      if (hi > lo) out[c] += w * (hi - lo) / (b - a);
    }
  }
  return out;
}

QuantileFunction QuantileFunction::refined(std::span<const double> cuts) const {
  std::vector<double> sorted(cuts.begin(), cuts.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> probs{0.0}, start, end;
  for (std::size_t k = 0; k < segments(); ++k) {
    const double a = start_[k], b = end_[k];
    const double p0 = probs_[k], p1 = probs_[k + 1];
    double cur_p = p0, cur_v = a;
    if (b > a) {
      auto it = std::upper_bound(sorted.begin(), sorted.end(), a);
      for (; it != sorted.end() && *it < b; ++it) {
        double p = p0 + (p1 - p0) * (*it - a) / (b - a);
        if (p <= cur_p || p >= p1) continue;
        probs.push_back(p);
        start.push_back(cur_v);
        end.push_back(*it);
        cur_p = p;
        cur_v = *it;
      }
    }
    probs.push_back(p1);
    start.push_back(cur_v);
    end.push_back(b);
  }
  probs.back() = 1.0;
  return QuantileFunction(std::move(probs), std::move(start), std::move(end));
}

QuantileFunction QuantileFunction::mapped(const std::function<double(double)>& f) const {
  std::vector<double> s(segments()), e(segments());
  for (std::size_t k = 0; k < segments(); ++k) {
    s[k] = f(start_[k]);
    e[k] = f(end_[k]);
  }
  // Round-off in f can break monotonicity by an ulp; restore it.
  for (std::size_t k = 0; k < segments(); ++k) {
    if (k > 0) s[k] = std::max(s[k], e[k - 1]);
    e[k] = std::max(e[k], s[k]);
  }
  return QuantileFunction(probs_, std::move(s), std::move(e));
}

std::vector<double> merged_breakpoints(std::span<const QuantileFunction* const> fns) {
  std::vector<double> all;
  for (const auto* f : fns) all.insert(all.end(), f->probs().begin(), f->probs().end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

namespace {

// Walks the merged breakpoints u, reporting for every interval [u_m, u_{m+1}]
// the value of f at both ends taken on the segment that covers the interval.
struct SegmentCursor {
  const QuantileFunction* f;
  std::size_t k = 0;
  void advance_to(double u) {
    while (k + 1 < f->segments() && f->probs()[k + 1] <= u) ++k;
  }
};

}  // namespace

QuantileFunction combine(std::span<const QuantileFunction* const> fns, std::span<const double> weights) {
  require(!fns.empty() && fns.size() == weights.size(), ErrorKind::Shape,
          "combine needs one weight per function");
  std::vector<double> u = merged_breakpoints(fns);
  const std::size_t segs = u.size() - 1;
  std::vector<double> start(segs, 0.0), end(segs, 0.0);
  std::vector<SegmentCursor> cursors;
  for (const auto* f : fns) cursors.push_back({f});
  for (std::size_t m = 0; m < segs; ++m) {
    for (std::size_t i = 0; i < fns.size(); ++i) {
      auto& c = cursors[i];
      c.advance_to(u[m]);
      start[m] += weights[i] * c.f->value_in(c.k, u[m]);
      end[m] += weights[i] * c.f->value_in(c.k, u[m + 1]);
    }
  }
  for (std::size_t m = 0; m < segs; ++m) {
    if (m > 0) start[m] = std::max(start[m], end[m - 1]);
    end[m] = std::max(end[m], start[m]);
  }
  return QuantileFunction(std::move(u), std::move(start), std::move(end));
}

double integrated_squared_difference(const QuantileFunction& a, const QuantileFunction& b) {
  const QuantileFunction* fns[] = {&a, &b};
  std::vector<double> u = merged_breakpoints(fns);
  SegmentCursor ca{&a}, cb{&b};
  double s = 0.0;
  for (std::size_t m = 0; m + 1 < u.size(); ++m) {
    ca.advance_to(u[m]);
    cb.advance_to(u[m]);
    double d0 = ca.f->value_in(ca.k, u[m]) - cb.f->value_in(cb.k, u[m]);
    double d1 = ca.f->value_in(ca.k, u[m + 1]) - cb.f->value_in(cb.k, u[m + 1]);
    s += (u[m + 1] - u[m]) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return s;
}

}  // namespace wassbary
