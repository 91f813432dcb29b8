#include "lagan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace lagan::metrics {

Samples::Samples(std::size_t d, std::vector<double> v) : dim(d), values(std::move(v)) {
  if (dim == 0) throw std::invalid_argument("Samples: dimension must be positive");
  if (values.size() % dim != 0)
    throw std::invalid_argument("Samples: " + std::to_string(values.size()) +
                                " values do not split into points of dimension " +
                                std::to_string(dim));
}

Kernel Kernel::fixed(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("Kernel: bandwidth must be positive");
  return Kernel{h};
}

double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: need at least 2 samples");
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    throw std::invalid_argument(
        "silverman_bandwidth: samples have zero spread; pass an explicit bandwidth");
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde(std::span<const double> samples, std::span<const double> grid,
                        std::optional<double> bandwidth) {
  if (samples.size() < 2) throw std::invalid_argument("kde: need at least 2 samples");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("kde: grid must be sorted");
  const double h =
      bandwidth && *bandwidth > 0.0 ? *bandwidth : silverman_bandwidth(samples);
  const double norm = 1.0 / (samples.size() * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double x : samples) {
      const double u = (grid[g] - x) / h;
      s += std::exp(-0.5 * u * u);
    }
    out[g] = s * norm;
  }
  return out;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Points in lexicographic order, so every sum below is independent of the
// order the caller supplied them in.
Samples canonical(const Samples& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    const auto a = s.point(i), b = s.point(j);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  Samples out;
  out.dim = s.dim;
  out.values.reserve(s.values.size());
  for (auto i : idx) {
    const auto p = s.point(i);
    out.values.insert(out.values.end(), p.begin(), p.end());
  }
  return out;
}

Samples pooled(const Samples& a, const Samples& b) {
  Samples out;
  out.dim = a.dim;
  out.values = a.values;
  out.values.insert(out.values.end(), b.values.begin(), b.values.end());
  return canonical(out);
}

void check_pair(const Samples& a, const Samples& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("mmd: empty sample set");
  if (a.dim != b.dim) throw std::invalid_argument("mmd: dimension mismatch");
}

}  // namespace

double median_pairwise_distance(const Samples& pool, std::size_t max_points) {
  const std::size_t n = pool.size();
  if (n < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 points");
  std::vector<std::size_t> pick;
  if (max_points < 2 || n <= max_points) {
    pick.resize(n);
    std::iota(pick.begin(), pick.end(), 0);
  } else {
    for (std::size_t i = 0; i < max_points; ++i) pick.push_back(i * n / max_points);
  }
  std::vector<double> d;
  d.reserve(pick.size() * (pick.size() - 1) / 2);
  for (std::size_t i = 0; i < pick.size(); ++i)
    for (std::size_t j = i + 1; j < pick.size(); ++j)
      d.push_back(std::sqrt(sq_dist(pool.point(pick[i]), pool.point(pick[j]))));
  const auto mid = d.begin() + d.size() / 2;
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

double mmd_bandwidth(const Samples& a, const Samples& b, const Kernel& kernel) {
  check_pair(a, b);
  if (kernel.bandwidth) return *kernel.bandwidth;
  const double h = median_pairwise_distance(pooled(a, b));
  // All pooled points coincide: any bandwidth gives the same (zero) estimate.
  return h > 0.0 ? h : 1.0;
}

double mmd(const Samples& a_in, const Samples& b_in, const Kernel& kernel) {
  check_pair(a_in, b_in);
  Samples a = canonical(a_in), b = canonical(b_in);
  // Fix the pair order as well so that mmd(a, b) and mmd(b, a) run the same
  // floating-point sums.
  if (std::lexicographical_compare(b.values.begin(), b.values.end(), a.values.begin(),
                                   a.values.end()) ||
      (b.values == a.values && b.size() < a.size()))
    std::swap(a, b);
  const double h = mmd_bandwidth(a, b, kernel);
  const double inv = 1.0 / (2.0 * h * h);
  auto k = [&](std::span<const double> x, std::span<const double> y) {
    return std::exp(-sq_dist(x, y) * inv);
  };

  const std::size_t m = a.size(), n = b.size();
  auto within = [&](const Samples& s) {
    double t = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) t += k(s.point(i), s.point(j));
    return 2.0 * t;
  };
  double kab = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) kab += k(a.point(i), b.point(j));

  double est = -2.0 * kab / (static_cast<double>(m) * n);
  if (m > 1) est += within(a) / (static_cast<double>(m) * (m - 1));
  if (n > 1) est += within(b) / (static_cast<double>(n) * (n - 1));
  return std::sqrt(std::max(est, 0.0));
}

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("tv_distance: sizes " + std::to_string(p.size()) + " and " +
                                std::to_string(q.size()) + " differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double leaked_mass(const Samples& generated, const std::vector<std::vector<double>>& modes,
                   const TransformationSet& group, double radius) {
  if (generated.dim != 2) throw std::invalid_argument("leaked_mass: samples must be 2-D");
  if (modes.empty()) throw std::invalid_argument("leaked_mass: no reference modes");
  if (!(radius > 0.0)) throw std::invalid_argument("leaked_mass: radius must be positive");
  const auto check = is_group(group);
  if (!check.is_group)
    throw LeakPreconditionError("leaked_mass: transform set is not a group (" + check.reason + ")");

  struct Copy {
    std::vector<double> at;
    bool identity;
  };
  std::vector<Copy> copies;
  for (const auto& t : group.transforms())
    for (const auto& m : modes) {
      if (m.size() != 2) throw std::invalid_argument("leaked_mass: modes must be 2-D");
      copies.push_back({apply_point(t, m), t.is_identity()});
    }
  for (std::size_t i = 0; i < copies.size(); ++i)
    for (std::size_t j = i + 1; j < copies.size(); ++j)
      if (std::sqrt(sq_dist(copies[i].at, copies[j].at)) <= 2.0 * radius)
        throw LeakPreconditionError(
            "leaked_mass: reference copies closer than twice the assignment radius; "
            "assignment would be ambiguous");

  if (generated.size() == 0) return 0.0;
  std::size_t leaked = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto x = generated.point(i);
    std::size_t best = 0;
    double best_d = sq_dist(x, copies[0].at);
    for (std::size_t c = 1; c < copies.size(); ++c) {
      const double d = sq_dist(x, copies[c].at);
      if (d < best_d) best_d = d, best = c;
    }
    if (!copies[best].identity) ++leaked;
  }
  return static_cast<double>(leaked) / generated.size();
}

}  // namespace lagan::metrics
