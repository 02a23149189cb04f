#include "wbigan/divergence.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wbigan/errors.hpp"

namespace wbigan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_i a_i ln(a_i / b_i) with 0 ln 0 = 0; +inf when a_i > 0 = b_i.
double relative_entropy(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    if (b[i] == 0.0) return kInf;
    sum += a[i] * std::log(a[i] / b[i]);
  }
  return sum;
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<double> positions, std::vector<double> probs)
    : positions_(std::move(positions)), probs_(std::move(probs)) {
  if (positions_.size() != probs_.size() || probs_.empty()) {
    throw DomainError("distribution needs one probability per outcome and at least one outcome");
  }
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!std::isfinite(positions_[i])) throw DomainError("outcome position must be finite");
    if (i > 0 && !(positions_[i] > positions_[i - 1])) {
      throw DomainError("outcome positions must be unique and sorted");
    }
    if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
      throw DomainError("probabilities must be finite and nonnegative");
    }
  }
  double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

DiscreteDist DiscreteDist::on_grid(std::vector<double> probs) {
  std::vector<double> positions(probs.size());
  std::iota(positions.begin(), positions.end(), 0.0);
  return DiscreteDist(std::move(positions), std::move(probs));
}

DiscreteDist DiscreteDist::point_mass(double position) { return DiscreteDist({position}, {1.0}); }

AlignedPair align(const DiscreteDist& p, const DiscreteDist& q) {
  AlignedPair out;
  const auto& pp = p.positions();
  const auto& qp = q.positions();
  std::size_t i = 0, j = 0;
  while (i < pp.size() || j < qp.size()) {
    if (j == qp.size() || (i < pp.size() && pp[i] < qp[j])) {
      out.positions.push_back(pp[i]);
      out.p.push_back(p.probs()[i++]);
      out.q.push_back(0.0);
    } else if (i == pp.size() || qp[j] < pp[i]) {
      out.positions.push_back(qp[j]);
      out.p.push_back(0.0);
      out.q.push_back(q.probs()[j++]);
    } else {
      out.positions.push_back(pp[i]);
      out.p.push_back(p.probs()[i++]);
      out.q.push_back(q.probs()[j++]);
    }
  }
  return out;
}

double entropy(const DiscreteDist& p) {
  double h = 0.0;
  for (double v : p.probs()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double cross_entropy(const DiscreteDist& p, const DiscreteDist& q) {
  auto a = align(p, q);
  double h = 0.0;
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    if (a.p[i] == 0.0) continue;
    if (a.q[i] == 0.0) return kInf;
    h -= a.p[i] * std::log(a.q[i]);
  }
  return h;
}

double kl(const DiscreteDist& p, const DiscreteDist& q) {
  auto a = align(p, q);
  return relative_entropy(a.p, a.q);
}

double js(const DiscreteDist& p, const DiscreteDist& q) {
  auto a = align(p, q);
  std::vector<double> m(a.p.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (a.p[i] + a.q[i]);
  return 0.5 * relative_entropy(a.p, m) + 0.5 * relative_entropy(a.q, m);
}

double wasserstein1(const DiscreteDist& p, const DiscreteDist& q) {
  auto a = align(p, q);
  double cdf_p = 0.0, cdf_q = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < a.positions.size(); ++i) {
    cdf_p += a.p[i];
    cdf_q += a.q[i];
    total += std::abs(cdf_p - cdf_q) * (a.positions[i + 1] - a.positions[i]);
  }
  return total;
}

std::vector<SaturationRow> saturation_sweep(std::span<const double> separations) {
  std::vector<SaturationRow> rows;
  rows.reserve(separations.size());
  const auto origin = DiscreteDist::point_mass(0.0);
  for (double theta : separations) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
      throw DomainError("separation must be finite and nonnegative");
    }
    const auto shifted = DiscreteDist::point_mass(theta);
    rows.push_back({theta, js(origin, shifted), wasserstein1(origin, shifted)});
  }
  return rows;
}

}  // namespace wbigan
