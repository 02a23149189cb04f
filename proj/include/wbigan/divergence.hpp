#pragma once

#include <span>
#include <vector>

namespace wbigan {

// Finite distribution over outcomes placed at real positions.
// Invariants: positions strictly increasing, probs >= 0, sum(probs) = 1 within 1e-12.
class DiscreteDist {
 public:
  DiscreteDist(std::vector<double> positions, std::vector<double> probs);

  // Outcomes at 0, 1, ..., n-1.
  static DiscreteDist on_grid(std::vector<double> probs);
  static DiscreteDist point_mass(double position);

  const std::vector<double>& positions() const noexcept { return positions_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }

 private:
  std::vector<double> positions_;
  std::vector<double> probs_;
};

// Both distributions re-expressed over the sorted union of their supports (zero padded).
struct AlignedPair {
  std::vector<double> positions;
  std::vector<double> p;
  std::vector<double> q;
};
AlignedPair align(const DiscreteDist& p, const DiscreteDist& q);

// All divergences use the natural logarithm and the convention 0 ln 0 = 0.
// Unmatched support yields +infinity rather than an error.
double entropy(const DiscreteDist& p);
double cross_entropy(const DiscreteDist& p, const DiscreteDist& q);
double kl(const DiscreteDist& p, const DiscreteDist& q);
double js(const DiscreteDist& p, const DiscreteDist& q);
// Earth mover's distance on the real line: sum of |CDF_P - CDF_Q| times gap widths.
double wasserstein1(const DiscreteDist& p, const DiscreteDist& q);

struct SaturationRow {
  double separation;
  double js;
  double wasserstein1;
};

// Point masses at 0 and theta for each theta. Throws DomainError on negative theta.
std::vector<SaturationRow> saturation_sweep(std::span<const double> separations);

}  // namespace wbigan
