#include "branchsim/rng.hpp"

#include <algorithm>
#include <cmath>

namespace branchsim {

double Rng::next_normal() {
  // Box-Muller, discarding the second variate.
  double u1 = next_double();
  double u2 = next_double();
  while (u1 <= 0.0) u1 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

CategoricalSampler::CategoricalSampler(const std::vector<double>& probabilities) {
  if (probabilities.empty()) {
    fail(ErrorCode::DegenerateEnsemble, "categorical sampler needs at least one outcome");
  }
  cdf_.resize(probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] < 0.0) {
      fail(ErrorCode::DegenerateEnsemble, "negative probability in categorical sampler");
    }
    acc += probabilities[i];
    cdf_[i] = acc;
  }
  if (acc <= 0.0) {
    fail(ErrorCode::DegenerateEnsemble, "categorical sampler has zero total mass");
  }
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t CategoricalSampler::sample(Rng& rng) const {
  double u = rng.next_double();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::size_t>(it - cdf_.begin());
}

}  // namespace branchsim
