#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "frohlich/errors.hpp"

namespace frohlich::quantum {

/// Truncated product Fock space. Mode m holds 0..cutoff(m) quanta. Basis
/// states are enumerated lexicographically with mode 0 varying slowest, so
///   index = sum_m n_m * stride(m),  stride(last) = 1.
class FockBasis {
 public:
  FockBasis() = default;
  explicit FockBasis(std::vector<int> cutoffs, std::vector<std::string> names = {})
      : cutoffs_(std::move(cutoffs)), names_(std::move(names)) {
    if (cutoffs_.empty()) throw ValidationError("Fock basis needs at least one mode");
    for (int c : cutoffs_)
      if (c < 0) throw ValidationError("Fock cutoffs must be non-negative");
    if (names_.empty())
      for (std::size_t m = 0; m < cutoffs_.size(); ++m) names_.push_back("m" + std::to_string(m));
    if (names_.size() != cutoffs_.size()) throw ValidationError("one name per Fock mode");
    strides_.assign(cutoffs_.size(), 1);
    for (int m = static_cast<int>(cutoffs_.size()) - 2; m >= 0; --m)
      strides_[m] = strides_[m + 1] * static_cast<std::size_t>(cutoffs_[m + 1] + 1);
    dim_ = strides_[0] * static_cast<std::size_t>(cutoffs_[0] + 1);
  }

  /// Dimension as a double, usable for budget checks before construction.
  static double dimension_of(const std::vector<int>& cutoffs) {
    double d = 1.0;
    for (int c : cutoffs) d *= (c + 1.0);
    return d;
  }

  std::size_t dimension() const { return dim_; }
  int modes() const { return static_cast<int>(cutoffs_.size()); }
  int cutoff(int mode) const { return cutoffs_[mode]; }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  std::size_t stride(int mode) const { return strides_[mode]; }
  const std::string& name(int mode) const { return names_[mode]; }

  int occupation(std::size_t index, int mode) const {
    return static_cast<int>((index / strides_[mode]) % static_cast<std::size_t>(cutoffs_[mode] + 1));
  }

  std::vector<int> occupations(std::size_t index) const {
    std::vector<int> out(cutoffs_.size());
    for (int m = 0; m < modes(); ++m) out[m] = occupation(index, m);
    return out;
  }

  std::size_t index(const std::vector<int>& occ) const {
    if (occ.size() != cutoffs_.size()) throw ValidationError("occupation vector has wrong length");
    std::size_t k = 0;
    for (int m = 0; m < modes(); ++m) {
      if (occ[m] < 0 || occ[m] > cutoffs_[m]) {
        std::ostringstream os;
        os << "occupation " << occ[m] << " of mode " << names_[m] << " outside 0.." << cutoffs_[m];
        throw ValidationError(os.str());
      }
      k += static_cast<std::size_t>(occ[m]) * strides_[m];
    }
    return k;
  }

 private:
  std::vector<int> cutoffs_;
  std::vector<std::string> names_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 0;
};

}  // namespace frohlich::quantum
