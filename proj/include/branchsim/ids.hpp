#pragma once

#include <string>

namespace branchsim {

// Natural order on identifiers: digit runs compare numerically, text runs
// bytewise. Gives "w2" < "w10" so the id-sorted matrix orderings match how
// instances are numbered. Total order (ties broken bytewise).
bool natural_less(const std::string& a, const std::string& b);

struct NaturalLess {
  bool operator()(const std::string& a, const std::string& b) const {
    return natural_less(a, b);
  }
};

}  // namespace branchsim
