#include "branchsim/ids.hpp"

#include <cctype>
#include <cstddef>

namespace branchsim {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    char ca = a[i], cb = b[j];
    if (is_digit(ca) && is_digit(cb)) {
      // Compare the whole digit runs numerically without overflow: skip
      // leading zeros, then shorter run of significant digits is smaller.
      std::size_t ia = i, jb = j;
      while (ia < a.size() && a[ia] == '0') ++ia;
      while (jb < b.size() && b[jb] == '0') ++jb;
      std::size_t ea = ia, eb = jb;
      while (ea < a.size() && is_digit(a[ea])) ++ea;
      while (eb < b.size() && is_digit(b[eb])) ++eb;
      std::size_t la = ea - ia, lb = eb - jb;
      if (la != lb) return la < lb;
      for (std::size_t k = 0; k < la; ++k) {
        if (a[ia + k] != b[jb + k]) return a[ia + k] < b[jb + k];
      }
      // Numerically equal; move past both runs and keep scanning.
      i = ea;
      j = eb;
      continue;
    }
    if (ca != cb) return ca < cb;
    ++i;
    ++j;
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  // Equal under natural order ("01" vs "1"): break ties bytewise so the
  // comparison stays a strict weak ordering over distinct strings.
  return a < b;
}

}  // namespace branchsim
