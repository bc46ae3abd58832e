#include "fieldcorr/multi_index.hpp"

#include <cassert>
#include <sstream>

namespace fieldcorr {

MultiIndex& MultiIndex::operator+=(const MultiIndex& o) {
  assert(o.size() == size());
  for (std::size_t l = 0; l < c_.size(); ++l) c_[l] += o.c_[l];
  return *this;
}

MultiIndex& MultiIndex::operator-=(const MultiIndex& o) {
  assert(o.size() == size());
  for (std::size_t l = 0; l < c_.size(); ++l) c_[l] -= o.c_[l];
  return *this;
}

bool leq(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l)
    if (a[l] > b[l]) return false;
  return true;
}

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t axis) {
  MultiIndex e(dim, 0);
  e[axis] = 1;
  return e;
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t l = 0; l < c_.size(); ++l) os << (l ? "," : "") << c_[l];
  os << ')';
  return os.str();
}

}  // namespace fieldcorr
