#include "gh0/measures.hpp"

namespace gh0 {

std::optional<Index> birkhoff_hitting(const SystemOracle& s, const Point& x, const Point& center, double radius,
                                      Index cap) {
  if (!(radius > 0)) throw UsageError("birkhoff_hitting: radius must be positive");
  if (cap < 0) throw UsageError("birkhoff_hitting: cap must be nonnegative");
  Point cur = x;
  for (Index k = 0; k <= cap; ++k) {
    if (s.distance(cur, center) < radius) return k;
    if (k < cap) cur = s.forward(cur);
  }
  return std::nullopt;
}

}  // namespace gh0
