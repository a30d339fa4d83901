#ifndef NATIMPACT_INTERVAL_HPP
#define NATIMPACT_INTERVAL_HPP

#include <string_view>

namespace natimpact {

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double width() const noexcept { return high - low; }
  bool contains(double x) const noexcept { return low <= x && x <= high; }
  bool contains(const Interval& other) const noexcept {
    return low <= other.low && other.high <= high;
  }
};

/// PaperLiteral evaluates the literal interval formulas; Corrected
/// uses the variance of the quantity actually estimated.
enum class CiMode { PaperLiteral, Corrected };

constexpr std::string_view to_string(CiMode mode) {
  return mode == CiMode::PaperLiteral ? "paper-literal" : "corrected";
}

}  // namespace natimpact

#endif  // NATIMPACT_INTERVAL_HPP
