#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stochras/types.hpp"

namespace stochras {

/// Subset of R^n: balls, smooth super-level sets {h >= 0}, and boolean
/// combinations of those. Immutable; copies share structure.
class Region {
 public:
  enum class Kind { Ball, LevelSet, Complement, Intersection, Union };

  static Region ball(Vec center, double radius, bool closed = true);
  /// Degenerate target {center}; set_distance is |x - center|.
  static Region point(Vec center);
  /// {x : h(x) >= 0}.
  static Region level_set(std::function<double(const Vec&)> h, std::string label = "h");
  static Region complement(Region r);
  static Region intersection(std::vector<Region> parts);
  static Region unite(std::vector<Region> parts);

  bool contains(const Vec& x) const;

  /// Euclidean distance to the closure. Only balls and points support it;
  /// other variants throw CapabilityError.
  double distance(const Vec& x) const;

  Kind kind() const;
  bool is_ball() const { return kind() == Kind::Ball; }
  /// Only valid for balls/points.
  const Vec& center() const;
  double radius() const;

  std::string describe() const;

 private:
  struct Node;
  explicit Region(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Distance from x to a ball or point region.
inline double set_distance(const Region& region, const Vec& x) { return region.distance(x); }

}  // namespace stochras
