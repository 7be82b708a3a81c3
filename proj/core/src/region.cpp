#include "stochras/region.hpp"

#include <cmath>
#include <sstream>

namespace stochras {

struct Region::Node {
  Kind kind;
  Vec center;
  double radius = 0.0;
  bool closed = true;
  std::function<double(const Vec&)> h;
  std::string label;
  std::vector<Region> children;
};

Region Region::ball(Vec center, double radius, bool closed) {
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  check_dim(center.size(), "ball center");
  auto node = std::make_shared<Node>();
  node->kind = Kind::Ball;
  node->center = std::move(center);
  node->radius = radius;
  node->closed = closed;
  return Region(std::move(node));
}

Region Region::point(Vec center) {
  check_dim(center.size(), "point");
  auto node = std::make_shared<Node>();
  node->kind = Kind::Ball;
  node->center = std::move(center);
  node->radius = 0.0;
  node->closed = true;
  return Region(std::move(node));
}

Region Region::level_set(std::function<double(const Vec&)> h, std::string label) {
  if (!h) throw ConfigError("level set needs a function");
  auto node = std::make_shared<Node>();
  node->kind = Kind::LevelSet;
  node->h = std::move(h);
  node->label = std::move(label);
  return Region(std::move(node));
}

Region Region::complement(Region r) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Complement;
  node->children.push_back(std::move(r));
  return Region(std::move(node));
}

Region Region::intersection(std::vector<Region> parts) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Intersection;
  node->children = std::move(parts);
  return Region(std::move(node));
}

Region Region::unite(std::vector<Region> parts) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Union;
  node->children = std::move(parts);
  return Region(std::move(node));
}

bool Region::contains(const Vec& x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Ball: {
      double d = (x - n.center).norm();
      return n.closed ? d <= n.radius : d < n.radius;
    }
    case Kind::LevelSet:
      return n.h(x) >= 0.0;
    case Kind::Complement:
      return !n.children.front().contains(x);
    case Kind::Intersection:
      for (const auto& c : n.children)
        if (!c.contains(x)) return false;
      return true;
    case Kind::Union:
      for (const auto& c : n.children)
        if (c.contains(x)) return true;
      return false;
  }
  return false;
}

double Region::distance(const Vec& x) const {
  if (node_->kind != Kind::Ball) {
    throw CapabilityError("set distance is only available for balls and points, not " +
                          describe());
  }
  return std::max(0.0, (x - node_->center).norm() - node_->radius);
}

Region::Kind Region::kind() const { return node_->kind; }

const Vec& Region::center() const {
  if (node_->kind != Kind::Ball) throw CapabilityError("center() on a non-ball region");
  return node_->center;
}

double Region::radius() const {
  if (node_->kind != Kind::Ball) throw CapabilityError("radius() on a non-ball region");
  return node_->radius;
}

std::string Region::describe() const {
  const Node& n = *node_;
  std::ostringstream os;
  os.precision(17);
  switch (n.kind) {
    case Kind::Ball:
      os << (n.radius == 0.0 ? "point(" : (n.closed ? "closed_ball(" : "open_ball("));
      for (Eigen::Index i = 0; i < n.center.size(); ++i) os << (i ? "," : "") << n.center(i);
      if (n.radius > 0.0) os << "; r=" << n.radius;
      os << ")";
      break;
    case Kind::LevelSet:
      os << "{" << n.label << ">=0}";
      break;
    case Kind::Complement:
      os << "not(" << n.children.front().describe() << ")";
      break;
    case Kind::Intersection:
    case Kind::Union: {
      os << (n.kind == Kind::Intersection ? "and(" : "or(");
      for (std::size_t i = 0; i < n.children.size(); ++i)
        os << (i ? "," : "") << n.children[i].describe();
      os << ")";
      break;
    }
  }
  return os.str();
}

}  // namespace stochras
