#pragma once

#include <array>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace obsplit {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// A point of a spacetime chart. Coordinates are lengths; coords[0] = c t.
struct Event {
  std::string chart_id;
  Vec4 coords = Vec4::Zero();

  Event() = default;
  Event(std::string id, const Vec4& k) : chart_id(std::move(id)), coords(k) {}
};

/// Christoffel symbols, gamma[k](i, j) = Gamma^k_ij.
using Christoffels = std::array<Mat4, 4>;

inline Christoffels zero_christoffels() {
  Christoffels g;
  for (auto& m : g) m.setZero();
  return g;
}

/// Contracts Gamma^k_ij a^i b^j for every k.
inline Vec4 contract(const Christoffels& gamma, const Vec4& a, const Vec4& b) {
  Vec4 out;
  for (int k = 0; k < 4; ++k) out[k] = a.dot(gamma[k] * b);
  return out;
}

}  // namespace obsplit
