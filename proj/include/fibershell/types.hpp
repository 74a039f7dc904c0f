#ifndef FIBERSHELL_TYPES_HPP
#define FIBERSHELL_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fshell {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Symmetric 2x2 component triple in Voigt order (11, 22, 12).
using Voigt3 = Eigen::Vector3d;

inline double voigt_get(const Voigt3& v, int a, int b) {
  if (a == b) return v[a];
  return v[2];
}

inline Voigt3 to_voigt(const Mat2& m) {
  return Voigt3(m(0, 0), m(1, 1), 0.5 * (m(0, 1) + m(1, 0)));
}

inline Mat2 from_voigt(const Voigt3& v) {
  Mat2 m;
  m << v[0], v[2], v[2], v[1];
  return m;
}

class FshellError : public std::runtime_error {
 public:
  explicit FshellError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fshell

#endif
