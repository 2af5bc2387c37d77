#include "felpair/four_vector.hpp"

#include <stdexcept>

namespace felpair {

Vec3 unit_from_spherical(double zenith, double azimuth) {
  double sz = std::sin(zenith);
  return {sz * std::cos(azimuth), sz * std::sin(azimuth), std::cos(zenith)};
}

double FourVector::operator[](int mu) const {
  switch (mu) {
    case 0:
      return t;
    case 1:
      return x;
    case 2:
      return y;
    case 3:
      return z;
  }
  throw std::out_of_range("four-vector index");
}

double& FourVector::operator[](int mu) {
  switch (mu) {
    case 0:
      return t;
    case 1:
      return x;
    case 2:
      return y;
    case 3:
      return z;
  }
  throw std::out_of_range("four-vector index");
}

FourVector boost(const FourVector& v, const Vec3& beta) {
  double b2 = dot3(beta, beta);
  if (b2 == 0.0) return v;
  if (b2 >= 1.0) throw std::domain_error("boost velocity must satisfy |beta| < 1");
  double gamma = 1.0 / std::sqrt(1.0 - b2);
  double bp = beta[0] * v.x + beta[1] * v.y + beta[2] * v.z;
  // Spatial part: p' = p + [(gamma-1) (b.p)/b^2 + gamma t] b
  double coef = (gamma - 1.0) * bp / b2 + gamma * v.t;
  return {gamma * (v.t + bp), v.x + coef * beta[0], v.y + coef * beta[1],
          v.z + coef * beta[2]};
}

FourVector boost_z(const FourVector& v, double beta) {
  if (beta == 0.0) return v;
  double gamma = 1.0 / std::sqrt((1.0 - beta) * (1.0 + beta));
  return {gamma * (v.t + beta * v.z), v.x, v.y, gamma * (v.z + beta * v.t)};
}

FourVector lightlike_from_spherical(double energy, double zenith,
                                    double azimuth) {
  Vec3 n = unit_from_spherical(zenith, azimuth);
  return {energy, energy * n[0], energy * n[1], energy * n[2]};
}

std::ostream& operator<<(std::ostream& os, const FourVector& v) {
  return os << "(" << v.t << ", " << v.x << ", " << v.y << ", " << v.z << ")";
}

}  // namespace felpair
