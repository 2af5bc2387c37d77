#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace felpair {

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

// Unit direction from zenith and azimuth, zenith measured from +z.
Vec3 unit_from_spherical(double zenith, double azimuth);

// Contravariant four-vector in natural units. Metric signature (+,-,-,-).
// The same type carries positions, momenta and wave vectors.
struct FourVector {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  FourVector() = default;
  FourVector(double t_, double x_, double y_, double z_)
      : t(t_), x(x_), y(y_), z(z_) {}

  double operator[](int mu) const;
  double& operator[](int mu);

  FourVector operator+(const FourVector& o) const {
    return {t + o.t, x + o.x, y + o.y, z + o.z};
  }
  FourVector operator-(const FourVector& o) const {
    return {t - o.t, x - o.x, y - o.y, z - o.z};
  }
  FourVector operator-() const { return {-t, -x, -y, -z}; }
  FourVector operator*(double s) const { return {t * s, x * s, y * s, z * s}; }
  FourVector& operator+=(const FourVector& o) {
    t += o.t;
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  Vec3 spatial() const { return {x, y, z}; }
  double spatial_norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline FourVector operator*(double s, const FourVector& v) { return v * s; }

// Minkowski product a.b = a0 b0 - a1 b1 - a2 b2 - a3 b3.
inline double mdot(const FourVector& a, const FourVector& b) {
  return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

inline double mass_squared(const FourVector& a) { return mdot(a, a); }

// Active boost: a particle at rest acquires velocity beta. boost(v, b)
// followed by boost(., -b) restores v.
FourVector boost(const FourVector& v, const Vec3& beta);
FourVector boost_z(const FourVector& v, double beta);

// Lightlike four-vector of given energy along (zenith, azimuth).
FourVector lightlike_from_spherical(double energy, double zenith,
                                    double azimuth);

std::ostream& operator<<(std::ostream& os, const FourVector& v);

}  // namespace felpair
