#include "felpair/entanglement.hpp"

#include <algorithm>
#include <cmath>

#include "felpair/errors.hpp"

namespace felpair {

namespace {

const Complex I{0.0, 1.0};

void require_density_matrix(const Matrix4c& rho) {
  double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-9)
    throw ContractError("density matrix is not Hermitian within tolerance");
  if (std::fabs(rho.trace().real() - 1.0) > 1e-9 ||
      std::fabs(rho.trace().imag()) > 1e-9)
    throw ContractError("density matrix trace differs from 1");
}

// sigma_y x sigma_y in the |++>,|+->,|-+>,|--> ordering.
Matrix4c sigma2_tensor() {
  Eigen::Matrix2cd sy;
  sy << 0.0, -I, I, 0.0;
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          out(2 * a + b, 2 * c + d) = sy(a, c) * sy(b, d);
  return out;
}

Matrix4c matrix_sqrt_psd(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  Eigen::Vector4d ev = es.eigenvalues();
  Matrix4c out = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    double v = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    out += v * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  }
  return out;
}

}  // namespace

TwoPhotonDensityMatrix density_matrix(const HelicityAmplitudeBlock& block) {
  // Helicity-pair index j: 0 ++, 1 +-, 2 -+, 3 --.
  Matrix4c rho = Matrix4c::Zero();
  for (int ri = 0; ri < 2; ++ri) {
    for (int rf = 0; rf < 2; ++rf) {
      Eigen::Vector4cd s;
      s << block.s[ri][rf][0][0], block.s[ri][rf][0][1], block.s[ri][rf][1][0],
          block.s[ri][rf][1][1];
      rho += 0.5 * s * s.adjoint();
    }
  }
  double tr = rho.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw UndefinedStateError(
        "density_matrix: amplitude block is identically zero, no "
        "normalizable state");
  TwoPhotonDensityMatrix out;
  out.rho = rho / tr;
  out.kinematics = block.kinematics;
  out.basis = "helicity";
  return out;
}

std::array<double, 4> concurrence_eigenvalues(const Matrix4c& rho) {
  require_density_matrix(rho);
  static const Matrix4c yy = sigma2_tensor();
  Matrix4c rho_tilde = yy * rho.conjugate() * yy;
  Matrix4c root = matrix_sqrt_psd(rho);
  Matrix4c herm = root * rho_tilde * root;
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(herm);
  std::array<double, 4> zeta{};
  for (int i = 0; i < 4; ++i) {
    double v = es.eigenvalues()(i);
    if (v < 0.0) {
      if (v < -1e-12)
        throw ContractError("concurrence: negative eigenvalue beyond dust");
      v = 0.0;
    }
    zeta[static_cast<std::size_t>(i)] = v;
  }
  std::sort(zeta.begin(), zeta.end(), std::greater<double>());
  return zeta;
}

double concurrence(const Matrix4c& rho) {
  auto zeta = concurrence_eigenvalues(rho);
  double c = std::sqrt(zeta[0]) - std::sqrt(zeta[1]) - std::sqrt(zeta[2]) -
             std::sqrt(zeta[3]);
  return std::clamp(c, 0.0, 1.0);
}

double negativity(const Matrix4c& rho) {
  require_density_matrix(rho);
  Matrix4c pt;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          pt(2 * a + b, 2 * c + d) = rho(2 * a + d, 2 * c + b);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(pt);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double v = es.eigenvalues()(i);
    if (v < 0.0) sum -= v;
  }
  return sum;
}

double entanglement_of_formation_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  double x = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c)));
  auto h = [](double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
  };
  return h(x);
}

double entanglement_of_formation(const Matrix4c& rho) {
  return entanglement_of_formation_from_concurrence(concurrence(rho));
}

Eigen::Matrix2cd helicity_to_linear_unitary() {
  Eigen::Matrix2cd u;
  double r = 1.0 / std::sqrt(2.0);
  u << r, r, I * r, -I * r;
  return u;
}

TwoPhotonDensityMatrix to_linear_basis(const TwoPhotonDensityMatrix& d) {
  if (d.basis != "helicity")
    throw ContractError("to_linear_basis expects a helicity-basis state");
  Eigen::Matrix2cd u = helicity_to_linear_unitary();
  Matrix4c uu;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e)
          uu(2 * a + b, 2 * c + e) = u(a, c) * u(b, e);
  TwoPhotonDensityMatrix out = d;
  out.rho = uu * d.rho * uu.adjoint();
  out.basis = "linear";
  return out;
}

EntanglementReport entanglement_report(const TwoPhotonDensityMatrix& d) {
  EntanglementReport rep;
  rep.basis = d.basis;
  rep.q_eigenvalues = concurrence_eigenvalues(d.rho);
  double c = std::sqrt(rep.q_eigenvalues[0]) - std::sqrt(rep.q_eigenvalues[1]) -
             std::sqrt(rep.q_eigenvalues[2]) - std::sqrt(rep.q_eigenvalues[3]);
  rep.concurrence = std::clamp(c, 0.0, 1.0);
  rep.negativity = negativity(d.rho);
  rep.entanglement_of_formation =
      entanglement_of_formation_from_concurrence(rep.concurrence);
  return rep;
}

}  // namespace felpair
