#include "felpair/volkov.hpp"

#include <quadmath.h>

#include <cmath>
#include <sstream>
#include <cstdio>
#include <cstdlib>

#include "felpair/constants.hpp"
#include "felpair/errors.hpp"

namespace felpair {

// The emitted photon energies sit eight orders of magnitude below the
// electron mass, so the spinor bilinears cancel through many digits before
// the physical amplitude emerges. The amplitude core is therefore templated
// on the working precision: 80-bit long double by default (sufficient for
// rates and density matrices at ~1e-12 relative) and __float128 on request
// (gauge-identity checks probe another six orders down). The core uses its
// own minimal complex 4x4 layer so both instantiations share one code path.

namespace {

template <typename R>
struct RealOps;

template <>
struct RealOps<long double> {
  static long double sqrt(long double x) { return sqrtl(x); }
  static long double fabs(long double x) { return fabsl(x); }
  static long double hypot(long double x, long double y) { return hypotl(x, y); }
  static long double atan2(long double y, long double x) { return atan2l(y, x); }
  static long double cos(long double x) { return cosl(x); }
  static long double sin(long double x) { return sinl(x); }
};

template <>
struct RealOps<__float128> {
  static __float128 sqrt(__float128 x) { return sqrtq(x); }
  static __float128 fabs(__float128 x) { return fabsq(x); }
  static __float128 hypot(__float128 x, __float128 y) { return hypotq(x, y); }
  static __float128 atan2(__float128 y, __float128 x) { return atan2q(y, x); }
  static __float128 cos(__float128 x) { return cosq(x); }
  static __float128 sin(__float128 x) { return sinq(x); }
};

template <typename R>
struct CX {
  R re{}, im{};

  CX() = default;
  CX(R r) : re(r) {}
  CX(R r, R i) : re(r), im(i) {}

  CX operator+(const CX& o) const { return {re + o.re, im + o.im}; }
  CX operator-(const CX& o) const { return {re - o.re, im - o.im}; }
  CX operator-() const { return {-re, -im}; }
  CX operator*(const CX& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  CX operator*(R s) const { return {re * s, im * s}; }
  CX operator/(R s) const { return {re / s, im / s}; }
  CX& operator+=(const CX& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  bool zero() const { return re == R(0) && im == R(0); }
};

template <typename R>
CX<R> conj_cx(const CX<R>& c) {
  return {c.re, -c.im};
}

template <typename R>
CX<R> unit_phase(R angle) {
  return {RealOps<R>::cos(angle), RealOps<R>::sin(angle)};
}

template <typename R>
struct M4 {
  CX<R> a[4][4] = {};

  static M4 zero() { return M4{}; }
  static M4 identity() {
    M4 m;
    for (int i = 0; i < 4; ++i) m.a[i][i] = CX<R>(R(1));
    return m;
  }

  M4 operator+(const M4& o) const {
    M4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.a[i][j] = a[i][j] + o.a[i][j];
    return r;
  }
  M4 operator-(const M4& o) const {
    M4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.a[i][j] = a[i][j] - o.a[i][j];
    return r;
  }
  M4& operator+=(const M4& o) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a[i][j] += o.a[i][j];
    return *this;
  }
  M4 operator*(const M4& o) const {
    M4 r;
    for (int i = 0; i < 4; ++i) {
      for (int kdx = 0; kdx < 4; ++kdx) {
        CX<R> v = a[i][kdx];
        if (v.zero()) continue;
        for (int j = 0; j < 4; ++j) r.a[i][j] += v * o.a[kdx][j];
      }
    }
    return r;
  }
  M4 scaled(const CX<R>& s) const {
    M4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.a[i][j] = s * a[i][j];
    return r;
  }
  M4 scaled(R s) const {
    M4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.a[i][j] = a[i][j] * s;
    return r;
  }
  M4 adjoint() const {
    M4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.a[i][j] = conj_cx(a[j][i]);
    return r;
  }
};

template <typename R>
struct V4 {
  CX<R> v[4] = {};
};

template <typename R>
V4<R> mul(const M4<R>& m, const V4<R>& x) {
  V4<R> r;
  for (int i = 0; i < 4; ++i) {
    CX<R> s{};
    for (int j = 0; j < 4; ++j) s += m.a[i][j] * x.v[j];
    r.v[i] = s;
  }
  return r;
}

// row * column with NO conjugation (the row is already a Dirac adjoint).
template <typename R>
CX<R> contract(const V4<R>& row, const V4<R>& col) {
  CX<R> s{};
  for (int i = 0; i < 4; ++i) s += row.v[i] * col.v[i];
  return s;
}

template <typename R>
struct FVT {
  R t{}, x{}, y{}, z{};
};

template <typename R>
FVT<R> operator+(const FVT<R>& a, const FVT<R>& b) {
  return {a.t + b.t, a.x + b.x, a.y + b.y, a.z + b.z};
}
template <typename R>
FVT<R> operator-(const FVT<R>& a, const FVT<R>& b) {
  return {a.t - b.t, a.x - b.x, a.y - b.y, a.z - b.z};
}
template <typename R>
FVT<R> operator*(R s, const FVT<R>& v) {
  return {s * v.t, s * v.x, s * v.y, s * v.z};
}
template <typename R>
R mdot_t(const FVT<R>& a, const FVT<R>& b) {
  return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

template <typename R>
struct CFVT {
  CX<R> t{}, x{}, y{}, z{};
};

// Gamma matrices in the Dirac representation at working precision.
template <typename R>
struct AlgebraT {
  M4<R> gamma[4];
  M4<R> unit;

  AlgebraT() {
    unit = M4<R>::identity();
    const CX<R> one(R(1));
    const CX<R> i(R(0), R(1));
    gamma[0].a[0][0] = one;
    gamma[0].a[1][1] = one;
    gamma[0].a[2][2] = -one;
    gamma[0].a[3][3] = -one;
    gamma[1].a[0][3] = one;
    gamma[1].a[1][2] = one;
    gamma[1].a[2][1] = -one;
    gamma[1].a[3][0] = -one;
    gamma[2].a[0][3] = -i;
    gamma[2].a[1][2] = i;
    gamma[2].a[2][1] = i;
    gamma[2].a[3][0] = -i;
    gamma[3].a[0][2] = one;
    gamma[3].a[1][3] = -one;
    gamma[3].a[2][0] = -one;
    gamma[3].a[3][1] = one;
  }

  M4<R> slash(const FVT<R>& v) const {
    M4<R> r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        r.a[i][j] = gamma[0].a[i][j] * v.t - gamma[1].a[i][j] * v.x -
                    gamma[2].a[i][j] * v.y - gamma[3].a[i][j] * v.z;
    return r;
  }
  M4<R> slash(const CFVT<R>& v) const {
    M4<R> r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        r.a[i][j] = gamma[0].a[i][j] * v.t - gamma[1].a[i][j] * v.x -
                    gamma[2].a[i][j] * v.y - gamma[3].a[i][j] * v.z;
    return r;
  }
  // Dirac adjoint g0 M^dag g0.
  M4<R> bar(const M4<R>& m) const { return gamma[0] * m.adjoint() * gamma[0]; }
};

template <typename R>
const AlgebraT<R>& algebra_t() {
  static const AlgebraT<R> alg;
  return alg;
}

// u_r(p) with ubar u = 2m.
template <typename R>
V4<R> spinor_u_t(const FVT<R>& p, int r, R m) {
  R npm = p.t + m;
  R root = RealOps<R>::sqrt(npm);
  CX<R> sp[2][2] = {{CX<R>(p.z), CX<R>(p.x, -p.y)},
                    {CX<R>(p.x, p.y), CX<R>(-p.z)}};
  int idx = r - 1;
  V4<R> u;
  u.v[0] = idx == 0 ? CX<R>(root) : CX<R>();
  u.v[1] = idx == 1 ? CX<R>(root) : CX<R>();
  u.v[2] = sp[0][idx] / root;
  u.v[3] = sp[1][idx] / root;
  return u;
}

// Downward (Miller) Bessel ladder.
template <typename R>
std::vector<R> bessel_ladder_t(int nmax, R x) {
  std::vector<R> out(static_cast<std::size_t>(nmax) + 1, R(0));
  R ax = RealOps<R>::fabs(x);
  if (ax == R(0)) {
    out[0] = R(1);
    return out;
  }
  int start = nmax + 24 + static_cast<int>(1.3 * static_cast<double>(ax));
  if (start % 2) ++start;
  R jp = R(0);
  R jc = R(1e-320L);
  R norm = R(0);
  const R big = R(1e280L);
  const R small = R(1e-280L);
  for (int n = start; n >= 1; --n) {
    R jm = (R(2 * n) / ax) * jc - jp;
    jp = jc;
    jc = jm;
    if (!(n & 1)) norm += R(2) * jp;
    if (RealOps<R>::fabs(jc) > big) {
      jc = jc * small;
      jp = jp * small;
      norm = norm * small;
      for (auto& v : out) v = v * small;
    }
    if (n - 1 <= nmax) out[static_cast<std::size_t>(n - 1)] = jc;
    if (n <= nmax) out[static_cast<std::size_t>(n)] = jp;
  }
  norm += jc;
  for (auto& v : out) v = v / norm;
  if (x < R(0))
    for (int n = 1; n <= nmax; n += 2)
      out[static_cast<std::size_t>(n)] = -out[static_cast<std::size_t>(n)];
  return out;
}

template <typename R>
R ladder_at(const std::vector<R>& ladder, int n) {
  int a = n < 0 ? -n : n;
  if (a >= static_cast<int>(ladder.size())) return R(0);
  R v = ladder[static_cast<std::size_t>(a)];
  return (n < 0 && (a & 1)) ? -v : v;
}

// Machine and wave context at working precision.
template <typename R>
struct CtxT {
  FVT<R> k;
  R k0, m, ea, e2a2, mstar2, e2;
  M4<R> b_plus_proto, b_minus_proto;  // (ea/4)(g1 -+ i g2) kslash

  explicit CtxT(const DerivedBeamQuantities& dbq) {
    k = {R(dbq.wave_photon_energy), R(0), R(0), R(-dbq.wave_photon_energy)};
    k0 = R(dbq.wave_photon_energy);
    m = R(constants::electron_mass_ev);
    ea = R(dbq.coupling_ea);
    e2a2 = ea * ea;
    mstar2 = m * m + e2a2;
    e2 = R(constants::e_natural) * R(constants::e_natural);
    const auto& alg = algebra_t<R>();
    M4<R> kslash = alg.slash(k);
    const CX<R> i(R(0), R(1));
    M4<R> g1_m_ig2 = alg.gamma[1] - alg.gamma[2].scaled(i);
    M4<R> g1_p_ig2 = alg.gamma[1] + alg.gamma[2].scaled(i);
    b_plus_proto = (g1_m_ig2 * kslash).scaled(ea / R(4));
    b_minus_proto = (g1_p_ig2 * kslash).scaled(ea / R(4));
  }
};

// One electron line (external or internal): dressing matrices B_+, B_- and
// Floquet coefficients c_i(n) with F_n = c_0 1 + c_+ B_+ + c_- B_-.
template <typename R>
struct LineT {
  FVT<R> p;
  R kp{};
  M4<R> B[3];
  M4<R> Bbar[3];
  int order = 0;
  std::vector<CX<R>> coeff[3];

  CX<R> c(int i, int n) const {
    int idx = n + order;
    if (idx < 0 || idx > 2 * order) return CX<R>();
    return coeff[i][static_cast<std::size_t>(idx)];
  }
};

template <typename R>
LineT<R> make_line_t(const CtxT<R>& ctx, const FVT<R>& p, int order) {
  LineT<R> line;
  R kp = mdot_t(ctx.k, p);
  R abs_pt = RealOps<R>::fabs(p.t);
  R scale = ctx.k0 * (abs_pt > ctx.m ? abs_pt : ctx.m);
  if (RealOps<R>::fabs(kp) < R(1e-14L) * scale)
    throw DegenerateKinematicsError(
        "Volkov line with k.p = 0: electron momentum degenerate with the "
        "wave direction");
  line.p = p;
  line.kp = kp;
  // Circular wave a1 = a x_hat, a2 = a y_hat: p.a_i = -a p_perp.
  R alpha1 = -ctx.ea * p.x / kp;
  R alpha2 = -ctx.ea * p.y / kp;
  R alpha_bar = RealOps<R>::hypot(alpha1, alpha2);
  R phi0 = alpha_bar > R(0) ? RealOps<R>::atan2(alpha2, alpha1) : R(0);

  const auto& alg = algebra_t<R>();
  line.B[0] = alg.unit;
  line.B[1] = ctx.b_plus_proto.scaled(R(1) / kp);
  line.B[2] = ctx.b_minus_proto.scaled(R(1) / kp);
  for (int i = 0; i < 3; ++i) line.Bbar[i] = alg.bar(line.B[i]);

  line.order = order;
  auto ladder = bessel_ladder_t<R>(order + 1, alpha_bar);
  CX<R> base = unit_phase(-alpha2);
  for (auto& v : line.coeff)
    v.assign(static_cast<std::size_t>(2 * order + 1), CX<R>());
  for (int n = -order; n <= order; ++n) {
    auto phased = [&](int j) {
      return unit_phase(R(j) * phi0) * ladder_at(ladder, j);
    };
    std::size_t idx = static_cast<std::size_t>(n + order);
    line.coeff[0][idx] = base * phased(n);
    line.coeff[1][idx] = base * phased(n + 1);
    line.coeff[2][idx] = base * phased(n - 1);
  }
  return line;
}

// Gamma_{n'} = sum_s Fbar_s(out) eps_slash F_{s+n'}(in), decomposed over the
// dressing bases of the two lines.
template <typename R>
M4<R> vertex_t(const LineT<R>& out_line, const LineT<R>& in_line,
               const M4<R>& eps_slash, int transfer, int order) {
  CX<R> C[3][3] = {};
  int lo = std::max(-order, -order - transfer);
  int hi = std::min(order, order - transfer);
  for (int s = lo; s <= hi; ++s) {
    CX<R> co[3] = {conj_cx(out_line.c(0, s)), conj_cx(out_line.c(1, s)),
                   conj_cx(out_line.c(2, s))};
    CX<R> ci[3] = {in_line.c(0, s + transfer), in_line.c(1, s + transfer),
                   in_line.c(2, s + transfer)};
    for (int i = 0; i < 3; ++i) {
      if (co[i].zero()) continue;
      for (int j = 0; j < 3; ++j) C[i][j] += co[i] * ci[j];
    }
  }
  M4<R> left[3];
  left[0] = eps_slash;
  left[1] = out_line.Bbar[1] * eps_slash;
  left[2] = out_line.Bbar[2] * eps_slash;
  M4<R> v;
  for (int i = 0; i < 3; ++i) {
    if (!C[i][0].zero()) v += left[i].scaled(C[i][0]);
    for (int j = 1; j < 3; ++j) {
      if (C[i][j].zero()) continue;
      v += (left[i] * in_line.B[j]).scaled(C[i][j]);
    }
  }
  return v;
}

// Exactly conserving kinematics at working precision, re-derived from the
// double inputs (directions and photon-1 energy are taken as exact).
template <typename R>
struct KinT {
  int n;
  FVT<R> k1, k2, q_i, p_i, p_f;
};

template <typename R>
KinT<R> resolve_kinematics_t(const CtxT<R>& ctx, const PairKinematics& kin) {
  KinT<R> out;
  out.n = kin.n;
  out.p_i = {ctx.m, R(0), R(0), R(0)};
  R kp = mdot_t(ctx.k, out.p_i);
  out.q_i = out.p_i + (ctx.e2a2 / (R(2) * kp)) * ctx.k;

  out.k1 = {R(kin.k1.t), R(kin.k1.x), R(kin.k1.y), R(kin.k1.z)};
  FVT<R> d2{R(kin.k2.t), R(kin.k2.x), R(kin.k2.y), R(kin.k2.z)};
  R e2d = RealOps<R>::sqrt(d2.x * d2.x + d2.y * d2.y + d2.z * d2.z);
  FVT<R> dir2{R(1), d2.x / e2d, d2.y / e2d, d2.z / e2d};
  FVT<R> w = out.q_i + R(out.n) * ctx.k - out.k1;
  R rhs = R(out.n) * mdot_t(out.q_i, ctx.k) - mdot_t(out.q_i, out.k1) -
          R(out.n) * mdot_t(ctx.k, out.k1);
  R denom = w.t - (w.x * dir2.x + w.y * dir2.y + w.z * dir2.z);
  R e2 = rhs / denom;
  out.k2 = {e2, e2 * dir2.x, e2 * dir2.y, e2 * dir2.z};

  FVT<R> q_f = out.q_i + R(out.n) * ctx.k - out.k1 - out.k2;
  R kqf = mdot_t(ctx.k, q_f);
  out.p_f = q_f - (ctx.e2a2 / (R(2) * kqf)) * ctx.k;
  return out;
}

template <typename R>
CFVT<R> to_working(const CFourVector& v) {
  auto cast = [](const Complex& c) { return CX<R>(R(c.real()), R(c.imag())); };
  return {cast(v.t), cast(v.x), cast(v.y), cast(v.z)};
}

template <typename R>
void compute_entries_t(const DerivedBeamQuantities& dbq,
                       const FloquetSettings& settings,
                       const PairKinematics& kin,
                       const std::vector<CFourVector>& pols1,
                       const std::vector<CFourVector>& pols2, int order,
                       std::vector<Complex>& out) {
  const CtxT<R> ctx(dbq);
  const auto& alg = algebra_t<R>();
  const KinT<R> k = resolve_kinematics_t(ctx, kin);
  const int p1 = static_cast<int>(pols1.size());
  const int p2 = static_cast<int>(pols2.size());

  std::vector<CX<R>> acc(static_cast<std::size_t>(4 * p1 * p2));

  LineT<R> line_i = make_line_t(ctx, k.p_i, order);
  LineT<R> line_f = make_line_t(ctx, k.p_f, order);

  V4<R> u_i[2] = {spinor_u_t(k.p_i, 1, ctx.m), spinor_u_t(k.p_i, 2, ctx.m)};
  V4<R> ubar_f[2];
  for (int r = 0; r < 2; ++r) {
    V4<R> u = spinor_u_t(k.p_f, r + 1, ctx.m);
    // Dirac adjoint row: (u^dag g0)_j = conj(u_i) (g0)_ij
    for (int j = 0; j < 4; ++j) {
      CX<R> s{};
      for (int i = 0; i < 4; ++i) s += conj_cx(u.v[i]) * alg.gamma[0].a[i][j];
      ubar_f[r].v[j] = s;
    }
  }

  // Emission vertices carry the conjugated polarization.
  std::vector<M4<R>> eps1(pols1.size()), eps2(pols2.size());
  for (std::size_t i = 0; i < pols1.size(); ++i) {
    CFVT<R> v = to_working<R>(pols1[i]);
    eps1[i] = alg.slash(CFVT<R>{conj_cx(v.t), conj_cx(v.x), conj_cx(v.y),
                                conj_cx(v.z)});
  }
  for (std::size_t i = 0; i < pols2.size(); ++i) {
    CFVT<R> v = to_working<R>(pols2[i]);
    eps2[i] = alg.slash(CFVT<R>{conj_cx(v.t), conj_cx(v.x), conj_cx(v.y),
                                conj_cx(v.z)});
  }

  auto accumulate = [&](const FVT<R>& kv1, const std::vector<M4<R>>& eps_v1,
                        const std::vector<M4<R>>& eps_v2, int n1,
                        bool photon1_first) {
    FVT<R> q_mid = k.q_i + R(n1) * ctx.k - kv1;
    // q_mid^2 - m*^2 expanded with q_i^2 = m*^2 and q_i.k = m k^0 exact:
    // the subtraction of ~m^2-scale squares would otherwise throw away
    // seven digits that the deep bilinear cancellation still needs.
    R den = R(2) * (R(n1) * ctx.m * ctx.k0 -
                    mdot_t(k.q_i + R(n1) * ctx.k, kv1));
    R kq = mdot_t(ctx.k, q_mid);
    if (RealOps<R>::fabs(den) <
        R(settings.resonance_guard) * R(2) * RealOps<R>::fabs(kq)) {
      std::ostringstream os;
      os << "Volkov propagator resonance at internal Floquet index n1=" << n1
         << " (photon " << (photon1_first ? 1 : 2)
         << " at the first vertex): |q_mid^2 - m*^2| = "
         << static_cast<double>(RealOps<R>::fabs(den)) << " eV^2";
      throw ResonanceError(os.str());
    }
    if (RealOps<R>::fabs(kq) < R(1e-14L) * ctx.k0 * ctx.m)
      throw DegenerateKinematicsError("internal Volkov line with k.q_mid = 0");
    FVT<R> p_mid = q_mid - (ctx.e2a2 / (R(2) * kq)) * ctx.k;
    M4<R> g = (alg.slash(p_mid) + alg.unit.scaled(ctx.m)).scaled(R(1) / den);
    LineT<R> line_mid = make_line_t(ctx, p_mid, order);

    std::vector<M4<R>> v1(eps_v1.size()), v2(eps_v2.size());
    for (std::size_t a = 0; a < eps_v1.size(); ++a)
      v1[a] = vertex_t(line_mid, line_i, eps_v1[a], n1, order);
    int n2 = k.n - n1;
    for (std::size_t b = 0; b < eps_v2.size(); ++b)
      v2[b] = vertex_t(line_f, line_mid, eps_v2[b], n2, order);

    for (std::size_t a = 0; a < eps_v1.size(); ++a) {
      M4<R> gv1 = g * v1[a];
      for (std::size_t b = 0; b < eps_v2.size(); ++b) {
        M4<R> t = v2[b] * gv1;
        int i1 = photon1_first ? static_cast<int>(a) : static_cast<int>(b);
        int i2 = photon1_first ? static_cast<int>(b) : static_cast<int>(a);
        for (int ri = 0; ri < 2; ++ri) {
          V4<R> tu = mul(t, u_i[ri]);
          for (int rf = 0; rf < 2; ++rf) {
            CX<R> amp = contract(ubar_f[rf], tu);
            std::size_t idx = static_cast<std::size_t>(
                ((ri * 2 + rf) * p1 + i1) * p2 + i2);
            acc[idx] += amp;
          }
        }
      }
    }
  };

  int n1_lo = std::max(-order, k.n - order);
  int n1_hi = std::min(order, k.n + order);
  const bool dump = std::getenv("FELPAIR_DEBUG_N1") != nullptr;
  for (int n1 = n1_lo; n1 <= n1_hi; ++n1) {
    accumulate(k.k1, eps1, eps2, n1, true);
    if (dump)
      std::fprintf(stderr, "n1=%3d A acc0=(%.18e,%.18e)\n", n1,
                   static_cast<double>(acc[0].re),
                   static_cast<double>(acc[0].im));
    accumulate(k.k2, eps2, eps1, n1, false);
    if (dump)
      std::fprintf(stderr, "n1=%3d B acc0=(%.18e,%.18e)\n", n1,
                   static_cast<double>(acc[0].re),
                   static_cast<double>(acc[0].im));
  }

  out.assign(acc.size(), Complex{});
  for (std::size_t i = 0; i < acc.size(); ++i) {
    CX<R> v = acc[i] * ctx.e2;
    out[i] = Complex(static_cast<double>(v.re), static_cast<double>(v.im));
  }
}

double frobenius(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

}  // namespace

Complex HelicityAmplitudeBlock::entry(int r_i, int r_f, int h1, int h2) const {
  int i1 = h1 > 0 ? 0 : 1;
  int i2 = h2 > 0 ? 0 : 1;
  return s[r_i - 1][r_f - 1][i1][i2];
}

double HelicityAmplitudeBlock::helicity_summed_m2() const {
  double sum = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) sum += std::norm(s[a][b][c][d]);
  return 0.5 * sum;
}

double HelicityAmplitudeBlock::channel_m2(int i1, int i2) const {
  double sum = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) sum += std::norm(s[a][b][i1][i2]);
  return 0.5 * sum;
}

Complex AmplitudeEntries::at(int r_i, int r_f, int i1, int i2) const {
  std::size_t idx = static_cast<std::size_t>(
      (((r_i - 1) * 2 + (r_f - 1)) * n_pol1 + i1) * n_pol2 + i2);
  return values.at(idx);
}

PairKinematics pair_kinematics_from_photons(int n, const FourVector& k1,
                                            const FourVector& k2,
                                            const DerivedBeamQuantities& dbq) {
  PairKinematics kin;
  kin.n = n;
  kin.k1 = k1;
  kin.k2 = k2;
  kin.q_i = dbq.electron_quasimomentum;
  kin.q_f = kin.q_i + static_cast<double>(n) * dbq.wave_vector - k1 - k2;
  double kqf = mdot(dbq.wave_vector, kin.q_f);
  kin.p_f = kin.q_f - (dbq.mass_shift_e2a2 / (2.0 * kqf)) * dbq.wave_vector;
  kin.de_denominator =
      mdot(kin.q_i + static_cast<double>(n) * dbq.wave_vector - k1, k2);
  double mstar2 = dbq.effective_mass * dbq.effective_mass;
  kin.constraint_residual =
      (mass_squared(kin.k1 + kin.k2 - kin.q_i -
                    static_cast<double>(n) * dbq.wave_vector) -
       mstar2) /
      (kin.q_i.t * kin.q_i.t);
  if (std::fabs(kin.constraint_residual) > 1e-9)
    throw ContractError(
        "photon pair does not satisfy the DE(n) momentum constraint");
  return kin;
}

PairAmplitudeEngine::PairAmplitudeEngine(const DerivedBeamQuantities& dbq,
                                         FloquetSettings settings)
    : dbq_(dbq), settings_(settings) {}

Matrix4c PairAmplitudeEngine::volkov_propagator(const FourVector& q_mid) const {
  CtxT<long double> ctx(dbq_);
  FVT<long double> q{q_mid.t, q_mid.x, q_mid.y, q_mid.z};
  long double den = mdot_t(q, q) - ctx.mstar2;
  long double kq = mdot_t(ctx.k, q);
  if (fabsl(den) < (long double)settings_.resonance_guard * 2.0L * fabsl(kq)) {
    std::ostringstream os;
    os << "Volkov propagator resonance: |q_mid^2 - m*^2| = "
       << static_cast<double>(fabsl(den)) << " eV^2 below guard "
       << static_cast<double>((long double)settings_.resonance_guard * 2.0L *
                              fabsl(kq));
    throw ResonanceError(os.str());
  }
  if (fabsl(kq) < 1e-14L * ctx.k0 * ctx.m)
    throw DegenerateKinematicsError("Volkov propagator with k.q_mid = 0");
  FVT<long double> p = q - (ctx.e2a2 / (2.0L * kq)) * ctx.k;
  M4<long double> g = (algebra_t<long double>().slash(p) +
                       algebra_t<long double>().unit.scaled(ctx.m))
                          .scaled(1.0L / den);
  Matrix4c out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out(i, j) = Complex(static_cast<double>(g.a[i][j].re),
                          static_cast<double>(g.a[i][j].im));
  return out;
}

std::vector<Matrix4c> PairAmplitudeEngine::floquet_coefficients(
    const FourVector& p, int order) const {
  CtxT<long double> ctx(dbq_);
  LineT<long double> line =
      make_line_t(ctx, FVT<long double>{p.t, p.x, p.y, p.z}, order);
  std::vector<Matrix4c> out;
  out.reserve(static_cast<std::size_t>(2 * order + 1));
  for (int n = -order; n <= order; ++n) {
    Matrix4c f;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CX<long double> v = line.c(0, n) * line.B[0].a[i][j] +
                            line.c(1, n) * line.B[1].a[i][j] +
                            line.c(2, n) * line.B[2].a[i][j];
        f(i, j) = Complex(static_cast<double>(v.re), static_cast<double>(v.im));
      }
    }
    out.push_back(f);
  }
  return out;
}

void PairAmplitudeEngine::compute_entries(
    const PairKinematics& kin, const std::vector<CFourVector>& pols1,
    const std::vector<CFourVector>& pols2, int order,
    std::vector<Complex>& out) const {
  if (settings_.quad_precision) {
    compute_entries_t<__float128>(dbq_, settings_, kin, pols1, pols2, order,
                                  out);
  } else {
    compute_entries_t<long double>(dbq_, settings_, kin, pols1, pols2, order,
                                   out);
  }
}

AmplitudeEntries PairAmplitudeEngine::amplitude_entries(
    const PairKinematics& kin, const std::vector<CFourVector>& pols1,
    const std::vector<CFourVector>& pols2) const {
  AmplitudeEntries result;
  result.n_pol1 = static_cast<int>(pols1.size());
  result.n_pol2 = static_cast<int>(pols2.size());

  int order = settings_.initial_order;
  std::vector<Complex> prev;
  compute_entries(kin, pols1, pols2, order, prev);
  while (true) {
    int next = 2 * order;
    if (next > settings_.max_order) {
      std::ostringstream os;
      os << "Floquet sum not converged at the hard cap: order " << order
         << ", n=" << kin.n << ", k1^0=" << kin.k1.t << " eV, k2^0="
         << kin.k2.t << " eV";
      throw ConvergenceError(os.str());
    }
    std::vector<Complex> cur;
    compute_entries(kin, pols1, pols2, next, cur);
    double diff = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i)
      diff += std::norm(cur[i] - prev[i]);
    diff = std::sqrt(diff);
    double norm = frobenius(cur);
    double rel = norm > 0.0 ? diff / norm : diff;
    if (rel <= settings_.relative_tolerance) {
      result.values = std::move(cur);
      result.order_used = next;
      result.truncation_change = rel;
      return result;
    }
    order = next;
    prev = std::move(cur);
  }
}

HelicityAmplitudeBlock PairAmplitudeEngine::helicity_block(
    const PairKinematics& kin) const {
  auto angles_of = [](const FourVector& v) {
    double zen = std::atan2(std::hypot(v.x, v.y), v.z);
    double az = (v.x == 0.0 && v.y == 0.0) ? 0.0 : std::atan2(v.y, v.x);
    return std::pair<double, double>{zen, az};
  };
  auto [z1, a1] = angles_of(kin.k1);
  auto [z2, a2] = angles_of(kin.k2);
  std::vector<CFourVector> pols1 = {helicity_polarization(z1, a1, +1),
                                    helicity_polarization(z1, a1, -1)};
  std::vector<CFourVector> pols2 = {helicity_polarization(z2, a2, +1),
                                    helicity_polarization(z2, a2, -1)};
  AmplitudeEntries entries = amplitude_entries(kin, pols1, pols2);

  HelicityAmplitudeBlock block;
  block.kinematics = kin;
  block.order_used = entries.order_used;
  block.truncation_change = entries.truncation_change;
  for (int ri = 1; ri <= 2; ++ri)
    for (int rf = 1; rf <= 2; ++rf)
      for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
          block.s[ri - 1][rf - 1][i1][i2] = entries.at(ri, rf, i1, i2);
  return block;
}

HelicityAmplitudeBlock PairAmplitudeEngine::helicity_block(
    int n, const Vec3& dir1, double k1_energy, const Vec3& dir2) const {
  return helicity_block(pair_kinematics(n, dir1, k1_energy, dir2, dbq_));
}

Complex PairAmplitudeEngine::scattering_amplitude(int n,
                                                  const PhotonMode& photon1,
                                                  const PhotonMode& photon2,
                                                  int r_i, int r_f) const {
  if ((r_i != 1 && r_i != 2) || (r_f != 1 && r_f != 2))
    throw ContractError("spin indices must be 1 or 2");
  PairKinematics kin =
      pair_kinematics_from_photons(n, photon1.momentum, photon2.momentum, dbq_);
  AmplitudeEntries entries = amplitude_entries(kin, {photon1.polarization},
                                               {photon2.polarization});
  return entries.at(r_i, r_f, 0, 0);
}

}  // namespace felpair
