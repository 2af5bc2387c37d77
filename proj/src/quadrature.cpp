#include "felpair/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <queue>
#include <stdexcept>

namespace felpair {

namespace {

// QUADPACK 7-15 Gauss-Kronrod nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552592, 0.16900472663926790, 0.19035057806478540,
    0.20443294007529889, 0.20948214108472782};
constexpr double kWg[4] = {0.12948496616886969, 0.27970539148927666,
                           0.38183005050511894, 0.41795918367346938};

struct Interval {
  double a, b, value, error;
  long id;
};

void gk15(const std::function<double(double)>& f, double a, double b,
          double& value, double& error) {
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double fc = f(c);
  double result_g = fc * kWg[3];
  double result_k = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    double x = h * kXgk[j];
    double fsum = f(c - x) + f(c + x);
    result_k += kWgk[j] * fsum;
    if (j % 2 == 1) result_g += kWg[j / 2] * fsum;
  }
  value = result_k * h;
  double diff = std::fabs((result_k - result_g) * h);
  error = diff;
}

struct KahanAccumulator {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

QuadratureOutcome integrate_1d(const std::function<double(double)>& f,
                               double a, double b,
                               const QuadratureOptions& opt) {
  QuadratureOutcome out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::vector<Interval> leaves;
  auto cmp = [&](std::size_t lhs, std::size_t rhs) {
    if (leaves[lhs].error != leaves[rhs].error)
      return leaves[lhs].error < leaves[rhs].error;
    return leaves[lhs].id > leaves[rhs].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)>
      queue(cmp);

  long next_id = 0;
  Interval root{a, b, 0.0, 0.0, next_id++};
  gk15(f, a, b, root.value, root.error);
  out.evaluations += 15;
  leaves.push_back(root);
  queue.push(0);

  auto totals = [&]() {
    double v = 0.0, e = 0.0;
    for (const auto& leaf : leaves) {
      if (leaf.id < 0) continue;  // replaced by children
      v += leaf.value;
      e += leaf.error;
    }
    return std::pair<double, double>{v, e};
  };

  while (static_cast<int>(leaves.size()) < opt.max_regions) {
    auto [v, e] = totals();
    if (e <= std::max(opt.absolute_tolerance,
                      opt.relative_tolerance * std::fabs(v))) {
      out.converged = true;
      break;
    }
    if (queue.empty()) break;
    std::size_t idx = queue.top();
    queue.pop();
    Interval parent = leaves[idx];
    leaves[idx].id = -1;
    double mid = 0.5 * (parent.a + parent.b);
    if (mid == parent.a || mid == parent.b) continue;  // cannot refine further
    for (int half = 0; half < 2; ++half) {
      Interval child{half == 0 ? parent.a : mid, half == 0 ? mid : parent.b,
                     0.0, 0.0, next_id++};
      gk15(f, child.a, child.b, child.value, child.error);
      out.evaluations += 15;
      leaves.push_back(child);
      queue.push(leaves.size() - 1);
    }
  }
  if (!out.converged) {
    auto [v, e] = totals();
    out.converged = e <= std::max(opt.absolute_tolerance,
                                  opt.relative_tolerance * std::fabs(v));
  }

  std::vector<Interval> live;
  for (const auto& leaf : leaves)
    if (leaf.id >= 0) live.push_back(leaf);
  std::sort(live.begin(), live.end(),
            [](const Interval& l, const Interval& r) { return l.id < r.id; });
  KahanAccumulator acc;
  double err = 0.0;
  for (const auto& leaf : live) {
    acc.add(leaf.value);
    err += leaf.error;
  }
  out.value = acc.sum;
  out.error_estimate = err;
  out.regions = static_cast<int>(live.size());
  return out;
}

namespace {

// Genz-Malik fully symmetric degree-7 rule with embedded degree-5 error
// estimate on an axis-aligned box.
struct GenzMalikRule {
  int dim;
  int ncomp;
  double lambda2, lambda4, lambda5, ratio;
  double w1, w2, w3, w4, w5;
  double we1, we2, we3, we4;

  explicit GenzMalikRule(int d, int nc) : dim(d), ncomp(nc) {
    lambda2 = std::sqrt(9.0 / 70.0);
    lambda4 = std::sqrt(9.0 / 10.0);
    lambda5 = std::sqrt(9.0 / 19.0);
    ratio = (lambda2 * lambda2) / (lambda4 * lambda4);
    double D = d;
    w1 = (12824.0 - (9120.0 - 400.0 * D) * D) / 19683.0;
    w2 = 980.0 / 6561.0;
    w3 = (1820.0 - 400.0 * D) / 19683.0;
    w4 = 200.0 / 19683.0;
    w5 = 6859.0 / 19683.0 / static_cast<double>(1 << d);
    we1 = (729.0 - 50.0 * (19.0 - D) * D) / 729.0;
    we2 = 245.0 / 486.0;
    we3 = (265.0 - 100.0 * D) / 1458.0;
    we4 = 25.0 / 729.0;
  }

  long points_per_region() const {
    return 1 + 4L * dim + 2L * dim * (dim - 1) + (1L << dim);
  }

  // Evaluates the rule; returns per-component values, a scalar error and the
  // suggested split dimension.
  void apply(const std::function<void(const double*, double*)>& f,
             const std::vector<double>& center, const std::vector<double>& hw,
             std::vector<double>& values, double& error, int& split_dim) const {
    std::vector<double> x(center);
    std::vector<double> f0(ncomp);
    std::vector<double> lo2(ncomp), hi2(ncomp), lo4(ncomp), hi4(ncomp);
    std::vector<double> tmp(ncomp);
    std::vector<double> sum2(ncomp, 0.0), sum3(ncomp, 0.0), sum4(ncomp, 0.0),
        sum5(ncomp, 0.0);
    std::vector<double> fourth_diff(dim, 0.0);

    f(center.data(), f0.data());

    for (int d = 0; d < dim; ++d) {
      x = center;
      x[d] = center[d] - lambda2 * hw[d];
      f(x.data(), lo2.data());
      x[d] = center[d] + lambda2 * hw[d];
      f(x.data(), hi2.data());
      x[d] = center[d] - lambda4 * hw[d];
      f(x.data(), lo4.data());
      x[d] = center[d] + lambda4 * hw[d];
      f(x.data(), hi4.data());
      // Fourth divided difference along this axis, summed over components,
      // picks the split direction.
      double diff = 0.0;
      for (int c = 0; c < ncomp; ++c) {
        sum2[c] += lo2[c] + hi2[c];
        sum3[c] += lo4[c] + hi4[c];
        diff += std::fabs(lo2[c] + hi2[c] - 2.0 * f0[c] -
                          ratio * (lo4[c] + hi4[c] - 2.0 * f0[c]));
      }
      fourth_diff[d] = diff;
    }

    for (int d1 = 0; d1 < dim; ++d1) {
      for (int d2 = d1 + 1; d2 < dim; ++d2) {
        for (int s1 = -1; s1 <= 1; s1 += 2) {
          for (int s2 = -1; s2 <= 1; s2 += 2) {
            x = center;
            x[d1] = center[d1] + s1 * lambda4 * hw[d1];
            x[d2] = center[d2] + s2 * lambda4 * hw[d2];
            f(x.data(), tmp.data());
            for (int c = 0; c < ncomp; ++c) sum4[c] += tmp[c];
          }
        }
      }
    }

    for (long mask = 0; mask < (1L << dim); ++mask) {
      for (int d = 0; d < dim; ++d) {
        double s = (mask >> d) & 1 ? 1.0 : -1.0;
        x[d] = center[d] + s * lambda5 * hw[d];
      }
      f(x.data(), tmp.data());
      for (int c = 0; c < ncomp; ++c) sum5[c] += tmp[c];
    }

    double vol = 1.0;
    for (int d = 0; d < dim; ++d) vol *= 2.0 * hw[d];

    values.assign(ncomp, 0.0);
    error = 0.0;
    for (int c = 0; c < ncomp; ++c) {
      double r7 = vol * (w1 * f0[c] + w2 * sum2[c] + w3 * sum3[c] +
                         w4 * sum4[c] + w5 * sum5[c]);
      double r5 = vol * (we1 * f0[c] + we2 * sum2[c] + we3 * sum3[c] +
                         we4 * sum4[c]);
      values[c] = r7;
      error += std::fabs(r7 - r5);
    }
    split_dim = 0;
    for (int d = 1; d < dim; ++d)
      if (fourth_diff[d] > fourth_diff[split_dim]) split_dim = d;
  }
};

struct Box {
  std::vector<double> center, hw;
  std::vector<double> values;
  double error = 0.0;
  int split_dim = 0;
  long id = 0;
  bool dead = false;
};

}  // namespace

CubatureOutcome integrate_box(
    const std::function<void(const double* x, double* out)>& f, int dim,
    const std::vector<double>& lower, const std::vector<double>& upper,
    int ncomp, const QuadratureOptions& opt) {
  if (dim < 2 || dim > 7)
    throw std::invalid_argument("integrate_box supports dim in [2, 7]");
  if (static_cast<int>(lower.size()) != dim ||
      static_cast<int>(upper.size()) != dim)
    throw std::invalid_argument("integrate_box bounds size mismatch");

  GenzMalikRule rule(dim, ncomp);
  CubatureOutcome out;
  out.values.assign(ncomp, 0.0);

  std::vector<Box> boxes;
  long next_id = 0;

  auto make_box = [&](const std::vector<double>& center,
                      const std::vector<double>& hw) {
    Box b;
    b.center = center;
    b.hw = hw;
    b.id = next_id++;
    return b;
  };

  auto eval_box = [&](Box& b) {
    rule.apply(f, b.center, b.hw, b.values, b.error, b.split_dim);
  };

  {
    std::vector<double> center(dim), hw(dim);
    for (int d = 0; d < dim; ++d) {
      center[d] = 0.5 * (lower[d] + upper[d]);
      hw[d] = 0.5 * (upper[d] - lower[d]);
      if (hw[d] == 0.0) {
        out.converged = true;  // measure-zero box
        return out;
      }
    }
    Box root = make_box(center, hw);
    eval_box(root);
    out.evaluations += rule.points_per_region();
    boxes.push_back(std::move(root));
  }

  auto cmp = [&](std::size_t l, std::size_t r) {
    if (boxes[l].error != boxes[r].error)
      return boxes[l].error < boxes[r].error;
    return boxes[l].id > boxes[r].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)>
      queue(cmp);
  queue.push(0);

  auto totals = [&]() {
    std::vector<double> v(ncomp, 0.0);
    double e = 0.0;
    for (const auto& b : boxes) {
      if (b.dead) continue;
      for (int c = 0; c < ncomp; ++c) v[c] += b.values[c];
      e += b.error;
    }
    double vn = 0.0;
    for (int c = 0; c < ncomp; ++c) vn += std::fabs(v[c]);
    return std::pair<double, double>{vn, e};
  };

  // Fixed batch size: the subdivision schedule must not depend on the
  // worker count, only the evaluation of a scheduled batch is parallel.
  constexpr int kBatch = 8;

  while (static_cast<int>(boxes.size()) < opt.max_regions) {
    auto [vnorm, err] = totals();
    if (err <= std::max(opt.absolute_tolerance,
                        opt.relative_tolerance * vnorm)) {
      out.converged = true;
      break;
    }
    if (queue.empty()) break;

    std::vector<std::size_t> batch;
    while (!queue.empty() && static_cast<int>(batch.size()) < kBatch) {
      std::size_t idx = queue.top();
      queue.pop();
      if (boxes[idx].dead) continue;
      batch.push_back(idx);
    }
    if (batch.empty()) break;

    std::vector<Box> children;
    for (std::size_t idx : batch) {
      Box& parent = boxes[idx];
      parent.dead = true;
      int sd = parent.split_dim;
      for (int half = 0; half < 2; ++half) {
        std::vector<double> center = parent.center;
        std::vector<double> hw = parent.hw;
        hw[sd] *= 0.5;
        center[sd] += (half == 0 ? -1.0 : 1.0) * hw[sd];
        children.push_back(make_box(center, hw));
      }
    }

    if (opt.workers > 1 && children.size() > 1) {
      std::vector<std::future<void>> futures;
      futures.reserve(children.size());
      for (auto& child : children)
        futures.push_back(
            std::async(std::launch::async, [&eval_box, &child]() { eval_box(child); }));
      for (auto& fut : futures) fut.get();
    } else {
      for (auto& child : children) eval_box(child);
    }
    out.evaluations +=
        static_cast<long>(children.size()) * (rule.points_per_region());
    for (auto& child : children) {
      boxes.push_back(std::move(child));
      queue.push(boxes.size() - 1);
    }
  }

  if (!out.converged) {
    auto [vnorm, err] = totals();
    out.converged = err <= std::max(opt.absolute_tolerance,
                                    opt.relative_tolerance * vnorm);
  }

  std::vector<const Box*> live;
  for (const auto& b : boxes)
    if (!b.dead) live.push_back(&b);
  std::sort(live.begin(), live.end(),
            [](const Box* l, const Box* r) { return l->id < r->id; });
  std::vector<KahanAccumulator> acc(ncomp);
  double err_total = 0.0;
  for (const Box* b : live) {
    for (int c = 0; c < ncomp; ++c) acc[c].add(b->values[c]);
    err_total += b->error;
  }
  for (int c = 0; c < ncomp; ++c) out.values[c] = acc[c].sum;
  out.error_estimate = err_total;
  out.regions = static_cast<int>(live.size());
  return out;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre order");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration from the Chebyshev estimate for the i-th root of P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = x;
    nodes[n - 1 - i] = -x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  double mid = 0.5 * (a + b);
  double hw = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    nodes[i] = mid - hw * nodes[i];
    weights[i] *= hw;
  }
}

}  // namespace felpair
