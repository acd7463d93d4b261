#include "wignerscope/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wignerscope/errors.hpp"
#include "wignerscope/fockspace.hpp"

namespace wignerscope::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment eval_segment(const Integrand& f, double a, double b) {
  double err = 0.0;
  double v = GK::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, v, err};
}

}  // namespace

Estimate adaptive(const Integrand& f, double a, double b, double abs_tol, int max_depth) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw ValidationError("quad::adaptive needs a finite interval");
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double min_width = (b - a) * std::ldexp(1.0, -max_depth);
  const std::size_t max_segments = 4096;

  std::priority_queue<Segment> heap;
  heap.push(eval_segment(f, a, b));
  double total_err = heap.top().error;
  std::vector<Segment> done;

  while (!heap.empty() && total_err > abs_tol && heap.size() + done.size() < max_segments) {
    Segment s = heap.top();
    heap.pop();
    if (s.b - s.a <= min_width) {
      done.push_back(s);
      continue;
    }
    double mid = 0.5 * (s.a + s.b);
    Segment l = eval_segment(f, s.a, mid);
    Segment r = eval_segment(f, mid, s.b);
    total_err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  // Sum in interval order so the result does not depend on heap internals.
  std::sort(done.begin(), done.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  Estimate out;
  for (const auto& s : done) {
    out.value += s.value;
    out.error += s.error;
  }
  out.value *= sign;
  return out;
}

Estimate tanh_sinh(const std::function<double(double, double)>& f, double a, double b,
                   double rel_tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  Estimate out;
  double l1 = 0.0;
  out.value = integrator.integrate(f, a, b, rel_tol, &out.error, &l1);
  return out;
}

Estimate exp_sinh(const Integrand& f, double a, double rel_tol) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  Estimate out;
  double l1 = 0.0;
  out.value = integrator.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol,
                                   &out.error, &l1);
  return out;
}

double gauss_legendre_panels(const Integrand& f, double a, double b, double max_width) {
  if (a == b) return 0.0;
  const double width = std::abs(b - a);
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(width / max_width)));
  const double step = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    double lo = a + step * static_cast<double>(i);
    double hi = (i + 1 == panels) ? b : lo + step;
    sum += boost::math::quadrature::gauss<double, 16>::integrate(f, lo, hi);
  }
  return sum;
}

Rule gauss_hermite_scaled(std::size_t n) {
  if (n == 0) throw ValidationError("Gauss-Hermite rule needs n >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    double off = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
    jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();

  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  std::vector<double> psi(n + 1);
  const double root2n = std::sqrt(2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double x = ev(static_cast<Eigen::Index>(i));
    for (int it = 0; it < 8; ++it) {
      hermite_psi_all(x, psi);
      double deriv = root2n * psi[n - 1] - x * psi[n];
      if (deriv == 0.0) break;
      double dx = psi[n] / deriv;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    hermite_psi_all(x, psi);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (static_cast<double>(n) * psi[n - 1] * psi[n - 1]);
  }
  return rule;
}

}  // namespace wignerscope::quad
