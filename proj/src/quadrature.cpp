#include "softguide/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace softguide::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Segment {
  double a, b, value, error, l1;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment rule(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0, l1 = 0.0;
  // depth 0: a single 31-point rule; boost scales L1 but not the error
  const double v = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  const double scale = 0.5 * (b - a);
  return {a, b, v, err * scale, l1};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breaks, double rel_tol) {
  Result out;
  if (!(b > a)) return out;
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_segments = 4000;
  std::priority_queue<Segment> open;
  std::vector<Segment> settled;
  double value = 0.0, error = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto s = rule(f, pts[i], pts[i + 1]);
    value += s.value, error += s.error, l1 += s.l1;
    open.push(s);
  }
  int count = static_cast<int>(open.size());
  while (!open.empty()) {
    const double target = std::max(rel_tol * std::abs(value), 50.0 * eps * l1);
    if (error <= target || count >= max_segments) break;
    const auto s = open.top();
    open.pop();
    const double mid = 0.5 * (s.a + s.b);
    // stop splitting at the round-off floor of the segment
    if (s.error <= 50.0 * eps * s.l1 || !(mid > s.a && mid < s.b)) {
      settled.push_back(s);
      continue;
    }
    const auto left = rule(f, s.a, mid), right = rule(f, mid, s.b);
    value += left.value + right.value - s.value;
    error += left.error + right.error - s.error;
    l1 += left.l1 + right.l1 - s.l1;
    open.push(left);
    open.push(right);
    ++count;
  }
  // re-sum to avoid drift from the incremental updates
  out.value = 0.0;
  out.error = 0.0;
  for (const auto& s : settled) out.value += s.value, out.error += s.error;
  while (!open.empty()) {
    out.value += open.top().value;
    out.error += open.top().error;
    open.pop();
  }
  return out;
}

}  // namespace softguide::quad
