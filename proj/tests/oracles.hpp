// Independent reference computations used by the tests. Nothing here calls into
// the library's algorithms.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

using V4 = std::array<double, 4>;
using M4 = std::array<std::array<double, 4>, 4>;

inline M4 identity4() {
  M4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline M4 mul(const M4& a, const M4& b) {
  M4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline M4 transpose(const M4& a) {
  M4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) c[i][j] = a[j][i];
  return c;
}

// Textbook linear Kalman filter for the planar constant-velocity target, written
// in predictor/corrector form with the Joseph covariance update.
struct ReferenceKalman {
  double t;
  double q11, q12, q22;  // process noise covariance
  V4 x{};
  M4 P = identity4();

  M4 transition() const {
    M4 a = identity4();
    a[0][2] = t;
    a[1][3] = t;
    return a;
  }

  M4 process() const {
    // G Q G^T with G = [t^2/2 I; t I].
    const double h = 0.5 * t * t;
    const double g[4][2] = {{h, 0}, {0, h}, {t, 0}, {0, t}};
    const double q[2][2] = {{q11, q12}, {q12, q22}};
    M4 out{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) out[i][j] += g[i][a] * q[a][b] * g[j][b];
    return out;
  }

  void step(double z, const V4& c, double r, double bias) {
    const M4 a = transition();
    V4 xp{};
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) xp[i] += a[i][k] * x[k];
    M4 pp = mul(mul(a, P), transpose(a));
    const M4 qd = process();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) pp[i][j] += qd[i][j];

    V4 pc{};
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) pc[i] += pp[i][k] * c[k];
    double s = r;
    for (int k = 0; k < 4; ++k) s += c[k] * pc[k];
    V4 gain{};
    for (int i = 0; i < 4; ++i) gain[i] = pc[i] / s;

    double zhat = bias;
    for (int k = 0; k < 4; ++k) zhat += c[k] * xp[k];
    for (int i = 0; i < 4; ++i) x[i] = xp[i] + gain[i] * (z - zhat);

    M4 ikc = identity4();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) ikc[i][j] -= gain[i] * c[j];
    M4 joseph = mul(mul(ikc, pp), transpose(ikc));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) joseph[i][j] += gain[i] * r * gain[j];
    P = joseph;
  }
};

// Every way to give each target exactly two distinct drones that can see it.
// visible[i][j] is true when drone i sees target j.
inline std::vector<std::vector<int>> feasible_matchings(const std::vector<std::vector<bool>>& visible) {
  const int n = static_cast<int>(visible.size());
  const int m = n == 0 ? 0 : static_cast<int>(visible[0].size());
  std::vector<std::vector<int>> out;
  std::vector<int> choice(n, 0);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  for (long code = 0; code < total; ++code) {
    long c = code;
    bool ok = true;
    std::vector<int> count(m, 0);
    for (int i = 0; i < n; ++i) {
      choice[i] = static_cast<int>(c % m);
      c /= m;
      if (!visible[i][choice[i]]) ok = false;
      ++count[choice[i]];
    }
    for (int j = 0; j < m && ok; ++j) ok = count[j] == 2;
    if (ok) out.push_back(choice);
  }
  return out;
}

// Grid search for the point whose distances to two centres best match two ranges.
struct GridHit {
  double x, y, cost;
};

inline std::vector<GridHit> circle_grid_minima(double cx1, double cy1, double r1, double cx2, double cy2,
                                               double r2, double half_width, double step) {
  std::vector<GridHit> hits;
  const double mx = 0.5 * (cx1 + cx2);
  const double my = 0.5 * (cy1 + cy2);
  const int n = static_cast<int>(half_width / step);
  double best = 1e300;
  for (int a = -n; a <= n; ++a) {
    for (int b = -n; b <= n; ++b) {
      const double x = mx + a * step;
      const double y = my + b * step;
      const double d1 = std::hypot(x - cx1, y - cy1) - r1;
      const double d2 = std::hypot(x - cx2, y - cy2) - r2;
      const double cost = d1 * d1 + d2 * d2;
      if (cost < best) best = cost;
      hits.push_back({x, y, cost});
    }
  }
  std::vector<GridHit> minima;
  for (const auto& h : hits) {
    if (h.cost <= best + 1e-9) minima.push_back(h);
  }
  return minima;
}

}  // namespace oracle
