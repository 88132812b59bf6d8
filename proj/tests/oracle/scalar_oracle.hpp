#pragma once

// Straight-line 1D reference for the flux and rhs kernels.  Written from
// the formulas alone: no shared code with the library, branchy minmod,
// explicit mirror indexing, std::pow / std::log for the enthalpy.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct Params {
  double gamma = 2.0;
  double chi = 4.0;
  double mu = 1.0;
  double delta = 1.0;
  double tau = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;
  double beta = 1.0;
  double r = 1.0;
  double eps = 0.0;
  double eta = 1e-12;
  bool linear = false;
};

struct Result {
  std::vector<double> fm, fc, vel;  // n + 1 faces, face k between cells k-1 and k
  std::vector<double> sm, sc;       // per cell
  std::vector<double> dm, dc, dd;   // per cell
};

inline double mm(double a, double b, double c) {
  if (a > 0 && b > 0 && c > 0) {
    double v = a;
    if (b < v) v = b;
    if (c < v) v = c;
    return v;
  }
  if (a < 0 && b < 0 && c < 0) {
    double v = a;
    if (b > v) v = b;
    if (c > v) v = c;
    return v;
  }
  return 0.0;
}

// Cell k in [-2, n + 1] of the Neumann-mirrored extension.
inline double ext(const std::vector<double>& u, int k) {
  const int n = static_cast<int>(u.size());
  if (k < 0) return u[-k - 1];
  if (k >= n) return u[2 * n - k - 1];
  return u[k];
}

inline double enthalpy(double m, const Params& p) {
  if (p.linear) return std::log(m + p.eps + p.eta);
  return p.gamma / (p.gamma - 1.0) * std::pow(m + p.eps, p.gamma - 1.0);
}

inline Result evaluate(const std::vector<double>& m, const std::vector<double>& c,
                       const std::vector<double>& d, double dx, double theta, const Params& p) {
  const int n = static_cast<int>(m.size());
  Result out;
  out.sm.resize(n);
  out.sc.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ml = ext(m, i - 1), mc = m[i], mr = ext(m, i + 1);
    out.sm[i] = mm(theta * (mc - ml) / dx, (mr - ml) / (2 * dx), theta * (mr - mc) / dx);
    const double cl = ext(c, i - 1), cc = c[i], cr = ext(c, i + 1);
    out.sc[i] = mm(theta * (cc - cl) / dx, (cr - cl) / (2 * dx), theta * (cr - cc) / dx);
  }

  out.fm.assign(n + 1, 0.0);
  out.fc.assign(n + 1, 0.0);
  out.vel.assign(n + 1, 0.0);
  for (int k = 1; k < n; ++k) {
    const int L = k - 1, R = k;
    const double v = -(enthalpy(m[R], p) - enthalpy(m[L], p)) / dx +
                     p.chi * out.sc[L] / (1.0 + p.delta * m[L]);
    double east = m[L] + dx / 2 * out.sm[L];
    double west = m[R] - dx / 2 * out.sm[R];
    if (east < 0) east = 0;
    if (west < 0) west = 0;
    double f = 0.0;
    if (v > 0) f = v * east;
    if (v < 0) f = v * west;
    out.vel[k] = v;
    out.fm[k] = f;
    out.fc[k] = -p.alpha * (c[R] - c[L]) / dx;
  }

  out.dm.resize(n);
  out.dc.resize(n);
  out.dd.resize(n);
  for (int i = 0; i < n; ++i) {
    const double div_m = (out.fm[i + 1] - out.fm[i]) / dx;
    const double div_c = (out.fc[i + 1] - out.fc[i]) / dx;
    out.dm[i] = -div_m + p.mu * m[i] * (1 - m[i]);
    out.dc[i] = (-div_c + p.lambda * d[i] - c[i] + p.beta * m[i]) / p.tau;
    out.dd[i] = p.r * m[i] * (m[i] / (1 + p.delta * m[i])) * (1 - d[i]);
  }
  return out;
}

}  // namespace oracle
