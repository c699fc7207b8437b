#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "p5iso/errors.hpp"

namespace p5iso {

using cvec = std::vector<std::complex<double>>;
using Field = std::function<void(std::complex<double> t, const cvec& y, cvec& dy)>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;  // in path length
  long max_steps = 2000000;
  double blowup = 1e8;          // |y| beyond this signals a pole
  std::optional<int> fixed_steps;  // per piece; disables adaptivity
};

inline void validate_config(const IntegratorConfig& c) {
  if (!(c.rel_tol > 0) || !(c.abs_tol > 0)) throw InvalidParameter("tolerances must be positive");
  if (c.max_steps <= 0) throw InvalidParameter("max_steps must be positive");
}

// Straight segment a -> b or arc on |t - center| = radius from angle phi0 to phi1.
struct PathPiece {
  bool arc = false;
  std::complex<double> a, b, center;
  double radius = 0, phi0 = 0, phi1 = 0;

  static PathPiece segment(std::complex<double> a, std::complex<double> b) { return {false, a, b, {}, 0, 0, 0}; }
  static PathPiece circle_arc(std::complex<double> c, double r, double p0, double p1) {
    return {true, c + std::polar(r, p0), c + std::polar(r, p1), c, r, p0, p1};
  }
  std::complex<double> at(double s) const {
    return arc ? center + std::polar(radius, phi0 + s * (phi1 - phi0)) : a + s * (b - a);
  }
  std::complex<double> speed(double s) const {
    return arc ? std::complex<double>(0, phi1 - phi0) * std::polar(radius, phi0 + s * (phi1 - phi0)) : b - a;
  }
  double length() const { return arc ? radius * std::abs(phi1 - phi0) : std::abs(b - a); }
};
using Path = std::vector<PathPiece>;

struct Sample {
  std::complex<double> t;
  cvec y, dy;  // dy is the field value dy/dt at t
};

struct Trajectory {
  std::vector<std::string> names;
  std::vector<Sample> samples;
  std::optional<std::complex<double>> blowup;  // pole location estimate
  double last_step = 0;                        // path length of the last attempted step
  long steps = 0, rejected = 0;
};

namespace ode_detail {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

inline double max_abs(const cvec& y) {
  double m = 0;
  for (auto& v : y) m = std::max(m, std::abs(v));
  return m;
}

inline bool finite(const cvec& y) {
  for (auto& v : y)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace ode_detail

// Adaptive Dormand-Prince 5(4) along a piecewise path, first-same-as-last.
// Stops early and sets `blowup` when the solution grows past cfg.blowup or
// the step collapses while the solution is large.
inline Trajectory integrate_ode(const Field& f, const cvec& y0, const Path& path, const IntegratorConfig& cfg,
                                std::vector<std::string> names = {}) {
  using namespace ode_detail;
  validate_config(cfg);
  const size_t n = y0.size();
  Trajectory tr;
  tr.names = std::move(names);
  if (path.empty()) throw InvalidParameter("empty path");
  cvec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  auto g = [&](const PathPiece& p, double s, const cvec& yy, cvec& out) {
    f(p.at(s), yy, out);
    auto sp = p.speed(s);
    for (auto& v : out) v *= sp;
  };
  {
    cvec d(n);
    f(path[0].at(0), y, d);
    tr.samples.push_back({path[0].at(0), y, d});
  }
  for (const auto& piece : path) {
    double L = piece.length();
    if (L == 0) continue;
    double hmax = std::min(1.0, cfg.max_step / L);
    double h = cfg.fixed_steps ? 1.0 / *cfg.fixed_steps : std::min(hmax, 1e-3);
    double hmin = 1e-14;
    double s = 0;
    g(piece, s, y, k1);
    while (s < 1.0) {
      if (++tr.steps > cfg.max_steps) throw IntegrationFailure("max_steps exceeded");
      if (s + h > 1.0) h = 1.0 - s;
      for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      g(piece, s + c2 * h, tmp, k2);
      for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      g(piece, s + c3 * h, tmp, k3);
      for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      g(piece, s + c4 * h, tmp, k4);
      for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      g(piece, s + c5 * h, tmp, k5);
      for (size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      g(piece, s + h, tmp, k6);
      for (size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      g(piece, s + h, ynew, k7);
      double err = 0;
      bool ok = finite(ynew) && finite(k7);
      if (ok && !cfg.fixed_steps) {
        for (size_t i = 0; i < n; ++i) {
          auto e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
          double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
          err = std::max(err, std::abs(e) / sc);
        }
      }
      tr.last_step = h * L;
      if (!ok || err > 1.0) {
        ++tr.rejected;
        double fac = ok ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1;
        h *= fac;
        if (h < hmin) {
          if (max_abs(y) > std::sqrt(cfg.blowup) || !ok) {
            auto t = piece.at(s);
            tr.blowup = t;
            return tr;
          }
          throw IntegrationFailure("step size underflow at t = " + std::to_string(piece.at(s).real()) + "+" +
                                   std::to_string(piece.at(s).imag()) + "i");
        }
        continue;
      }
      s += h;
      y = ynew;
      k1 = k7;
      cvec dy(n);
      auto sp = piece.speed(s);
      for (size_t i = 0; i < n; ++i) dy[i] = k7[i] / sp;
      tr.samples.push_back({piece.at(s), y, dy});
      if (max_abs(y) > cfg.blowup) {
        // simple-pole estimate t* = t + y/y' on the dominant component
        size_t j = 0;
        for (size_t i = 1; i < n; ++i)
          if (std::abs(y[i]) > std::abs(y[j])) j = i;
        tr.blowup = piece.at(s) + (std::abs(dy[j]) > 0 ? y[j] / dy[j] : 0.0);
        return tr;
      }
      if (!cfg.fixed_steps) {
        double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
        h = std::min(hmax, h * fac);
      }
    }
  }
  return tr;
}

inline Trajectory integrate_ode(const Field& f, const cvec& y0, std::complex<double> t0, std::complex<double> t1,
                                const IntegratorConfig& cfg, std::vector<std::string> names = {}) {
  return integrate_ode(f, y0, Path{PathPiece::segment(t0, t1)}, cfg, std::move(names));
}

struct RoutedTrajectory {
  Trajectory traj;
  Path path;
  std::vector<std::complex<double>> poles;  // detected and detoured
};

// Integrates from t0 to t1 on a straight line; on a detected pole the path
// detours along a semicircle around the estimate and integration restarts
// from the last sample before the detour.
inline RoutedTrajectory integrate_rerouted(const Field& f, const cvec& y0, std::complex<double> t0,
                                           std::complex<double> t1, const IntegratorConfig& cfg,
                                           std::vector<std::string> names = {}, int max_detours = 8) {
  RoutedTrajectory out;
  if (t0 == t1) {
    cvec d(y0.size());
    f(t0, y0, d);
    out.traj.names = names;
    out.traj.samples.push_back({t0, y0, d});
    out.path = {PathPiece::segment(t0, t1)};
    return out;
  }
  std::complex<double> dir = (t1 - t0) / std::abs(t1 - t0);
  double len = std::abs(t1 - t0);
  // detours: (position along the line, radius, side)
  struct Detour {
    double at, r;
    int side;
  };
  std::vector<Detour> detours;
  for (int attempt = 0;; ++attempt) {
    Path path;
    double pos = 0;
    for (auto& d : detours) {
      path.push_back(PathPiece::segment(t0 + dir * pos, t0 + dir * (d.at - d.r)));
      std::complex<double> c = t0 + dir * d.at;
      double base = std::arg(-dir);
      path.push_back(PathPiece::circle_arc(c, d.r, base, base - d.side * std::numbers::pi));
      pos = d.at + d.r;
    }
    path.push_back(PathPiece::segment(t0 + dir * pos, t1));
    std::erase_if(path, [](const PathPiece& p) { return p.length() == 0; });
    Trajectory tr = integrate_ode(f, y0, path, cfg, names);
    if (!tr.blowup) {
      out.traj = std::move(tr);
      out.path = std::move(path);
      return out;
    }
    std::complex<double> p = *tr.blowup;
    out.poles.push_back(p);
    if (attempt >= max_detours) throw PathBlocked("too many poles; last estimate " + std::to_string(p.real()) + "+" +
                                                  std::to_string(p.imag()) + "i");
    double along = std::real((p - t0) / dir);
    double off = std::imag((p - t0) / dir);
    double r = std::max(10 * tr.last_step, 0.05 * len);
    r = std::max(r, 2 * std::abs(off));
    if (along - r <= 0 || along + r >= len) throw PathBlocked("pole near endpoint at " + std::to_string(p.real()) +
                                                              "+" + std::to_string(p.imag()) + "i");
    int side = off > 0 ? -1 : 1;
    bool merged = false;
    for (auto& d : detours)
      if (std::abs(d.at - along) < d.r + r) {
        d.side = -d.side;
        d.r = std::max(d.r, r) * 1.5;
        merged = true;
      }
    if (!merged) detours.push_back({along, r, side});
    std::sort(detours.begin(), detours.end(), [](const Detour& a, const Detour& b) { return a.at < b.at; });
  }
}

inline void write_csv(std::ostream& os, const Trajectory& tr) {
  os << "t_re,t_im";
  size_t n = tr.samples.empty() ? 0 : tr.samples[0].y.size();
  for (size_t i = 0; i < n; ++i) {
    std::string nm = i < tr.names.size() ? tr.names[i] : "y" + std::to_string(i);
    os << "," << nm << "_re," << nm << "_im";
  }
  os << "\n";
  os.precision(17);
  for (auto& s : tr.samples) {
    os << s.t.real() << "," << s.t.imag();
    for (auto& v : s.y) os << "," << v.real() << "," << v.imag();
    os << "\n";
  }
}

}  // namespace p5iso
