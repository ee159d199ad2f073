#pragma once
// Busemann volume for n in {2, 3}.
//
// All volumes are computed in chart coordinates (xi, tau), where tau is the
// Hilbert distance from H_1 along the flow. Unit balls of the Hilbert norm
// are measured after whitening the coordinates by the ball's inertia, so the
// sphere quadrature stays accurate when the ball is strongly elongated.

#include "gcusp/classification.hpp"
#include "gcusp/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace gcusp {

struct VolumeEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  long long samples = 0;
  double depth_max = 0.0;
};

struct DecaySeries {
  std::vector<double> t, cross_section, kappa;
};

struct VolumeOptions {
  std::uint64_t seed = 1;
  int resolution = 0;        // sphere grid size; 0 picks the dimension default
  int nodes_per_panel = 6;   // Gauss-Legendre nodes per unit-length-2 panel in tau
  int strata_per_axis = 2;   // patch strata per chart axis
  int threads = 0;           // 0 reads GCUSP_THREADS, else hardware concurrency
};

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

inline void require_volume_dim(int n) {
  if (n != 2 && n != 3) fail(ErrorCode::UnsupportedDimension, "volume computations need n in {2, 3}");
}

// Volume of the unit ball of the symmetric norm F in R^d.
inline double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
  }
  fail(ErrorCode::UnsupportedDimension, "ball dimension");
}

inline int default_resolution(int d) { return d == 3 ? (1 << 14) : (1 << 10); }

// Unit directions: equally spaced circle (trapezoid, d = 2) or Fibonacci
// sphere (d = 3). Every direction carries weight area(S^{d-1}) / N.
inline std::vector<Vec> sphere_grid(int d, int count) {
  std::vector<Vec> dirs;
  if (d == 2) {
    for (int j = 0; j < count; ++j) {
      const double a = 2 * kPi * j / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      dirs.push_back(v);
    }
  } else {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
      const double z = 1.0 - (2.0 * j + 1.0) / count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec v(3);
      v << rho * std::cos(golden * j), rho * std::sin(golden * j), z;
      dirs.push_back(v);
    }
  }
  return dirs;
}

inline double sphere_area(int d) { return d == 2 ? 2 * kPi : 4 * kPi; }

// Lebesgue volume of {w : F(w) <= 1} in R^d for an even norm F.
inline double ball_volume(int d, const std::function<double(const Vec&)>& F, int resolution) {
  if (d == 1) return 2.0 / F(Vec::Ones(1));
  Mat W = Mat::Identity(d, d);
  for (int i = 0; i < d; ++i) W(i, i) = 1.0 / F(Vec::Unit(d, i));
  const auto coarse = sphere_grid(d, std::max(64, resolution / 16));
  for (int iter = 0; iter < 4; ++iter) {
    Mat inertia = Mat::Zero(d, d);
    for (const Vec& th : coarse) {
      const double r = 1.0 / F(W * th);
      inertia += std::pow(r, d + 2) * th * th.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(inertia);
    const Vec ev = es.eigenvalues();
    if (!(ev.minCoeff() > 0)) break;
    const double cond = ev.maxCoeff() / ev.minCoeff();
    W = W * (es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose());
    W /= std::pow(std::abs(W.determinant()), 1.0 / d);
    if (cond < 1.01) break;
  }
  const auto fine = sphere_grid(d, resolution);
  double acc = 0.0;
  for (const Vec& th : fine) acc += std::pow(1.0 / F(W * th), d);
  return std::abs(W.determinant()) * acc * sphere_area(d) / (d * double(fine.size()));
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t stratum_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ (index * 0xD1B54A32D192ED03ull));
}

inline int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GCUSP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs job(i) for i in [0, count) on a fixed partition; results land in
// caller-owned slots, so scheduling cannot change them.
inline void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += threads) job(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
inline std::pair<Vec, Vec> gauss_legendre(int m) {
  Mat jac = Mat::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  Vec w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w};
}

// Flow parameter at Hilbert distance tau beyond H_1, and its derivative.
inline std::pair<double, double> flow_of_depth(const DomainShape& s, double tau) {
  if (!s.full()) return {std::exp(2 * tau), 2 * std::exp(2 * tau)};
  const double e1 = std::expm1(1.0);
  const double q = e1 * std::exp(2 * tau);
  return {std::log1p(q), 2 * q / (1 + q)};
}

}  // namespace detail

// c_n over the Euclidean volume of the Hilbert unit ball at p.
inline double busemann_density(const WeylVector& psi, const Vec& p, int resolution = 0) {
  const int n = psi.n();
  detail::require_volume_dim(n);
  require_interior(psi, p);
  const int res = resolution > 0 ? resolution : detail::default_resolution(n);
  const auto F = [&](const Vec& v) { return hilbert_norm(psi, p, v); };
  return detail::unit_ball_volume(n) / detail::ball_volume(n, F, res);
}

// Busemann density with respect to d xi d tau at chart point (xi, tau).
inline double chart_density(const EuclideanChart& ch, const Vec& xi, double tau, int resolution = 0) {
  const DomainShape& s = ch.shape();
  const int n = s.n;
  detail::require_volume_dim(n);
  const auto [flow, dflow] = detail::flow_of_depth(s, tau);
  const ChartCoords c{xi.head(s.r), xi.tail(s.u), flow};
  const Vec p = ch.point(c);
  Mat J = ch.jacobian(c);
  J.col(n - 1) *= dflow;
  const int res = resolution > 0 ? resolution : detail::default_resolution(n);
  const auto F = [&](const Vec& w) { return hilbert_norm(ch.psi(), p, J * w); };
  return detail::unit_ball_volume(n) / detail::ball_volume(n, F, res);
}

// (n-1)-dimensional Busemann volume of the chart parallelepiped `patch`
// (columns are edges in xi) on the horosphere at flow parameter t, and its
// ratio to the same patch at t = 1.
struct CrossSection {
  double volume = 0.0;
  double kappa = 1.0;
};

namespace detail {

inline double section_density(const EuclideanChart& ch, double t, int resolution) {
  const DomainShape& s = ch.shape();
  const int k = s.n - 1;
  const ChartCoords c{Vec::Zero(s.r), Vec::Zero(s.u), t};
  const Vec p = ch.point(c);
  const Mat J = ch.jacobian(c).leftCols(k);
  const int res = resolution > 0 ? resolution : default_resolution(k == 1 ? 2 : k);
  const auto F = [&](const Vec& w) { return hilbert_norm(ch.psi(), p, J * w); };
  return unit_ball_volume(k) / ball_volume(k, F, res);
}

inline double patch_volume(const Mat& patch, int k) {
  require_dim(patch.rows(), k, "patch rows");
  require_dim(patch.cols(), k, "patch cols");
  const double det = std::abs(patch.determinant());
  if (!(det > 1e-12)) fail(ErrorCode::DegeneratePatch, "patch is degenerate");
  return det;
}

}  // namespace detail

inline CrossSection cross_section(const WeylVector& psi, const Mat& patch, double t, int resolution = 0) {
  detail::require_volume_dim(psi.n());
  if (!(t >= 1.0)) fail(ErrorCode::InvalidArgument, "cross sections are taken for t >= 1");
  const EuclideanChart ch(psi);
  const double area = detail::patch_volume(patch, psi.n() - 1);
  const double at_t = detail::section_density(ch, t, resolution);
  const double at_1 = t == 1.0 ? at_t : detail::section_density(ch, 1.0, resolution);
  return {area * at_t, at_t / at_1};
}

inline DecaySeries decay_series(const WeylVector& psi, const Mat& patch, const std::vector<double>& ts,
                                int resolution = 0) {
  detail::require_volume_dim(psi.n());
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1])) fail(ErrorCode::InvalidArgument, "t grid must increase strictly");
  const EuclideanChart ch(psi);
  const double area = detail::patch_volume(patch, psi.n() - 1);
  const double ref = detail::section_density(ch, 1.0, resolution);
  DecaySeries out;
  for (double t : ts) {
    if (!(t >= 1.0)) fail(ErrorCode::InvalidArgument, "cross sections are taken for t >= 1");
    const double d = detail::section_density(ch, t, resolution);
    out.t.push_back(t);
    out.cross_section.push_back(area * d);
    out.kappa.push_back(d / ref);
  }
  return out;
}

// Hilbert distance between the horospheres at flow parameters 1 and t.
inline double horosphere_separation(const WeylVector& psi, double t) {
  const DomainShape s = make_domain(psi);
  if (!s.full()) return 0.5 * std::abs(std::log(t));
  return 0.5 * std::abs(std::log(std::expm1(t) / std::expm1(1.0)));
}

// Volume of the cusp region between H_1 and Hilbert depth T, over one
// fundamental domain of the lattice.
inline VolumeEstimate cusp_volume(const MarkedLattice& L, double depth, const VolumeOptions& opt = {}) {
  const WeylVector& psi = L.psi;
  const int n = psi.n();
  detail::require_volume_dim(n);
  if (!(depth >= 0.0)) fail(ErrorCode::InvalidArgument, "depth must be >= 0");
  if (!translation_only(L)) fail(ErrorCode::InvalidArgument, "cusp volume needs trivial orthogonal parts");
  const int k = n - 1;
  Mat xi(k, L.generators.size());
  for (std::size_t j = 0; j < L.generators.size(); ++j) xi.col(j) = chart_xi(psi, L.generators[j].params);
  const Mat basis = lattice::basis_of_span(xi);
  const double covol = std::abs(basis.determinant());
  VolumeEstimate out;
  out.depth_max = depth;
  if (depth == 0.0) {
    out.samples = 1;
    return out;
  }
  const EuclideanChart ch(psi);
  // composite Gauss-Legendre in tau, panels of length <= 2
  const int panels = std::max(1, int(std::ceil(depth / 2.0)));
  const auto [gx, gw] = detail::gauss_legendre(std::max(2, opt.nodes_per_panel));
  std::vector<double> taus, weights;
  const double h = depth / panels;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < gx.size(); ++i) {
      taus.push_back(h * (p + 0.5 * (gx(i) + 1.0)));
      weights.push_back(0.5 * h * gw(i));
    }
  int strata = 1;
  for (int i = 0; i < k; ++i) strata *= std::max(1, opt.strata_per_axis);
  const int m = std::max(1, opt.strata_per_axis);
  const int nodes = int(taus.size());
  std::vector<double> vals(std::size_t(strata) * nodes);
  detail::parallel_for(strata * nodes, detail::thread_count(opt.threads), [&](int job) {
    const int st = job / nodes, node = job % nodes;
    std::mt19937_64 rng(detail::stratum_seed(opt.seed, std::uint64_t(st)));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec cell(k);
    int rem = st;
    for (int i = 0; i < k; ++i) {
      cell(i) = (rem % m + U(rng)) / m;
      rem /= m;
    }
    vals[job] = chart_density(ch, basis * cell, taus[node], opt.resolution);
  });
  std::vector<double> per(strata, 0.0);
  for (int st = 0; st < strata; ++st)
    for (int node = 0; node < nodes; ++node) per[st] += covol * weights[node] * vals[std::size_t(st) * nodes + node];
  double mean = 0.0;
  for (double v : per) mean += v;
  mean /= strata;
  double var = 0.0;
  for (double v : per) var += (v - mean) * (v - mean);
  out.value = mean;
  out.stderr_ = strata > 1 ? std::sqrt(var / (strata - 1) / strata) : 0.0;
  out.samples = static_cast<long long>(vals.size());
  return out;
}

struct TailFit {
  double exponent = 0.0;    // slope of log kappa against d(H_1, H_t)
  double constant = 0.0;    // exp(intercept)
  double kappa_min = 0.0;
  bool consistent = false;  // agrees with the analytic verdict
};

struct FinitenessVerdict {
  bool finite = false;
  int u = 0;
  std::optional<TailFit> numeric;
};

inline TailFit fit_tail(const WeylVector& psi, const DecaySeries& ds) {
  TailFit f;
  const std::size_t m = ds.t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  f.kappa_min = *std::min_element(ds.kappa.begin(), ds.kappa.end());
  for (std::size_t i = 0; i < m; ++i) {
    const double x = horosphere_separation(psi, ds.t[i]), y = std::log(ds.kappa[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double den = m * sxx - sx * sx;
  f.exponent = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  f.constant = std::exp((sy - f.exponent * sx) / m);
  return f;
}

// Finite iff u > 0. The optional tail fit samples kappa at separations
// d(H_1, H_t) evenly spaced in [log(10)/2, log(10^4)/2]; a finite verdict
// expects exponent < -0.8, an infinite one a kappa bounded away from zero.
inline FinitenessVerdict finiteness_verdict(const WeylVector& psi, bool numeric = false, int resolution = 0) {
  FinitenessVerdict v;
  const DomainShape s = make_domain(psi);
  v.u = s.u;
  v.finite = s.u > 0;
  if (!numeric) return v;
  std::vector<double> ts;
  const double lo = 0.5 * std::log(10.0), hi = 0.5 * std::log(1e4);
  for (int i = 0; i <= 12; ++i) ts.push_back(detail::flow_of_depth(s, lo + (hi - lo) * i / 12.0).first);
  const DecaySeries ds = decay_series(psi, Mat::Identity(s.n - 1, s.n - 1), ts, resolution);
  TailFit f = fit_tail(psi, ds);
  f.consistent = v.finite ? (f.exponent < -0.8) : (f.kappa_min > 0.05 && f.exponent > -0.2);
  v.numeric = f;
  return v;
}

}  // namespace gcusp
