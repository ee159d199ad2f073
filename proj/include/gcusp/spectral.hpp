#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "gcusp/core.hpp"

namespace gcusp {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

struct EigenCluster {
  cplx value;                  // cluster mean, stable under splitting of a defective eigenvalue
  int multiplicity = 0;
  std::vector<int> block_sizes;  // Jordan block sizes, descending
};

// Eigenvalues grouped by proximity, each with Jordan block sizes from
// rank(g - lambda I)^k. The cluster radius is relative to the spectral radius.
inline std::vector<EigenCluster> jordan_structure(const Mat& g, double cluster_tol = 1e-4) {
  const Eigen::Index n = g.rows();
  Eigen::ComplexEigenSolver<CMat> es(g.cast<cplx>(), false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  double rho = 0.0;
  for (auto& l : ev) rho = std::max(rho, std::abs(l));
  if (rho == 0.0) rho = 1.0;

  std::vector<int> label(n, -1);
  int nc = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    label[i] = nc;
    // transitive closure keeps chains of nearby eigenvalues together
    bool grew = true;
    while (grew) {
      grew = false;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (label[j] >= 0) continue;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (label[k] == nc && std::abs(ev[j] - ev[k]) <= cluster_tol * rho) {
            label[j] = nc;
            grew = true;
            break;
          }
        }
      }
    }
    ++nc;
  }

  std::vector<EigenCluster> out(nc);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[label[i]].value += ev[i];
    out[label[i]].multiplicity += 1;
  }
  const double gnorm = g.norm();
  const double cutoff = settings().jordan_cutoff;
  for (auto& c : out) {
    c.value /= double(c.multiplicity);
    if (std::abs(c.value.imag()) <= 1e-12 * rho) c.value = c.value.real();
    const CMat a = g.cast<cplx>() - c.value * CMat::Identity(n, n);
    CMat pw = CMat::Identity(n, n);
    std::vector<int> kernel_dim{0};
    for (int k = 1; k <= c.multiplicity; ++k) {
      pw = pw * a;
      Eigen::JacobiSVD<CMat> svd(pw);
      const auto& sv = svd.singularValues();
      const double thr = cutoff * std::pow(std::max(gnorm, 1.0), double(k));
      int null = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= thr) ++null;
      null = std::min<int>(null, c.multiplicity);
      null = std::max(null, kernel_dim.back());
      kernel_dim.push_back(null);
    }
    if (kernel_dim.back() < c.multiplicity) kernel_dim.back() = c.multiplicity;
    // blocks of size >= k: d_k - d_{k-1}
    std::vector<int> at_least(c.multiplicity + 2, 0);
    for (int k = 1; k <= c.multiplicity; ++k) at_least[k] = kernel_dim[k] - kernel_dim[k - 1];
    for (int k = 1; k <= c.multiplicity; ++k) {
      const int exactly = at_least[k] - at_least[k + 1];
      for (int q = 0; q < exactly; ++q) c.block_sizes.push_back(k);
    }
    std::sort(c.block_sizes.rbegin(), c.block_sizes.rend());
  }
  return out;
}

}  // namespace gcusp
