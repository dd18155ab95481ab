#pragma once

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "config.h"
#include "containment/types.h"

namespace containment::testing {

inline Vec v2(double a, double b) {
  Vec out(2);
  out << a, b;
  return out;
}

inline Vec v1(double a) {
  Vec out(1);
  out << a;
  return out;
}

inline std::string scenario_path(const std::string& name) {
  return std::string(CONTAINMENT_SCENARIO_DIR) + "/" + name + ".json";
}

inline cli::Config bundled(const std::string& name) { return cli::load_config(scenario_path(name)); }

/// Gauss-Jordan inverse with partial pivoting, written out by hand so it
/// shares no code with the library solvers.
inline Eigen::MatrixXd gauss_jordan_inverse(Eigen::MatrixXd a) {
  const auto n = a.rows();
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const double d = a(c, c);
    for (Eigen::Index k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      for (Eigen::Index k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

/// Determinant by elimination with partial pivoting.
inline double determinant(Eigen::MatrixXd a) {
  const auto n = a.rows();
  double det = 1.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    if (a(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      a.row(c).swap(a.row(piv));
      det = -det;
    }
    det *= a(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) a.row(r) -= a(r, c) / a(c, c) * a.row(c);
  }
  return det;
}

/// Z-matrix with every leading principal minor positive.
inline bool m_matrix_by_minors(const Eigen::MatrixXd& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) > 0.0) return false;
    }
  }
  for (Eigen::Index k = 1; k <= a.rows(); ++k) {
    if (!(determinant(a.topLeftCorner(k, k)) > 0.0)) return false;
  }
  return true;
}

/// Spectral radius from Gelfand's formula, |A^k|^(1/k) with k = 2^20,
/// by repeated normalized squaring.
inline double gelfand_radius(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd p = a;
  double log_scale = 0.0;
  const int squarings = 20;
  for (int s = 0; s < squarings; ++s) {
    const double norm = p.cwiseAbs().maxCoeff();
    if (norm == 0.0) return 0.0;
    p /= norm;
    log_scale = 2.0 * (log_scale + std::log(norm));
    p = p * p;
  }
  const double norm = p.cwiseAbs().maxCoeff();
  if (norm == 0.0) return 0.0;
  return std::exp((log_scale + std::log(norm)) / std::ldexp(1.0, squarings));
}

}  // namespace containment::testing
