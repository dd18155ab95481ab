#pragma once

#include <Eigen/Dense>

namespace containment {

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant (Higham 2005 parameters). Accurate to roughly unit roundoff
/// times the condition of the problem for the small matrices used here.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& a);

double spectral_radius(const Eigen::MatrixXd& a);

/// Numerical rank of a complex matrix via column-pivoting QR with relative
/// threshold `tol`.
int numerical_rank(const Eigen::MatrixXcd& a, double tol);

}  // namespace containment
