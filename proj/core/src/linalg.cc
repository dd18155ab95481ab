#include "containment/linalg.h"

#include <algorithm>
#include <array>
#include <cmath>

namespace containment {
namespace {

using Eigen::MatrixXd;

double one_norm(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade numerator/denominator pieces: exp(A) ~ (V - U)^{-1} (V + U).
template <std::size_t K>
void pade_low(const MatrixXd& a, const std::array<double, K>& b, MatrixXd& u, MatrixXd& v) {
  const auto n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  MatrixXd power = ident;
  MatrixXd odd = MatrixXd::Zero(n, n);
  MatrixXd even = MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k + 1 < K; k += 2) {
    even += b[k] * power;
    odd += b[k + 1] * power;
    power = power * a2;
  }
  u = a * odd;
  v = even;
}

void pade13(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const auto n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
  u = a * (a6 * inner_u + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  const MatrixXd inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = a6 * inner_v + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
}

}  // namespace

MatrixXd expm(const MatrixXd& a) {
  const auto n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (n == 0) return a;

  static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                               25200.0,    1512.0,    56.0,      1.0};
  static constexpr std::array<double, 10> b9 = {
      17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
      2162160.0,     110880.0,     3960.0,       90.0,        1.0};

  const double norm = one_norm(a);
  MatrixXd u;
  MatrixXd v;
  int squarings = 0;
  if (norm <= 1.495585217958292e-2) {
    pade_low(a, b3, u, v);
  } else if (norm <= 2.539398330063230e-1) {
    pade_low(a, b5, u, v);
  } else if (norm <= 9.504178996162932e-1) {
    pade_low(a, b7, u, v);
  } else if (norm <= 2.097847961257068) {
    pade_low(a, b9, u, v);
  } else {
    constexpr double theta13 = 5.371920351148152;
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    pade13(a / std::ldexp(1.0, squarings), u, v);
  }
  MatrixXd result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

Eigen::VectorXcd eigenvalues(const MatrixXd& a) {
  if (a.rows() == 0) return Eigen::VectorXcd();
  Eigen::EigenSolver<MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues();
}

double spectral_radius(const MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  return eigenvalues(a).cwiseAbs().maxCoeff();
}

int numerical_rank(const Eigen::MatrixXcd& a, double tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

}  // namespace containment
