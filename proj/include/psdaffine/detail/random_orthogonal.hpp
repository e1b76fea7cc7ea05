#ifndef PSDAFFINE_DETAIL_RANDOM_ORTHOGONAL_HPP
#define PSDAFFINE_DETAIL_RANDOM_ORTHOGONAL_HPP

#include <random>

namespace psdaffine {

template <class Rng>
MatrixXd random_orthogonal(int d, Rng& rng) {
  std::normal_distribution<double> n01;
  MatrixXd g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = n01(rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace psdaffine

#endif  // PSDAFFINE_DETAIL_RANDOM_ORTHOGONAL_HPP
