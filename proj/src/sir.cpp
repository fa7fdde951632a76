#include "motionlab/sir.hpp"

#include <cmath>

namespace motionlab {

int SIRResult::suggest_count(const std::vector<double>& eigenvalues, double fraction) {
  double total = 0.0;
  for (double v : eigenvalues) total += v;
  if (total <= 0.0) return 1;
  double acc = 0.0;
  for (std::size_t b = 0; b < eigenvalues.size(); ++b) {
    acc += eigenvalues[b];
    if (acc >= fraction * total) return static_cast<int>(b) + 1;
  }
  return static_cast<int>(eigenvalues.size());
}

Eigen::VectorXd conditional_expectation(const std::vector<CoordRatePair>& pairs, double r_star,
                                        double bandwidth, Kernel kernel) {
  if (pairs.empty()) throw EmptyWindowError("conditional_expectation: no pairs");
  const Eigen::Index dim = pairs.front().coords.size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  double wsum = 0.0;
  for (const auto& p : pairs) {
    if (p.coords.size() != dim)
      throw DimensionMismatch("conditional_expectation: inconsistent coordinate dimensions");
    const double w = kernel_weight(kernel, std::abs(r_star - p.rate), bandwidth);
    acc += w * p.coords;
    wsum += w;
  }
  if (wsum < 1e-300)
    throw EmptyWindowError("conditional_expectation: all kernel weights vanish at r = " +
                           std::to_string(r_star));
  return acc / wsum;
}

SIRResult sir_directions(const std::vector<CoordRatePair>& pairs, int B, double bandwidth,
                         const Eigen::MatrixXd& K_t, double ridge, Kernel kernel, bool center) {
  const int M = static_cast<int>(pairs.size());
  if (B < 1) throw DataError("sir_directions: B must be >= 1");
  if (M <= B) throw DataError("sir_directions: need more pairs than directions");
  const Eigen::Index dim = pairs.front().coords.size();
  if (dim < B) throw DataError("sir_directions: coordinate dimension below B");
  if (K_t.rows() != dim || K_t.cols() != dim)
    throw DimensionMismatch("sir_directions: K_t dimension mismatch");

  std::vector<Eigen::VectorXd> cond;
  cond.reserve(M);
  for (const auto& p : pairs)
    cond.push_back(conditional_expectation(pairs, p.rate, bandwidth, kernel));

  if (center) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& e : cond) mean += e;
    mean /= static_cast<double>(M);
    for (auto& e : cond) e -= mean;
  }

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& e : cond) C.noalias() += e * e.transpose();
  C /= static_cast<double>(M);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw NumericalError("sir_directions: eigensolve failed");

  // eigenvalues ascending from Eigen; count the usable ones
  int usable = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (es.eigenvalues()(i) > 1e-12) ++usable;
  if (usable < B)
    throw RankDeficient("sir_directions: only " + std::to_string(usable) +
                        " eigenvalues above 1e-12, need " + std::to_string(B));

  const double eff_ridge = ridge > 0.0 ? ridge : 1e-6 * K_t.trace() / static_cast<double>(dim);
  const Eigen::MatrixXd K_reg =
      K_t + eff_ridge * Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::LDLT<Eigen::MatrixXd> solver(K_reg);
  if (solver.info() != Eigen::Success)
    throw SingularCovariance("sir_directions: regularized K_t not factorizable");

  SIRResult out;
  out.mean_cov = K_t;
  for (int b = 0; b < B; ++b) {
    const Eigen::Index idx = dim - 1 - b;  // descending order
    out.eigenvalues.push_back(std::max(es.eigenvalues()(idx), 0.0));
    Eigen::VectorXd beta = solver.solve(es.eigenvectors().col(idx));
    const double scale = (K_t * beta).norm();
    if (scale > 0.0) beta /= scale;
    out.directions.push_back(beta);
  }
  return out;
}

Eigen::VectorXd sequence_coords(const PostureSequence& seq, int l0, int l1,
                                const MotionDistribution& model) {
  seq.validate();
  if (l0 < 0 || l1 >= seq.length() || l0 > l1)
    throw BadInterval("sequence_coords: window [" + std::to_string(l0) + ", " +
                      std::to_string(l1) + "] outside grid");
  if (model.length() != seq.length())
    throw GridMismatch("sequence_coords: model and sequence grids differ");
  const int dim = 2 * seq.parts();
  Eigen::VectorXd out((l1 - l0 + 1) * dim);
  for (int l = l0; l <= l1; ++l)
    out.segment((l - l0) * dim, dim) = posture_coords(model.steps[l].mean, seq.postures[l]).coords;
  return out;
}

Eigen::VectorXd project_features(const Eigen::VectorXd& coords, const SIRResult& result) {
  Eigen::VectorXd z(result.count());
  for (int b = 0; b < result.count(); ++b) {
    if (result.directions[b].size() != coords.size())
      throw DimensionMismatch("project_features: coordinate dimension mismatch");
    z(b) = result.directions[b].dot(coords);
  }
  return z;
}

std::vector<Posture> reconstruct_from_features(const Eigen::VectorXd& features,
                                               const SIRResult& result,
                                               const std::vector<Posture>& means) {
  const int B = result.count();
  if (features.size() != B) throw DimensionMismatch("reconstruct_from_features: feature count");
  if (B == 0 || means.empty()) throw DataError("reconstruct_from_features: empty inputs");
  if (!features.allFinite()) throw DataError("reconstruct_from_features: non-finite features");
  const Eigen::Index dim = result.directions.front().size();
  const int per_step = 2 * means.front().size();
  if (static_cast<Eigen::Index>(per_step) * static_cast<Eigen::Index>(means.size()) != dim)
    throw DimensionMismatch("reconstruct_from_features: means do not match direction dimension");

  Eigen::MatrixXd D(dim, B);
  for (int b = 0; b < B; ++b) D.col(b) = result.directions[b];
  const Eigen::MatrixXd gram = D.transpose() * D;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible())
    throw RankDeficient("reconstruct_from_features: projection directions are rank deficient");
  const Eigen::VectorXd c = D * lu.solve(features);

  std::vector<Posture> out;
  out.reserve(means.size());
  for (std::size_t s = 0; s < means.size(); ++s)
    out.push_back(posture_exp_coords(means[s], c.segment(s * per_step, per_step)));
  return out;
}

}  // namespace motionlab
