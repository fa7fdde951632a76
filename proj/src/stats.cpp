#include "motionlab/stats.hpp"

#include <cmath>

#include <json.hpp>

#include "motionlab/io_util.hpp"
#include "motionlab/rng.hpp"

namespace motionlab {

namespace {

// log|K| and a solver handle; throws SingularCovariance when K is not
// usable as a positive-definite covariance.
struct CovFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet;

  explicit CovFactor(const Eigen::MatrixXd& K) : llt(K) {
    if (llt.info() != Eigen::Success)
      throw SingularCovariance("covariance is not positive definite");
    logdet = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
    if (logdet < std::log(1e-300))
      throw SingularCovariance("covariance determinant underflows");
  }
};

void check_square(const Eigen::MatrixXd& K, int dim, const char* where) {
  if (K.rows() != dim || K.cols() != dim)
    throw DimensionMismatch(std::string(where) + ": covariance must be " + std::to_string(dim) +
                            "x" + std::to_string(dim));
}

Eigen::MatrixXd scatter_at(const Posture& mean, const std::vector<Posture>& samples) {
  const int dim = mean.coord_dim();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& y : samples) {
    const Eigen::VectorXd c = posture_coords(mean, y).coords;
    K.noalias() += c * c.transpose();
  }
  return K / static_cast<double>(samples.size());
}

}  // namespace

void WrappedNormal::validate() const {
  const int dim = mean.coord_dim();
  check_square(cov, dim, "WrappedNormal");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw DataError("WrappedNormal: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw DataError("WrappedNormal: covariance not positive semi-definite");
}

MapHyper MapHyper::defaults(const Posture& mu0, double k0_scale) {
  MapHyper h;
  h.lambda0_sq = 1.0;
  h.mu0 = mu0;
  const int dim = mu0.coord_dim();
  h.K0 = k0_scale * Eigen::MatrixXd::Identity(dim, dim);
  h.nu0 = dim + 2.0;
  return h;
}

double log_density(const TangentCoords& c, const Eigen::MatrixXd& K) {
  check_square(K, static_cast<int>(c.coords.size()), "log_density");
  if (!within_support(c.coords)) return -std::numeric_limits<double>::infinity();
  const CovFactor f(K);
  const double quad = c.coords.dot(f.llt.solve(c.coords));
  return -0.5 * f.logdet - 0.5 * quad;
}

Posture sample_wrapped(const Posture& mu, const Eigen::MatrixXd& K, std::uint64_t seed) {
  const int dim = mu.coord_dim();
  check_square(K, dim, "sample_wrapped");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw SingularCovariance("sample_wrapped: eigensolve failed");
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw SingularCovariance("sample_wrapped: covariance not positive semi-definite");
  Eigen::MatrixXd root = es.eigenvectors();
  for (int i = 0; i < dim; ++i) root.col(i) *= std::sqrt(std::max(es.eigenvalues()(i), 0.0));

  Rng rng(seed);
  Eigen::VectorXd z(dim);
  constexpr int kMaxAttempts = 10000;  // acceptance below 1e-4 means K does not fit the support
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (int i = 0; i < dim; ++i) z(i) = rng.normal();
    const Eigen::VectorXd c = root * z;
    if (within_support(c)) return posture_exp_coords(mu, c);
  }
  throw RejectionStall("sample_wrapped: acceptance rate below 1e-4; covariance too wide for support");
}

WrappedNormal fit_mle(const std::vector<Posture>& samples, int max_iter, double tol,
                      FitReport* report) {
  if (samples.empty()) throw EmptyWindowError("fit_mle: no samples");
  Posture mu = samples.front();
  const int dim = mu.coord_dim();
  FitReport rep;
  rep.converged = false;
  for (int j = 0; j < max_iter; ++j) {
    Eigen::VectorXd mean_c = Eigen::VectorXd::Zero(dim);
    for (const auto& y : samples) mean_c += posture_coords(mu, y).coords;
    mean_c /= static_cast<double>(samples.size());
    mu = posture_exp_coords(mu, mean_c);
    rep.residual = mean_c.norm();
    rep.iterations = j + 1;
    if (rep.residual <= tol) {
      rep.converged = true;
      break;
    }
  }
  if (report) *report = rep;
  return {mu, scatter_at(mu, samples)};
}

namespace {

void check_map_inputs(const std::vector<std::vector<Posture>>& data, const MapHyper& hyper) {
  if (data.empty() || data.front().empty()) throw EmptyWindowError("fit_map: no data");
  const std::size_t L = data.front().size();
  const int parts = data.front().front().size();
  for (const auto& row : data) {
    if (row.size() != L) throw DimensionMismatch("fit_map: ragged sample array");
    for (const auto& y : row)
      if (y.size() != parts) throw DimensionMismatch("fit_map: inconsistent part counts");
  }
  if (hyper.mu0.size() != parts) throw DimensionMismatch("fit_map: mu0 part count mismatch");
  const int dim = 2 * parts;
  check_square(hyper.K0, dim, "fit_map");
  if (!(hyper.lambda0_sq > 0.0)) throw DataError("fit_map: lambda0^2 must be positive");
  if (!(hyper.nu0 > dim - 1)) throw DataError("fit_map: nu0 must exceed 2(n-1)-1");
}

}  // namespace

double negative_log_posterior(const std::vector<std::vector<Posture>>& data,
                              const std::vector<Posture>& means,
                              const std::vector<Eigen::MatrixXd>& covs, const MapHyper& hyper) {
  check_map_inputs(data, hyper);
  const int M = static_cast<int>(data.size());
  const int L = static_cast<int>(data.front().size());
  const int parts = data.front().front().size();
  // divisor/exponent constant: M + nu0 + 2n - 1 with n = parts + 1 landmarks
  const double conc = M + hyper.nu0 + 2.0 * (parts + 1) - 1.0;

  double nlp = 0.0;
  for (int l = 0; l < L; ++l) {
    const CovFactor f(covs[l]);
    double quad = f.llt.solve(hyper.K0).trace();
    for (int m = 0; m < M; ++m) {
      const Eigen::VectorXd c = posture_coords(means[l], data[m][l]).coords;
      quad += c.dot(f.llt.solve(c));
    }
    nlp += 0.5 * (conc * f.logdet + quad);
    const Posture& left = l == 0 ? hyper.mu0 : means[l - 1];
    double d2 = 0.0;
    for (int i = 0; i < parts; ++i) {
      const double d = sphere_distance(means[l].parts[i], left.parts[i]);
      d2 += d * d;
    }
    nlp += d2 / (2.0 * hyper.lambda0_sq);
  }
  return nlp;
}

MotionDistribution fit_map(const std::vector<std::vector<Posture>>& data, const MapHyper& hyper,
                           int max_sweeps, double tol, MapFitReport* report) {
  check_map_inputs(data, hyper);
  const int M = static_cast<int>(data.size());
  const int L = static_cast<int>(data.front().size());
  const int parts = data.front().front().size();
  const int dim = 2 * parts;
  const double conc = M + hyper.nu0 + 2.0 * (parts + 1) - 1.0;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);

  // per-step MLE initialization; the covariance goes straight through the
  // posterior update so it is positive definite even with degenerate scatter
  std::vector<Posture> mu(L);
  std::vector<Eigen::MatrixXd> K(L);
  std::vector<Posture> column(M);
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m < M; ++m) column[m] = data[m][l];
    mu[l] = fit_mle(column).mean;
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 0; m < M; ++m) {
      const Eigen::VectorXd c = posture_coords(mu[l], data[m][l]).coords;
      scatter.noalias() += c * c.transpose();
    }
    K[l] = (scatter + hyper.K0) / conc;
  }

  MapFitReport rep;
  rep.objective_trace.push_back(negative_log_posterior(data, mu, K, hyper));

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double residual = 0.0;
    for (int l = 0; l < L; ++l) {
      const CovFactor f(K[l]);
      const Eigen::MatrixXd Kinv = f.llt.solve(eye);

      Eigen::VectorXd sum_c = Eigen::VectorXd::Zero(dim);
      for (int m = 0; m < M; ++m) sum_c += posture_coords(mu[l], data[m][l]).coords;

      const Posture& left = l == 0 ? hyper.mu0 : mu[l - 1];
      const bool has_right = l + 1 < L;
      Eigen::VectorXd prior_c = posture_coords(mu[l], left).coords;
      if (has_right) prior_c += posture_coords(mu[l], mu[l + 1]).coords;

      const double coupling = (has_right ? 2.0 : 1.0) / hyper.lambda0_sq;
      const Eigen::MatrixXd A = static_cast<double>(M) * Kinv + coupling * eye;
      const Eigen::VectorXd b = Kinv * sum_c + prior_c / hyper.lambda0_sq;
      const Eigen::VectorXd x = A.ldlt().solve(b);

      mu[l] = posture_exp_coords(mu[l], x);
      residual += x.norm();

      Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
      for (int m = 0; m < M; ++m) {
        const Eigen::VectorXd c = posture_coords(mu[l], data[m][l]).coords;
        scatter.noalias() += c * c.transpose();
      }
      K[l] = (scatter + hyper.K0) / conc;
    }
    rep.sweeps = sweep + 1;
    rep.final_residual = residual;
    rep.objective_trace.push_back(negative_log_posterior(data, mu, K, hyper));
    if (residual <= tol) {
      rep.converged = true;
      break;
    }
  }
  if (report) *report = rep;

  MotionDistribution out;
  out.grid.resize(L);
  for (int l = 0; l < L; ++l) out.grid[l] = L == 1 ? 0.0 : static_cast<double>(l) / (L - 1);
  out.hyper = hyper;
  out.steps.reserve(L);
  for (int l = 0; l < L; ++l) out.steps.push_back({mu[l], K[l]});
  return out;
}

std::string model_to_json(const MotionDistribution& model) {
  nlohmann::ordered_json j;
  j["n_parts"] = model.parts();
  j["L"] = model.length();
  j["grid"] = model.grid;
  nlohmann::ordered_json hyper;
  hyper["lambda0_sq"] = model.hyper.lambda0_sq;
  hyper["nu0"] = model.hyper.nu0;
  std::vector<std::vector<double>> mu0;
  for (const auto& p : model.hyper.mu0.parts) mu0.push_back({p.x(), p.y(), p.z()});
  hyper["mu0"] = mu0;
  std::vector<double> k0(model.hyper.K0.data(), model.hyper.K0.data() + model.hyper.K0.size());
  hyper["K0"] = k0;
  j["hyper"] = hyper;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : model.steps) {
    nlohmann::ordered_json step;
    std::vector<std::vector<double>> mean;
    for (const auto& p : s.mean.parts) mean.push_back({p.x(), p.y(), p.z()});
    step["mean"] = mean;
    // row-major covariance
    std::vector<double> cov;
    cov.reserve(s.cov.size());
    for (Eigen::Index r = 0; r < s.cov.rows(); ++r)
      for (Eigen::Index c = 0; c < s.cov.cols(); ++c) cov.push_back(s.cov(r, c));
    step["cov"] = cov;
    steps.push_back(step);
  }
  j["steps"] = steps;
  return j.dump(2) + "\n";
}

MotionDistribution model_from_json(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    MotionDistribution model;
    const int parts = j.at("n_parts").get<int>();
    const int L = j.at("L").get<int>();
    const int dim = 2 * parts;
    model.grid = j.at("grid").get<std::vector<double>>();
    const auto& hyper = j.at("hyper");
    model.hyper.lambda0_sq = hyper.at("lambda0_sq").get<double>();
    model.hyper.nu0 = hyper.at("nu0").get<double>();
    for (const auto& p : hyper.at("mu0"))
      model.hyper.mu0.parts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                                         p.at(2).get<double>());
    const auto k0 = hyper.at("K0").get<std::vector<double>>();
    if (static_cast<int>(k0.size()) != dim * dim) throw SchemaError(origin + ": bad K0 size");
    model.hyper.K0.resize(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) model.hyper.K0(r, c) = k0[r * dim + c];
    for (const auto& js : j.at("steps")) {
      WrappedNormal s;
      for (const auto& p : js.at("mean"))
        s.mean.parts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                                  p.at(2).get<double>());
      const auto cov = js.at("cov").get<std::vector<double>>();
      if (static_cast<int>(cov.size()) != dim * dim) throw SchemaError(origin + ": bad cov size");
      s.cov.resize(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) s.cov(r, c) = cov[r * dim + c];
      model.steps.push_back(std::move(s));
    }
    if (model.length() != L || static_cast<int>(model.grid.size()) != L)
      throw SchemaError(origin + ": step count mismatch");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

void save_model(const MotionDistribution& model, const std::string& path) {
  write_text_file(path, model_to_json(model));
}

MotionDistribution load_model(const std::string& path) {
  return model_from_json(read_text_file(path), path);
}

}  // namespace motionlab
