#include "motionlab/workflows.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "motionlab/io_util.hpp"
#include "motionlab/rng.hpp"

namespace motionlab {

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(jobs, n);
  pool.reserve(count);
  for (int j = 0; j < count; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Posture random_posture(Rng& rng, int parts) {
  std::vector<SpherePoint> p;
  p.reserve(parts);
  for (int i = 0; i < parts; ++i) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    while (v.norm() < 1e-6) v = Vec3(rng.normal(), rng.normal(), rng.normal());
    p.emplace_back(v);
  }
  return Posture(std::move(p));
}

Posture perturb_posture(Rng& rng, const Posture& base, double step_rad) {
  Eigen::VectorXd c(base.coord_dim());
  for (int i = 0; i < base.size(); ++i) {
    double a = rng.normal() * step_rad / std::sqrt(2.0);
    double b = rng.normal() * step_rad / std::sqrt(2.0);
    const double n = std::hypot(a, b);
    if (n > 1.3) {  // keep waypoints clear of the injectivity boundary
      a *= 1.3 / n;
      b *= 1.3 / n;
    }
    c(2 * i) = a;
    c(2 * i + 1) = b;
  }
  return posture_exp_coords(base, c);
}

// gamma(t) = t + sum_j a_j sin(j pi t) / (j pi); coefficients scaled so the
// derivative stays above 0.15
std::array<double, 3> random_warp_coeffs(Rng& rng, double strength) {
  std::array<double, 3> a{};
  double sum_abs = 0.0;
  for (auto& v : a) {
    v = rng.uniform(-1.0, 1.0) * strength;
    sum_abs += std::abs(v);
  }
  if (sum_abs > 0.85)
    for (auto& v : a) v *= 0.85 / sum_abs;
  return a;
}

double eval_warp(const std::array<double, 3>& a, double t) {
  double g = t;
  for (int j = 0; j < 3; ++j) g += a[j] * std::sin((j + 1) * M_PI * t) / ((j + 1) * M_PI);
  return g;
}

}  // namespace

void DatasetSpec::validate() const {
  if (classes.empty()) throw DataError("dataset spec: no classes");
  if (per_class < 1) throw DataError("dataset spec: per_class must be >= 1");
  if (n_parts < 1) throw DataError("dataset spec: n_parts must be >= 1");
  if (frames_per_seq < 2) throw DataError("dataset spec: frames_per_seq must be >= 2");
  if (!(warp_strength >= 0.0) || !std::isfinite(warp_strength))
    throw DataError("dataset spec: bad warp_strength");
  if (!(noise_k_scale >= 0.0) || !std::isfinite(noise_k_scale))
    throw DataError("dataset spec: bad noise_k_scale");
  for (const auto& c : classes) {
    if (c.label.empty()) throw DataError("dataset spec: empty class label");
    if (c.waypoints < 2) throw DataError("dataset spec: waypoints must be >= 2");
    if (!(c.step_rad > 0.0)) throw DataError("dataset spec: step_rad must be positive");
    if (!(c.base_duration > 0.0)) throw DataError("dataset spec: base_duration must be positive");
    if (c.duration_jitter < 0.0) throw DataError("dataset spec: duration_jitter must be >= 0");
  }
}

DatasetSpec dataset_spec_from_json(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    DatasetSpec spec;
    spec.per_class = j.at("per_class").get<int>();
    spec.n_parts = j.at("n_parts").get<int>();
    spec.frames_per_seq = j.at("frames_per_seq").get<int>();
    spec.warp_strength = j.at("warp_strength").get<double>();
    spec.noise_k_scale = j.at("noise_k_scale").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jc : j.at("classes")) {
      ClassSpec c;
      c.label = jc.at("label").get<std::string>();
      if (jc.contains("waypoints")) c.waypoints = jc.at("waypoints").get<int>();
      if (jc.contains("step_rad")) c.step_rad = jc.at("step_rad").get<double>();
      if (jc.contains("base_duration")) c.base_duration = jc.at("base_duration").get<double>();
      if (jc.contains("duration_jitter"))
        c.duration_jitter = jc.at("duration_jitter").get<double>();
      spec.classes.push_back(std::move(c));
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

std::string dataset_spec_to_json(const DatasetSpec& spec) {
  nlohmann::ordered_json j;
  j["per_class"] = spec.per_class;
  j["n_parts"] = spec.n_parts;
  j["frames_per_seq"] = spec.frames_per_seq;
  j["warp_strength"] = spec.warp_strength;
  j["noise_k_scale"] = spec.noise_k_scale;
  j["seed"] = spec.seed;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : spec.classes) {
    nlohmann::ordered_json jc;
    jc["label"] = c.label;
    jc["waypoints"] = c.waypoints;
    jc["step_rad"] = c.step_rad;
    jc["base_duration"] = c.base_duration;
    jc["duration_jitter"] = c.duration_jitter;
    j["classes"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

DatasetSpec load_dataset_spec(const std::string& path) {
  return dataset_spec_from_json(read_text_file(path), path);
}

PostureSequence synthesize_template(const DatasetSpec& spec, int class_index) {
  spec.validate();
  if (class_index < 0 || class_index >= static_cast<int>(spec.classes.size()))
    throw DataError("synthesize_template: class index out of range");
  const ClassSpec& cls = spec.classes[class_index];
  Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(class_index), 101));

  std::vector<Posture> waypoints;
  waypoints.push_back(random_posture(rng, spec.n_parts));
  for (int w = 1; w < cls.waypoints; ++w)
    waypoints.push_back(perturb_posture(rng, waypoints.back(), cls.step_rad));

  PostureSequence out;
  out.grid = PostureSequence::uniform(spec.frames_per_seq);
  out.duration_U = cls.base_duration;
  out.label = cls.label;
  out.postures.reserve(spec.frames_per_seq);
  const int segs = cls.waypoints - 1;
  for (double t : out.grid) {
    const double u = std::min(t * segs, static_cast<double>(segs) - 1e-12);
    const int w = static_cast<int>(u);
    const double s = u - w;
    Posture p;
    p.parts.reserve(spec.n_parts);
    for (int i = 0; i < spec.n_parts; ++i)
      p.parts.push_back(sphere_geodesic(waypoints[w].parts[i], waypoints[w + 1].parts[i], s));
    out.postures.push_back(std::move(p));
  }
  return out;
}

std::vector<SkeletonSequence> synthesize_dataset(const DatasetSpec& spec) {
  spec.validate();
  const Hierarchy h = Hierarchy::chain(spec.n_parts + 1);
  const Eigen::MatrixXd noise_cov =
      spec.noise_k_scale * Eigen::MatrixXd::Identity(2 * spec.n_parts, 2 * spec.n_parts);

  std::vector<SkeletonSequence> out;
  out.reserve(spec.classes.size() * spec.per_class);
  for (int k = 0; k < static_cast<int>(spec.classes.size()); ++k) {
    const PostureSequence templ = synthesize_template(spec, k);
    for (int idx = 0; idx < spec.per_class; ++idx) {
      const std::uint64_t inst = mix_seed(spec.seed, static_cast<std::uint64_t>(k),
                                          1000 + static_cast<std::uint64_t>(idx));
      Rng rng(inst);
      const auto warp = random_warp_coeffs(rng, spec.warp_strength);
      const double duration =
          spec.classes[k].base_duration * std::exp(spec.classes[k].duration_jitter * rng.normal());
      std::vector<double> lengths(spec.n_parts);
      for (auto& len : lengths) len = rng.uniform(0.5, 1.5);
      const Vec3 root(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));

      SkeletonSequence seq;
      seq.hierarchy = h;
      seq.label = spec.classes[k].label;
      seq.frames.reserve(spec.frames_per_seq);
      for (int l = 0; l < spec.frames_per_seq; ++l) {
        const double t = templ.grid[l];
        Posture p = sequence_at(templ, eval_warp(warp, t));
        if (spec.noise_k_scale > 0.0)
          p = sample_wrapped(p, noise_cov, mix_seed(inst, static_cast<std::uint64_t>(l)));
        seq.frames.push_back(posture_to_skeleton(p, h, lengths, root, t * duration));
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

Eigen::MatrixXd pairwise_distances(const std::vector<LabeledSequence>& seqs, const Posture& y_r,
                                   int dp_grid, int jobs) {
  const int k = static_cast<int>(seqs.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(k, k);
  std::vector<std::pair<int, int>> tasks;
  tasks.reserve(static_cast<std::size_t>(k) * (k - 1));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) tasks.emplace_back(i, j);
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int t) {
    const auto [i, j] = tasks[t];
    dist(i, j) = motion_distance(seqs[i].seq, seqs[j].seq, y_r, dp_grid);
  });
  return dist;
}

ClassifyResult classify_1nn(const std::vector<LabeledSequence>& train,
                            const std::vector<LabeledSequence>& test, const Posture& y_r,
                            int dp_grid, int jobs) {
  if (train.empty()) throw DataError("classify_1nn: empty training set");
  const int nt = static_cast<int>(test.size());
  const int nr = static_cast<int>(train.size());
  Eigen::MatrixXd dist(nt, nr);
  std::vector<std::pair<int, int>> tasks;
  tasks.reserve(static_cast<std::size_t>(nt) * nr);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nr; ++j) tasks.emplace_back(i, j);
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int t) {
    const auto [i, j] = tasks[t];
    dist(i, j) = motion_distance(test[i].seq, train[j].seq, y_r, dp_grid);
  });

  ClassifyResult out;
  out.predicted.reserve(nt);
  out.nearest_index.reserve(nt);
  int correct = 0;
  for (int i = 0; i < nt; ++i) {
    int best = 0;
    for (int j = 1; j < nr; ++j)
      if (dist(i, j) < dist(i, best)) best = j;
    out.nearest_index.push_back(best);
    out.predicted.push_back(train[best].label);
    if (train[best].label == test[i].label) ++correct;
  }
  out.accuracy = nt == 0 ? 0.0 : static_cast<double>(correct) / nt;
  return out;
}

void split_train_test(const std::vector<LabeledSequence>& all, double train_fraction,
                      std::uint64_t seed, std::vector<LabeledSequence>* train,
                      std::vector<LabeledSequence>* test) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("split_train_test: fraction must be in (0, 1)");
  const int n = static_cast<int>(all.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x51174c5ULL));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  const int n_train = std::max(1, std::min(n - 1, static_cast<int>(std::lround(train_fraction * n))));
  train->clear();
  test->clear();
  for (int i = 0; i < n; ++i)
    (i < n_train ? train : test)->push_back(all[order[i]]);
}

RateAnalysis rate_analysis(const std::vector<LabeledSequence>& sequences,
                           const PostureSequence& reference, int dp_grid, int L, double bandwidth,
                           const std::optional<Posture>& y_r, int jobs) {
  RateAnalysis out;
  out.reference = resample_sequence(reference, L, bandwidth);
  out.reference_posture = y_r ? *y_r : karcher_mean(out.reference.postures);
  out.ref_duration = out.reference.duration_U;
  const int m = static_cast<int>(sequences.size());
  out.ids.resize(m);
  out.warps.resize(m);
  out.rates.resize(m);
  out.durations.resize(m);
  parallel_for(m, jobs, [&](int i) {
    const PostureSequence res = resample_sequence(sequences[i].seq, L, bandwidth);
    const AlignmentResult a = align_sequences(res, out.reference, out.reference_posture, dp_grid);
    out.ids[i] = sequences[i].id;
    out.warps[i] = a.gamma;
    out.durations[i] = res.duration_U;
    out.rates[i] = rate_from_warping(a.gamma, res.duration_U, out.ref_duration);
  });
  return out;
}

namespace {

const std::vector<double>& common_grid(const std::vector<RateFunction>& rates) {
  if (rates.empty()) throw DataError("rate functions: empty collection");
  const auto& g = rates.front().grid;
  for (const auto& r : rates) {
    if (r.grid.size() != g.size() || r.values.size() != g.size())
      throw GridMismatch("rate functions: grids differ");
    for (std::size_t l = 0; l < g.size(); ++l)
      if (std::abs(r.grid[l] - g[l]) > 1e-12) throw GridMismatch("rate functions: grids differ");
  }
  return g;
}

BottleneckReport bottleneck_from_column_sums(const std::vector<double>& grid,
                                             const std::vector<double>& col, double delta) {
  if (!(delta > 0.0)) throw DataError("find_bottleneck: delta must be positive");
  BottleneckReport rep;
  rep.delta = delta;
  rep.grid = grid;
  rep.window_scores.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < grid.size(); ++l)
      if (std::abs(grid[l] - grid[i]) < delta) s += col[l];
    rep.window_scores[i] = s;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (rep.window_scores[i] < rep.window_scores[best]) best = i;
  rep.t_star = grid[best];
  rep.score = rep.window_scores[best];
  return rep;
}

}  // namespace

BottleneckReport find_bottleneck(const std::vector<RateFunction>& rates, double delta) {
  const auto& grid = common_grid(rates);
  std::vector<double> col(grid.size(), 0.0);
  for (const auto& r : rates)
    for (std::size_t l = 0; l < grid.size(); ++l) col[l] += std::min(0.0, r.values[l]);
  return bottleneck_from_column_sums(grid, col, delta);
}

BottleneckReport find_bottleneck_printed(const std::vector<Warping>& warps, double delta) {
  if (warps.empty()) throw DataError("find_bottleneck_printed: empty collection");
  const auto& grid = warps.front().grid;
  std::vector<double> col(grid.size(), 0.0);
  for (const auto& w : warps) {
    if (w.grid.size() != grid.size())
      throw GridMismatch("find_bottleneck_printed: grids differ");
    for (std::size_t l = 0; l < grid.size(); ++l) col[l] += std::min(0.0, w.values[l]);
  }
  return bottleneck_from_column_sums(grid, col, delta);
}

namespace {

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double x = p * (v.size() - 1);
  const std::size_t k = static_cast<std::size_t>(x);
  if (k + 1 >= v.size()) return v.back();
  const double s = x - k;
  return v[k] + s * (v[k + 1] - v[k]);
}

}  // namespace

BestPracticeReport best_practice(const std::vector<PostureSequence>& aligned,
                                 const std::vector<RateFunction>& rates,
                                 const MotionDistribution& model, double t_star, double delta,
                                 int B, double bandwidth) {
  if (aligned.empty() || aligned.size() != rates.size())
    throw DataError("best_practice: sequences/rates size mismatch");
  const int M = static_cast<int>(aligned.size());
  const int L = model.length();

  int lo = -1, hi = -1;
  for (int l = 0; l < L; ++l) {
    if (std::abs(model.grid[l] - t_star) < delta) {
      if (lo < 0) lo = l;
      hi = l;
    }
  }
  if (lo < 0 || hi - lo + 1 < 2)
    throw BadInterval("best_practice: window around t* covers fewer than 2 grid steps");

  BestPracticeReport rep;
  rep.window_lo = lo;
  rep.window_hi = hi;
  for (int l = lo; l <= hi; ++l) rep.window_means.push_back(model.steps[l].mean);

  const double s = model.grid[lo];
  const double t = model.grid[hi];
  rep.window_rates.resize(M);
  std::vector<CoordRatePair> pairs(M);
  for (int m = 0; m < M; ++m) {
    pairs[m].coords = sequence_coords(aligned[m], lo, hi, model);
    pairs[m].rate = cumulative_rate(rates[m], s, t);
    rep.window_rates[m] = pairs[m].rate;
  }

  double mean_r = 0.0, var_r = 0.0;
  for (double r : rep.window_rates) mean_r += r;
  mean_r /= M;
  for (double r : rep.window_rates) var_r += (r - mean_r) * (r - mean_r);
  var_r /= M;

  if (var_r < 1e-16) {
    rep.degenerate = true;
    rep.recon_low = rep.recon_mid = rep.recon_high = rep.window_means;
    return rep;
  }

  const double h =
      bandwidth > 0.0 ? bandwidth : std::max(1e-8, 1.06 * std::sqrt(var_r) * std::pow(M, -0.2));

  const int steps = hi - lo + 1;
  const int dim = 2 * model.parts();
  Eigen::MatrixXd K_t = Eigen::MatrixXd::Zero(steps * dim, steps * dim);
  for (int w = 0; w < steps; ++w)
    K_t.block(w * dim, w * dim, dim, dim) = model.steps[lo + w].cov;

  rep.sir = sir_directions(pairs, B, h, K_t);

  rep.features.resize(M, B);
  for (int m = 0; m < M; ++m) rep.features.row(m) = project_features(pairs[m].coords, rep.sir);

  // ordinary least squares: rate ~ w0 + w' features
  Eigen::MatrixXd X(M, B + 1);
  X.col(0).setOnes();
  X.rightCols(B) = rep.features;
  const Eigen::VectorXd r_vec =
      Eigen::Map<const Eigen::VectorXd>(rep.window_rates.data(), M);
  rep.ols = (X.transpose() * X).ldlt().solve(X.transpose() * r_vec);

  const Eigen::VectorXd w_z = rep.ols.tail(B);
  const Eigen::VectorXd z_bar = rep.features.colwise().mean().transpose();
  const double w_norm2 = w_z.squaredNorm();
  const auto target_features = [&](double rho) -> Eigen::VectorXd {
    if (w_norm2 < 1e-16) return z_bar;
    const double fitted = rep.ols(0) + w_z.dot(z_bar);
    return z_bar + w_z * ((rho - fitted) / w_norm2);
  };

  rep.recon_low = reconstruct_from_features(target_features(quantile(rep.window_rates, 0.10)),
                                            rep.sir, rep.window_means);
  rep.recon_mid = reconstruct_from_features(target_features(quantile(rep.window_rates, 0.50)),
                                            rep.sir, rep.window_means);
  rep.recon_high = reconstruct_from_features(target_features(quantile(rep.window_rates, 0.90)),
                                             rep.sir, rep.window_means);
  return rep;
}

MotionVariation motion_variation(const MotionDistribution& model, int step,
                                 const std::vector<double>& s_values, int n_eigs) {
  if (step < 0 || step >= model.length())
    throw BadInterval("motion_variation: step index out of range");
  const auto& wn = model.steps[step];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wn.cov);
  if (es.info() != Eigen::Success) throw NumericalError("motion_variation: eigensolve failed");
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw SingularCovariance("motion_variation: covariance not positive semi-definite");

  const int dim = static_cast<int>(wn.cov.rows());
  const int count = std::min(n_eigs, dim);
  MotionVariation out;
  out.step = step;
  out.s_values = s_values;
  double trace = 0.0;
  for (int i = 0; i < dim; ++i) trace += std::max(es.eigenvalues()(i), 0.0);
  for (int e = 0; e < dim; ++e)
    out.eigenvalues.push_back(std::max(es.eigenvalues()(dim - 1 - e), 0.0));
  for (int e = 0; e < count; ++e) {
    out.explained_ratio.push_back(trace > 0.0 ? out.eigenvalues[e] / trace : 0.0);
    const Eigen::VectorXd v = es.eigenvectors().col(dim - 1 - e);
    std::vector<Posture> row;
    row.reserve(s_values.size());
    for (double s : s_values) row.push_back(posture_exp_coords(wn.mean, s * v));
    out.postures.push_back(std::move(row));
  }
  return out;
}

PostureSequence restandardize(const PostureSequence& reference, const RateFunction& mean_rate) {
  reference.validate();
  const double log_total = cumulative_rate(mean_rate, 0.0, 1.0);
  const double total = std::exp(log_total);

  PostureSequence out;
  out.grid = reference.grid;
  out.label = reference.label;
  out.duration_U = reference.duration_U * total;
  out.postures.reserve(reference.length());
  for (int l = 0; l < reference.length(); ++l) {
    const double t = reference.grid[l];
    double g;
    if (l == 0)
      g = 0.0;
    else if (l == reference.length() - 1)
      g = 1.0;
    else
      g = std::exp(cumulative_rate(mean_rate, 0.0, t) - log_total);
    out.postures.push_back(sequence_at(reference, g));
  }
  return out;
}

RateFunction mean_rate_function(const std::vector<RateFunction>& rates) {
  const auto& grid = common_grid(rates);
  RateFunction mean;
  mean.grid = grid;
  mean.values.assign(grid.size(), 0.0);
  for (const auto& r : rates)
    for (std::size_t l = 0; l < grid.size(); ++l) mean.values[l] += r.values[l];
  for (auto& v : mean.values) v /= static_cast<double>(rates.size());
  return mean;
}

// ---------------------------------------------------------------- reports

void write_alignment_csv(const std::string& path, const Warping& gamma, const RateFunction& rate,
                         double u_moving, double u_ref) {
  CsvWriter csv(path, {"t", "gamma", "delta", "rate"});
  const double ratio = u_moving / u_ref;
  for (std::size_t l = 0; l < gamma.grid.size(); ++l)
    csv.row({CsvWriter::cell(gamma.grid[l]), CsvWriter::cell(gamma.values[l]),
             CsvWriter::cell(ratio * gamma.values[l]), CsvWriter::cell(rate.values[l])});
}

void write_rates_csv(const std::string& path, const RateAnalysis& analysis) {
  CsvWriter csv(path, {"seq", "t", "gamma", "delta", "rate"});
  for (std::size_t m = 0; m < analysis.warps.size(); ++m) {
    const double ratio = analysis.durations[m] / analysis.ref_duration;
    const auto& w = analysis.warps[m];
    for (std::size_t l = 0; l < w.grid.size(); ++l)
      csv.row({analysis.ids[m], CsvWriter::cell(w.grid[l]), CsvWriter::cell(w.values[l]),
               CsvWriter::cell(ratio * w.values[l]),
               CsvWriter::cell(analysis.rates[m].values[l])});
  }
}

void write_durations_csv(const std::string& path, const RateAnalysis& analysis) {
  CsvWriter csv(path, {"seq", "duration"});
  csv.row({"__reference__", CsvWriter::cell(analysis.ref_duration)});
  for (std::size_t m = 0; m < analysis.ids.size(); ++m)
    csv.row({analysis.ids[m], CsvWriter::cell(analysis.durations[m])});
}

void write_distance_csv(const std::string& path, const std::vector<LabeledSequence>& seqs,
                        const Eigen::MatrixXd& dist) {
  std::vector<std::string> header{"seq"};
  for (const auto& s : seqs) header.push_back(s.id);
  CsvWriter csv(path, header);
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    std::vector<std::string> row{seqs[i].id};
    for (Eigen::Index j = 0; j < dist.cols(); ++j) row.push_back(CsvWriter::cell(dist(i, j)));
    csv.row(row);
  }
}

void write_band_csv(const std::string& path, const RateBand& band) {
  CsvWriter csv(path, {"t", "mean", "lower", "upper"});
  for (std::size_t l = 0; l < band.grid.size(); ++l)
    csv.row({CsvWriter::cell(band.grid[l]), CsvWriter::cell(band.mean[l]),
             CsvWriter::cell(band.lower[l]), CsvWriter::cell(band.upper[l])});
}

void write_bottleneck_files(const std::string& json_path, const std::string& csv_path,
                            const BottleneckReport& report) {
  nlohmann::ordered_json j;
  j["t_star"] = report.t_star;
  j["delta"] = report.delta;
  j["score"] = report.score;
  write_text_file(json_path, j.dump(2) + "\n");
  CsvWriter csv(csv_path, {"t", "score"});
  for (std::size_t l = 0; l < report.grid.size(); ++l)
    csv.row({CsvWriter::cell(report.grid[l]), CsvWriter::cell(report.window_scores[l])});
}

void write_feature_csv(const std::string& path, const Eigen::MatrixXd& features,
                       const std::vector<double>& rates) {
  std::vector<std::string> header;
  for (Eigen::Index b = 0; b < features.cols(); ++b)
    header.push_back("feature_" + std::to_string(b + 1));
  header.push_back("rate");
  CsvWriter csv(path, header);
  for (Eigen::Index m = 0; m < features.rows(); ++m) {
    std::vector<std::string> row;
    for (Eigen::Index b = 0; b < features.cols(); ++b)
      row.push_back(CsvWriter::cell(features(m, b)));
    row.push_back(CsvWriter::cell(rates[static_cast<std::size_t>(m)]));
    csv.row(row);
  }
}

std::string sir_to_json(const SIRResult& result) {
  nlohmann::ordered_json j;
  j["dim"] = result.directions.empty() ? 0 : static_cast<int>(result.directions.front().size());
  j["B"] = result.count();
  j["eigenvalues"] = result.eigenvalues;
  j["directions"] = nlohmann::ordered_json::array();
  for (const auto& d : result.directions)
    j["directions"].push_back(std::vector<double>(d.data(), d.data() + d.size()));
  std::vector<double> cov;
  cov.reserve(result.mean_cov.size());
  for (Eigen::Index r = 0; r < result.mean_cov.rows(); ++r)
    for (Eigen::Index c = 0; c < result.mean_cov.cols(); ++c) cov.push_back(result.mean_cov(r, c));
  j["mean_cov"] = cov;
  return j.dump(2) + "\n";
}

namespace {

nlohmann::ordered_json postures_to_json(const std::vector<Posture>& postures) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : postures) {
    nlohmann::ordered_json jp = nlohmann::ordered_json::array();
    for (const auto& part : p.parts) jp.push_back({part.x(), part.y(), part.z()});
    arr.push_back(jp);
  }
  return arr;
}

}  // namespace

void write_variation_json(const std::string& path, const MotionVariation& variation) {
  nlohmann::ordered_json j;
  j["step"] = variation.step;
  j["eigenvalues"] = variation.eigenvalues;
  j["explained_ratio"] = variation.explained_ratio;
  j["s_values"] = variation.s_values;
  j["postures"] = nlohmann::ordered_json::array();
  for (const auto& row : variation.postures) j["postures"].push_back(postures_to_json(row));
  write_text_file(path, j.dump(2) + "\n");
}

void write_best_practice_json(const std::string& path, const BestPracticeReport& report,
                              const std::vector<double>& grid) {
  nlohmann::ordered_json j;
  j["window_lo"] = report.window_lo;
  j["window_hi"] = report.window_hi;
  j["window_t"] = {grid[report.window_lo], grid[report.window_hi]};
  j["degenerate"] = report.degenerate;
  j["eigenvalues"] = report.sir.eigenvalues;
  j["ols"] = std::vector<double>(report.ols.data(), report.ols.data() + report.ols.size());
  j["window_rates"] = report.window_rates;
  j["recon_low"] = postures_to_json(report.recon_low);
  j["recon_mid"] = postures_to_json(report.recon_mid);
  j["recon_high"] = postures_to_json(report.recon_high);
  write_text_file(path, j.dump(2) + "\n");
}

std::string posture_sequence_to_json(const PostureSequence& seq) {
  seq.validate();
  std::ostringstream out;
  out << "{\"n_parts\": " << seq.parts() << ", \"duration\": " << format_double(seq.duration_U)
      << ", \"label\": ";
  if (seq.label)
    out << nlohmann::json(*seq.label).dump();
  else
    out << "null";
  out << ", \"grid\": [";
  for (std::size_t l = 0; l < seq.grid.size(); ++l) {
    if (l) out << ", ";
    out << format_double(seq.grid[l]);
  }
  out << "], \"postures\": [";
  for (std::size_t l = 0; l < seq.postures.size(); ++l) {
    if (l) out << ", ";
    out << "[";
    for (int i = 0; i < seq.parts(); ++i) {
      if (i) out << ", ";
      const auto& p = seq.postures[l].parts[i];
      out << "[" << format_double(p.x()) << ", " << format_double(p.y()) << ", "
          << format_double(p.z()) << "]";
    }
    out << "]";
  }
  out << "]}\n";
  return out.str();
}

PostureSequence posture_sequence_from_json(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    PostureSequence seq;
    const int parts = j.at("n_parts").get<int>();
    seq.duration_U = j.at("duration").get<double>();
    if (j.contains("label") && !j.at("label").is_null())
      seq.label = j.at("label").get<std::string>();
    seq.grid = j.at("grid").get<std::vector<double>>();
    for (const auto& jp : j.at("postures")) {
      Posture p;
      for (const auto& part : jp)
        p.parts.emplace_back(part.at(0).get<double>(), part.at(1).get<double>(),
                             part.at(2).get<double>());
      if (p.size() != parts) throw SchemaError(origin + ": posture part count mismatch");
      seq.postures.push_back(std::move(p));
    }
    seq.validate();
    return seq;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

RateAnalysis rates_from_csv(const std::string& rates_path, const std::string& durations_path) {
  RateAnalysis out;
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };

  {
    std::istringstream in(read_text_file(durations_path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError(durations_path + ": empty file");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != 2) throw ParseError(durations_path + ": expected 2 columns");
      if (cells[0] == "__reference__")
        out.ref_duration = std::stod(cells[1]);
      else {
        out.ids.push_back(cells[0]);
        out.durations.push_back(std::stod(cells[1]));
      }
    }
  }

  std::istringstream in(read_text_file(rates_path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(rates_path + ": empty file");
  out.warps.resize(out.ids.size());
  out.rates.resize(out.ids.size());
  std::size_t current = 0;
  bool seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw ParseError(rates_path + ": expected 5 columns");
    std::size_t m = current;
    if (!seen || cells[0] != out.ids[current]) {
      m = std::find(out.ids.begin(), out.ids.end(), cells[0]) - out.ids.begin();
      if (m >= out.ids.size()) throw SchemaError(rates_path + ": unknown sequence id " + cells[0]);
      current = m;
      seen = true;
    }
    out.warps[m].grid.push_back(std::stod(cells[1]));
    out.warps[m].values.push_back(std::stod(cells[2]));
    out.rates[m].grid.push_back(std::stod(cells[1]));
    out.rates[m].values.push_back(std::stod(cells[4]));
  }
  for (const auto& w : out.warps) w.validate();
  return out;
}

}  // namespace motionlab
