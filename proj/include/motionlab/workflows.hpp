#pragma once

#include <optional>
#include <string>
#include <vector>

#include "motionlab/rate_gp.hpp"
#include "motionlab/sir.hpp"

namespace motionlab {

/// Parameters of one synthetic operation class: a smooth template path
/// through randomly seeded waypoint postures.
struct ClassSpec {
  std::string label;
  int waypoints = 5;
  double step_rad = 0.6;         // typical tangent step between waypoints
  double base_duration = 10.0;   // seconds
  double duration_jitter = 0.0;  // lognormal sd of per-instance duration
};

/// Stand-in for the unavailable factory recordings: templates per class,
/// randomly warped, noise-perturbed, and rendered back to skeletons with
/// per-instance bone lengths and root placement.
struct DatasetSpec {
  std::vector<ClassSpec> classes;
  int per_class = 1;
  int n_parts = 4;
  int frames_per_seq = 64;
  double warp_strength = 0.0;   // scales the random diffeomorphism
  double noise_k_scale = 0.0;   // isotropic wrapped-normal noise variance
  std::uint64_t seed = 0;

  void validate() const;
};

DatasetSpec dataset_spec_from_json(const std::string& text,
                                   const std::string& origin = "<memory>");
std::string dataset_spec_to_json(const DatasetSpec& spec);
DatasetSpec load_dataset_spec(const std::string& path);

std::vector<SkeletonSequence> synthesize_dataset(const DatasetSpec& spec);

/// The class template path itself, noise- and warp-free.
PostureSequence synthesize_template(const DatasetSpec& spec, int class_index);

struct LabeledSequence {
  PostureSequence seq;
  std::string label;
  std::string id;
};

/// Full pairwise motion-distance matrix; diagonal pinned at zero.
Eigen::MatrixXd pairwise_distances(const std::vector<LabeledSequence>& seqs, const Posture& y_r,
                                   int dp_grid, int jobs = 1);

struct ClassifyResult {
  std::vector<std::string> predicted;
  std::vector<int> nearest_index;
  double accuracy = 0.0;  // against test labels
};

/// Nearest-neighbour rule under the motion distance; ties go to the lowest
/// training index.
ClassifyResult classify_1nn(const std::vector<LabeledSequence>& train,
                            const std::vector<LabeledSequence>& test, const Posture& y_r,
                            int dp_grid, int jobs = 1);

/// Deterministic shuffle split (not stratified).
void split_train_test(const std::vector<LabeledSequence>& all, double train_fraction,
                      std::uint64_t seed, std::vector<LabeledSequence>* train,
                      std::vector<LabeledSequence>* test);

struct RateAnalysis {
  PostureSequence reference;   // resampled reference
  Posture reference_posture;   // transport target used for TSRVFs
  std::vector<std::string> ids;
  std::vector<Warping> warps;          // on the DP lattice grid
  std::vector<RateFunction> rates;     // same grid
  std::vector<double> durations;       // U_m
  double ref_duration = 1.0;
};

/// Align every sequence to the reference and extract warps, physically
/// scaled warps and log-rate functions.
RateAnalysis rate_analysis(const std::vector<LabeledSequence>& sequences,
                           const PostureSequence& reference, int dp_grid, int L, double bandwidth,
                           const std::optional<Posture>& y_r = std::nullopt, int jobs = 1);

struct BottleneckReport {
  double t_star = 0.0;
  double delta = 0.020;
  double score = 0.0;
  std::vector<double> grid;
  std::vector<double> window_scores;
};

/// Windowed sums of the negative rate parts; t* is the minimizing grid
/// point (earliest on ties). Window is open: |t_l - t| < delta.
BottleneckReport find_bottleneck(const std::vector<RateFunction>& rates, double delta = 0.020);

/// Fidelity-mode variant evaluating the published expression verbatim, which
/// sums min{0, gamma} and is identically zero for warps in [0, 1].
BottleneckReport find_bottleneck_printed(const std::vector<Warping>& warps, double delta = 0.020);

struct BestPracticeReport {
  int window_lo = 0, window_hi = 0;  // inclusive grid indices
  SIRResult sir;
  Eigen::VectorXd ols;            // intercept then one weight per feature
  bool degenerate = false;        // no rate variation to regress on
  std::vector<double> window_rates;  // cumulative rate per sequence
  Eigen::MatrixXd features;          // sequences x B
  std::vector<Posture> window_means;
  std::vector<Posture> recon_low, recon_mid, recon_high;  // 10/50/90th percentile rates
};

/// Around the bottleneck: inverse-regression directions of the windowed
/// subsequences, a linear features-to-rate fit, and reconstructed
/// subsequences at low/median/high rates.
BestPracticeReport best_practice(const std::vector<PostureSequence>& aligned,
                                 const std::vector<RateFunction>& rates,
                                 const MotionDistribution& model, double t_star, double delta,
                                 int B, double bandwidth = -1.0);

struct MotionVariation {
  int step = 0;
  std::vector<double> eigenvalues;       // descending
  std::vector<double> explained_ratio;   // eigenvalue / trace
  std::vector<double> s_values;
  std::vector<std::vector<Posture>> postures;  // [eigenvector][s]
};

/// Postures along the top covariance eigenvectors at one time step,
/// exp_mu(s v) for s in s_values.
MotionVariation motion_variation(const MotionDistribution& model, int step,
                                 const std::vector<double>& s_values, int n_eigs);

/// Rewarp the reference to the cohort's mean pace: gamma_bar is the
/// normalized cumulative integral of exp(mean rate) and the duration picks
/// up the total factor, so recomputed rates center at zero.
PostureSequence restandardize(const PostureSequence& reference, const RateFunction& mean_rate);

/// Pointwise mean of rate functions sharing a grid.
RateFunction mean_rate_function(const std::vector<RateFunction>& rates);

// --- report emission (CSV/JSON bundles; stable schemas, 17-digit floats) ---

void write_alignment_csv(const std::string& path, const Warping& gamma, const RateFunction& rate,
                         double u_moving, double u_ref);
void write_rates_csv(const std::string& path, const RateAnalysis& analysis);
void write_durations_csv(const std::string& path, const RateAnalysis& analysis);
void write_distance_csv(const std::string& path, const std::vector<LabeledSequence>& seqs,
                        const Eigen::MatrixXd& dist);
void write_band_csv(const std::string& path, const RateBand& band);
void write_bottleneck_files(const std::string& json_path, const std::string& csv_path,
                            const BottleneckReport& report);
void write_feature_csv(const std::string& path, const Eigen::MatrixXd& features,
                       const std::vector<double>& rates);
std::string sir_to_json(const SIRResult& result);
void write_variation_json(const std::string& path, const MotionVariation& variation);
void write_best_practice_json(const std::string& path, const BestPracticeReport& report,
                              const std::vector<double>& grid);

std::string posture_sequence_to_json(const PostureSequence& seq);
PostureSequence posture_sequence_from_json(const std::string& text,
                                           const std::string& origin = "<memory>");

RateAnalysis rates_from_csv(const std::string& rates_path, const std::string& durations_path);

}  // namespace motionlab
