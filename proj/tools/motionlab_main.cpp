// motionlab: batch motion-and-time analysis of skeleton sequences.
//
// Subcommands cover the full pipeline: synthesize a dataset, convert and
// compare sequences, extract execution rates, fit posture distributions,
// and emit the analysis reports as CSV/JSON bundles.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "motionlab/io_util.hpp"
#include "motionlab/workflows.hpp"

namespace fs = std::filesystem;
using namespace motionlab;

namespace {

struct CommonParams {
  int L = 64;  // with delta = 0.020, windows need grid spacing below 0.02
  int dp_grid = 48;
  double bandwidth = 0.02;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonParams* p) {
  cmd->add_option("--L", p->L, "resampling grid size")->check(CLI::Range(2, 100000));
  cmd->add_option("--dp-grid", p->dp_grid, "alignment lattice size")->check(CLI::Range(8, 100000));
  cmd->add_option("--bandwidth", p->bandwidth, "kernel bandwidth for resampling")
      ->check(CLI::PositiveNumber);
}

void add_jobs(CLI::App* cmd, CommonParams* p) {
  cmd->add_option("--jobs", p->jobs, "worker threads")->check(CLI::Range(1, 1024));
}

// accepts both skeleton-sequence files and posture-sequence files
PostureSequence load_any_sequence(const std::string& path) {
  const std::string text = read_text_file(path);
  bool has_frames = false;
  try {
    has_frames = nlohmann::json::parse(text).contains("frames");
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (has_frames) return to_posture_sequence(sequence_from_json(text, path));
  return posture_sequence_from_json(text, path);
}

std::vector<LabeledSequence> load_dir(const std::string& dir, int L, double bandwidth) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .json sequence files in " + dir);

  std::vector<LabeledSequence> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    LabeledSequence item;
    const PostureSequence raw = load_any_sequence(f.string());
    item.seq = resample_sequence(raw, L, bandwidth);
    item.label = raw.label.value_or("");
    item.id = f.stem().string();
    out.push_back(std::move(item));
  }
  return out;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

MapHyper hyper_from_flags(const Posture& mu0, double lambda0_sq, double nu0, double k0_scale) {
  MapHyper hyper = MapHyper::defaults(mu0, k0_scale);
  hyper.lambda0_sq = lambda0_sq;
  if (nu0 > 0.0) hyper.nu0 = nu0;
  return hyper;
}

// shared preprocessing for fit/sir/bestpractice: align everything to the
// reference and rate-normalize
struct AlignedCohort {
  RateAnalysis analysis;
  std::vector<PostureSequence> aligned;
  std::vector<std::vector<Posture>> data;  // [m][l]
};

AlignedCohort align_cohort(const std::string& in_dir, const std::string& ref_path,
                           const CommonParams& p) {
  AlignedCohort out;
  const std::vector<LabeledSequence> seqs = load_dir(in_dir, p.L, p.bandwidth);
  const PostureSequence ref = load_any_sequence(ref_path);
  out.analysis = rate_analysis(seqs, ref, p.dp_grid, p.L, p.bandwidth, std::nullopt, p.jobs);
  out.aligned.reserve(seqs.size());
  for (std::size_t m = 0; m < seqs.size(); ++m)
    out.aligned.push_back(warp_sequence(seqs[m].seq, out.analysis.warps[m]));
  out.data.resize(out.aligned.size());
  for (std::size_t m = 0; m < out.aligned.size(); ++m) out.data[m] = out.aligned[m].postures;
  return out;
}

RateFunction mean_rate_from_files(const std::string& rates_csv, const std::string& durations_csv) {
  const RateAnalysis ra = rates_from_csv(rates_csv, durations_csv);
  return mean_rate_function(ra.rates);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motion-and-time analysis of skeleton sequences"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a TOML-style config file");

  // ---- synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  std::string synth_spec, synth_out;
  std::uint64_t synth_seed = 0;
  bool synth_seed_set = false;
  synth->add_option("--spec", synth_spec, "dataset spec JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "override the spec seed")
      ->envname("MOTIONLAB_SEED")
      ->each([&](const std::string&) { synth_seed_set = true; });

  // ---- convert
  auto* convert = app.add_subcommand("convert", "skeleton sequence to posture sequence");
  std::string conv_in, conv_out;
  int conv_L = 0;
  double conv_bw = 0.02;
  convert->add_option("--in", conv_in, "skeleton sequence JSON")->required();
  convert->add_option("--out", conv_out, "posture sequence JSON")->required();
  convert->add_option("--L", conv_L, "optional uniform resampling grid size");
  convert->add_option("--bandwidth", conv_bw, "kernel bandwidth when resampling");

  // ---- dist
  auto* dist = app.add_subcommand("dist", "pairwise motion-distance matrix");
  CommonParams dist_p;
  std::string dist_in, dist_out;
  dist->add_option("--in", dist_in, "directory of sequence JSON files")->required();
  dist->add_option("--out", dist_out, "output CSV")->required();
  add_common(dist, &dist_p);
  add_jobs(dist, &dist_p);

  // ---- align
  auto* align = app.add_subcommand("align", "align one sequence to a reference");
  CommonParams align_p;
  std::string align_moving, align_ref, align_out;
  align->add_option("--moving", align_moving, "sequence to align")->required();
  align->add_option("--ref", align_ref, "reference sequence")->required();
  align->add_option("--out", align_out, "output CSV (t,gamma,delta,rate)")->required();
  add_common(align, &align_p);

  // ---- rates
  auto* rates = app.add_subcommand("rates", "warps and rate functions for a cohort");
  CommonParams rates_p;
  std::string rates_in, rates_ref, rates_out;
  rates->add_option("--in", rates_in, "directory of sequence JSON files")->required();
  rates->add_option("--ref", rates_ref, "reference sequence")->required();
  rates->add_option("--out", rates_out, "output directory")->required();
  add_common(rates, &rates_p);
  add_jobs(rates, &rates_p);

  // ---- fit
  auto* fit = app.add_subcommand("fit", "fit the posture distribution over time");
  CommonParams fit_p;
  std::string fit_in, fit_ref, fit_out, fit_mode = "map";
  double fit_lambda = 1.0, fit_nu0 = 0.0, fit_k0 = 1e-3;
  fit->add_option("--in", fit_in, "directory of sequence JSON files")->required();
  fit->add_option("--ref", fit_ref, "reference sequence")->required();
  fit->add_option("--out", fit_out, "model JSON")->required();
  fit->add_option("--mode", fit_mode, "mle or map")->check(CLI::IsMember({"mle", "map"}));
  fit->add_option("--lambda0-sq", fit_lambda, "mean autocorrelation variance");
  fit->add_option("--nu0", fit_nu0, "inverse-Wishart dof (default 2(n-1)+2)");
  fit->add_option("--k0-scale", fit_k0, "inverse-Wishart scale (K0 = scale * I)");
  add_common(fit, &fit_p);
  add_jobs(fit, &fit_p);

  // ---- gp
  auto* gp = app.add_subcommand("gp", "Gaussian-process band over pooled rates");
  std::string gp_rates, gp_durations, gp_out;
  double gp_amp = 0.04, gp_ell = 0.1, gp_noise = 1e-2, gp_k = 1.5;
  int gp_grid_points = 101;
  bool gp_search = false;
  gp->add_option("--rates", gp_rates, "rates.csv from the rates command")->required();
  gp->add_option("--durations", gp_durations, "durations.csv from the rates command")->required();
  gp->add_option("--out", gp_out, "band CSV (t,mean,lower,upper)")->required();
  gp->add_option("--amplitude-sq", gp_amp, "kernel amplitude^2");
  gp->add_option("--lengthscale", gp_ell, "kernel lengthscale");
  gp->add_option("--noise-var", gp_noise, "observation noise variance");
  gp->add_option("--k", gp_k, "band half-width in posterior standard deviations");
  gp->add_option("--grid-points", gp_grid_points, "band grid size")->check(CLI::Range(2, 100000));
  gp->add_flag("--grid-search", gp_search, "pick hyperparameters by marginal likelihood");

  // ---- sir
  auto* sir = app.add_subcommand("sir", "inverse-regression directions around a window");
  CommonParams sir_p;
  std::string sir_in, sir_ref, sir_out_json, sir_out_csv;
  double sir_tstar = -1.0, sir_delta = 0.020;
  int sir_B = 0;
  double sir_lambda = 1.0;
  sir->add_option("--in", sir_in, "directory of sequence JSON files")->required();
  sir->add_option("--ref", sir_ref, "reference sequence")->required();
  sir->add_option("--out", sir_out_json, "SIR result JSON")->required();
  sir->add_option("--features-out", sir_out_csv, "feature scatter CSV");
  sir->add_option("--t-star", sir_tstar, "window center (default: bottleneck)");
  sir->add_option("--delta", sir_delta, "window half-width")->check(CLI::PositiveNumber);
  sir->add_option("--B", sir_B, "direction count (default: 90% of variation)");
  sir->add_option("--lambda0-sq", sir_lambda, "fit hyperparameter");
  add_common(sir, &sir_p);
  add_jobs(sir, &sir_p);

  // ---- bottleneck
  auto* bott = app.add_subcommand("bottleneck", "locate the slowest time window");
  std::string bott_rates, bott_durations, bott_out;
  double bott_delta = 0.020;
  bool bott_printed = false;
  bott->add_option("--rates", bott_rates, "rates.csv from the rates command")->required();
  bott->add_option("--durations", bott_durations, "durations.csv from the rates command")
      ->required();
  bott->add_option("--out", bott_out, "output directory")->required();
  bott->add_option("--delta", bott_delta, "window half-width")->check(CLI::PositiveNumber);
  bott->add_flag("--printed", bott_printed,
                 "evaluate the published expression verbatim (sums min{0, gamma})");

  // ---- bestpractice
  auto* best = app.add_subcommand("bestpractice", "reconstruct low/median/high rate subsequences");
  CommonParams best_p;
  std::string best_in, best_ref, best_out;
  double best_tstar = -1.0, best_delta = 0.020, best_lambda = 1.0;
  int best_B = 0;
  best->add_option("--in", best_in, "directory of sequence JSON files")->required();
  best->add_option("--ref", best_ref, "reference sequence")->required();
  best->add_option("--out", best_out, "output directory")->required();
  best->add_option("--t-star", best_tstar, "window center (default: bottleneck)");
  best->add_option("--delta", best_delta, "window half-width")->check(CLI::PositiveNumber);
  best->add_option("--B", best_B, "direction count (default: 90% of variation)");
  best->add_option("--lambda0-sq", best_lambda, "fit hyperparameter");
  add_common(best, &best_p);
  add_jobs(best, &best_p);

  // ---- variation
  auto* vari = app.add_subcommand("variation", "postures along covariance eigenvectors");
  std::string vari_model, vari_out;
  int vari_step = 0, vari_eigs = 2, vari_count = 9;
  double vari_smin = -1.0, vari_smax = 1.0;
  vari->add_option("--model", vari_model, "model JSON from the fit command")->required();
  vari->add_option("--out", vari_out, "output JSON")->required();
  vari->add_option("--step", vari_step, "time step index")->required();
  vari->add_option("--n-eigs", vari_eigs, "eigenvector count")->check(CLI::Range(1, 1000));
  vari->add_option("--s-min", vari_smin, "lowest multiple");
  vari->add_option("--s-max", vari_smax, "highest multiple");
  vari->add_option("--s-count", vari_count, "sample count")->check(CLI::Range(2, 10000));

  // ---- restandardize
  auto* rest = app.add_subcommand("restandardize", "rewarp the reference to the cohort mean pace");
  std::string rest_ref, rest_rates, rest_durations, rest_out;
  rest->add_option("--ref", rest_ref, "reference sequence")->required();
  rest->add_option("--rates", rest_rates, "rates.csv from the rates command")->required();
  rest->add_option("--durations", rest_durations, "durations.csv from the rates command")
      ->required();
  rest->add_option("--out", rest_out, "restandardized posture sequence JSON")->required();

  // ---- classify
  auto* cls = app.add_subcommand("classify", "1-nearest-neighbour operation recognition");
  CommonParams cls_p;
  std::string cls_train, cls_test, cls_out;
  cls->add_option("--train", cls_train, "directory of labeled sequences")->required();
  cls->add_option("--test", cls_test, "directory of sequences to classify")->required();
  cls->add_option("--out", cls_out, "predictions CSV")->required();
  add_common(cls, &cls_p);
  add_jobs(cls, &cls_p);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      DatasetSpec spec = load_dataset_spec(synth_spec);
      if (synth_seed_set) spec.seed = synth_seed;
      ensure_dir(synth_out);
      const auto data = synthesize_dataset(spec);
      int width = 1;
      for (std::size_t n = data.size(); n >= 10; n /= 10) ++width;
      for (std::size_t i = 0; i < data.size(); ++i) {
        std::string idx = std::to_string(i);
        idx.insert(idx.begin(), width - idx.size(), '0');
        const std::string name =
            "seq_" + data[i].label.value_or("unlabeled") + "_" + idx + ".json";
        save_sequence(data[i], (fs::path(synth_out) / name).string());
      }
      std::cout << "wrote " << data.size() << " sequences to " << synth_out << "\n";
    } else if (*convert) {
      PostureSequence seq = load_any_sequence(conv_in);
      if (conv_L >= 2) seq = resample_sequence(seq, conv_L, conv_bw);
      write_text_file(conv_out, posture_sequence_to_json(seq));
    } else if (*dist) {
      const auto seqs = load_dir(dist_in, dist_p.L, dist_p.bandwidth);
      const Posture y_r = karcher_mean(seqs.front().seq.postures);
      const Eigen::MatrixXd d = pairwise_distances(seqs, y_r, dist_p.dp_grid, dist_p.jobs);
      write_distance_csv(dist_out, seqs, d);
    } else if (*align) {
      const PostureSequence moving =
          resample_sequence(load_any_sequence(align_moving), align_p.L, align_p.bandwidth);
      const PostureSequence ref =
          resample_sequence(load_any_sequence(align_ref), align_p.L, align_p.bandwidth);
      const Posture y_r = karcher_mean(ref.postures);
      const AlignmentResult res = align_sequences(moving, ref, y_r, align_p.dp_grid);
      const RateFunction rate =
          rate_from_warping(res.gamma, moving.duration_U, ref.duration_U);
      write_alignment_csv(align_out, res.gamma, rate, moving.duration_U, ref.duration_U);
      std::cout << "distance " << format_double(res.distance) << "\n";
    } else if (*rates) {
      const auto seqs = load_dir(rates_in, rates_p.L, rates_p.bandwidth);
      const PostureSequence ref = load_any_sequence(rates_ref);
      const RateAnalysis ra =
          rate_analysis(seqs, ref, rates_p.dp_grid, rates_p.L, rates_p.bandwidth, std::nullopt,
                        rates_p.jobs);
      ensure_dir(rates_out);
      write_rates_csv((fs::path(rates_out) / "rates.csv").string(), ra);
      write_durations_csv((fs::path(rates_out) / "durations.csv").string(), ra);
    } else if (*fit) {
      const AlignedCohort cohort = align_cohort(fit_in, fit_ref, fit_p);
      MotionDistribution model;
      if (fit_mode == "mle") {
        const int L = static_cast<int>(cohort.data.front().size());
        model.grid = PostureSequence::uniform(L);
        std::vector<Posture> column(cohort.data.size());
        for (int l = 0; l < L; ++l) {
          for (std::size_t m = 0; m < cohort.data.size(); ++m) column[m] = cohort.data[m][l];
          const WrappedNormal wn = fit_mle(column);
          model.steps.push_back(wn);
        }
        model.hyper = hyper_from_flags(cohort.analysis.reference.postures.front(), fit_lambda,
                                       fit_nu0, fit_k0);
      } else {
        const MapHyper hyper = hyper_from_flags(cohort.analysis.reference.postures.front(),
                                                fit_lambda, fit_nu0, fit_k0);
        model = fit_map(cohort.data, hyper);
      }
      save_model(model, fit_out);
    } else if (*gp) {
      const RateAnalysis ra = rates_from_csv(gp_rates, gp_durations);
      std::vector<double> t, r;
      for (const auto& rate : ra.rates)
        for (std::size_t l = 0; l < rate.grid.size(); ++l) {
          t.push_back(rate.grid[l]);
          r.push_back(rate.values[l]);
        }
      double amp = gp_amp, ell = gp_ell, noise = gp_noise;
      if (gp_search) {
        const auto bestfit = gp_grid_search(
            t, r, {0.25 * gp_amp, gp_amp, 4.0 * gp_amp}, {0.5 * gp_ell, gp_ell, 2.0 * gp_ell},
            {0.25 * gp_noise, gp_noise, 4.0 * gp_noise});
        amp = bestfit.amplitude_sq;
        ell = bestfit.lengthscale;
        noise = bestfit.noise_var;
      }
      const RateGP model(t, r, amp, ell, noise);
      write_band_csv(gp_out, rate_band(model, PostureSequence::uniform(gp_grid_points), gp_k));
    } else if (*sir || *best) {
      const bool is_sir = static_cast<bool>(*sir);
      const CommonParams& p = is_sir ? sir_p : best_p;
      const AlignedCohort cohort =
          align_cohort(is_sir ? sir_in : best_in, is_sir ? sir_ref : best_ref, p);
      const MapHyper hyper =
          hyper_from_flags(cohort.analysis.reference.postures.front(),
                           is_sir ? sir_lambda : best_lambda, 0.0, 1e-3);
      const MotionDistribution model = fit_map(cohort.data, hyper);

      double t_star = is_sir ? sir_tstar : best_tstar;
      const double delta = is_sir ? sir_delta : best_delta;
      if (t_star < 0.0) t_star = find_bottleneck(cohort.analysis.rates, delta).t_star;

      int B = is_sir ? sir_B : best_B;
      if (B <= 0) {
        // fit once with B = 2 to read the spectrum, then honor the 90% rule
        const BestPracticeReport probe =
            best_practice(cohort.aligned, cohort.analysis.rates, model, t_star, delta, 2);
        B = probe.degenerate ? 1 : SIRResult::suggest_count(probe.sir.eigenvalues, 0.9);
      }
      const BestPracticeReport rep =
          best_practice(cohort.aligned, cohort.analysis.rates, model, t_star, delta, B);
      if (is_sir) {
        write_text_file(sir_out_json, sir_to_json(rep.sir));
        if (!sir_out_csv.empty()) write_feature_csv(sir_out_csv, rep.features, rep.window_rates);
      } else {
        ensure_dir(best_out);
        write_best_practice_json((fs::path(best_out) / "bestpractice.json").string(), rep,
                                 model.grid);
        write_feature_csv((fs::path(best_out) / "features.csv").string(), rep.features,
                          rep.window_rates);
      }
    } else if (*bott) {
      const RateAnalysis ra = rates_from_csv(bott_rates, bott_durations);
      const BottleneckReport rep = bott_printed ? find_bottleneck_printed(ra.warps, bott_delta)
                                                : find_bottleneck(ra.rates, bott_delta);
      ensure_dir(bott_out);
      write_bottleneck_files((fs::path(bott_out) / "bottleneck.json").string(),
                             (fs::path(bott_out) / "scores.csv").string(), rep);
      std::cout << "t_star " << format_double(rep.t_star) << "\n";
    } else if (*vari) {
      const MotionDistribution model = load_model(vari_model);
      std::vector<double> s_values(vari_count);
      for (int i = 0; i < vari_count; ++i)
        s_values[i] = vari_smin + (vari_smax - vari_smin) * i / (vari_count - 1);
      write_variation_json(vari_out, motion_variation(model, vari_step, s_values, vari_eigs));
    } else if (*rest) {
      const PostureSequence ref = load_any_sequence(rest_ref);
      const RateFunction mean_rate = mean_rate_from_files(rest_rates, rest_durations);
      write_text_file(rest_out, posture_sequence_to_json(restandardize(ref, mean_rate)));
    } else if (*cls) {
      const auto train = load_dir(cls_train, cls_p.L, cls_p.bandwidth);
      const auto test = load_dir(cls_test, cls_p.L, cls_p.bandwidth);
      const Posture y_r = karcher_mean(train.front().seq.postures);
      const ClassifyResult res = classify_1nn(train, test, y_r, cls_p.dp_grid, cls_p.jobs);
      CsvWriter csv(cls_out, {"id", "predicted", "actual"});
      for (std::size_t i = 0; i < test.size(); ++i)
        csv.row({test[i].id, res.predicted[i], test[i].label});
      std::cout << "accuracy " << format_double(res.accuracy) << "\n";
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
