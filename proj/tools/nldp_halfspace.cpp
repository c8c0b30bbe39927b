// nldp-halfspace: one-round locally-private halfspace learning, end to end.
//
// Subcommands: generate, encode, train-private, train-massart,
// train-selftrain, evaluate, audit, sweep, poly inspect. Each takes a TOML
// config (--config), an optional seed override (--seed) and an optional
// output directory override (--out). Dataset files use the NLDP-DS v1 text
// format; report streams and trajectories are JSON Lines; run reports and
// hypotheses are JSON; curves and logs are CSV.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nldp/harness.hpp"

namespace {

using nldp::Json;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "TOML experiment config")->required();
  cmd->add_option("--seed", args.seed, "master seed override");
  cmd->add_option("--out", args.out_dir, "output directory override");
}

nldp::harness::ExperimentConfig load(const CommonArgs& args) {
  nldp::harness::ExperimentConfig config = nldp::harness::load_config(args.config_path);
  if (args.seed.has_value()) config.seed = *args.seed;
  if (args.out_dir.has_value()) config.out_dir = *args.out_dir;
  return config;
}

std::string out_path(const nldp::harness::ExperimentConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  return config.out_dir + "/" + name;
}

// Data generation shared by `generate` and the config-driven evaluation.
struct GeneratedData {
  nldp::Dataset private_data;
  nldp::Dataset public_data;
  nldp::Dataset eval_data;
  Json meta;
};

GeneratedData generate_data(const nldp::harness::ExperimentConfig& config,
                            nldp::SampleStats* stats = nullptr) {
  using namespace nldp;
  GeneratedData out;
  RngStream master = RngStream::root(config.seed);
  RngStream data_stream = master.sub("data").sub(std::uint64_t{0});
  RngStream eval_stream = master.sub("evaluate").sub(std::uint64_t{0});

  if (config.is_mixture_pipeline()) {
    std::vector<double> mu = config.mu;
    if (mu.empty()) {
      mu = unit_vector(config.marginal.dimension, 0);
      scale_in_place(mu, config.mu_norm);
    }
    MixtureSpec mix;
    mix.mu = mu;
    mix.base = config.marginal;
    if (config.n_private > 0)
      out.private_data = sample_mixture(mix, config.n_private,
                                        data_stream.sub("private").next_u64(), stats);
    if (config.m_public > 0)
      out.public_data = strip_labels(sample_mixture(
          mix, config.m_public, data_stream.sub("public").next_u64(), stats));
    out.eval_data = sample_mixture(mix, config.eval_trials,
                                   eval_stream.sub("holdout").next_u64(), stats);
    out.meta = Json{{"model", "mixture"}, {"mu", mu}};
    return out;
  }

  Hypothesis w_star =
      config.w_star.empty()
          ? project_unit_sphere(
                data_stream.sub("w_star").gaussian_vector(config.marginal.dimension))
          : project_unit_sphere(config.w_star);
  if (config.n_private > 0) {
    out.private_data = sample_realizable(config.marginal, w_star, config.n_private,
                                         data_stream.sub("private").next_u64(), config.margin,
                                         stats);
    if (config.massart_lambda > 0.0) {
      out.private_data =
          corrupt_massart(out.private_data, MassartSpec::constant(config.massart_lambda),
                          data_stream.sub("massart").next_u64());
    }
  }
  if (config.m_public > 0) {
    Dataset pub = sample_realizable(config.marginal, w_star, config.m_public,
                                    data_stream.sub("public").next_u64(), config.margin, stats);
    if (config.pipeline == "lhmn") {
      // lhmn trains directly on labeled (possibly Massart-corrupted) data
      if (config.massart_lambda > 0.0) {
        pub = corrupt_massart(pub, MassartSpec::constant(config.massart_lambda),
                              data_stream.sub("massart_public").next_u64());
      }
      pub.kind = DatasetKind::kPseudoLabeled;
      out.public_data = pub;
    } else {
      out.public_data = strip_labels(pub);
    }
  }
  out.eval_data = sample_realizable(config.marginal, w_star, config.eval_trials,
                                    eval_stream.sub("holdout").next_u64(), config.margin, stats);
  out.meta = Json{{"model", "realizable"}, {"w_star", w_star.w}};
  return out;
}

int cmd_generate(const CommonArgs& args) {
  auto config = load(args);
  nldp::SampleStats stats;
  GeneratedData data = generate_data(config, &stats);
  if (!data.private_data.empty())
    nldp::write_dataset_file(data.private_data, out_path(config, "private.ds"));
  if (!data.public_data.empty())
    nldp::write_dataset_file(data.public_data, out_path(config, "public.ds"));
  if (!data.eval_data.empty())
    nldp::write_dataset_file(data.eval_data, out_path(config, "eval.ds"));
  data.meta["truncation_rejection_rate"] = stats.rejection_rate();
  nldp::write_text_file(out_path(config, "data_meta.json"), data.meta.dump(2) + "\n");
  std::cout << "wrote datasets to " << config.out_dir << " (truncation rejection rate "
            << nldp::format_double(stats.rejection_rate()) << ")\n";
  return 0;
}

int cmd_encode(const CommonArgs& args, const std::string& in_file, std::string mechanism) {
  using namespace nldp;
  auto config = load(args);
  Dataset data = read_dataset_file(in_file);
  require(data.labeled(), ErrorKind::kContractViolation, "encode consumes labeled private data");
  if (mechanism.empty()) mechanism = config.is_mixture_pipeline() ? "logistic" : "hinge";

  RngStream encode_stream = RngStream::root(config.seed).sub("encode").sub(std::uint64_t{0});
  std::string path = out_path(config, "reports.jsonl");
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidInput, "cannot open " + path);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (mechanism == "hinge") {
      Example normalized;
      normalized.x = scaled(data.examples[i].x, 1.0 / data.radius);
      normalized.y = data.label(i);
      auto rep =
          client::hinge_encode(normalized, config.privacy, config.degree_p, encode_stream.sub(i));
      f << hinge_report_to_json(rep).dump() << "\n";
    } else if (mechanism == "logistic") {
      auto rep = client::logistic_encode(data.examples[i], config.privacy, config.degree_p,
                                         data.radius, encode_stream.sub(i));
      f << logistic_report_to_json(rep).dump() << "\n";
    } else {
      fail(ErrorKind::kConfig, "unknown mechanism '" + mechanism + "' (valid: hinge, logistic)");
    }
  }
  std::cout << "wrote " << data.size() << " " << mechanism << " reports to " << path << "\n";
  return 0;
}

int cmd_train_private(const CommonArgs& args, const std::string& reports_file) {
  using namespace nldp;
  auto config = load(args);
  std::ifstream f(reports_file, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidInput, "cannot open " + reports_file);
  std::vector<client::HingeReport> hinge_reports;
  std::vector<client::LogisticReport> logistic_reports;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    if (j.contains("y_copies")) {
      hinge_reports.push_back(hinge_report_from_json(j));
    } else {
      logistic_reports.push_back(logistic_report_from_json(j));
    }
  }
  require(hinge_reports.empty() || logistic_reports.empty(), ErrorKind::kMalformedReport,
          "report stream mixes hinge and logistic messages");
  require(!hinge_reports.empty() || !logistic_reports.empty(), ErrorKind::kInvalidInput,
          "empty report stream");

  std::string log_path = out_path(config, "train_log.csv");
  std::ofstream log(log_path, std::ios::binary);
  log << "schema,iteration,gradient_norm,clipped\n";
  server::OptimizerConfig opt = config.optimizer;
  opt.observer = [&](std::size_t step, std::span<const double>, double gnorm, bool clipped) {
    log << "1," << step << "," << format_double(gnorm) << "," << (clipped ? 1 : 0) << "\n";
  };

  Hypothesis w;
  Json meta;
  std::uint64_t train_seed = RngStream::root(config.seed).sub("optimize").next_u64();
  if (!hinge_reports.empty()) {
    const auto& first = hinge_reports.front();
    opt.dimension = first.dimension();
    double R = config.marginal.effective_radius();
    poly::BernsteinApprox approx = poly::bernstein_build(1.0 / (32.0 * R) / 4.0, R, first.p);
    double scale = server::hinge_gradient_scale_estimate(approx, first.sigma_base,
                                                         first.sigma_copy, opt.dimension);
    if (opt.clip > 0.0) scale = std::min(scale, opt.clip);
    if (opt.noise_hint <= 1.0) opt.noise_hint = scale;
    if (opt.method == server::OptimizerMethod::kSigm && opt.noise_scale <= 0.0)
      opt.noise_scale = scale / opt.radius;
    w = server::hinge_nldp_train(hinge_reports, approx, opt, train_seed);
    meta = Json{{"mechanism", "hinge"}, {"p", first.p}, {"n", hinge_reports.size()}};
  } else {
    const auto& first = logistic_reports.front();
    opt.dimension = first.dimension();
    double rho = config.rho > 0.0 ? config.rho : 1.0;
    poly::ChebyshevApprox approx =
        poly::chebyshev_build(config.marginal.effective_radius(), rho, first.p);
    double scale = server::logistic_gradient_scale_estimate(approx, first.sigma_base,
                                                            first.sigma_copy, opt.dimension);
    if (opt.clip > 0.0) scale = std::min(scale, opt.clip);
    if (opt.noise_hint <= 1.0) opt.noise_hint = scale;
    if (opt.method == server::OptimizerMethod::kSigm && opt.noise_scale <= 0.0)
      opt.noise_scale = scale / opt.radius;
    w = server::logistic_nldp_train(logistic_reports, approx, rho, opt, train_seed);
    meta = Json{{"mechanism", "logistic"},
                {"p", first.p},
                {"n", logistic_reports.size()},
                {"rho", rho}};
  }
  std::string hyp_path = out_path(config, "hypothesis.json");
  nldp::write_text_file(hyp_path, hypothesis_to_json(w, meta).dump(2) + "\n");
  std::cout << "wrote " << hyp_path << " and " << log_path << "\n";
  return 0;
}

int cmd_pipeline(const CommonArgs& args, const std::string& which) {
  auto config = load(args);
  config.pipeline = which;
  nldp::harness::RunOutput out = nldp::harness::run(config);
  nldp::harness::persist_run(out, config);
  if (!out.trial_results.front().error_curve.empty()) {
    // persist the trajectory-style curve next to the report
  }
  std::cout << out.report.dump(2) << "\n";
  std::cout << "artifacts in " << config.out_dir << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& hypothesis_file,
                 const std::string& data_file) {
  using namespace nldp;
  auto config = load(args);
  Hypothesis w = hypothesis_from_json(Json::parse(read_text_file(hypothesis_file)));
  harness::ErrorEstimate est;
  if (!data_file.empty()) {
    Dataset data = read_dataset_file(data_file);
    require(data.labeled() && !data.empty(), ErrorKind::kInvalidInput,
            "evaluation data must be labeled and nonempty");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (classify(w, data.point(i)) != data.label(i)) ++wrong;
    est = harness::error_estimate_from_counts(wrong, data.size());
  } else {
    // Config-driven fresh-sample evaluation; needs an explicit truth model.
    if (config.is_mixture_pipeline()) {
      std::vector<double> mu = config.mu;
      if (mu.empty()) {
        require(config.mu_norm > 0.0, ErrorKind::kConfig,
                "evaluate without --data needs mixture.mu or mixture.mu_norm");
        mu = unit_vector(config.marginal.dimension, 0);
        scale_in_place(mu, config.mu_norm);
      }
      MixtureSpec mix;
      mix.mu = mu;
      mix.base = config.marginal;
      est = harness::monte_carlo_error(w, harness::EvalModel::mixture_model(mix),
                                       config.eval_trials,
                                       RngStream::root(config.seed).sub("evaluate").next_u64());
    } else {
      require(!config.w_star.empty(), ErrorKind::kConfig,
              "evaluate without --data needs data.w_star in the config");
      est = harness::monte_carlo_error(
          w, harness::EvalModel::realizable(config.marginal, project_unit_sphere(config.w_star)),
          config.eval_trials, RngStream::root(config.seed).sub("evaluate").next_u64());
    }
  }
  Json report{{"schema", 1},
              {"estimate", est.estimate},
              {"ci_halfwidth", est.ci_halfwidth},
              {"trials", est.trials}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_audit(const CommonArgs& args) {
  using namespace nldp;
  auto config = load(args);
  toml::Table t = toml::parse_file(args.config_path);
  std::string mech = t.get_string("audit.mechanism", "hinge");
  std::size_t trials = static_cast<std::size_t>(t.get_integer("audit.trials", 1000000));
  std::string mode_str = t.get_string("audit.mode", "standard");

  harness::AuditInput input;
  std::size_t d = config.marginal.dimension;
  input.p = config.degree_p;
  input.privacy = config.privacy;
  input.R = config.is_mixture_pipeline() ? config.marginal.effective_radius() : 1.0;
  input.rho = config.rho > 0.0 ? config.rho : 1.0;
  RngStream point_stream = RngStream::root(config.seed).sub("audit_point");
  input.w = project_unit_sphere(point_stream.gaussian_vector(d));
  scale_in_place(input.w.w, 0.9);
  std::vector<double> x = point_stream.gaussian_vector(d);
  project_ball_in_place(x, input.R);
  input.point = Example{x, point_stream.next_uniform() < 0.5 ? 1 : -1};

  harness::AuditMode mode =
      mode_str == "reuse_copy" ? harness::AuditMode::kReuseCopy : harness::AuditMode::kStandard;
  harness::AuditReport rep = harness::audit_unbiasedness(
      mech == "logistic" ? harness::AuditMechanism::kLogistic : harness::AuditMechanism::kHinge,
      input, trials, RngStream::root(config.seed).sub("audit").next_u64(), mode);

  Json j{{"schema", 1},       {"mechanism", mech},        {"mode", mode_str},
         {"trials", trials},  {"z_scores", rep.z_scores}, {"max_abs_z", rep.max_abs_z},
         {"pass", rep.pass},  {"mc_mean", rep.mc_mean},   {"target", rep.target}};
  std::cout << j.dump(2) << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_sweep(const CommonArgs& args) {
  using namespace nldp;
  auto config = load(args);
  toml::Table t = toml::parse_file(args.config_path);
  std::string axis = t.get_string("sweep.axis", "");
  std::vector<double> grid = t.get_array("sweep.grid", {});
  require(!axis.empty(), ErrorKind::kConfig, "sweep.axis missing from config");
  harness::SweepResult res = harness::sweep(config, axis, grid);
  std::string path = out_path(config, "sweep_" + axis + ".csv");
  write_text_file(path, res.csv);
  std::cout << res.csv;
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_poly_inspect(double beta, double R, double rho, std::size_t p,
                     const std::string& out_file) {
  using namespace nldp;
  std::ostringstream csv;
  csv << "schema,kind,index,value\n";
  poly::BernsteinApprox bern = poly::bernstein_build(beta, R, p);
  for (std::size_t i = 0; i <= p; ++i)
    csv << "1,bernstein_c," << i << "," << format_double(bern.coefficients[i]) << "\n";
  csv << "1,bernstein_supgrid_error,0," << format_double(poly::bernstein_supgrid_error(bern))
      << "\n";
  std::size_t cheb_p = std::min<std::size_t>(p, poly::kChebyshevDegreeCap);
  poly::ChebyshevApprox cheb = poly::chebyshev_build(R, rho, cheb_p);
  for (std::size_t i = 0; i <= cheb_p; ++i)
    csv << "1,chebyshev_c1," << i << "," << format_double(cheb.c1[i]) << "\n";
  for (std::size_t i = 0; i <= cheb_p; ++i)
    csv << "1,chebyshev_c2," << i << "," << format_double(cheb.c2[i]) << "\n";
  csv << "1,chebyshev_supgrid_error,0," << format_double(poly::chebyshev_supgrid_error(cheb))
      << "\n";
  for (std::size_t q : {16u, 32u, 64u, 128u}) {
    csv << "1,bernstein_supgrid_error_p" << q << ",0,"
        << format_double(poly::bernstein_supgrid_error(poly::bernstein_build(beta, R, q)))
        << "\n";
  }
  if (out_file.empty()) {
    std::cout << csv.str();
  } else {
    write_text_file(out_file, csv.str());
    std::cout << "wrote " << out_file << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-round locally-private halfspace learning"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  auto* gen = app.add_subcommand("generate", "sample datasets into NLDP-DS v1 files");
  add_common(gen, gen_args);

  CommonArgs enc_args;
  std::string enc_in, enc_mechanism;
  auto* enc = app.add_subcommand("encode", "privatize a dataset into a report stream");
  add_common(enc, enc_args);
  enc->add_option("--in", enc_in, "input NLDP-DS dataset")->required();
  enc->add_option("--mechanism", enc_mechanism, "hinge | logistic (default: by pipeline)");

  CommonArgs tp_args;
  std::string tp_reports;
  auto* tp = app.add_subcommand("train-private", "run the one-round server on a report stream");
  add_common(tp, tp_args);
  tp->add_option("--reports", tp_reports, "JSONL report stream")->required();

  CommonArgs tm_args;
  auto* tm = app.add_subcommand("train-massart", "full Massart-oracle pipeline");
  add_common(tm, tm_args);

  CommonArgs ts_args;
  auto* ts = app.add_subcommand("train-selftrain", "full self-training pipeline");
  add_common(ts, ts_args);

  CommonArgs ev_args;
  std::string ev_hypothesis, ev_data;
  auto* ev = app.add_subcommand("evaluate", "error of a stored hypothesis");
  add_common(ev, ev_args);
  ev->add_option("--hypothesis", ev_hypothesis, "hypothesis JSON file")->required();
  ev->add_option("--data", ev_data, "labeled NLDP-DS file (otherwise config-driven)");

  CommonArgs au_args;
  auto* au = app.add_subcommand("audit", "estimator unbiasedness audit");
  add_common(au, au_args);

  CommonArgs sw_args;
  auto* sw = app.add_subcommand("sweep", "grid sweep over n/m/epsilon/d/mu_norm");
  add_common(sw, sw_args);

  auto* poly_cmd = app.add_subcommand("poly", "polynomial machinery utilities");
  poly_cmd->require_subcommand(1);
  double pi_beta = 0.25, pi_R = 1.0, pi_rho = 1.0;
  std::size_t pi_p = 16;
  std::string pi_out;
  auto* inspect = poly_cmd->add_subcommand("inspect", "dump coefficients and sup-grid errors");
  inspect->add_option("--beta", pi_beta, "hinge smoothing beta");
  inspect->add_option("--R", pi_R, "data radius");
  inspect->add_option("--rho", pi_rho, "logistic constraint radius");
  inspect->add_option("--p", pi_p, "polynomial degree");
  inspect->add_option("--out", pi_out, "output CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (enc->parsed()) return cmd_encode(enc_args, enc_in, enc_mechanism);
    if (tp->parsed()) return cmd_train_private(tp_args, tp_reports);
    if (tm->parsed()) return cmd_pipeline(tm_args, "massart");
    if (ts->parsed()) return cmd_pipeline(ts_args, "selftrain");
    if (ev->parsed()) return cmd_evaluate(ev_args, ev_hypothesis, ev_data);
    if (au->parsed()) return cmd_audit(au_args);
    if (sw->parsed()) return cmd_sweep(sw_args);
    if (poly_cmd->parsed()) return cmd_poly_inspect(pi_beta, pi_R, pi_rho, pi_p, pi_out);
  } catch (const nldp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
