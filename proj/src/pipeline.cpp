#include "kcm/pipeline.hpp"

#include "kcm/boxes.hpp"
#include "kcm/cluster_path.hpp"
#include "kcm/errors.hpp"
#include "kcm/kmc.hpp"
#include "kcm/observables.hpp"
#include "kcm/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef KCM_VERSION
#define KCM_VERSION "0.0.0"
#endif
#ifndef KCM_GIT_REVISION
#define KCM_GIT_REVISION "unknown"
#endif

namespace kcm {

namespace {

std::string trim(std::string s) {
  const auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), blank));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), blank).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& value, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse(item));
  return out;
}

bool is_block_term(TermKind kind) {
  return kind == TermKind::bgp2_inner || kind == TermKind::energy_b || kind == TermKind::rest;
}

nlohmann::json report_json(const EstimatorReport& r) {
  return {{"estimate", r.estimate}, {"std_error", r.std_error}, {"n_samples", r.n_samples}};
}

}  // namespace

ModelParams RunConfig::model() const { return ModelParams(m, parse_rational(rho), b, gamma, n, L); }

ModelParams RunConfig::model_at(int size) const { return ModelParams(m, parse_rational(rho), b, gamma, size, 0); }

std::vector<TermSpec> RunConfig::term_specs() const {
  std::vector<TermSpec> out;
  for (const auto& name : terms) {
    TermSpec spec;
    spec.kind = parse_term_kind(name);
    spec.eps = eps;
    spec.ell = ell;
    out.push_back(spec);
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput(path + ":" + std::to_string(number) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const auto to_int = [&](const std::string& s) { return std::stoi(s); };
  const auto to_long = [&](const std::string& s) { return std::stol(s); };
  const auto to_double = [&](const std::string& s) { return std::stod(s); };
  try {
    if (key == "m") c.m = to_int(value);
    else if (key == "rho") c.rho = to_string(parse_rational(value));
    else if (key == "b") c.b = to_double(value);
    else if (key == "gamma") c.gamma = to_double(value);
    else if (key == "n") c.n = to_int(value);
    else if (key == "L") c.L = to_long(value);
    else if (key == "t-max") c.t_max = to_double(value);
    else if (key == "dt") c.dt = to_double(value);
    else if (key == "eps") c.eps = to_double(value);
    else if (key == "ell") c.ell = to_long(value);
    else if (key == "n-traj") c.n_traj = to_int(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "threads") c.threads = static_cast<unsigned>(std::stoul(value));
    else if (key == "out") c.out = value;
    else if (key == "ns") c.ns = parse_list<int>(value, to_int);
    else if (key == "times") c.times = parse_list<double>(value, to_double);
    else if (key == "terms") c.terms = split_list(value);
    else if (key == "width") c.width = to_double(value);
    else if (key == "samples") c.samples = to_int(value);
    else if (key == "m-list") c.m_list = parse_list<int>(value, to_int);
    else if (key == "corrupt-rates") c.corrupt_rates = value == "1" || value == "true";
    else if (key == "path-trials") c.path_trials = to_long(value);
    else if (key == "eta") c.eta = value;
    else if (key == "y") c.y = to_long(value);
    else if (key == "z") c.z = to_long(value);
    else if (key == "box-anchor") c.box_anchor = to_long(value);
    else if (key == "box-length") c.box_length = to_long(value);
    else throw InvalidInput("unknown config key '" + key + "'");
  } catch (const std::logic_error&) {
    throw InvalidInput("bad value '" + value + "' for config key '" + key + "'");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"m", c.m},
          {"rho", c.rho},
          {"b", c.b},
          {"gamma", c.gamma},
          {"n", c.n},
          {"L", c.L},
          {"t-max", c.t_max},
          {"dt", c.dt},
          {"eps", c.eps},
          {"ell", c.ell},
          {"n-traj", c.n_traj},
          {"seed", c.seed},
          {"threads", c.threads},
          {"out", c.out},
          {"ns", c.ns},
          {"times", c.times},
          {"terms", c.terms},
          {"width", c.width},
          {"samples", c.samples},
          {"m-list", c.m_list},
          {"corrupt-rates", c.corrupt_rates},
          {"path-trials", c.path_trials},
          {"eta", c.eta},
          {"y", c.y},
          {"z", c.z},
          {"box-anchor", c.box_anchor},
          {"box-length", c.box_length}};
}

nlohmann::json output_header(const RunConfig& config, const std::string& command) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"program", {{"name", "kcm"}, {"version", KCM_VERSION}, {"revision", KCM_GIT_REVISION}}},
          {"config", to_json(config)}};
}

std::string csv_header(const RunConfig& config, const std::string& command) {
  std::ostringstream out;
  out << "# schema_version=" << kSchemaVersion << "\n# command=" << command << "\n# program=kcm " << KCM_VERSION
      << " " << KCM_GIT_REVISION << "\n# config=" << to_json(config).dump() << "\n";
  return out.str();
}

void write_output(const PipelineOutput& output, const std::string& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error("cannot create output directory '" + directory + "': " + ec.message());
  const auto write = [&](const std::string& file, const std::string& content) {
    const std::filesystem::path path = std::filesystem::path(directory) / file;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error("cannot write '" + path.string() + "'");
  };
  write(output.name + ".json", output.summary.dump(2) + "\n");
  if (!output.csv.empty()) write(output.name + ".csv", output.csv);
}

PipelineOutput verify_pipeline(const RunConfig& config) {
  VerifyOptions options;
  options.m_list = config.m_list;
  options.corrupt_rates = config.corrupt_rates;
  options.path_trials = config.path_trials;
  options.seed = config.seed;
  const auto results = run_verify(options);

  PipelineOutput out;
  out.name = "verify";
  out.summary = output_header(config, "verify");
  out.summary["checks"] = nlohmann::json::array();
  long counts[3] = {0, 0, 0};
  for (const auto& r : results) {
    out.summary["checks"].push_back(
        {{"name", r.name}, {"status", to_string(r.status)}, {"detail", r.detail}, {"seconds", r.seconds}});
    ++counts[static_cast<int>(r.status)];
  }
  out.summary["passed"] = counts[0];
  out.summary["failed"] = counts[1];
  out.summary["skipped"] = counts[2];
  out.passed = all_passed(results);
  return out;
}

PipelineOutput simulate_pipeline(const RunConfig& config) {
  const ModelParams params = config.model();
  if (config.t_max < 0.0) throw InvalidInput("t-max must be nonnegative");
  if (config.n_traj < 1) throw InvalidInput("n-traj must be positive");

  struct Summary {
    std::string csv;
    nlohmann::json row;
    double current = 0.0;
  };
  const auto one = [&](std::size_t k) {
    const Trajectory traj = run(params, config.t_max, config.dt, config.seed, k);
    Summary s;
    std::ostringstream csv;
    const auto snaps = traj.snapshots();
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      csv << k << "," << traj.sampling_times[i] << "," << snaps[i].to_string() << "\n";
    }
    s.csv = csv.str();
    long net = 0;
    for (const Event& e : traj.events) net += e.direction;
    if (config.t_max > 0.0) {
      s.current = static_cast<double>(net) / (static_cast<double>(params.ring_size()) * params.time_scale() * config.t_max);
    }
    s.row = {{"trajectory", k},
             {"stream", {config.seed, k}},
             {"events", traj.events.size()},
             {"net_jumps", net},
             {"truncated", traj.truncated},
             {"blocking_time", traj.blocking_time}};
    return s;
  };
  const auto runs = run_farm(static_cast<std::size_t>(config.n_traj), config.threads, one);

  PipelineOutput out;
  out.name = "simulate";
  out.summary = output_header(config, "simulate");
  out.summary["model"] = params.describe();
  out.summary["trajectories"] = nlohmann::json::array();
  std::ostringstream csv;
  csv << csv_header(config, "simulate") << "trajectory,time,configuration\n";
  std::vector<double> currents;
  for (const auto& r : runs) {
    out.summary["trajectories"].push_back(r.row);
    csv << r.csv;
    currents.push_back(r.current);
  }
  out.csv = csv.str();
  if (config.t_max > 0.0) {
    const EstimatorReport current = summarize(currents);
    out.summary["mean_current"] = report_json(current);
    out.summary["mean_current"]["exact"] = exact_mean_current(params);
  }
  return out;
}

std::uint64_t grid_seed(std::uint64_t base, int n) {
  RandomStream mix(base, static_cast<std::uint64_t>(n));
  return mix();
}

ScalingStudy run_scaling_study(const RunConfig& config) {
  ScalingStudy study;
  study.config = config;
  study.terms = config.term_specs();
  if (config.ns.empty()) throw InvalidInput("empty n grid");
  const TestFunction h = TestFunction::gaussian(0.0, config.width);
  for (int n : config.ns) {
    ScalingPoint point;
    point.n = n;
    const ModelParams params = config.model_at(n);
    point.ring_size = params.ring_size();
    point.seed = grid_seed(config.seed, n);
    for (const auto& term : study.terms) {
      point.ells.push_back(is_block_term(term.kind) ? term.block_length(n) : 0);
      point.norms.push_back(weights_norm_2n(default_term_weights(term, params, h), n));
    }
    TermGridRequest request{params};
    request.terms = study.terms;
    request.h = h;
    request.times = config.times;
    request.n_traj = config.n_traj;
    request.seed = point.seed;
    request.threads = config.threads;
    point.result = estimate_terms(request);
    study.points.push_back(std::move(point));
  }
  return study;
}

Bgp2Verdict bgp2_verdict(const ScalingStudy& study, std::size_t term) {
  Bgp2Verdict verdict;
  std::vector<double> all_values;
  std::vector<double> all_bounds;
  for (std::size_t ti = 0; ti < study.config.times.size(); ++ti) {
    const double t = study.config.times[ti];
    std::vector<double> est;
    std::vector<double> se;
    for (std::size_t pi = 0; pi < study.points.size(); ++pi) {
      const ScalingPoint& p = study.points[pi];
      const EstimatorReport& r = study.estimate(term, pi, ti).report;
      est.push_back(r.estimate);
      se.push_back(r.std_error);
      all_values.push_back(r.estimate);
      all_bounds.push_back(bgp2_rhs_bound(t, static_cast<double>(p.ells[term]), p.n, 1.0) * p.norms[term]);
    }
    verdict.nonincreasing.push_back(nonincreasing_within(est, se, 2.0));
  }
  verdict.fitted_constant = fit_bound_constant(all_values, all_bounds);
  verdict.min_ratio = verdict.max_ratio = all_values.front() / all_bounds.front();
  for (std::size_t i = 0; i < all_values.size(); ++i) {
    const double ratio = all_values[i] / all_bounds[i];
    verdict.min_ratio = std::min(verdict.min_ratio, ratio);
    verdict.max_ratio = std::max(verdict.max_ratio, ratio);
  }
  return verdict;
}

PipelineOutput scaling_output(const ScalingStudy& study, const std::string& name) {
  const RunConfig& config = study.config;
  PipelineOutput out;
  out.name = name;
  nlohmann::json& j = out.summary;
  j = output_header(config, name);
  std::vector<std::string> labels;
  for (const auto& term : study.terms) labels.push_back(term.label());
  std::vector<double> ns;
  for (const auto& p : study.points) ns.push_back(p.n);
  j["grid"] = {{"ns", ns}, {"times", config.times}, {"terms", labels}};
  j["seeds"] = nlohmann::json::array();
  j["points"] = nlohmann::json::array();

  std::ostringstream csv;
  csv << csv_header(config, name) << "n,trajectory,term,t,value,truncated,events\n";
  csv.precision(17);
  for (const auto& p : study.points) {
    j["seeds"].push_back({{"n", p.n}, {"seed", p.seed}, {"streams", {0, config.n_traj - 1}}});
    nlohmann::json point = {{"n", p.n},
                            {"L", p.ring_size},
                            {"ell", p.ells},
                            {"norm_2n", p.norms},
                            {"blocked_probability_bound", p.result.blocked_probability_bound},
                            {"estimates", nlohmann::json::array()}};
    for (std::size_t term = 0; term < study.terms.size(); ++term) {
      for (std::size_t ti = 0; ti < config.times.size(); ++ti) {
        const SquaredExpectation& e = p.result.estimates[term][ti];
        nlohmann::json row = report_json(e.report);
        row["term"] = labels[term];
        row["t"] = config.times[ti];
        row["excluded"] = e.excluded;
        point["estimates"].push_back(row);
      }
    }
    j["points"].push_back(point);
    for (std::size_t k = 0; k < p.result.trajectories.size(); ++k) {
      const TrajectoryIntegrals& tr = p.result.trajectories[k];
      for (std::size_t term = 0; term < study.terms.size(); ++term) {
        for (std::size_t ti = 0; ti < config.times.size(); ++ti) {
          csv << p.n << "," << k << "," << labels[term] << "," << config.times[ti] << "," << tr.values[term][ti] << ","
              << (tr.truncated ? 1 : 0) << "," << tr.events << "\n";
        }
      }
    }
  }
  out.csv = csv.str();

  j["fits"] = nlohmann::json::array();
  j["trends"] = nlohmann::json::array();
  for (std::size_t term = 0; term < study.terms.size(); ++term) {
    for (std::size_t ti = 0; ti < config.times.size(); ++ti) {
      std::vector<double> est;
      std::vector<double> se;
      for (std::size_t pi = 0; pi < study.points.size(); ++pi) {
        est.push_back(study.estimate(term, pi, ti).report.estimate);
        se.push_back(study.estimate(term, pi, ti).report.std_error);
      }
      j["trends"].push_back({{"term", labels[term]}, {"t", config.times[ti]}, {"nonincreasing_2sigma", nonincreasing_within(est, se, 2.0)}});
      if (ns.size() >= 2 && std::all_of(est.begin(), est.end(), [](double v) { return v > 0.0; })) {
        const ScalingFit fit = fit_power_law(ns, est);
        j["fits"].push_back({{"term", labels[term]},
                             {"t", config.times[ti]},
                             {"exponent", fit.exponent},
                             {"exponent_std_error", fit.exponent_std_error},
                             {"prefactor", fit.prefactor},
                             {"r_squared", fit.r_squared}});
      }
    }
    if (study.terms[term].kind == TermKind::bgp2_inner) {
      const Bgp2Verdict v = bgp2_verdict(study, term);
      const bool monotone = std::all_of(v.nonincreasing.begin(), v.nonincreasing.end(), [](bool b) { return b; });
      j["bgp2"].push_back({{"term", labels[term]},
                           {"nonincreasing_2sigma", v.nonincreasing},
                           {"monotone", monotone},
                           {"fitted_constant", v.fitted_constant},
                           {"ratio_min", v.min_ratio},
                           {"ratio_max", v.max_ratio}});
      out.passed = out.passed && monotone;
    }
  }
  return out;
}

PipelineOutput bgp2_pipeline(const RunConfig& config) { return scaling_output(run_scaling_study(config), "bgp2"); }

PipelineOutput covariance_pipeline(const RunConfig& config) {
  const ModelParams params = config.model();
  const TestFunction h = TestFunction::gaussian(0.0, config.width);
  CovarianceRequest request{params};
  request.functions = {h};
  request.times = config.times;
  request.n_traj = config.n_traj;
  request.seed = config.seed;
  request.threads = config.threads;
  const CovarianceResult result = estimate_covariance(request);

  PipelineOutput out;
  out.name = "covariance";
  out.summary = output_header(config, "covariance");
  out.summary["function"] = h.name();
  out.summary["seeds"] = {{"seed", config.seed}, {"streams", {0, config.n_traj - 1}}};
  out.summary["excluded"] = result.excluded;
  out.summary["rows"] = nlohmann::json::array();
  std::ostringstream csv;
  csv << csv_header(config, "covariance") << "t,estimate,std_error,oracle,z\n";
  csv.precision(17);
  for (std::size_t ti = 0; ti < config.times.size(); ++ti) {
    const EstimatorReport& r = result.estimates[0][ti];
    const double oracle = ou_covariance_oracle(h, h, config.times[ti], params.rho_value(), params.m());
    const double z = r.z_score(oracle);
    nlohmann::json row = report_json(r);
    row["t"] = config.times[ti];
    row["oracle"] = oracle;
    row["z"] = z;
    out.summary["rows"].push_back(row);
    csv << config.times[ti] << "," << r.estimate << "," << r.std_error << "," << oracle << "," << z << "\n";
    out.passed = out.passed && std::abs(z) < 4.0;
  }
  out.csv = csv.str();
  return out;
}

PipelineOutput sample_equilibrium_pipeline(const RunConfig& config) {
  const ModelParams params = config.model();
  const std::vector<TestFunction> functions = {TestFunction::gaussian(0.0, config.width),
                                               TestFunction::hermite(1, 0.0, config.width),
                                               TestFunction::bump(0.0, 2.0 * config.width)};
  PipelineOutput out;
  out.name = "sample-equilibrium";
  out.summary = output_header(config, "sample-equilibrium");
  out.summary["functions"] = nlohmann::json::array();
  std::ostringstream csv;
  csv << csv_header(config, "sample-equilibrium") << "function,seed,variance,std_error,exact,z,jarque_bera,p_value\n";
  csv.precision(17);
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const std::uint64_t seed = grid_seed(config.seed, static_cast<int>(i));
    const EquilibriumFieldReport r = equilibrium_field_law(params, functions[i], config.samples, seed, config.threads);
    const double z = r.variance.z_score(r.exact_variance);
    nlohmann::json row = report_json(r.variance);
    row["function"] = r.function;
    row["seed"] = seed;
    row["exact_variance"] = r.exact_variance;
    row["z"] = z;
    row["jarque_bera"] = r.normality.statistic;
    row["p_value"] = r.normality.p_value;
    row["skewness"] = r.normality.skewness;
    row["excess_kurtosis"] = r.normality.excess_kurtosis;
    out.summary["functions"].push_back(row);
    csv << '"' << r.function << "\"," << seed << "," << r.variance.estimate << "," << r.variance.std_error << ","
        << r.exact_variance << "," << z << "," << r.normality.statistic << "," << r.normality.p_value << "\n";
    out.passed = out.passed && std::abs(z) < 4.0 && r.normality.p_value > 0.01;
  }
  out.csv = csv.str();
  return out;
}

PathDemo path_demo(const RunConfig& config) {
  const int m = config.m;
  Configuration cfg;
  BoxSpec box;
  if (!config.eta.empty()) {
    cfg = Configuration::from_string(config.eta);
    box = BoxSpec{std::max<long>(config.box_anchor, 0), config.box_length > 0 ? config.box_length : std::max<long>(m, cfg.size() / 4)};
    if (!is_good_box(cfg, box, m)) throw NoCluster("the box holds no mobile cluster");
  } else {
    const long size = config.L > 0 ? config.L : 32;
    box = BoxSpec{std::max<long>(config.box_anchor, 0), config.box_length > 0 ? config.box_length : std::max<long>(m, size / 4)};
    RandomStream rng(config.seed, 0);
    const double rho = to_double(parse_rational(config.rho));
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw NoCluster("no good box drawn in 10000 attempts");
      cfg = sample_bernoulli(size, rho, rng);
      if (is_good_box(cfg, box, m)) break;
    }
  }
  if (box.length >= cfg.size()) throw InvalidInput("box longer than the ring");

  PathDemo demo;
  demo.box = box;
  const auto in_box = [&](long x) { return cfg.wrap(x - box.first()) < box.length; };
  if (config.y >= 0 && config.z >= 0) {
    demo.y = cfg.wrap(config.y);
    demo.z = cfg.wrap(config.z);
  } else {
    // Nearest occupied site right of the box and the farthest site with the other value.
    demo.y = -1;
    for (long d = 1; d < cfg.size() - box.length + 1 && demo.y < 0; ++d) {
      if (cfg(box.last() + d) == 1) demo.y = cfg.wrap(box.last() + d);
    }
    if (demo.y < 0) throw InvalidInput("no particle outside the box");
    demo.z = -1;
    for (long d = 0; d < cfg.size() - box.length && demo.z < 0; ++d) {
      const long x = cfg.wrap(box.anchor - d);
      if (cfg(x) == 0) demo.z = x;
    }
    if (demo.z < 0) throw InvalidInput("no hole outside the box");
  }
  if (in_box(demo.y) || in_box(demo.z)) throw InvalidInput("y and z must lie outside the box");

  const ExchangePath path = build_exchange_path(cfg, demo.y, demo.z, box, m);
  Configuration state = cfg;
  demo.frames.push_back(state.to_string());
  for (long move : path.moves) {
    state.swap_sites(move, move + 1);
    demo.frames.push_back(state.to_string());
  }
  Configuration target = cfg;
  target.swap_sites(demo.y, demo.z);
  demo.target = target.to_string();
  const PathReport report = validate_exchange_path(cfg, path, m);
  demo.verified = report.legal && report.exact && report.restored && demo.frames.back() == demo.target;
  return demo;
}

}  // namespace kcm
