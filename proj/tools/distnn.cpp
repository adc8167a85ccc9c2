// distnn: command-line front end for distributional matrix completion.
//
// Every subcommand first resolves its options into a JSON config and then
// runs from that config alone, so `--config <previous output>` replays a run.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "distnn/empdist.hpp"
#include "distnn/error.hpp"
#include "distnn/estimator.hpp"
#include "distnn/experiments.hpp"
#include "distnn/inference.hpp"
#include "distnn/oracle.hpp"
#include "distnn/panel_io.hpp"
#include "distnn/rng.hpp"
#include "distnn/synthetic.hpp"
#include "distnn/tuning.hpp"

using nlohmann::json;
using namespace distnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoNeighbors = 2;
constexpr int kExitCheckFailed = 3;

// Raised when a run finished and wrote its output but some cell had no
// neighbors.
struct PartialNoNeighbors {};

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> read_optional(const json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return cfg.at(key).get<double>();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

std::string document(const json& cfg, json body) {
  body["config"] = cfg;
  body["seed"] = cfg.value("seed", std::uint64_t{0});
  return body.dump(2) + "\n";
}

// ---------------------------------------------------------------- shared

struct TargetOpts {
  std::string row;
  std::string col;
};

struct EtaOpts {
  std::optional<double> eta;
  std::size_t budget = 50;
  std::string search = "grid";
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  std::size_t min_overlap = 1;
};

void add_eta_options(CLI::App* sub, EtaOpts& o) {
  sub->add_option("--eta", o.eta, "Fixed distance threshold; tuned when omitted")->check(CLI::NonNegativeNumber);
  sub->add_option("--budget", o.budget, "Tuning budget")->check(CLI::PositiveNumber);
  sub->add_option("--search", o.search, "Tuning search")->check(CLI::IsMember({"grid", "random"}));
  sub->add_option("--eta-min", o.eta_min, "Lower end of the tuning range");
  sub->add_option("--eta-max", o.eta_max, "Upper end of the tuning range");
  sub->add_option("--min-overlap", o.min_overlap, "Shared columns required for a finite distance")
      ->check(CLI::PositiveNumber);
}

void eta_to_json(json& cfg, const EtaOpts& o) {
  cfg["eta"] = optional_number(o.eta);
  cfg["budget"] = o.budget;
  cfg["search"] = o.search;
  cfg["eta_min"] = optional_number(o.eta_min);
  cfg["eta_max"] = optional_number(o.eta_max);
  cfg["min_overlap"] = o.min_overlap;
}

TuneConfig tune_config(const json& cfg) {
  TuneConfig t;
  t.budget = cfg.at("budget").get<std::size_t>();
  t.search = cfg.at("search").get<std::string>() == "random" ? SearchStrategy::RandomLogUniform
                                                              : SearchStrategy::LogGrid;
  t.eta_min = read_optional(cfg, "eta_min");
  t.eta_max = read_optional(cfg, "eta_max");
  t.seed = cfg.at("seed").get<std::uint64_t>();
  t.neighbor_options.min_overlap = cfg.at("min_overlap").get<std::size_t>();
  return t;
}

std::pair<std::size_t, std::size_t> resolve_target(const Panel& p, const json& cfg) {
  const auto row = cfg.at("row").get<std::string>();
  const auto col = cfg.at("col").get<std::string>();
  const auto i = p.row_index(row);
  const auto j = p.col_index(col);
  if (!i) throw Error(ErrorCode::BadTarget, "unknown row key '" + row + "'");
  if (!j) throw Error(ErrorCode::BadTarget, "unknown column key '" + col + "'");
  return {*i, *j};
}

// Fixed eta from the config, or a tuned one. Tuning failures mean no row has
// a finite distance, which is reported as NoNeighbors.
double resolve_eta(const DistributionalMatrix& m, std::size_t i, std::size_t j, const json& cfg,
                   std::optional<TuneReport>* report = nullptr) {
  if (const auto eta = read_optional(cfg, "eta")) return *eta;
  TuneConfig t = tune_config(cfg);
  t.seed = derive_seed(t.seed, {i, j});
  try {
    auto r = tune_eta(m, i, j, t);
    if (report != nullptr) *report = r;
    return r.best_eta;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AllTrialsFailed || e.code() == ErrorCode::NoObservedCells) {
      throw Error(ErrorCode::NoNeighbors, std::string("eta could not be tuned: ") + e.what());
    }
    throw;
  }
}

json result_to_json(const Panel& p, const ImputationResult& r, double var_alpha) {
  json neighbors = json::array();
  for (const auto& n : r.neighbors.members) {
    neighbors.push_back({{"row", p.row_keys[n.row]}, {"distance", n.distance}, {"overlap", n.overlap}});
  }
  json estimate;
  if (const auto* d = std::get_if<EmpiricalDistribution>(&r.estimate)) {
    estimate = {{"kind", "samples"}, {"samples", std::vector<double>(d->samples().begin(), d->samples().end())}};
  } else {
    const auto& g = std::get<QuantileGrid>(r.estimate);
    estimate = {{"kind", "quantile_grid"}, {"levels", g.levels}, {"values", g.values}};
  }
  return {
      {"row", p.row_keys[r.neighbors.target_row]},
      {"col", p.col_keys[r.neighbors.target_col]},
      {"eta", r.neighbors.eta},
      {"neighbors", std::move(neighbors)},
      {"estimate", std::move(estimate)},
      {"summaries",
       {{"mean", r.summaries.mean},
        {"median", r.summaries.median},
        {"std", r.summaries.std},
        {"var_at_risk", r.summaries.var_at_risk},
        {"var_alpha", var_alpha}}},
  };
}

// ---------------------------------------------------------------- impute

int run_impute(const json& cfg, const std::string& output) {
  const Panel p = read_panel_file(cfg.at("input").get<std::string>());
  const double var_alpha = cfg.at("var_alpha").get<double>();
  const bool fallback = cfg.at("fallback_nearest").get<bool>();
  NeighborOptions opts;
  opts.min_overlap = cfg.at("min_overlap").get<std::size_t>();

  std::vector<std::pair<std::size_t, std::size_t>> targets;
  if (cfg.at("all_missing").get<bool>()) {
    for (std::size_t i = 0; i < p.matrix.rows(); ++i) {
      for (std::size_t j = 0; j < p.matrix.cols(); ++j) {
        if (!p.matrix.observed(i, j)) targets.emplace_back(i, j);
      }
    }
  } else {
    targets.push_back(resolve_target(p, cfg));
  }

  json results = json::array();
  json unresolved = json::array();
  for (const auto& [i, j] : targets) {
    std::optional<ImputationResult> r;
    bool used_fallback = false;
    std::string reason;
    try {
      const double eta = resolve_eta(p.matrix, i, j, cfg);
      r = try_impute(p.matrix, i, j, eta, var_alpha, opts);
      if (!r) reason = "no row within eta " + format_double(eta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoNeighbors) throw;
      reason = e.what();
    }
    if (!r && fallback) {
      try {
        r = impute_nearest(p.matrix, i, j, var_alpha, opts);
        used_fallback = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoNeighbors) throw;
        reason = e.what();
      }
    }
    if (r) {
      json item = result_to_json(p, *r, var_alpha);
      item["fallback_nearest"] = used_fallback;
      results.push_back(std::move(item));
    } else {
      unresolved.push_back({{"row", p.row_keys[i]}, {"col", p.col_keys[j]}, {"error", "NoNeighbors"}, {"message", reason}});
    }
  }

  if (!cfg.at("all_missing").get<bool>() && !unresolved.empty()) {
    throw Error(ErrorCode::NoNeighbors, unresolved[0].at("message").get<std::string>());
  }
  emit(output, document(cfg, {{"results", std::move(results)}, {"no_neighbors", unresolved}}));
  if (!unresolved.empty()) throw PartialNoNeighbors{};
  return kExitOk;
}

// ---------------------------------------------------------------- tune

int run_tune(const json& cfg, const std::string& output) {
  const Panel p = read_panel_file(cfg.at("input").get<std::string>());
  const auto [i, j] = resolve_target(p, cfg);
  TuneConfig t = tune_config(cfg);
  const TuneReport r = tune_eta(p.matrix, i, j, t);
  json trials = json::array();
  for (const auto& tr : r.trials) {
    trials.push_back({{"eta", tr.eta},
                      {"loss", std::isfinite(tr.loss) ? json(tr.loss) : json(nullptr)},
                      {"n_valid", tr.n_valid},
                      {"n_no_neighbors", tr.n_no_neighbors}});
  }
  emit(output, document(cfg, {{"best_eta", r.best_eta},
                              {"best_loss", r.best_loss},
                              {"eta_min", r.eta_min},
                              {"eta_max", r.eta_max},
                              {"trials", std::move(trials)}}));
  return kExitOk;
}

// ---------------------------------------------------------------- bands

int run_bands(const json& cfg, const std::string& output) {
  const Panel p = read_panel_file(cfg.at("input").get<std::string>());
  const auto [i, j] = resolve_target(p, cfg);
  NeighborOptions opts;
  opts.min_overlap = cfg.at("min_overlap").get<std::size_t>();
  const double var_alpha = cfg.at("var_alpha").get<double>();
  const double eta = resolve_eta(p.matrix, i, j, cfg);
  const ImputationResult r = impute(p.matrix, i, j, eta, var_alpha, opts);

  const auto levels = uniform_levels(cfg.at("levels").get<std::size_t>());
  const double alpha = cfg.at("alpha").get<double>();
  const bool simultaneous = cfg.at("simultaneous").get<bool>();
  ConfidenceBand band;
  if (cfg.at("method").get<std::string>() == "kde") {
    // With ragged neighbor entries the smallest size keeps the band conservative.
    std::size_t n_j = 0;
    for (const auto& n : r.neighbors.members) {
      const std::size_t size = p.matrix.at(n.row, j).size();
      n_j = n_j == 0 ? size : std::min(n_j, size);
    }
    band = asymptotic_band(r, SigmaFunction::kde(p.matrix, r.neighbors), n_j, alpha, levels, simultaneous);
  } else {
    BootstrapConfig b;
    b.reps_samples = cfg.at("reps_samples").get<std::size_t>();
    b.reps_neighbors = cfg.at("reps_neighbors").get<std::size_t>();
    b.seed = cfg.at("seed").get<std::uint64_t>();
    band = bootstrap_band(p.matrix, r, alpha, levels, b, simultaneous);
  }
  emit(output, document(cfg, {{"row", p.row_keys[i]},
                              {"col", p.col_keys[j]},
                              {"eta", eta},
                              {"n_neighbors", r.neighbors.size()},
                              {"method", std::string(to_string(band.method))},
                              {"alpha", band.alpha},
                              {"per_level_alpha", band.per_level_alpha},
                              {"simultaneous", band.simultaneous},
                              {"levels", band.levels},
                              {"estimate", band.estimate},
                              {"lower", band.lower},
                              {"upper", band.upper}}));
  return kExitOk;
}

// ---------------------------------------------------------------- synthetic data options

struct DgpOpts {
  std::string kind = "hetero";
  std::string base = "uniform";
  double truncation = 4.0;
  double sigma = 1.0;
  std::vector<double> location_range{-5.0, 5.0};
  std::vector<double> scale_range{1.0, 5.0};
  std::size_t latent_dim = 1;
};

void add_dgp_options(CLI::App* sub, DgpOpts& o) {
  sub->add_option("--dgp", o.kind, "Latent model")->check(CLI::IsMember({"hetero", "homo"}));
  sub->add_option("--base", o.base, "Base family")->check(CLI::IsMember({"uniform", "tgauss", "gauss"}));
  sub->add_option("--truncation", o.truncation, "Truncation point of tgauss")->check(CLI::PositiveNumber);
  sub->add_option("--sigma", o.sigma, "Homoscedastic scale parameter");
  sub->add_option("--location-range", o.location_range, "lo,hi")->delimiter(',')->expected(2);
  sub->add_option("--scale-range", o.scale_range, "lo,hi")->delimiter(',')->expected(2);
  sub->add_option("--latent-dim", o.latent_dim, "Homoscedastic latent dimension")->check(CLI::PositiveNumber);
}

json dgp_to_json(const DgpOpts& o) {
  return {{"kind", o.kind},
          {"base", o.base},
          {"truncation", o.truncation},
          {"sigma", o.sigma},
          {"location_range", o.location_range},
          {"scale_range", o.scale_range},
          {"latent_dim", o.latent_dim}};
}

Interval interval_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorCode::InvalidArgument, "a range needs exactly two values");
  return {v[0], v[1]};
}

DgpSpec dgp_from_json(const json& j) {
  DgpSpec s;
  s.kind = j.at("kind").get<std::string>() == "homo" ? DgpKind::Homoscedastic : DgpKind::Heteroscedastic;
  const auto base = j.at("base").get<std::string>();
  s.base = base == "tgauss" ? BaseFamily::TruncatedGaussian
           : base == "gauss" ? BaseFamily::Gaussian
                             : BaseFamily::Uniform;
  s.truncation = j.at("truncation").get<double>();
  s.sigma = j.at("sigma").get<double>();
  s.location_range = interval_from(j.at("location_range"));
  s.scale_range = interval_from(j.at("scale_range"));
  s.latent_dim = j.at("latent_dim").get<std::size_t>();
  return s;
}

// ---------------------------------------------------------------- simulate

json box_json(const BoxStats& b) {
  return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}, {"mean", b.mean}};
}

int run_simulate(const json& cfg, const std::string& output, const std::string& csv_path) {
  ExperimentSpec spec;
  spec.dgp = dgp_from_json(cfg.at("dgp"));
  const auto sweep = cfg.at("sweep").get<std::string>();
  spec.sweep = sweep == "rows" ? SweepVariable::NRows
               : sweep == "n-times-neighbors" ? SweepVariable::NTimesNeighbors
                                              : SweepVariable::NSamples;
  spec.values = cfg.at("values").get<std::vector<std::size_t>>();
  spec.trials = cfg.at("trials").get<std::size_t>();
  spec.n_rows = cfg.at("rows").get<std::size_t>();
  spec.n_cols = cfg.at("cols").get<std::size_t>();
  spec.n_samples = cfg.at("n").get<std::size_t>();
  if (const auto eta = read_optional(cfg, "eta")) {
    spec.eta_policy = EtaPolicy::Fixed;
    spec.fixed_eta = *eta;
  }
  spec.tune_budget = cfg.at("budget").get<std::size_t>();
  spec.min_neighbors = cfg.at("min_neighbors").get<std::size_t>();
  if (!cfg.at("max_neighbors").is_null()) spec.max_neighbors = cfg.at("max_neighbors").get<std::size_t>();
  spec.mask_p = cfg.at("mask_p").get<double>();
  spec.baseline_resamples = cfg.at("baseline_resamples").get<std::size_t>();
  spec.seed = cfg.at("seed").get<std::uint64_t>();

  std::ostringstream csv;
  csv << "# config=" << cfg.dump() << "\n";
  json body;
  if (cfg.at("experiment").get<std::string>() == "quantities") {
    const auto errors = run_quantity_eval(spec, {Quantity::Mean, Quantity::Median, Quantity::Std, Quantity::VaR5});
    json rows = json::array();
    csv << "quantity,method,min,q1,median,q3,max,mean,excluded\n";
    for (const auto& q : errors) {
      rows.push_back({{"quantity", to_string(q.quantity)},
                      {"excluded", q.excluded},
                      {"dist_nn", box_json(q.dist_nn_stats)},
                      {"baseline", box_json(q.baseline_stats)}});
      for (const auto& [method, b] : {std::pair{"dist_nn", q.dist_nn_stats}, std::pair{"baseline", q.baseline_stats}}) {
        csv << to_string(q.quantity) << ',' << method << ',' << format_double(b.min) << ',' << format_double(b.q1)
            << ',' << format_double(b.median) << ',' << format_double(b.q3) << ',' << format_double(b.max) << ','
            << format_double(b.mean) << ',' << q.excluded << '\n';
      }
    }
    body["quantities"] = std::move(rows);
  } else {
    const ScalingResult r = run_scaling(spec);
    json points = json::array();
    csv << "value,method,trials_ok,trials_failed,mean_error,se_error,mean_neighbors,mean_n_times_neighbors\n";
    for (const auto& pt : r.points) {
      points.push_back({{"value", pt.value},
                        {"trials_ok", pt.trials_ok},
                        {"trials_failed", pt.trials_failed},
                        {"mean_error", pt.mean_error},
                        {"se_error", pt.se_error},
                        {"mean_baseline", pt.mean_baseline},
                        {"se_baseline", pt.se_baseline},
                        {"mean_neighbors", pt.mean_neighbors},
                        {"mean_n_times_neighbors", pt.mean_n_times_neighbors}});
      const std::string tail = ',' + format_double(pt.mean_neighbors) + ',' + format_double(pt.mean_n_times_neighbors) + '\n';
      csv << pt.value << ",dist_nn," << pt.trials_ok << ',' << pt.trials_failed << ',' << format_double(pt.mean_error)
          << ',' << format_double(pt.se_error) << tail;
      csv << pt.value << ",baseline," << pt.trials_ok << ',' << pt.trials_failed << ','
          << format_double(pt.mean_baseline) << ',' << format_double(pt.se_baseline) << tail;
    }
    body["points"] = std::move(points);
    auto fit_json = [](const std::optional<PowerLawFit>& f) -> json {
      if (!f) return nullptr;
      return {{"amplitude", f->amplitude},
              {"exponent", f->exponent},
              {"r_squared", f->r_squared},
              {"rms_log_residual", f->rms_log_residual}};
    };
    body["fit"] = fit_json(r.fit);
    body["trial_fit"] = fit_json(r.trial_fit);
    body["degenerate"] = r.degenerate;
  }
  emit(output, document(cfg, std::move(body)));
  if (!csv_path.empty()) emit(csv_path, csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------- verify

int run_verify(const json& cfg, const std::string& output) {
  const auto check = cfg.at("check").get<std::string>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  json body;
  bool pass = true;
  if (check == "uniform-barycenter") {
    UniformBarycenterConfig c;
    c.m_list = cfg.at("m_list").get<std::vector<std::size_t>>();
    c.n_list = cfg.at("n_list").get<std::vector<std::size_t>>();
    c.trials = cfg.at("trials").get<std::size_t>();
    c.width = cfg.at("width").get<double>();
    c.seed = seed;
    json rows = json::array();
    for (const auto& r : verify_uniform_barycenter(c)) {
      const bool ok = std::fabs(r.z) < 4.0;
      pass = pass && ok;
      rows.push_back({{"m", r.m},
                      {"n", r.n},
                      {"simulated_mean", r.simulated_mean},
                      {"closed_form", r.closed_form},
                      {"std_error", r.std_error},
                      {"z", r.z},
                      {"pass", ok}});
    }
    body["rows"] = std::move(rows);
  } else if (check == "barycenter-rate") {
    BarycenterRateConfig c;
    c.k_list = cfg.at("k_list").get<std::vector<std::size_t>>();
    c.n_list = cfg.at("n_list").get<std::vector<std::size_t>>();
    c.trials = cfg.at("trials").get<std::size_t>();
    c.seed = seed;
    const auto cells = verify_barycenter_rate(c);
    json rows = json::array();
    for (const auto& cell : cells) {
      rows.push_back({{"k", cell.k}, {"n", cell.n}, {"mean", cell.mean}, {"std_error", cell.std_error}});
    }
    json ratios = json::object();
    for (const std::size_t n : c.n_list) {
      const auto rs = halving_ratios(cells, n);
      ratios[std::to_string(n)] = rs;
      for (double x : rs) pass = pass && std::fabs(x - 2.0) <= 0.3;
    }
    body["cells"] = std::move(rows);
    body["halving_ratios"] = std::move(ratios);
  } else {
    // Order-statistic distance against exhaustive matching on small inputs.
    const std::size_t trials = cfg.at("trials").get<std::size_t>();
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, {t}));
      const std::size_t n = 1 + rng.index(6);
      std::vector<double> a(n);
      std::vector<double> b(n);
      for (auto& x : a) x = rng.uniform(-10.0, 10.0);
      for (auto& x : b) x = rng.uniform(-10.0, 10.0);
      const auto da = EmpiricalDistribution::from_samples(a);
      const auto db = EmpiricalDistribution::from_samples(b);
      const double exact = oracle::brute_force_w2_sq(da, db);
      const double fast = w2_sq_equal_n(da, db);
      const double rel = exact == 0.0 ? std::fabs(fast) : std::fabs(fast - exact) / exact;
      worst = std::max(worst, rel);
    }
    pass = worst <= 1e-12;
    body["instances"] = trials;
    body["max_relative_error"] = worst;
  }
  body["check"] = check;
  body["pass"] = pass;
  emit(output, document(cfg, std::move(body)));
  return pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- generate

int run_generate(const json& cfg, const std::string& output) {
  DgpSpec spec = dgp_from_json(cfg.at("dgp"));
  spec.n_per_entry = {cfg.at("n").get<std::size_t>()};
  spec.seed = derive_seed(cfg.at("seed").get<std::uint64_t>(), {0});
  const auto panel = generate(spec, cfg.at("rows").get<std::size_t>(), cfg.at("cols").get<std::size_t>());
  const MaskSpec mask{cfg.at("mask_p").get<double>(), derive_seed(cfg.at("seed").get<std::uint64_t>(), {1})};
  const Panel p = make_panel(apply_mcar(panel.matrix, mask, std::nullopt));
  if (cfg.at("format").get<std::string>() == "json") {
    json doc = panel_to_json(p);
    emit(output, document(cfg, std::move(doc)));
  } else {
    std::ostringstream out;
    out << "# config=" << cfg.dump() << "\n";
    write_panel_csv(out, p);
    emit(output, out.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- wiring

json load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // CSV outputs carry the config on their first line.
  if (text.rfind("# config=", 0) == 0) text = text.substr(9, text.find('\n') - 9);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  json cfg = doc.contains("config") ? doc.at("config") : doc;
  if (!cfg.is_object() || cfg.value("command", std::string()) != command) {
    throw Error(ErrorCode::ParseError, path + ": not a '" + command + "' config");
  }
  return cfg;
}

// Only output paths may accompany --config.
void check_config_alone(const CLI::App* sub) {
  static const std::set<std::string> allowed{"--config", "--output", "--csv", "--help"};
  for (const auto* opt : sub->get_options()) {
    if (opt->count() > 0 && allowed.count(opt->get_name()) == 0) {
      throw Error(ErrorCode::InvalidArgument, opt->get_name() + " cannot be combined with --config");
    }
  }
}

void report_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional matrix completion with Wasserstein nearest neighbors"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string csv_path;
  std::uint64_t seed = 0;

  // impute
  auto* impute = app.add_subcommand("impute", "Impute one entry or every missing entry");
  std::string input;
  TargetOpts target;
  EtaOpts eta_opts;
  bool all_missing = false;
  bool fallback = false;
  double var_alpha = 0.05;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Replay the config embedded in an earlier output");
    sub->add_option("--output,-o", output, "Output file (stdout when omitted)");
    sub->add_option("--seed", seed, "Master seed");
  };
  auto add_input = [&](CLI::App* sub, bool with_target) {
    sub->add_option("--input,-i", input, "Panel file (.csv or .json)");
    if (with_target) {
      sub->add_option("--row", target.row, "Target row key");
      sub->add_option("--col", target.col, "Target column key");
    }
  };
  add_common(impute);
  add_input(impute, true);
  add_eta_options(impute, eta_opts);
  impute->add_flag("--all-missing", all_missing, "Impute every unobserved entry");
  impute->add_flag("--fallback-nearest", fallback, "Use the nearest finite-distance row when no row is within eta");
  impute->add_option("--var-alpha", var_alpha, "Tail level of the value-at-risk summary")->check(CLI::Range(0.0, 1.0));

  // tune
  auto* tune = app.add_subcommand("tune", "Select eta for one entry by leave-one-out validation");
  add_common(tune);
  add_input(tune, true);
  add_eta_options(tune, eta_opts);

  // bands
  auto* bands = app.add_subcommand("bands", "Confidence band for the quantile function of one entry");
  add_common(bands);
  add_input(bands, true);
  add_eta_options(bands, eta_opts);
  double alpha = 0.05;
  std::size_t levels = 99;
  bool simultaneous = false;
  std::string method = "bootstrap";
  std::size_t reps_samples = 10;
  std::size_t reps_neighbors = 10;
  bands->add_option("--alpha", alpha, "Miscoverage level in (0, 1]")->check(CLI::Range(0.0, 1.0));
  bands->add_option("--levels", levels, "Number of quantile levels k/(L+1)")->check(CLI::PositiveNumber);
  bands->add_flag("--simultaneous", simultaneous, "Bonferroni-adjust across levels");
  bands->add_option("--method", method, "Band construction")->check(CLI::IsMember({"bootstrap", "kde"}));
  bands->add_option("--reps-samples", reps_samples, "Sample resamples per neighbor draw")->check(CLI::PositiveNumber);
  bands->add_option("--reps-neighbors", reps_neighbors, "Neighbor resamples")->check(CLI::PositiveNumber);
  bands->add_option("--var-alpha", var_alpha, "Tail level of the value-at-risk summary")->check(CLI::Range(0.0, 1.0));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Synthetic scaling or quantity experiments");
  add_common(simulate);
  simulate->add_option("--csv", csv_path, "Also write a tidy CSV table");
  DgpOpts dgp;
  add_dgp_options(simulate, dgp);
  std::string experiment = "scaling";
  std::string sweep = "n";
  std::vector<std::size_t> values{50, 100, 200, 400, 800};
  std::size_t trials = 50;
  std::size_t rows = 50;
  std::size_t cols = 30;
  std::size_t n = 500;
  std::size_t min_neighbors = 0;
  std::optional<std::size_t> max_neighbors;
  double mask_p = 1.0;
  std::size_t baseline_resamples = 100;
  simulate->add_option("--experiment", experiment, "scaling or quantities")
      ->check(CLI::IsMember({"scaling", "quantities"}));
  simulate->add_option("--sweep", sweep, "Swept variable")->check(CLI::IsMember({"n", "rows", "n-times-neighbors"}));
  simulate->add_option("--values", values, "Sweep values")->delimiter(',');
  simulate->add_option("--trials", trials, "Trials per sweep value")->check(CLI::PositiveNumber);
  simulate->add_option("--rows", rows, "Rows when not swept")->check(CLI::PositiveNumber);
  simulate->add_option("--cols", cols, "Columns")->check(CLI::PositiveNumber);
  simulate->add_option("--n", n, "Samples per entry when not swept")->check(CLI::PositiveNumber);
  simulate->add_option("--eta", eta_opts.eta, "Fixed eta; tuned per trial when omitted")->check(CLI::NonNegativeNumber);
  simulate->add_option("--budget", eta_opts.budget, "Tuning budget")->check(CLI::PositiveNumber);
  simulate->add_option("--min-neighbors", min_neighbors, "Widen eta to reach this many neighbors");
  simulate->add_option("--max-neighbors", max_neighbors, "Keep at most this many nearest neighbors");
  simulate->add_option("--mask-p", mask_p, "Observation probability")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--baseline-resamples", baseline_resamples, "Fresh samples averaged for the baseline");

  // verify
  auto* verify = app.add_subcommand("verify", "Monte-Carlo and exact checks against closed forms");
  add_common(verify);
  std::string check = "uniform-barycenter";
  std::vector<std::size_t> m_list{1, 5, 20};
  std::vector<std::size_t> n_list;
  std::vector<std::size_t> k_list{8, 16, 32};
  std::optional<std::size_t> verify_trials;
  double width = 1.0;
  verify->add_option("--check", check, "Which check")
      ->check(CLI::IsMember({"uniform-barycenter", "barycenter-rate", "oracle"}));
  verify->add_option("--m", m_list, "Barycenter member counts")->delimiter(',');
  verify->add_option("--n", n_list, "Samples per member")->delimiter(',');
  verify->add_option("--k", k_list, "Member counts for the rate check")->delimiter(',');
  verify->add_option("--trials", verify_trials, "Monte-Carlo trials per cell");
  verify->add_option("--width", width, "Common interval width")->check(CLI::NonNegativeNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic panel file");
  add_common(gen);
  add_dgp_options(gen, dgp);
  std::string format = "csv";
  gen->add_option("--rows", rows, "Rows")->check(CLI::PositiveNumber);
  gen->add_option("--cols", cols, "Columns")->check(CLI::PositiveNumber);
  gen->add_option("--n", n, "Samples per entry")->check(CLI::PositiveNumber);
  gen->add_option("--mask-p", mask_p, "Observation probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    json cfg;
    if (!config_path.empty()) {
      check_config_alone(sub);
      cfg = load_config(config_path, command);
    } else {
      cfg["command"] = command;
      cfg["seed"] = seed;
      if (command == "impute" || command == "tune" || command == "bands") {
        if (input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
        cfg["input"] = input;
        eta_to_json(cfg, eta_opts);
        if (command == "impute" && all_missing) {
          if (!target.row.empty() || !target.col.empty()) {
            throw Error(ErrorCode::InvalidArgument, "--all-missing excludes --row/--col");
          }
        } else if (target.row.empty() || target.col.empty()) {
          throw Error(ErrorCode::BadTarget, "--row and --col are required");
        }
        cfg["row"] = target.row;
        cfg["col"] = target.col;
      }
      if (command == "tune" && eta_opts.eta) throw Error(ErrorCode::InvalidArgument, "tune does not take --eta");
      if (command == "impute") {
        cfg["all_missing"] = all_missing;
        cfg["fallback_nearest"] = fallback;
        cfg["var_alpha"] = var_alpha;
      } else if (command == "bands") {
        if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "--alpha must lie in (0, 1]");
        cfg["alpha"] = alpha;
        cfg["levels"] = levels;
        cfg["simultaneous"] = simultaneous;
        cfg["method"] = method;
        cfg["reps_samples"] = reps_samples;
        cfg["reps_neighbors"] = reps_neighbors;
        cfg["var_alpha"] = var_alpha;
      } else if (command == "simulate") {
        cfg["experiment"] = experiment;
        cfg["dgp"] = dgp_to_json(dgp);
        cfg["sweep"] = sweep;
        cfg["values"] = values;
        cfg["trials"] = trials;
        cfg["rows"] = rows;
        cfg["cols"] = cols;
        cfg["n"] = n;
        cfg["eta"] = optional_number(eta_opts.eta);
        cfg["budget"] = eta_opts.budget;
        cfg["min_neighbors"] = min_neighbors;
        cfg["max_neighbors"] = max_neighbors ? json(*max_neighbors) : json(nullptr);
        cfg["mask_p"] = mask_p;
        cfg["baseline_resamples"] = baseline_resamples;
      } else if (command == "verify") {
        cfg["check"] = check;
        if (check == "uniform-barycenter") {
          cfg["m_list"] = m_list;
          cfg["n_list"] = n_list.empty() ? std::vector<std::size_t>{5, 20, 100} : n_list;
          cfg["width"] = width;
          cfg["trials"] = verify_trials.value_or(10000);
        } else if (check == "barycenter-rate") {
          cfg["k_list"] = k_list;
          cfg["n_list"] = n_list.empty() ? std::vector<std::size_t>{500} : n_list;
          cfg["trials"] = verify_trials.value_or(2000);
        } else {
          cfg["trials"] = verify_trials.value_or(1000);
        }
      } else if (command == "generate") {
        cfg["dgp"] = dgp_to_json(dgp);
        cfg["rows"] = rows;
        cfg["cols"] = cols;
        cfg["n"] = n;
        cfg["mask_p"] = mask_p;
        cfg["format"] = format;
      }
    }

    if (command == "impute") return run_impute(cfg, output);
    if (command == "tune") return run_tune(cfg, output);
    if (command == "bands") return run_bands(cfg, output);
    if (command == "simulate") return run_simulate(cfg, output, csv_path);
    if (command == "verify") return run_verify(cfg, output);
    return run_generate(cfg, output);
  } catch (const PartialNoNeighbors&) {
    report_error("NoNeighbors", "some entries had no neighbors; see no_neighbors in the output");
    return kExitNoNeighbors;
  } catch (const Error& e) {
    report_error(std::string(to_string(e.code())), e.what());
    return e.code() == ErrorCode::NoNeighbors ? kExitNoNeighbors : kExitInput;
  } catch (const json::exception& e) {
    report_error("ParseError", std::string("config: ") + e.what());
    return kExitInput;
  }
}
