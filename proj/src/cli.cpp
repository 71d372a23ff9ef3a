#include "valley/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "valley/densities.hpp"
#include "valley/empirical.hpp"
#include "valley/error.hpp"
#include "valley/fitting.hpp"
#include "valley/io.hpp"
#include "valley/moments.hpp"
#include "valley/simulate.hpp"
#include "valley/special.hpp"

namespace valley::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ModelOpts {
  std::string weight = "delta";
  double tau0 = 1.0;
  double beta = 1.0;
  double mu = 0.0;
  double delta = 1.0;  // uniform half width
  double sigma = 1.0;
  double alpha = 2.0;
};

void add_model_options(CLI::App* cmd, ModelOpts& m, bool with_weight) {
  if (with_weight) {
    cmd->add_option("--weight", m.weight, "Priority density")
        ->check(CLI::IsMember({"delta", "uniform", "laplace", "stretched"}))
        ->capture_default_str();
  }
  cmd->add_option("--tau0", m.tau0, "Time scale tau0")->capture_default_str();
  cmd->add_option("--beta", m.beta, "Inverse temperature")->capture_default_str();
  cmd->add_option("--mu", m.mu, "Priority location (delta, stretched)")->capture_default_str();
  cmd->add_option("--delta", m.delta, "Uniform half width")->capture_default_str();
  cmd->add_option("--sigma", m.sigma, "Width (laplace, stretched)")->capture_default_str();
  cmd->add_option("--alpha", m.alpha, "Stretching exponent")->capture_default_str();
}

ModelParams build_model(const ModelOpts& m, const std::string& weight) {
  ModelParams p;
  p.tau0 = m.tau0;
  p.beta = m.beta;
  if (weight == "delta") {
    p.weight = Delta{m.mu};
  } else if (weight == "uniform") {
    p.weight = Uniform{m.delta};
  } else if (weight == "laplace") {
    p.weight = Laplace{m.sigma};
  } else {
    p.weight = StretchedExp{m.mu, m.sigma, m.alpha};
  }
  validate(p);
  return p;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) {
    throw DomainError("grid: need 0 < min <= max and at least one point");
  }
  if (n == 1) return {lo};
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

// Writes to --output, else $VALLEY_OUTPUT_DIR/<name>, else `out`.
void emit(const std::string& content, const std::string& path, const std::string& name,
          std::ostream& out) {
  std::string target = path;
  if (target.empty()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
      fs::create_directories(dir);
      target = (fs::path(dir) / name).string();
    }
  }
  if (target.empty()) {
    out << content;
    return;
  }
  std::ofstream f(target, std::ios::binary);
  if (!f) throw FormatError("cannot write '" + target + "'");
  f << content;
}

std::string table_text(const io::Table& t) {
  std::ostringstream s;
  io::write_csv(s, t);
  return s.str();
}

// --config FILE: every key becomes --key VALUE unless given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (*it == "--config" && std::next(it) != args.end()) {
      path = *std::next(it);
      args.erase(it, it + 2);
      break;
    }
    if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
      args.erase(it);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream f(path);
  if (!f) throw FormatError("cannot open config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw FormatError("config must be a JSON object");

  if ((args.empty() || args.front().rfind("-", 0) == 0) && cfg.contains("command")) {
    args.insert(args.begin(), cfg.at("command").get<std::string>());
  }
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    auto scalar = [&](const json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number()) return v.dump();
      throw FormatError("config: unsupported value for '" + key + "'");
    };
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      args.push_back(flag);
      for (const auto& v : value) args.push_back(scalar(v));
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

// ---------------------------------------------------------------------------

struct PtdOpts {
  ModelOpts model;
  std::vector<double> t;
  double tmin = 1e-3;
  double tmax = 1e3;
  int nt = 61;
  std::string output;
};

std::string cmd_ptd(const PtdOpts& o) {
  const ModelParams p = build_model(o.model, o.model.weight);
  const auto grid = o.t.empty() ? log_grid(o.tmin, o.tmax, o.nt) : o.t;
  io::Table t;
  t.header = {"t", "psi", "sojourn"};
  t.columns.resize(3);
  for (double x : grid) {
    t.columns[0].push_back(x);
    t.columns[1].push_back(ptd(x, p));
    t.columns[2].push_back(sojourn(x, p));
  }
  return table_text(t);
}

struct MomentOpts {
  std::string model;
  ModelOpts params;
  double c0 = 0.0;
  double b = 1.0;
  double b1 = 0.2;
  double qmin = 0.0;
  double qmax = 3.0;
  double qstep = 0.1;
  std::string output;
};

double curve_value(double q, const MomentOpts& o) {
  if (q == 0.0) return 0.0;
  const std::string& m = o.model;
  if (m == "mf") return log_moment_mf(q, MFParams{o.params.alpha, o.c0, o.b}) - log_gamma(1.0 + q);
  if (m == "hmf") {
    return log_moment_hmf(q, HMFParams{o.params.alpha, o.c0, o.b, o.b1}) - log_gamma(1.0 + q);
  }
  if (m == "delta" || m == "uniform" || m == "laplace") {
    return log_norm_moment(q, build_model(o.params, m));
  }
  const ModelParams p = build_model(o.params, "stretched");
  const auto& w = std::get<StretchedExp>(p.weight);
  if (m == "gaussian") return std::log(moment_gaussian(q, p)) - log_gamma(1.0 + q);
  if (m == "series") {
    const SeriesResult s = moment_stretched_series(q, p);
    if (!s.converged) throw DomainError("series did not converge at q = " + io::format_number(q));
    return std::log(s.value) - log_gamma(1.0 + q);
  }
  // saddle
  const SaddlePointResult s = saddlepoint_iq(q, w.alpha, p.beta * w.sigma);
  return q * (std::log(p.tau0) + p.beta * w.mu) + std::log(s.value) - std::log(2.0) -
         log_gamma(1.0 + 1.0 / w.alpha);
}

std::string cmd_moments(const MomentOpts& o) {
  const auto grid = make_q_grid(o.qmin, o.qmax, o.qstep);
  io::Table t;
  t.header = {"q", "log_norm_moment"};
  t.columns.resize(2);
  for (double q : grid) {
    t.columns[0].push_back(q);
    t.columns[1].push_back(curve_value(q, o));
  }
  return table_text(t);
}

struct SimOpts {
  ModelOpts model;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output;
};

std::string cmd_simulate(const SimOpts& o) {
  SimConfig cfg{build_model(o.model, o.model.weight), o.n, o.seed, o.threads};
  const EventSeries s = generate_series(cfg);
  std::string text = "dt\n";
  text.reserve(s.size() * 20);
  for (double d : s.durations) {
    text += io::format_number(d);
    text += '\n';
  }
  return text;
}

struct EstimateOpts {
  std::string input;
  std::string input_kind;
  std::optional<double> gap_cutoff;
  double min_duration = 0.0;
  double qmin = 0.0;
  double qmax = 20.0;
  double qstep = 0.1;
  std::string sojourn_out;
  std::optional<double> tmin;
  std::optional<double> tmax;
  int nt = 50;
  std::string output;
};

EventSeries load_series(const std::string& path, const std::string& kind_flag,
                        const IngestOptions& base) {
  const io::Table t = io::read_csv_file(path);
  IngestOptions opts = base;
  std::string column;
  if (t.has_column("t")) {
    column = "t";
  } else if (t.has_column("dt")) {
    column = "dt";
  } else {
    throw FormatError("input CSV needs a 't' or 'dt' column");
  }
  if (kind_flag.empty()) {
    opts.input_kind = column == "t" ? InputKind::Timestamps : InputKind::Durations;
  } else {
    opts.input_kind = kind_flag == "timestamps" ? InputKind::Timestamps : InputKind::Durations;
  }
  return ingest(t.column(column), opts, path);
}

std::string cmd_estimate(const EstimateOpts& o, std::ostream& out) {
  IngestOptions base;
  base.gap_cutoff = o.gap_cutoff;
  base.min_duration = o.min_duration;
  const EventSeries s = load_series(o.input, o.input_kind, base);
  if (s.empty()) throw DomainError("estimate: no durations left after ingest");
  const auto grid = make_q_grid(o.qmin, o.qmax, o.qstep);
  std::ostringstream curve;
  io::write_curve(curve, empirical_qmoments(s, grid));

  if (!o.sojourn_out.empty()) {
    const auto [lo, hi] = std::minmax_element(s.durations.begin(), s.durations.end());
    const auto tg = log_grid(o.tmin.value_or(*lo), o.tmax.value_or(*hi), o.nt);
    io::Table t;
    t.header = {"t", "psi"};
    t.columns = {tg, empirical_sojourn(s, tg)};
    emit(table_text(t), o.sojourn_out, "sojourn.csv", out);
  }
  return curve.str();
}

struct FitOpts {
  std::string input;
  std::string kind;
  std::optional<double> qmin;
  std::optional<double> qmax;
  std::string output;
};

std::string cmd_fit(const FitOpts& o) {
  const io::Table t = io::read_csv_file(o.input);
  FitResult fit;
  if (o.kind.rfind("sojourn-", 0) == 0) {
    // Rows with Psi = 0 (beyond the largest observation) carry no log information.
    std::vector<double> tt, psi;
    const auto& tc = t.column("t");
    const auto& pc = t.column("psi");
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (pc[i] > 0.0) {
        tt.push_back(tc[i]);
        psi.push_back(pc[i]);
      }
    }
    fit = fit_sojourn(tt, psi,
                      o.kind == "sojourn-qexp" ? SojournClass::QExponential : SojournClass::Weibull);
  } else {
    const QMomentCurve curve = io::curve_from_table(t);
    if (o.kind == "mono") {
      fit = fit_monofractal(curve, o.qmin.value_or(10.0), o.qmax.value_or(20.0));
    } else if (o.kind == "mf") {
      fit = fit_mf(curve, o.qmin.value_or(0.0), o.qmax.value_or(3.5));
    } else {
      fit = fit_hmf(curve, o.qmin.value_or(0.0), o.qmax.value_or(20.0));
    }
  }
  return io::to_json(fit).dump(2) + "\n";
}

struct CollapseOpts {
  std::string datasets;
  std::string output;
};

MFParams mf_from(const json& j) {
  MFParams p{j.at("alpha").get<double>(), j.at("c0").get<double>(), j.at("b").get<double>()};
  validate(p);
  return p;
}

HMFParams hmf_from(const json& j) {
  HMFParams p{j.at("alpha").get<double>(), j.at("c0").get<double>(), j.at("b").get<double>(),
              j.at("b1").get<double>()};
  validate(p);
  return p;
}

std::string cmd_collapse(const CollapseOpts& o) {
  std::ifstream f(o.datasets);
  if (!f) throw FormatError("cannot open '" + o.datasets + "'");
  const json cfg = json::parse(f);
  const fs::path base = fs::path(o.datasets).parent_path();
  const double theta = cfg.value("theta", std::numeric_limits<double>::quiet_NaN());

  std::optional<HMFParams> reference;
  if (cfg.contains("reference")) {
    const auto name = cfg.at("reference").get<std::string>();
    for (const auto& d : cfg.at("datasets")) {
      if (d.at("name").get<std::string>() == name && d.contains("hmf")) reference = hmf_from(d.at("hmf"));
    }
    if (!reference) throw FormatError("collapse: reference '" + name + "' has no hmf parameters");
  }

  io::Table out_table;
  std::vector<std::string> labels;
  std::vector<std::string> kinds;
  std::vector<double> qs, xs, vs;
  auto add = [&](const std::string& name, const char* kind, const Diagnostic& d) {
    for (const auto& pt : d) {
      if (!pt.value) continue;
      labels.push_back(name);
      kinds.push_back(kind);
      qs.push_back(pt.q);
      xs.push_back(pt.abscissa);
      vs.push_back(*pt.value);
    }
  };

  for (const auto& d : cfg.at("datasets")) {
    const std::string name = d.at("name").get<std::string>();
    fs::path curve_path = d.at("curve").get<std::string>();
    if (curve_path.is_relative()) curve_path = base / curve_path;
    const QMomentCurve curve = io::curve_from_table(io::read_csv_file(curve_path.string()));
    if (d.contains("tau")) {
      const double tau = d.at("tau").get<double>();
      if (!std::isnan(theta)) add(name, "phi", phi_ratio(curve, tau, theta));
      add(name, "f_F", f_F(curve, tau));
    }
    if (d.contains("mf")) add(name, "f_MF", f_MF(curve, mf_from(d.at("mf"))));
    if (d.contains("hmf")) {
      const HMFParams p = hmf_from(d.at("hmf"));
      add(name, "f_HMF", f_HMF(curve, p));
      add(name, "transform", transform_moment(curve, p));
      if (reference) {
        Diagnostic qhat;
        for (double q : curve.q_grid) {
          if (q > 0.0) qhat.push_back({q, q, scale_q(q, p, *reference)});
        }
        add(name, "q_hat", qhat);
      }
    }
  }

  std::ostringstream s;
  s << "dataset,diagnostic,q,abscissa,value\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s << labels[i] << ',' << kinds[i] << ',' << io::format_number(qs[i]) << ','
      << io::format_number(xs[i]) << ',' << io::format_number(vs[i]) << '\n';
  }
  return s.str();
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interevent-time mixture models: densities, moments, simulation and fits", "valley"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  PtdOpts ptd_o;
  auto* ptd_cmd = app.add_subcommand("ptd", "Density and sojourn probability on a t grid");
  add_model_options(ptd_cmd, ptd_o.model, true);
  ptd_cmd->add_option("--t", ptd_o.t, "Explicit t values");
  ptd_cmd->add_option("--tmin", ptd_o.tmin)->capture_default_str();
  ptd_cmd->add_option("--tmax", ptd_o.tmax)->capture_default_str();
  ptd_cmd->add_option("--nt", ptd_o.nt, "Log-spaced points")->capture_default_str();
  ptd_cmd->add_option("-o,--output", ptd_o.output);

  MomentOpts mom_o;
  auto* mom_cmd = app.add_subcommand("moments", "Analytic normalised log-moment curves");
  mom_cmd->add_option("--model", mom_o.model)
      ->required()
      ->check(CLI::IsMember(
          {"delta", "uniform", "laplace", "series", "gaussian", "saddle", "mf", "hmf"}));
  add_model_options(mom_cmd, mom_o.params, false);
  mom_cmd->add_option("--c0", mom_o.c0)->capture_default_str();
  mom_cmd->add_option("--b", mom_o.b)->capture_default_str();
  mom_cmd->add_option("--b1", mom_o.b1)->capture_default_str();
  mom_cmd->add_option("--qmin", mom_o.qmin)->capture_default_str();
  mom_cmd->add_option("--qmax", mom_o.qmax)->capture_default_str();
  mom_cmd->add_option("--qstep", mom_o.qstep)->capture_default_str();
  mom_cmd->add_option("-o,--output", mom_o.output);

  SimOpts sim_o;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw i.i.d. interevent times");
  add_model_options(sim_cmd, sim_o.model, true);
  sim_cmd->add_option("--n", sim_o.n, "Number of events")->required();
  sim_cmd->add_option("--seed", sim_o.seed)->capture_default_str();
  sim_cmd->add_option("--threads", sim_o.threads, "0 = all cores")->capture_default_str();
  sim_cmd->add_option("-o,--output", sim_o.output);

  EstimateOpts est_o;
  auto* est_cmd = app.add_subcommand("estimate", "Empirical moment curve and sojourn table");
  est_cmd->add_option("--input", est_o.input, "CSV with a t or dt column")
      ->required()
      ->check(CLI::ExistingFile);
  est_cmd->add_option("--input-kind", est_o.input_kind)
      ->check(CLI::IsMember({"timestamps", "durations"}));
  est_cmd->add_option("--gap-cutoff", est_o.gap_cutoff, "Session-break threshold (s)");
  est_cmd->add_option("--min-duration", est_o.min_duration)->capture_default_str();
  est_cmd->add_option("--qmin", est_o.qmin)->capture_default_str();
  est_cmd->add_option("--qmax", est_o.qmax)->capture_default_str();
  est_cmd->add_option("--qstep", est_o.qstep)->capture_default_str();
  est_cmd->add_option("--sojourn-out", est_o.sojourn_out, "Write t,psi here");
  est_cmd->add_option("--tmin", est_o.tmin);
  est_cmd->add_option("--tmax", est_o.tmax);
  est_cmd->add_option("--nt", est_o.nt)->capture_default_str();
  est_cmd->add_option("-o,--output", est_o.output);

  FitOpts fit_o;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a moment curve or a sojourn table");
  fit_cmd->add_option("--input", fit_o.input)->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--kind", fit_o.kind)
      ->required()
      ->check(CLI::IsMember({"mono", "mf", "hmf", "sojourn-qexp", "sojourn-weibull"}));
  fit_cmd->add_option("--qmin", fit_o.qmin);
  fit_cmd->add_option("--qmax", fit_o.qmax);
  fit_cmd->add_option("-o,--output", fit_o.output);

  CollapseOpts col_o;
  auto* col_cmd = app.add_subcommand("collapse", "Collapse diagnostics across datasets");
  col_cmd->add_option("--datasets", col_o.datasets, "JSON dataset list")
      ->required()
      ->check(CLI::ExistingFile);
  col_cmd->add_option("-o,--output", col_o.output);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }

    if (ptd_cmd->parsed()) {
      emit(cmd_ptd(ptd_o), ptd_o.output, "ptd.csv", out);
    } else if (mom_cmd->parsed()) {
      emit(cmd_moments(mom_o), mom_o.output, "moments.csv", out);
    } else if (sim_cmd->parsed()) {
      emit(cmd_simulate(sim_o), sim_o.output, "simulate.csv", out);
    } else if (est_cmd->parsed()) {
      const std::string curve = cmd_estimate(est_o, out);
      emit(curve, est_o.output, "estimate.csv", out);
    } else if (fit_cmd->parsed()) {
      emit(cmd_fit(fit_o), fit_o.output, "fit.json", out);
    } else if (col_cmd->parsed()) {
      emit(cmd_collapse(col_o), col_o.output, "collapse.csv", out);
    }
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return 1;
  } catch (const json::exception& e) {
    print_error(err, "format_error", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "error", e.what());
    return 1;
  }
  return 0;
}

}  // namespace valley::cli
