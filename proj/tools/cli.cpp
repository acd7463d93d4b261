#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wignerscope/errors.hpp"
#include "wignerscope/estimator.hpp"
#include "wignerscope/kernels.hpp"
#include "wignerscope/lowerbound.hpp"
#include "wignerscope/sampler.hpp"

namespace wignerscope::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Artifacts {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("--out: cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw ValidationError("--out: failed writing '" + path + "'");
}

std::string read_file(const std::string& path, const std::string& flag) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError(flag + ": cannot open '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t resolve_threads(const CLI::App& sub, std::size_t flag) {
  if (sub.count("--threads") > 0) return flag;
  if (const char* env = std::getenv("WIGNERSCOPE_THREADS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ValidationError("WIGNERSCOPE_THREADS must be an integer");
    return static_cast<std::size_t>(v);
  }
  return 0;
}

std::vector<PhasePoint> parse_points(const std::string& text) {
  std::vector<PhasePoint> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw ValidationError("--points entries must look like q,p");
    try {
      std::size_t used = 0;
      const std::string qs = item.substr(0, comma);
      const std::string ps = item.substr(comma + 1);
      const double q = std::stod(qs, &used);
      if (used != qs.size()) throw std::invalid_argument(qs);
      const double p = std::stod(ps, &used);
      if (used != ps.size()) throw std::invalid_argument(ps);
      pts.push_back({q, p});
    } catch (const std::logic_error&) {
      throw ValidationError("--points: cannot parse '" + item + "'");
    }
  }
  if (pts.empty()) throw ValidationError("--points must name at least one point");
  return pts;
}

void require_positive(double v, const char* flag) {
  if (!(v > 0.0 && std::isfinite(v))) throw ValidationError(std::string(flag) + " must be positive");
}

double parse_number(const std::string& text, const char* flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ValidationError(std::string(flag) + ": cannot parse '" + text + "'");
}

// Flags of a subcommand with their resolved values, in declaration order.
ordered_json resolved_flags(const CLI::App& sub) {
  ordered_json flags = ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = opt->get_default_str();
    }
    if (opt->count() == 0 && value.empty()) continue;
    flags[opt->get_name()] = value;
  }
  return flags;
}

void write_manifest(const CLI::App& sub, const Artifacts& art) {
  if (art.outputs.empty()) return;
  ordered_json m;
  m["command"] = sub.get_name();
  m["tool_version"] = WIGNERSCOPE_VERSION;
  m["flags"] = resolved_flags(sub);
  if (sub.get_option_no_throw("--seed") != nullptr)
    m["seed"] = m["flags"].value("--seed", std::string());
  ordered_json ins = ordered_json::array();
  for (const auto& p : art.inputs) ins.push_back({{"path", p}, {"fnv1a64", file_digest(p)}});
  ordered_json outs = ordered_json::array();
  for (const auto& p : art.outputs) outs.push_back({{"path", p}, {"fnv1a64", file_digest(p)}});
  m["inputs"] = ins;
  m["outputs"] = outs;
  write_file(manifest_path(art.outputs.front()), m.dump(2) + "\n");
}

struct Options {
  // shared
  std::string out;
  std::size_t threads = 0;
  std::uint64_t seed = 1;
  double eta = 0.9;
  std::size_t n = 5000;
  std::string state = "fock:1";
  // estimator
  std::string data;
  std::string h = "opt";
  double beta = 0.2;
  double r = 2.0;
  std::string L = "1";
  std::string variant = "sharp";
  std::string grid = "-4:4:101,-4:4:101";
  // risk
  std::size_t reps = 100;
  std::string points = "0,0";
  std::size_t bins = 0;
  // kernel-table
  double umax = 10.0;
  std::optional<double> step;
  // cut
  double p = 0.0;
  double qmin = -4.0;
  double qmax = 4.0;
  std::size_t steps = 161;
  // lb-verify
  double alpha = 0.2;
  double xi = 0.95;
  double delta = 0.1;
  double bigD = 1.0;
  std::optional<double> htilde;
  std::size_t kmax = 2000;
  // replay
  std::string manifest;
};

SmoothnessClass class_from(const Options& o) {
  SmoothnessClass cls{o.beta, o.r, parse_number(o.L, "--L")};
  cls.validate();
  return cls;
}

Artifacts do_simulate(const CLI::App& sub, const Options& o, std::ostream& out) {
  const NoiseModel noise(o.eta);
  if (o.n == 0) throw ValidationError("--n must be >= 1");
  const StateSpec spec = parse_state_spec(o.state);
  SamplerConfig sc;
  sc.threads = resolve_threads(sub, o.threads);
  const Dataset ds = simulate(spec, o.n, noise.eta(), o.seed, sc);
  write_dataset(ds, o.out);
  out << "wrote " << ds.records.size() << " records to " << o.out << "\n";
  return {{}, {o.out}};
}

KernelSpec kernel_for(const Options& o, const Dataset& ds) {
  const NoiseModel noise(ds.meta.eta);
  const BandwidthRule rule = BandwidthRule::parse(o.h, class_from(o));
  const double h = bandwidth(rule, ds.records.size(), noise);
  return KernelSpec(h, noise, parse_kernel_variant(o.variant));
}

Artifacts do_estimate(const CLI::App& sub, const Options& o, std::ostream& out) {
  class_from(o);
  parse_kernel_variant(o.variant);
  const GridSpec grid = GridSpec::parse(o.grid);
  const std::size_t threads = resolve_threads(sub, o.threads);
  const Dataset ds = read_dataset(o.data);
  const KernelSpec spec = kernel_for(o, ds);
  const WignerGrid w = estimate_grid(ds, spec, grid, threads);
  std::string csv = "q,p,west\n";
  for (std::size_t i = 0; i < w.q.size(); ++i)
    for (std::size_t j = 0; j < w.p.size(); ++j)
      csv += g17(w.q[i]) + "," + g17(w.p[j]) + "," + g17(w.at(i, j)) + "\n";
  write_file(o.out, csv);
  out << "h = " << g17(spec.h) << "; wrote " << w.values.size() << " grid values to " << o.out
      << "\n";
  return {{o.data}, {o.out}};
}

Artifacts do_cut(const CLI::App& sub, const Options& o, std::ostream& out) {
  class_from(o);
  parse_kernel_variant(o.variant);
  if (o.steps < 2) throw ValidationError("--steps must be >= 2");
  if (!(o.qmax > o.qmin)) throw ValidationError("--qmax must exceed --qmin");
  const std::size_t threads = resolve_threads(sub, o.threads);
  const Dataset ds = read_dataset(o.data);
  std::string state_text = sub.count("--state") > 0 ? o.state : ds.meta.state;
  StateSpec spec_state;
  try {
    spec_state = parse_state_spec(state_text);
  } catch (const ValidationError&) {
    throw ValidationError("--state is required: dataset state '" + ds.meta.state +
                          "' cannot be rebuilt");
  }
  const DensityMatrix rho = materialize(spec_state);
  const KernelSpec spec = kernel_for(o, ds);
  GridSpec grid;
  grid.q_min = o.qmin;
  grid.q_max = o.qmax;
  grid.q_steps = o.steps;
  grid.p_min = grid.p_max = o.p;
  grid.p_steps = 1;
  const WignerGrid w = estimate_grid(ds, spec, grid, threads);
  std::string csv = "q,west,wtrue\n";
  for (std::size_t i = 0; i < w.q.size(); ++i)
    csv += g17(w.q[i]) + "," + g17(w.at(i, 0)) + "," + g17(wigner_eval(rho, {w.q[i], o.p})) + "\n";
  write_file(o.out, csv);
  out << "h = " << g17(spec.h) << "; wrote " << w.q.size() << " cut points to " << o.out << "\n";
  return {{o.data}, {o.out}};
}

Artifacts do_risk(const CLI::App& sub, const Options& o, std::ostream& out) {
  RiskConfig config;
  config.state = parse_state_spec(o.state);
  config.eta = NoiseModel(o.eta).eta();
  config.rule = BandwidthRule::parse(o.h, class_from(o));
  config.variant = parse_kernel_variant(o.variant);
  config.points = parse_points(o.points);
  config.n = o.n;
  config.reps = o.reps;
  config.seed = o.seed;
  config.bins = o.bins;
  config.threads = resolve_threads(sub, o.threads);
  if (config.reps == 0) throw ValidationError("--reps must be >= 1");
  if (config.n < 2) throw ValidationError("--n must be >= 2");
  if (config.bins == 1) throw ValidationError("--bins must be 0 or >= 2");
  const RiskReport report = risk_eval(config);
  write_file(o.out, to_json(report) + "\n");
  for (std::size_t i = 0; i < report.points.size(); ++i)
    out << "MSE(" << report.points[i].q << "," << report.points[i].p
        << ") = " << g17(report.per_point_mse[i]) << "\n";
  return {{}, {o.out}};
}

Artifacts do_kernel_table(const CLI::App&, const Options& o, std::ostream& out) {
  const NoiseModel noise(o.eta);
  require_positive(parse_number(o.h, "--h"), "--h");
  const KernelSpec spec(parse_number(o.h, "--h"), noise, parse_kernel_variant(o.variant));
  require_positive(o.umax, "--umax");
  const double step = o.step ? *o.step : suggested_table_step(spec);
  require_positive(step, "--step");
  const KernelTable table = build_table(spec, o.umax, step);
  std::string csv = "u,value\n";
  for (std::size_t i = 0; i < table.values().size(); ++i)
    csv += g17(step * static_cast<double>(i)) + "," + g17(table.values()[i]) + "\n";
  write_file(o.out, csv);
  out << "wrote " << table.values().size() << " kernel nodes to " << o.out << "\n";
  return {{}, {o.out}};
}

Artifacts do_lb_verify(const CLI::App&, const Options& o, std::ostream& out) {
  const AlphaXi axi{o.alpha, o.xi};
  axi.validate();
  const BumpSpec bump{o.delta, o.bigD};
  bump.validate();
  const NoiseModel noise(o.eta);
  if (o.n < 16) throw ValidationError("--n must be >= 16");
  SmoothnessClass cls{o.beta, o.r, 1.0};
  cls.validate();
  cls.L = o.L == "auto" ? pair_class_constant(axi, o.beta, o.r, bump) : parse_number(o.L, "--L");
  cls.validate();
  PairOptions opts;
  opts.htilde = o.htilde;
  opts.k_max = o.kmax;
  if (o.kmax > kMaxSpecialOrder) throw ValidationError("--kmax must be <= 2000");
  const PairReport rep = verify_pair(axi, bump, cls, noise, o.n, opts);
  ordered_json j = ordered_json::parse(to_json(rep));
  j["L"] = cls.L;
  write_file(o.out, j.dump(2) + "\n");
  out << "positivity " << (rep.positivity_ok ? "ok" : "FAILED") << ", class "
      << (rep.class_ok ? "ok" : "FAILED") << ", separation " << (rep.separation_ok ? "ok" : "FAILED")
      << ", chi2 " << (rep.chi2_ok ? "ok" : "FAILED") << "\n";
  return {{}, {o.out}};
}

void add_threads(CLI::App* sub, Options& o) {
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_digest(const std::string& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(path, "digest"))));
  return buf;
}

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Homodyne tomography simulation, Wigner function estimation and lower-bound checks",
               "wignerscope"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(WIGNERSCOPE_VERSION));
  app.require_subcommand(1);

  using Handler = std::function<Artifacts(const CLI::App&, const Options&, std::ostream&)>;
  std::vector<std::pair<CLI::App*, Handler>> commands;

  auto* sim = app.add_subcommand("simulate", "Simulate a noisy homodyne dataset");
  sim->add_option("--state", o.state, "fock:n | coherent:q0,p0 | squeezed:s | cat:q0[,q|p] | file:path")
      ->required();
  sim->add_option("--n", o.n, "Number of records")->required();
  sim->add_option("--eta", o.eta, "Detection efficiency in (0,1)")->capture_default_str();
  sim->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  sim->add_option("--out", o.out, "Dataset CSV path")->required();
  add_threads(sim, o);
  commands.emplace_back(sim, do_simulate);

  auto add_estimator_flags = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Dataset CSV")->required();
    sub->add_option("--h", o.h, "Bandwidth: number or opt|h1|h2|r2|adaptive")->capture_default_str();
    sub->add_option("--beta", o.beta, "Class parameter beta")->capture_default_str();
    sub->add_option("--r", o.r, "Class parameter r in (0,2]")->capture_default_str();
    sub->add_option("--L", o.L, "Class parameter L")->capture_default_str();
    sub->add_option("--variant", o.variant, "sharp | modified")->capture_default_str();
    sub->add_option("--out", o.out, "Output CSV")->required();
    add_threads(sub, o);
  };

  auto* est = app.add_subcommand("estimate", "Estimate the Wigner function on a grid");
  add_estimator_flags(est);
  est->add_option("--grid", o.grid, "qmin:qmax:steps,pmin:pmax:steps")->capture_default_str();
  commands.emplace_back(est, do_estimate);

  auto* cut = app.add_subcommand("cut", "Estimate along the line p = const next to the true W");
  add_estimator_flags(cut);
  cut->add_option("--p", o.p, "p coordinate of the cut")->capture_default_str();
  cut->add_option("--qmin", o.qmin)->capture_default_str();
  cut->add_option("--qmax", o.qmax)->capture_default_str();
  cut->add_option("--steps", o.steps)->capture_default_str();
  cut->add_option("--state", o.state, "True state (defaults to the dataset's)");
  commands.emplace_back(cut, do_cut);

  auto* risk = app.add_subcommand("risk", "Monte Carlo pointwise risk");
  risk->add_option("--state", o.state)->required();
  risk->add_option("--eta", o.eta)->capture_default_str();
  risk->add_option("--n", o.n)->capture_default_str();
  risk->add_option("--reps", o.reps)->capture_default_str();
  risk->add_option("--points", o.points, "q,p;q,p;...")->capture_default_str();
  risk->add_option("--rule", o.h, "Bandwidth: number or opt|h1|h2|r2|adaptive")->capture_default_str();
  risk->add_option("--beta", o.beta)->capture_default_str();
  risk->add_option("--r", o.r)->capture_default_str();
  risk->add_option("--L", o.L)->capture_default_str();
  risk->add_option("--variant", o.variant)->capture_default_str();
  risk->add_option("--bins", o.bins, "Estimate from a bins x bins histogram (0 = raw)")
      ->capture_default_str();
  risk->add_option("--seed", o.seed)->capture_default_str();
  risk->add_option("--out", o.out, "Report JSON")->required();
  add_threads(risk, o);
  commands.emplace_back(risk, do_risk);

  auto* kt = app.add_subcommand("kernel-table", "Tabulate the deconvolution kernel");
  kt->add_option("--h", o.h)->required();
  kt->add_option("--eta", o.eta)->capture_default_str();
  kt->add_option("--variant", o.variant)->capture_default_str();
  kt->add_option("--umax", o.umax)->capture_default_str();
  kt->add_option("--step", o.step, "Node spacing (default 0.2 / cutoff)");
  kt->add_option("--out", o.out)->required();
  commands.emplace_back(kt, do_kernel_table);

  auto* lb = app.add_subcommand("lb-verify", "Check the two-hypothesis lower-bound construction");
  lb->add_option("--alpha", o.alpha)->capture_default_str();
  lb->add_option("--xi", o.xi)->capture_default_str();
  lb->add_option("--beta", o.beta)->capture_default_str();
  lb->add_option("--r", o.r)->capture_default_str();
  lb->add_option("--L", o.L, "Class constant, or 'auto' for the smallest admissible value")
      ->capture_default_str();
  lb->add_option("--eta", o.eta)->capture_default_str();
  lb->add_option("--n", o.n)->required();
  lb->add_option("--delta", o.delta)->capture_default_str();
  lb->add_option("--bigD", o.bigD)->capture_default_str();
  lb->add_option("--htilde", o.htilde, "Override the solved perturbation bandwidth");
  lb->add_option("--kmax", o.kmax)->capture_default_str();
  lb->add_option("--out", o.out)->required();
  commands.emplace_back(lb, do_lb_verify);

  auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rp->add_option("--manifest", o.manifest)->required();

  if (!args.empty()) {
    if (const CLI::App* sub = app.get_subcommand_no_throw(args.front())) {
      for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        const std::string name = a.substr(0, a.find('='));
        if (name != "--help" && sub->get_option_no_throw(name) == nullptr) {
          err << "error: unknown flag " << name << " for " << sub->get_name() << "\n";
          return 1;
        }
      }
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << WIGNERSCOPE_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (rp->parsed()) {
      const ordered_json m = ordered_json::parse(read_file(o.manifest, "--manifest"));
      std::vector<std::string> replay{m.at("command").get<std::string>()};
      for (const auto& [key, value] : m.at("flags").items()) {
        replay.push_back(key);
        replay.push_back(value.get<std::string>());
      }
      return run(replay, out, err);
    }
    for (auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      const Artifacts art = handler(*sub, o, out);
      write_manifest(*sub, art);
    }
    return 0;
  } catch (const nlohmann::json::exception& e) {
    err << "error: --manifest: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericGuardError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace wignerscope::cli
