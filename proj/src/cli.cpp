#include "hhlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <streambuf>

#include "hhlab/dynamics.hpp"
#include "hhlab/energy.hpp"
#include "hhlab/errors.hpp"
#include "hhlab/experiments.hpp"
#include "hhlab/green.hpp"
#include "hhlab/params.hpp"
#include "hhlab/table.hpp"

namespace hhlab {
namespace {

enum class Kind { Int, Count, Seed, Real, IntList, RealList, Text, Switch };

struct FlagSpec {
  const char* name;
  Kind kind;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"n", Kind::IntList, "dimension(s), comma separated"},
    {"alpha", Kind::RealList, "weight exponent(s)"},
    {"p", Kind::RealList, "power(s)"},
    {"tol", Kind::Real, "integrator tolerance in [1e-13, 1e-4]"},
    {"seed", Kind::Seed, "64-bit seed for initial-data draws"},
    {"samples", Kind::Count, "trajectories per parameter point"},
    {"sampling", Kind::Text, "box | singular | removable | mixed"},
    {"center", Kind::Text, "box center: fixed-point | zero"},
    {"radius", Kind::Real, "box half-width"},
    {"amplitude", Kind::Real, "singular mode amplitude at t = 0"},
    {"depth", Kind::Real, "launch time for singular/removable draws"},
    {"t-start", Kind::Real, "initial log-radius"},
    {"t-end", Kind::Real, "final log-radius (negative: toward r = 0)"},
    {"spacing", Kind::Real, "output spacing in log-radius"},
    {"margin", Kind::Real, "classification margin"},
    {"window", Kind::Real, "classification window (time units)"},
    {"grid-nodes", Kind::Count, "radial grid size (studies use 1x, 2x, 4x)"},
    {"init", Kind::Text, "simulate: state | singular | removable"},
    {"w0", Kind::Real, "simulate: initial w"},
    {"w1", Kind::Real, "simulate: initial dw/dt"},
    {"w2", Kind::Real, "simulate: initial d2w/dt2"},
    {"w3", Kind::Real, "simulate: initial d3w/dt3"},
    {"field", Kind::Text, "green-check: radial field file"},
    {"jobs", Kind::Count, "worker threads"},
    {"out", Kind::Text, "output file (default: standard output)"},
    {"format", Kind::Text, "csv | aligned"},
    {"quiet", Kind::Switch, "no diagnostics"},
};

constexpr const char* kCommands[][2] = {
    {"coeffs", "exponents, coefficients, regime and w* for each parameter point"},
    {"simulate", "integrate one trajectory and print its samples"},
    {"classify", "classification sweep of seeded trajectories"},
    {"energy-audit", "energy monotonicity, rate law and scaling audit"},
    {"green-check", "Green representation, positivity, integrability and bounds"},
    {"atlas", "coefficient atlas over a parameter grid"},
};

const FlagSpec* find_flag(std::string_view name) {
  for (const auto& f : kFlags) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
bool parse_number(std::string_view text, T& value) {
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  return ec == std::errc() && ptr == t.data() + t.size() && !t.empty();
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(std::string_view name, std::string_view value, std::string_view what) {
  throw InvalidArgument("invalid value for --" + std::string(name) + ": '" + std::string(value) + "' (" +
                        std::string(what) + ")");
}

void check_value(const FlagSpec& spec, const std::string& value) {
  switch (spec.kind) {
    case Kind::Int: {
      long long v = 0;
      if (!parse_number(value, v)) bad_value(spec.name, value, "expected an integer");
      break;
    }
    case Kind::Count: {
      long long v = 0;
      if (!parse_number(value, v) || v < 0) bad_value(spec.name, value, "expected a nonnegative integer");
      break;
    }
    case Kind::Seed: {
      std::uint64_t v = 0;
      if (!parse_number(value, v)) bad_value(spec.name, value, "expected an unsigned 64-bit integer");
      break;
    }
    case Kind::Real: {
      double v = 0;
      if (!parse_number(value, v) || !std::isfinite(v)) bad_value(spec.name, value, "expected a real number");
      break;
    }
    case Kind::IntList:
      for (const auto& part : split(value, ',')) {
        long long v = 0;
        if (!parse_number(part, v)) bad_value(spec.name, value, "expected comma-separated integers");
      }
      break;
    case Kind::RealList:
      for (const auto& part : split(value, ',')) {
        double v = 0;
        if (!parse_number(part, v) || !std::isfinite(v)) {
          bad_value(spec.name, value, "expected comma-separated reals");
        }
      }
      break;
    case Kind::Text:
      if (value.empty()) bad_value(spec.name, value, "expected a value");
      break;
    case Kind::Switch:
      if (value != "true" && value != "false") bad_value(spec.name, value, "expected true or false");
      break;
  }
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config " + path + " line " + std::to_string(lineno);
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const FlagSpec* spec = find_flag(key);
    if (spec == nullptr || key == "config") throw InvalidArgument(where + ": unknown key '" + key + "'");
    try {
      check_value(*spec, value);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + ": " + e.what());
    }
    values[key] = value;
  }
  return values;
}

}  // namespace

CliInvocation parse_invocation(const std::vector<std::string>& args) {
  CLI::App app{"Numerical laboratory for the radial fourth-order Hardy-Henon equation", "hhlab"};
  app.require_subcommand(1);

  std::map<std::string, std::map<std::string, std::string>> storage;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_storage;
  for (const auto& [name, description] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    auto& store = storage[name];
    for (const auto& f : kFlags) {
      const std::string flag = std::string("--") + f.name;
      if (f.kind == Kind::Switch) {
        options[name][f.name] = sub->add_flag(flag, f.help);
      } else {
        options[name][f.name] = sub->add_option(flag, store[f.name], f.help);
      }
    }
    options[name]["config"] = sub->add_option("--config", config_storage[name], "flat key = value file");
  }

  for (const auto& arg : args) {
    double number = 0;
    if (arg.size() < 2 || arg[0] != '-' || parse_number(arg, number) || arg == "-h" || arg == "--help") continue;
    const std::string name = arg.substr(arg.find_first_not_of('-'), arg.find('=') - arg.find_first_not_of('-'));
    if (name != "config" && find_flag(name) == nullptr) throw InvalidArgument("unknown flag '" + arg + "'");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  CliInvocation inv;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    inv.help = true;
    for (const auto* sub : app.get_subcommands()) inv.usage = sub->help();
    if (inv.usage.empty()) inv.usage = app.help();
    return inv;
  } catch (const CLI::ParseError& e) {
    throw InvalidArgument(e.what());
  }

  const CLI::App* chosen = app.get_subcommands().front();
  inv.command = chosen->get_name();
  for (const auto& f : kFlags) {
    const CLI::Option* opt = options[inv.command][f.name];
    if (opt->count() == 0) continue;
    const std::string value = f.kind == Kind::Switch ? "true" : storage[inv.command][f.name];
    check_value(f, value);
    inv.flags[f.name] = value;
  }
  if (options[inv.command]["config"]->count() > 0) {
    inv.config_path = config_storage[inv.command];
    for (auto& [key, value] : read_config(*inv.config_path)) inv.flags.try_emplace(key, value);
  }
  return inv;
}

namespace {

class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
};

struct Flags {
  const std::map<std::string, std::string>& values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  double real(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    double v = 0;
    parse_number(it->second, v);
    return v;
  }
  long long integer(const std::string& key, long long fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    long long v = 0;
    parse_number(it->second, v);
    return v;
  }
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::uint64_t v = 0;
    parse_number(it->second, v);
    return v;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  template <class T>
  std::vector<T> list(const std::string& key, T fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return {fallback};
    std::vector<T> out;
    for (const auto& part : split(it->second, ',')) {
      T v{};
      parse_number(part, v);
      out.push_back(v);
    }
    return out;
  }
};

std::vector<ProblemParams> param_grid(const Flags& flags) {
  std::vector<ProblemParams> grid;
  for (long long n : flags.list<long long>("n", 6)) {
    for (double alpha : flags.list<double>("alpha", 0.0)) {
      for (double p : flags.list<double>("p", 4.0)) grid.push_back({static_cast<int>(n), alpha, p, 2});
    }
  }
  return grid;
}

ExperimentConfig make_config(const Flags& flags, ExperimentKind kind, Sampling default_sampling,
                             std::size_t default_samples) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.param_grid = param_grid(flags);
  cfg.tol = flags.real("tol", cfg.tol);
  cfg.seed = flags.seed("seed", cfg.seed);
  cfg.samples = static_cast<std::size_t>(flags.integer("samples", static_cast<long long>(default_samples)));
  cfg.sampling = flags.has("sampling") ? parse_sampling(flags.text("sampling", "")) : default_sampling;
  cfg.center = parse_center(flags.text("center", "fixed-point"));
  cfg.radius = flags.real("radius", cfg.radius);
  cfg.amplitude = flags.real("amplitude", cfg.amplitude);
  cfg.depth = flags.real("depth", cfg.depth);
  cfg.t_start = flags.real("t-start", cfg.t_start);
  cfg.t_end = flags.real("t-end", cfg.t_end);
  cfg.margin = flags.real("margin", cfg.margin);
  cfg.window = flags.real("window", cfg.window);
  cfg.sample_spacing = flags.real("spacing", cfg.sample_spacing);
  cfg.grid_nodes = static_cast<std::size_t>(flags.integer("grid-nodes", static_cast<long long>(cfg.grid_nodes)));
  cfg.jobs = static_cast<unsigned>(std::max<long long>(1, flags.integer("jobs", 1)));

  if (!(cfg.tol >= 1e-13 && cfg.tol <= 1e-4)) throw InvalidArgument("--tol must lie in [1e-13, 1e-4]");
  if (!(cfg.margin > 0.0)) throw InvalidArgument("--margin must be positive");
  if (!(cfg.window > 0.0)) throw InvalidArgument("--window must be positive");
  if (!(cfg.sample_spacing > 0.0)) throw InvalidArgument("--spacing must be positive");
  if (!(cfg.radius >= 0.0)) throw InvalidArgument("--radius must be nonnegative");
  if (!(cfg.depth < 0.0)) throw InvalidArgument("--depth must be negative");
  if (cfg.grid_nodes < 256) throw InvalidArgument("--grid-nodes must be at least 256");
  return cfg;
}

ProblemParams single_params(const Flags& flags) {
  const auto grid = param_grid(flags);
  if (grid.size() != 1) throw InvalidArgument("this command takes a single value for --n, --alpha and --p");
  validate(grid.front());
  return grid.front();
}

ResultTable simulate(const Flags& flags) {
  const ProblemParams q = single_params(flags);
  const DichotomyWindow win = dichotomy_window(q);
  if (!win.in_range) {
    std::ostringstream os;
    os << "--p " << q.p << " is outside the dichotomy window (" << win.lower << ", " << win.upper
       << ") for n=" << q.n << ", alpha=" << q.alpha;
    throw InvalidArgument(os.str());
  }
  const CoefficientSet c = coefficients(q);
  const double ws = fixed_point_value(c, q.p);
  ExperimentConfig cfg = make_config(flags, ExperimentKind::Classification, Sampling::Singular, 1);
  const std::string init = flags.text("init", "state");

  Trajectory traj = [&] {
    if (init == "singular" || init == "removable") {
      cfg.sampling = parse_sampling(init);
      return generate_trajectory(cfg, q, 0, cfg.tol, cfg.sample_spacing);
    }
    if (init != "state") throw InvalidArgument("invalid value for --init: '" + init + "'");
    const OdeState s{flags.real("w0", std::isfinite(ws) ? ws : 0.0), flags.real("w1", 0.0), flags.real("w2", 0.0),
                     flags.real("w3", 0.0)};
    IntegratorOptions opt;
    opt.tol = cfg.tol;
    opt.sample_spacing = cfg.sample_spacing;
    return integrate(s, cfg.t_start, cfg.t_end, c, q.p, opt);
  }();

  ResultTable table({"t", "r", "w0", "w1", "w2", "w3", "u", "energy", "energy_rate"});
  table.add_provenance("hhlab " + std::string(kVersion) + " kind=simulate config=" + hex64(cfg.hash() ^ fnv1a(init)));
  table.add_provenance("n=" + std::to_string(q.n) + " alpha=" + format_cell(q.alpha) + " p=" + format_cell(q.p) +
                       " window=" + (win.exploratory ? "exploratory" : "inside"));
  std::string cls = "n/a";
  try {
    cls = std::string(to_string(classify_limit(traj, c, q.p, {cfg.margin, cfg.window}).tag));
  } catch (const InvalidArgument&) {
  }
  table.add_provenance("termination=" + std::string(to_string(traj.termination())) + " class=" + cls);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    const OdeState s = traj.state(i);
    table.add_row({t, std::exp(t), s.w0, s.w1, s.w2, s.w3, std::exp(-c.B * t) * s.w0, energy(s, c, q.p, q.n).value,
                   energy_rate(s, c, q.n)});
  }
  return table;
}

ResultTable green_check_field(const Flags& flags) {
  const std::string path = flags.text("field", "");
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open field file '" + path + "'");
  const FieldFile file = read_field(in);
  const ProblemParams& q = file.params;
  const RepresentationResidual rep = representation_residual(file.field, q);
  const IntegrabilityReport ir = integrability_report(file.field, q);

  ResultTable table({"n", "alpha", "p", "nodes", "residual", "l1_converges", "weighted_diverges", "c_1", "c_r2",
                     "c_r2mn", "c_r4mn"});
  table.add_provenance("hhlab " + std::string(kVersion) + " kind=green-check field=" + path);
  table.add_row({static_cast<long long>(q.n), q.alpha, q.p, static_cast<long long>(rep.nodes), rep.residual,
                 std::string(ir.l1_converges ? "true" : "false"), std::string(ir.weighted_diverges ? "true" : "false"),
                 rep.biharmonic_coeffs[0], rep.biharmonic_coeffs[1], rep.biharmonic_coeffs[2],
                 rep.biharmonic_coeffs[3]});
  return table;
}

ResultTable dispatch(const std::string& command, const Flags& flags) {
  if (command == "coeffs") return run_atlas(make_config(flags, ExperimentKind::Atlas, Sampling::Box, 0));
  if (command == "atlas") return run_atlas(make_config(flags, ExperimentKind::Atlas, Sampling::Box, 0));
  if (command == "simulate") return simulate(flags);
  if (command == "classify") {
    return run_classification_sweep(make_config(flags, ExperimentKind::Classification, Sampling::Box, 64));
  }
  if (command == "energy-audit") {
    return run_energy_audit(make_config(flags, ExperimentKind::EnergyAudit, Sampling::Mixed, 64));
  }
  if (command == "green-check") {
    if (flags.has("field")) return green_check_field(flags);
    return run_green_study(make_config(flags, ExperimentKind::GreenStudy, Sampling::Mixed, 8));
  }
  throw InvalidArgument("unknown command '" + command + "'");
}

}  // namespace

int execute(const CliInvocation& inv, std::ostream& out, std::ostream& err_stream, bool out_is_tty) {
  NullBuffer null_buffer;
  std::ostream null_stream(&null_buffer);
  const bool quiet = inv.flags.count("quiet") && inv.flags.at("quiet") == "true";
  std::ostream& err = quiet ? null_stream : err_stream;

  if (inv.help) {
    out << inv.usage;
    return 0;
  }
  const Flags flags{inv.flags};
  try {
    const std::string format = flags.text("format", "");
    if (!format.empty() && format != "csv" && format != "aligned") {
      throw InvalidArgument("invalid value for --format: '" + format + "' (csv or aligned)");
    }
    const ResultTable table = dispatch(inv.command, flags);

    std::ofstream file;
    std::ostream* sink = &out;
    bool tty = out_is_tty;
    if (flags.has("out")) {
      file.open(flags.text("out", ""), std::ios::binary);
      if (!file) throw InvalidArgument("cannot open output file '" + flags.text("out", "") + "'");
      sink = &file;
      tty = false;
    }
    const bool aligned = format.empty() ? tty : format == "aligned";
    if (aligned) {
      table.write_aligned(*sink);
    } else {
      table.write_csv(*sink);
    }
    sink->flush();
    if (!*sink) throw NumericalError("failed writing output");
    return 0;
  } catch (const InvalidArgument& e) {
    err << "hhlab " << inv.command << ": error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "hhlab " << inv.command << ": numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "hhlab " << inv.command << ": numerical failure: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool out_is_tty) {
  CliInvocation inv;
  try {
    inv = parse_invocation(args);
  } catch (const InvalidArgument& e) {
    const bool quiet = std::find(args.begin(), args.end(), "--quiet") != args.end();
    if (!quiet) err << "hhlab: error: " << e.what() << '\n';
    return 1;
  }
  return execute(inv, out, err, out_is_tty);
}

}  // namespace hhlab
