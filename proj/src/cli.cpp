#include "freelab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "freelab/equilibrium.hpp"
#include "freelab/errors.hpp"
#include "freelab/format.hpp"
#include "freelab/inequalities.hpp"
#include "freelab/parallel.hpp"
#include "freelab/report.hpp"
#include "freelab/rmt.hpp"
#include "freelab/specs.hpp"
#include "freelab/transport.hpp"

namespace freelab {

namespace {

using Clock = std::chrono::steady_clock;

long long elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

const std::string& spec(const RunConfig& config, const std::string& name) {
  const auto it = config.specs.find(name);
  if (it == config.specs.end() || it->second.empty())
    throw DomainError("missing --" + name + " descriptor");
  return it->second;
}

std::string format_of(const RunConfig& config, const char* fallback) {
  const std::string format = config.format.empty() ? fallback : config.format;
  if (format != "json" && format != "csv") throw DomainError("format must be json or csv");
  return format;
}

// Writes to --out, or to the output stream after the summary line when no path is given.
void emit(const RunConfig& config, std::ostream& out, const std::string& content) {
  if (config.output_path.empty())
    out << content << (content.empty() || content.back() == '\n' ? "" : "\n");
  else
    write_text_file(config.output_path, content);
}

SolverSettings solver_settings(const RunConfig& config) {
  SolverSettings cfg;
  cfg.nodes = config.nodes;
  cfg.tolerance = config.tolerance;
  return cfg;
}

int equilibrium_command(const RunConfig& config, std::ostream& out) {
  const auto start = Clock::now();
  const Potential u = parse_potential(spec(config, "potential"));
  const EquilibriumResult result = solve_equilibrium(u, solver_settings(config));
  const long long runtime = config.timing ? elapsed_ms(start) : 0;
  out << "equilibrium " << result.potential_label << " support=[" << format_number(result.support_lo)
      << ", " << format_number(result.support_hi) << "] pressure=" << format_number(result.pressure)
      << " el_residual=" << format_number(result.el_residual) << "\n";
  if (format_of(config, "json") == "json") {
    emit(config, out, dump_json(to_json(result, config.tolerance, runtime, config.seed)) + "\n");
  } else {
    std::string csv = "x,density,cdf\n";
    const GridMeasure& nu = result.measure;
    for (int i = 0; i < nu.size(); ++i)
      csv += format_number(nu.nodes()[i]) + "," + format_number(nu.density()[i]) + "," +
             format_number(nu.cdf_values()[i]) + "\n";
    emit(config, out, csv);
  }
  return kExitOk;
}

InequalityInputs build_inputs(const std::map<std::string, std::string>& specs, double theta,
                              int nodes) {
  InequalityInputs inputs;
  inputs.theta = theta;
  for (const auto& [name, text] : specs) {
    if (text.empty()) continue;
    inputs.descriptors[name] = text;
    if (name == "mu") inputs.mu = parse_measure(text, nodes);
    else if (name == "nu") inputs.nu = parse_measure(text, nodes);
    else if (name == "f") inputs.f = parse_potential(text);
    else if (name == "g") inputs.g = parse_potential(text);
    else if (name == "h") inputs.h = parse_potential(text);
    else throw DomainError("verify does not take --" + name);
  }
  return inputs;
}

int verify_command(const RunConfig& config, std::ostream& out) {
  const InequalityKind kind = parse_kind(config.kind);
  SolverSettings cfg;
  cfg.nodes = config.nodes;
  const InequalityInputs inputs = build_inputs(config.specs, config.theta, config.nodes);
  InequalityReport report = verify(kind, inputs, config.tolerance, cfg);
  if (!config.timing) report.runtime_ms = 0;
  out << kind_name(kind) << " lhs=" << format_number(report.lhs) << " rhs=" << format_number(report.rhs)
      << " deficit=" << format_number(report.deficit) << (report.pass ? " pass" : " FAIL") << "\n";
  if (format_of(config, "json") == "json")
    emit(config, out, dump_json(to_json(report, config.seed)) + "\n");
  else
    emit(config, out, summary_csv_header() + summary_csv_row(report));
  return report.pass ? kExitOk : kExitInequalityFailed;
}

// Minimal CSV reader: comma separated, double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw DomainError("unterminated quote in manifest line: " + line);
  return fields;
}

struct SuiteEntry {
  int line = 0;
  std::string kind;
  std::map<std::string, std::string> specs;
  double theta = 0.5;
  double tolerance = 0.0;
};

std::vector<SuiteEntry> read_manifest(const std::string& path, double default_tolerance) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path + "'");
  std::vector<std::string> header;
  std::vector<SuiteEntry> entries;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (header.empty()) {
      header = fields;
      if (header.empty() || header[0] != "kind")
        throw DomainError("manifest header must start with 'kind'");
      continue;
    }
    SuiteEntry entry;
    entry.line = number;
    entry.tolerance = default_tolerance;
    for (std::size_t c = 0; c < fields.size() && c < header.size(); ++c) {
      const std::string& column = header[c];
      const std::string& value = fields[c];
      if (value.empty()) continue;
      if (column == "kind") entry.kind = value;
      else if (column == "theta") entry.theta = std::stod(value);
      else if (column == "tol") entry.tolerance = std::stod(value);
      else entry.specs[column] = value;
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

struct SuiteOutcome {
  int code = kExitOk;
  std::string sort_key;
  std::string json_line;
  std::string summary_row;
};

std::string error_row(const SuiteEntry& entry, const std::string& message) {
  std::string inputs;
  for (const auto& [key, value] : entry.specs) inputs += (inputs.empty() ? "" : ";") + key + "=" + value;
  std::string quoted = "\"" + inputs + "\"";
  std::string reason = message;
  std::replace(reason.begin(), reason.end(), '"', '\'');
  return entry.kind + "," + quoted + ",,,,\"error: " + reason + "\"\n";
}

int verify_suite_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.manifest.empty()) throw DomainError("verify-suite needs --manifest");
  const std::vector<SuiteEntry> entries = read_manifest(config.manifest, config.tolerance);
  std::vector<SuiteOutcome> outcomes(entries.size());
  parallel_for(static_cast<int>(entries.size()), [&](int i) {
    const SuiteEntry& entry = entries[i];
    SuiteOutcome& outcome = outcomes[i];
    outcome.sort_key = entry.kind;
    try {
      const InequalityKind kind = parse_kind(entry.kind);
      outcome.sort_key = std::string(kind_name(kind));
      SolverSettings cfg;
      cfg.nodes = config.nodes;
      const InequalityInputs inputs = build_inputs(entry.specs, entry.theta, config.nodes);
      InequalityReport report = verify(kind, inputs, entry.tolerance, cfg);
      if (!config.timing) report.runtime_ms = 0;
      outcome.json_line = dump_json(to_json(report, config.seed));
      outcome.summary_row = summary_csv_row(report);
      outcome.code = report.pass ? kExitOk : kExitInequalityFailed;
    } catch (const PreconditionError& e) {
      outcome.code = kExitPrecondition;
      outcome.summary_row = error_row(entry, std::string(e.what()) + " at " + e.witness());
    } catch (const DomainError& e) {
      outcome.code = kExitPrecondition;
      outcome.summary_row = error_row(entry, e.what());
    } catch (const SolverError& e) {
      outcome.code = kExitSolver;
      outcome.summary_row = error_row(entry, e.what());
    }
    for (const auto& [key, value] : entry.specs) outcome.sort_key += "|" + key + "=" + value;
    outcome.sort_key += "|theta=" + format_number(entry.theta);
  });

  std::vector<std::size_t> order(outcomes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].sort_key < outcomes[b].sort_key;
  });

  std::string reports;
  std::string summary = summary_csv_header();
  int code = kExitOk;
  int failed = 0;
  for (std::size_t i : order) {
    const SuiteOutcome& outcome = outcomes[i];
    if (!outcome.json_line.empty()) reports += outcome.json_line + "\n";
    summary += outcome.summary_row;
    code = std::max(code, outcome.code);
    if (outcome.code != kExitOk) {
      ++failed;
      err << "manifest line " << entries[i].line << ": " << outcome.summary_row;
    }
  }
  out << "verify-suite " << entries.size() << " reports, " << failed << " failed\n";
  if (!config.output_path.empty()) write_text_file(config.output_path, reports);
  if (!config.summary_path.empty())
    write_text_file(config.summary_path, summary);
  else
    out << summary;
  return code;
}

int w2_command(const RunConfig& config, std::ostream& out) {
  const GridMeasure mu = parse_measure(spec(config, "mu"), config.nodes);
  const GridMeasure nu = parse_measure(spec(config, "nu"), config.nodes);
  const TransportValue value = w2(mu, nu);
  out << "w2 cost=" << format_number(value.cost) << " cost2=" << format_number(value.squared()) << "\n";
  if (format_of(config, "json") == "json") {
    nlohmann::json report;
    report["schema_version"] = kSchemaVersion;
    report["report"] = "w2";
    report["inputs"] = {{"mu", spec(config, "mu")}, {"nu", spec(config, "nu")}};
    report["cost"] = value.cost;
    report["cost_squared"] = value.squared();
    report["coupling"] = value.descriptor;
    report["resolution"] = value.resolution;
    report["seed"] = config.seed;
    emit(config, out, dump_json(report) + "\n");
  } else {
    emit(config, out, "cost,cost_squared\n" + format_number(value.cost) + "," +
                          format_number(value.squared()) + "\n");
  }
  return kExitOk;
}

SamplerOptions sampler_options(const RunConfig& config) {
  SamplerOptions options;
  options.chains = config.chains;
  options.burn_in = config.burn_in;
  return options;
}

int rmt_sample_command(const RunConfig& config, std::ostream& out) {
  const Potential v = parse_potential(spec(config, "potential"));
  const EnsembleSample sample =
      sample_eigenvalues(v, config.n, config.sweeps, config.seed, sampler_options(config));
  out << "rmt sample " << sample.potential << " N=" << sample.n << " sets="
      << sample.eigenvalue_sets.size() << " acceptance=" << format_number(sample.acceptance_rate) << "\n";
  if (format_of(config, "csv") == "csv") {
    std::string csv = "sweep";
    for (int i = 1; i <= sample.n; ++i) csv += ",eig_" + std::to_string(i);
    csv += "\n";
    for (std::size_t s = 0; s < sample.eigenvalue_sets.size(); ++s) {
      csv += std::to_string(s);
      for (double x : sample.eigenvalue_sets[s]) csv += "," + format_number(x);
      csv += "\n";
    }
    emit(config, out, csv);
  } else {
    nlohmann::json report;
    report["schema_version"] = kSchemaVersion;
    report["report"] = "rmt_sample";
    report["potential"] = sample.potential;
    report["n"] = sample.n;
    report["chains"] = sample.chains;
    report["sweeps"] = sample.sweeps;
    report["acceptance_rate"] = sample.acceptance_rate;
    report["eigenvalue_sets"] = sample.eigenvalue_sets;
    report["seed"] = sample.seed;
    emit(config, out, dump_json(report) + "\n");
  }
  return kExitOk;
}

int rmt_converge_command(const RunConfig& config, std::ostream& out) {
  const Potential v = parse_potential(spec(config, "potential"));
  std::vector<int> ns = config.ns;
  std::sort(ns.begin(), ns.end());
  if (ns.empty() || std::adjacent_find(ns.begin(), ns.end()) != ns.end())
    throw DomainError("--ns must list distinct matrix sizes");
  const EquilibriumResult eq = solve_equilibrium(v, solver_settings(config));
  std::vector<EnsembleSample> samples;
  for (std::size_t k = 0; k < ns.size(); ++k)
    samples.push_back(sample_eigenvalues(v, ns[k], config.sweeps,
                                         chain_seed(config.seed, static_cast<int>(k)),
                                         sampler_options(config)));
  const EmpiricalComparison cmp = empirical_vs_equilibrium(samples, eq, v);
  out << "rmt converge " << eq.potential_label;
  for (std::size_t k = 0; k < ns.size(); ++k)
    out << " N=" << ns[k] << ":ks=" << format_number(cmp.ks.statistic[k]);
  out << "\n";
  if (format_of(config, "json") == "json") {
    nlohmann::json report;
    report["schema_version"] = kSchemaVersion;
    report["report"] = "rmt_converge";
    report["potential"] = eq.potential_label;
    report["ks"] = to_json(cmp.ks, config.seed);
    report["rate_surrogate"] = to_json(cmp.rate_surrogate, config.seed);
    report["seed"] = config.seed;
    emit(config, out, dump_json(report) + "\n");
  } else {
    emit(config, out, series_csv(cmp.ks));
  }
  return kExitOk;
}

int moment_map_command(const RunConfig& config, std::ostream& out) {
  const GridMeasure mu = parse_measure(spec(config, "mu"), config.nodes);
  const MomentMap map = moment_map(mu, solver_settings(config));
  const EquilibriumResult& eq = map.equilibrium;
  out << "moment-map support=[" << format_number(eq.support_lo) << ", " << format_number(eq.support_hi)
      << "] pushforward_ks=" << format_number(map.pushforward_ks) << " iterations=" << map.iterations << "\n";
  if (format_of(config, "json") == "json") {
    nlohmann::json report;
    report["schema_version"] = kSchemaVersion;
    report["report"] = "moment_map";
    report["inputs"] = {{"mu", spec(config, "mu")}};
    report["support_lo"] = eq.support_lo;
    report["support_hi"] = eq.support_hi;
    report["pressure"] = number_field(eq.pressure);
    report["el_residual"] = number_field(eq.el_residual);
    report["pushforward_ks"] = map.pushforward_ks;
    report["iterations"] = map.iterations;
    report["resolution"] = config.nodes;
    report["seed"] = config.seed;
    emit(config, out, dump_json(report) + "\n");
  } else {
    std::string csv = "x,u,u_prime\n";
    constexpr int kRows = 257;
    for (int i = 0; i < kRows; ++i) {
      const double x = eq.support_lo + (eq.support_hi - eq.support_lo) * i / (kRows - 1);
      csv += format_number(x) + "," + format_number(map.potential(x)) + "," +
             format_number(map.potential.derivative(x)) + "\n";
    }
    emit(config, out, csv);
  }
  return kExitOk;
}

int pressure_command(const RunConfig& config, std::ostream& out) {
  const Potential u = parse_potential(spec(config, "potential"));
  const EquilibriumResult eq = solve_equilibrium(u, solver_settings(config));
  nlohmann::json report;
  report["schema_version"] = kSchemaVersion;
  report["report"] = "pressure";
  report["potential"] = eq.potential_label;
  report["pressure"] = number_field(eq.pressure);
  report["resolution"] = config.nodes;
  report["seed"] = config.seed;
  out << "pressure " << eq.potential_label << " eta=" << format_number(eq.pressure);
  if (config.micro_n > 0) {
    MicroPressureOptions options;
    if (config.pressure_path == "ti")
      options.path = PressurePath::thermodynamic_integration;
    else if (config.pressure_path != "direct")
      throw DomainError("--path must be direct or ti");
    options.chains = config.chains;
    const MicroPressure micro = micro_pressure_estimate(u, config.box, config.micro_n, config.seed, options);
    report["micro_pressure"] = {{"n", config.micro_n},
                                {"box", config.box},
                                {"path", config.pressure_path},
                                {"value", micro.value},
                                {"standard_error", micro.standard_error},
                                {"low_confidence", micro.low_confidence}};
    out << " micro(N=" << config.micro_n << ")=" << format_number(micro.value);
  }
  out << "\n";
  if (format_of(config, "json") == "json") {
    emit(config, out, dump_json(report) + "\n");
  } else {
    emit(config, out, "potential,pressure\n" + eq.potential_label + "," + format_number(eq.pressure) + "\n");
  }
  return kExitOk;
}

void validate(const RunConfig& config) {
  if (config.nodes < 256) throw DomainError("--nodes must be at least 256");
  if (!(config.tolerance > 0.0)) throw DomainError("--tol must be positive");
  if (!config.format.empty() && config.format != "json" && config.format != "csv")
    throw DomainError("--format must be json or csv");
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    switch (config.command) {
      case Command::equilibrium: return equilibrium_command(config, out);
      case Command::verify: return verify_command(config, out);
      case Command::verify_suite: return verify_suite_command(config, out, err);
      case Command::w2: return w2_command(config, out);
      case Command::rmt_sample: return rmt_sample_command(config, out);
      case Command::rmt_converge: return rmt_converge_command(config, out);
      case Command::moment_map: return moment_map_command(config, out);
      case Command::pressure: return pressure_command(config, out);
    }
    throw DomainError("unknown command");
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << " (" << e.witness() << ")\n";
    return kExitPrecondition;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const SolverError& e) {
    err << "solver failed: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

int run_command_line(int argc, char** argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"freelab: free entropy, equilibrium measures and transport inequalities"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--nodes", config.nodes, "grid nodes per measure (>= 256)");
  app.add_option("--tol", config.tolerance, "tolerance");
  app.add_option("--seed", config.seed, "master random seed");
  app.add_option("--out", config.output_path, "report path");
  app.add_option("--format", config.format, "json or csv");
  app.add_flag("--timing", config.timing, "record wall-clock times in reports");

  auto descriptor = [&](CLI::App* sub, const std::string& name, const std::string& help) {
    sub->add_option("--" + name, config.specs[name], help);
  };

  CLI::App* equilibrium = app.add_subcommand("equilibrium", "solve for the equilibrium measure");
  descriptor(equilibrium, "potential", "potential descriptor");

  CLI::App* verify_cmd = app.add_subcommand("verify", "evaluate one inequality");
  // --h is the third Brunn-Minkowski potential, so help is only --help here.
  verify_cmd->set_help_flag("--help", "print help");
  verify_cmd->add_option("kind", config.kind, "inequality kind")->required();
  for (const char* name : {"mu", "nu", "f", "g", "h"}) descriptor(verify_cmd, name, "descriptor");
  verify_cmd->add_option("--theta", config.theta, "Brunn-Minkowski weight");

  CLI::App* suite = app.add_subcommand("verify-suite", "evaluate a manifest of inequalities");
  suite->add_option("--manifest", config.manifest, "CSV manifest")->required();
  suite->add_option("--summary", config.summary_path, "summary CSV path");

  CLI::App* w2_cmd = app.add_subcommand("w2", "quadratic Wasserstein distance");
  descriptor(w2_cmd, "mu", "measure descriptor");
  descriptor(w2_cmd, "nu", "measure descriptor");

  CLI::App* rmt = app.add_subcommand("rmt", "random-matrix eigenvalue ensembles");
  rmt->require_subcommand(1);
  rmt->fallthrough();
  CLI::App* sample = rmt->add_subcommand("sample", "sample eigenvalue configurations");
  CLI::App* converge = rmt->add_subcommand("converge", "empirical spectra against the equilibrium");
  for (CLI::App* sub : {sample, converge}) {
    descriptor(sub, "potential", "potential descriptor");
    sub->add_option("--sweeps", config.sweeps, "retained sweeps per chain");
    sub->add_option("--chains", config.chains, "independent chains");
    sub->add_option("--burn-in", config.burn_in, "discarded tuning sweeps");
  }
  sample->add_option("--n", config.n, "matrix size");
  converge->add_option("--ns", config.ns, "matrix sizes")->delimiter(',');

  CLI::App* moment = app.add_subcommand("moment-map", "moment map of a measure");
  descriptor(moment, "mu", "measure descriptor");

  CLI::App* pressure = app.add_subcommand("pressure", "free pressure of a potential");
  descriptor(pressure, "potential", "potential descriptor");
  pressure->add_option("--micro-n", config.micro_n, "also estimate the N x N micro-pressure");
  pressure->add_option("--box", config.box, "eigenvalue box radius");
  pressure->add_option("--path", config.pressure_path, "direct or ti");
  pressure->add_option("--chains", config.chains, "chains for the ti path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitPrecondition;
  }

  if (*equilibrium) config.command = Command::equilibrium;
  else if (*verify_cmd) config.command = Command::verify;
  else if (*suite) config.command = Command::verify_suite;
  else if (*w2_cmd) config.command = Command::w2;
  else if (*sample) config.command = Command::rmt_sample;
  else if (*converge) config.command = Command::rmt_converge;
  else if (*moment) config.command = Command::moment_map;
  else if (*pressure) config.command = Command::pressure;
  return run(config, out, err);
}

}  // namespace freelab
