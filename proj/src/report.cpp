#include "freelab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "freelab/errors.hpp"
#include "freelab/format.hpp"

namespace freelab {

namespace {

std::string edge_name(EdgeKind kind) { return kind == EdgeKind::hard ? "hard" : "soft"; }

std::string inputs_text(const std::map<std::string, std::string>& inputs) {
  std::string out;
  for (const auto& [key, value] : inputs) {
    if (!out.empty()) out += ';';
    out += key + "=" + value;
  }
  return out;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void dump(const nlohmann::json& value, std::string& out) {
  switch (value.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        dump(item, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) out += ',';
        dump(value[i], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = value.get<double>();
      if (!std::isfinite(x)) throw DomainError("non-finite number in a report");
      char buffer[32];
      std::snprintf(buffer, sizeof buffer, "%.17g", x);
      out += buffer;
      break;
    }
    default:
      out += value.dump();
  }
}

}  // namespace

nlohmann::json number_field(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "infinity" : "neg_infinity";
  return value;
}

nlohmann::json to_json(const InequalityReport& report, std::uint64_t seed) {
  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = std::string(kind_name(report.kind));
  out["lhs"] = number_field(report.lhs);
  out["rhs"] = number_field(report.rhs);
  out["deficit"] = number_field(report.deficit);
  out["pass"] = report.pass;
  out["sentinel"] = report.sentinel;
  out["tolerance"] = number_field(report.tolerance);
  out["inputs"] = report.inputs;
  out["resolution"] = report.resolution;
  out["runtime_ms"] = report.runtime_ms;
  out["seed"] = seed;
  return out;
}

nlohmann::json to_json(const EquilibriumResult& result, double tolerance, long long runtime_ms,
                       std::uint64_t seed) {
  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["report"] = "equilibrium";
  out["potential"] = result.potential_label;
  out["support_lo"] = number_field(result.support_lo);
  out["support_hi"] = number_field(result.support_hi);
  out["lo_edge"] = edge_name(result.lo_edge);
  out["hi_edge"] = edge_name(result.hi_edge);
  out["el_constant"] = number_field(result.el_constant);
  out["el_residual"] = number_field(result.el_residual);
  out["sd_residual"] = number_field(result.sd_residual);
  out["pressure"] = number_field(result.pressure);
  out["iterations"] = result.iterations;
  out["method"] = result.method;
  out["resolution"] = result.measure.size();
  out["tolerance"] = number_field(tolerance);
  out["runtime_ms"] = runtime_ms;
  out["seed"] = seed;
  return out;
}

nlohmann::json to_json(const ConvergenceSeries& series, std::uint64_t seed) {
  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["report"] = "convergence";
  out["label"] = series.label;
  out["n_values"] = series.n_values;
  nlohmann::json statistic = nlohmann::json::array();
  for (double s : series.statistic) statistic.push_back(number_field(s));
  out["statistic"] = statistic;
  out["target"] = series.target ? number_field(*series.target) : nlohmann::json();
  out["seed"] = seed;
  return out;
}

std::string dump_json(const nlohmann::json& value) {
  std::string out;
  dump(value, out);
  return out;
}

std::string series_csv(const ConvergenceSeries& series) {
  std::string out = "N,statistic,target\n";
  for (std::size_t i = 0; i < series.n_values.size(); ++i) {
    out += std::to_string(series.n_values[i]) + "," + format_number(series.statistic[i]) + ",";
    if (series.target) out += format_number(*series.target);
    out += "\n";
  }
  return out;
}

std::string summary_csv_header() { return "kind,inputs,lhs,rhs,deficit,pass\n"; }

std::string summary_csv_row(const InequalityReport& report) {
  auto number = [](double x) {
    const nlohmann::json field = number_field(x);
    return field.is_string() ? field.get<std::string>() : format_number(x);
  };
  return std::string(kind_name(report.kind)) + "," + csv_quote(inputs_text(report.inputs)) + "," +
         number(report.lhs) + "," + number(report.rhs) + "," + number(report.deficit) + "," +
         (report.pass ? "true" : "false") + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace freelab
