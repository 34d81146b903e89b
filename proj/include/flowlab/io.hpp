#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowlab/verify.hpp"

namespace flowlab {

// 17 significant digits, locale-independent, byte-stable across runs
inline std::string fmt_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// --- run configs -----------------------------------------------------------------------

struct ConfigError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string scenario;
  std::string output_dir = "out";
  std::map<std::string, double> overrides;
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "scenario") {
      if (!it->is_string()) throw ConfigError("config key 'scenario' must be a string");
      cfg.scenario = it->get<std::string>();
    } else if (key == "output_dir") {
      if (!it->is_string()) throw ConfigError("config key 'output_dir' must be a string");
      cfg.output_dir = it->get<std::string>();
    } else if (key == "overrides") {
      if (!it->is_object()) throw ConfigError("config key 'overrides' must be an object");
      for (auto ov = it->begin(); ov != it->end(); ++ov) {
        if (!ov->is_number()) throw ConfigError("override '" + ov.key() + "' must be a number");
        cfg.overrides[ov.key()] = ov->get<double>();
      }
    } else {
      throw ConfigError("unknown config key: '" + key + "'");
    }
  }
  if (cfg.scenario.empty()) throw ConfigError("config is missing the 'scenario' key");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  return parse_run_config(j);
}

// --- check-report serialization -----------------------------------------------------------

inline nlohmann::json report_to_json(const CheckReport& r) {
  nlohmann::json j;
  j["check_id"] = r.check_id;
  j["scenario_id"] = r.scenario_id;
  j["residual_sup"] = r.residual_sup;
  j["residual_l2"] = r.residual_l2;
  if (std::isfinite(r.convergence_order)) j["convergence_order"] = r.convergence_order;
  j["verdict"] = r.verdict;
  j["details"] = r.details;
  j["tolerances"] = r.tolerances;
  if (!r.note.empty()) j["note"] = r.note;
  j["runtime_s"] = r.runtime_s;
  return j;
}

inline nlohmann::json results_to_json(const std::vector<CheckReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckReport& r : reports) arr.push_back(report_to_json(r));
  return nlohmann::json{{"checks", arr}};
}

inline std::vector<CheckReport> results_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("checks") || !j["checks"].is_array() ||
      j["checks"].empty())
    throw ConfigError("results file has no checks");
  std::vector<CheckReport> out;
  for (const auto& c : j["checks"]) {
    CheckReport r;
    r.check_id = c.at("check_id").get<std::string>();
    r.scenario_id = c.value("scenario_id", std::string());
    r.residual_sup = c.value("residual_sup", 0.0);
    r.residual_l2 = c.value("residual_l2", 0.0);
    r.convergence_order = c.contains("convergence_order")
                              ? c["convergence_order"].get<double>()
                              : std::numeric_limits<double>::quiet_NaN();
    r.verdict = c.at("verdict").get<std::string>();
    if (c.contains("details")) r.details = c["details"].get<std::map<std::string, double>>();
    if (c.contains("tolerances"))
      r.tolerances = c["tolerances"].get<std::map<std::string, double>>();
    r.note = c.value("note", std::string());
    r.runtime_s = c.value("runtime_s", 0.0);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<CheckReport> load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed results file: ") + e.what());
  }
  return results_from_json(j);
}

// --- report rendering -----------------------------------------------------------------------

// groups mirror the theorem areas the suite covers, in a fixed order
inline const std::vector<std::pair<std::string, std::string>>& report_groups() {
  static const std::vector<std::pair<std::string, std::string>> groups = {
      {"sphere-exact", "Exact solutions"},
      {"evolution-", "Boundary evolution equations"},
      {"variation-", "First variation of the action"},
      {"di-monotonicity", "Action monotonicity"},
      {"huisken-", "Weighted-area monotonicity"},
      {"harnack-", "Harnack expression and solitons"},
      {"identities-", "Structural identities"},
      {"weighted-reduction", "Structural identities"},
      {"conjugate-", "Conjugate heat equation"},
      {"action-reduction", "Reductions"},
      {"entropy-", "Entropy functionals"},
      {"general-", "Not covered"},
  };
  return groups;
}

inline std::string report_group(const std::string& check_id) {
  for (const auto& [prefix, title] : report_groups())
    if (check_id.rfind(prefix, 0) == 0) return title;
  return "Other";
}

inline std::string render_markdown(const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  os << "# Verification report\n";
  int pass = 0, warn = 0, fail = 0, skipped = 0;
  for (const auto& r : reports) {
    if (r.verdict == "pass") ++pass;
    else if (r.verdict == "warn") ++warn;
    else if (r.verdict == "not-checked") ++skipped;
    else ++fail;
  }
  os << "\n" << pass << " pass, " << warn << " warn, " << fail << " fail, " << skipped
     << " not checked.\n";
  std::string current;
  for (const auto& [prefix, title] : report_groups()) {
    (void)prefix;
    if (title == current) continue;
    bool any = false;
    for (const auto& r : reports) any = any || report_group(r.check_id) == title;
    if (!any) continue;
    current = title;
    os << "\n## " << title << "\n\n";
    os << "| check | scenario | sup residual | order | verdict | runtime (s) |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
      if (report_group(r.check_id) != title) continue;
      os << "| " << r.check_id << " | " << r.scenario_id << " | " << fmt_double(r.residual_sup)
         << " | "
         << (std::isfinite(r.convergence_order) ? fmt_double(r.convergence_order) : "-")
         << " | " << r.verdict << " | " << fmt_double(r.runtime_s) << " |\n";
    }
    for (const auto& r : reports)
      if (report_group(r.check_id) == title && !r.note.empty())
        os << "\n" << r.check_id << ": " << r.note << "\n";
  }
  return os.str();
}

inline std::string render_csv(const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  os << "group,check_id,scenario_id,residual_sup,residual_l2,convergence_order,verdict,"
        "runtime_s\n";
  for (const auto& r : reports) {
    os << report_group(r.check_id) << ',' << r.check_id << ',' << r.scenario_id << ','
       << fmt_double(r.residual_sup) << ',' << fmt_double(r.residual_l2) << ','
       << (std::isfinite(r.convergence_order) ? fmt_double(r.convergence_order) : "") << ','
       << r.verdict << ',' << fmt_double(r.runtime_s) << '\n';
  }
  return os.str();
}

inline void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  require(bool(out), "cannot write file: " + path);
  out << body;
}

}  // namespace flowlab
