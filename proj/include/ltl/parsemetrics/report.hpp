#pragma once

#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "ltl/parsemetrics/metrics.hpp"

namespace ltl {

inline nlohmann::json to_json(const MetricReport& r, bool per_sentence = false) {
  nlohmann::json j;
  j["metric"] = r.metric;
  j["present"] = r.present();
  j["count"] = r.count();
  j["skipped"] = r.skipped;
  j["mean"] = r.mean;
  j["stddev"] = r.stddev;
  j["max"] = r.max;
  j["extra"] = r.extra;
  if (per_sentence) {
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t i = 0; i < r.values.size(); ++i) values.push_back({r.ids[i], r.values[i]});
    j["values"] = std::move(values);
  }
  return j;
}

// Fixed-precision number formatting for CSV output.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Flattens a JSON object of scalars into "key,value" CSV rows, nested keys
// joined by '.'.
inline void flatten_csv(const nlohmann::json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten_csv(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten_csv(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_number_float()) {
    out += prefix + "," + format_number(j.get<double>()) + "\n";
  } else if (j.is_string()) {
    std::string s = j.get<std::string>();
    bool quote = s.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      std::string escaped;
      for (char ch : s) {
        if (ch == '"') escaped += '"';
        escaped += ch;
      }
      s = "\"" + escaped + "\"";
    }
    out += prefix + "," + s + "\n";
  } else {
    out += prefix + "," + j.dump() + "\n";
  }
}

inline std::string to_csv(const nlohmann::json& j) {
  std::string out = "key,value\n";
  flatten_csv(j, "", out);
  return out;
}

}  // namespace ltl
