#pragma once

#include <fstream>
#include <map>
#include <string>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "ltl/error.hpp"
#include "ltl/gradcore/graph.hpp"
#include "ltl/gradcore/rng.hpp"

namespace ltl {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

template <class T>
nlohmann::json matrix_to_json(const Matrix<T>& m) {
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) values.push_back(static_cast<double>(m(i, j)));
  }
  return values;
}

template <class T>
void matrix_from_json(const nlohmann::json& values, Matrix<T>& m, const std::string& name) {
  if (!values.is_array() || static_cast<Eigen::Index>(values.size()) != m.size()) {
    throw Error(ErrorKind::kData, "checkpoint: wrong value count for '" + name + "'");
  }
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<T>(values[k++].get<double>());
  }
}

}  // namespace detail

template <class T>
constexpr const char* scalar_name() {
  return std::is_same_v<T, float> ? "float32" : "float64";
}

// Parameters (values and Adam moments), optimizer step and RNG states.
// Shortest round-trip number formatting makes save/load bit-exact.
template <class T>
nlohmann::json checkpoint_to_json(const ParameterStore<T>& store, const RngStream* rng = nullptr,
                                  const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j;
  j["format"] = "ltl-checkpoint";
  j["version"] = kCheckpointVersion;
  j["scalar"] = scalar_name<T>();
  j["step"] = store.step();
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t k = 0; k < store.size(); ++k) {
    const auto& p = store[k];
    params.push_back({{"name", p.name},
                      {"rows", p.value.rows()},
                      {"cols", p.value.cols()},
                      {"decay", p.decay},
                      {"value", detail::matrix_to_json(p.value)},
                      {"m", detail::matrix_to_json(p.m)},
                      {"v", detail::matrix_to_json(p.v)}});
  }
  j["params"] = std::move(params);
  if (rng != nullptr) {
    j["rng"] = {{"seed", rng->seed()}, {"streams", rng->states()}};
  }
  j["extra"] = extra;
  return j;
}

// Loads values into a store whose parameters were already declared (same
// names and shapes).
template <class T>
void checkpoint_from_json(const nlohmann::json& j, ParameterStore<T>& store, RngStream* rng = nullptr) {
  if (j.value("format", "") != "ltl-checkpoint") throw Error(ErrorKind::kData, "not a checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw Error(ErrorKind::kData, "unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }
  for (const auto& entry : j.at("params")) {
    const auto name = entry.at("name").get<std::string>();
    auto& p = store.get(name);
    if (entry.at("rows").get<Eigen::Index>() != p.value.rows() ||
        entry.at("cols").get<Eigen::Index>() != p.value.cols()) {
      throw Error(ErrorKind::kShapeMismatch, "checkpoint parameter '" + name + "' has shape " +
                                                 shape_string(entry.at("rows").get<Eigen::Index>(),
                                                              entry.at("cols").get<Eigen::Index>()) +
                                                 ", model expects " + shape_string(p.value.rows(), p.value.cols()));
    }
    detail::matrix_from_json(entry.at("value"), p.value, name);
    detail::matrix_from_json(entry.at("m"), p.m, name);
    detail::matrix_from_json(entry.at("v"), p.v, name);
  }
  store.set_step(j.at("step").get<long>());
  if (rng != nullptr && j.contains("rng")) {
    rng->restore(j.at("rng").at("streams").get<std::map<std::string, std::string>>());
  }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << j.dump() << '\n';
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kData, path + ": " + e.what());
  }
}

}  // namespace ltl
