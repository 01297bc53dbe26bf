#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ptngarch/error.hpp"
#include "ptngarch/estimate.hpp"
#include "ptngarch/inference.hpp"
#include "ptngarch/montecarlo.hpp"
#include "ptngarch/panel.hpp"
#include "ptngarch/params.hpp"

namespace ptngarch {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Panel CSV: one row per time point, one column per node, optional header
// row of node ids.

namespace detail {

inline std::vector<std::string_view> split_csv_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_count(std::string_view tok, Count& out) {
  if (tok.empty()) return false;
  const char* first = tok.data();
  if (*first == '+') ++first;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

/// Rows are time points, columns nodes. The first row is taken as a header of
/// node ids when any of its cells is not an integer.
inline Panel read_panel_csv(std::istream& in) {
  std::vector<std::string> header;
  std::vector<std::vector<Count>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    const auto cells = detail::split_csv_row(view);
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ValidationError("row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(width));
    }
    std::vector<Count> values(width);
    bool numeric = true;
    for (std::size_t c = 0; c < width && numeric; ++c) numeric = detail::parse_count(cells[c], values[c]);
    if (!numeric && rows.empty() && header.empty()) {
      for (auto cell : cells) header.emplace_back(cell);
      continue;
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (!detail::parse_count(cells[c], values[c])) {
        throw ValidationError("row " + std::to_string(lineno) + ", column " + std::to_string(c + 1) +
                              ": '" + std::string(cells[c]) + "' is not an integer");
      }
      if (values[c] < 0) {
        throw ValidationError("row " + std::to_string(lineno) + ", column " + std::to_string(c + 1) +
                              ": negative count " + std::to_string(values[c]));
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError("panel file contains no data rows");

  const std::size_t t_len = rows.size();
  std::vector<Count> node_major(width * t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t i = 0; i < width; ++i) node_major[i * t_len + t] = rows[t][i];
  }
  Panel panel(width, t_len, std::move(node_major));
  panel.set_node_ids(std::move(header));
  return panel;
}

inline Panel load_panel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open panel file '" + path + "'");
  try {
    return read_panel_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_panel_csv(const Panel& panel, std::ostream& out) {
  const auto& ids = panel.node_ids();
  if (!ids.empty()) {
    // an all-integer header would be read back as data
    bool numeric = true;
    for (const auto& id : ids) {
      Count ignored = 0;
      numeric = numeric && detail::parse_count(id, ignored);
    }
    if (numeric) throw ValidationError("node ids must not all be integers");
    for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
    out << '\n';
  }
  for (std::size_t t = 0; t < panel.t_len(); ++t) {
    for (std::size_t i = 0; i < panel.n_nodes(); ++i) out << (i ? "," : "") << panel(i, t);
    out << '\n';
  }
}

/// Writes through a temporary file and renames, so a failed run never leaves
/// a partial output behind.
template <class Writer>
void write_file_atomically(const std::string& path, Writer&& writer) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    writer(out);
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw ValidationError("failed writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw ValidationError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

inline void save_panel(const Panel& panel, const std::string& path) {
  write_file_atomically(path, [&](std::ostream& out) { write_panel_csv(panel, out); });
}

inline void save_json(const json& j, const std::string& path) {
  write_file_atomically(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// JSON mappings

namespace detail {

// Non-finite values become null, which is what the serializer would emit anyway.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json coef_object(const Theta& v) {
  json j = json::object();
  for (std::size_t k = 0; k < 5; ++k) j[std::string(kCoefNames[k])] = number_or_null(v[k]);
  return j;
}

inline json coef_flags(const std::array<bool, 5>& v) {
  json j = json::object();
  for (std::size_t k = 0; k < 5; ++k) j[std::string(kCoefNames[k])] = v[k];
  return j;
}

// NaN is serialized as null; read it back as NaN.
inline double number_or_nan(const json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

inline Theta read_coef_object(const json& j, const char* what) {
  Theta v{};
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be an object");
  for (std::size_t k = 0; k < 5; ++k) {
    const std::string key(kCoefNames[k]);
    if (!j.contains(key)) throw ValidationError(std::string(what) + " is missing '" + key + "'");
    v[k] = number_or_nan(j.at(key));
  }
  return v;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

inline json to_json(const ThresholdParams& p) {
  return {{"omega", p.omega}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
          {"xi", p.xi},       {"beta", p.beta},     {"r", p.r}};
}

inline ThresholdParams params_from_json(const json& j) {
  try {
    ThresholdParams p;
    p.omega = j.at("omega").get<double>();
    p.alpha1 = j.at("alpha1").get<double>();
    p.alpha2 = j.at("alpha2").get<double>();
    p.xi = j.at("xi").get<double>();
    p.beta = j.at("beta").get<double>();
    p.r = j.at("r").get<long>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid parameter JSON: ") + e.what());
  }
}

inline json to_json(const FitOptions& o) {
  json j = {{"r_min", o.r_min},       {"r_max", o.r_max},       {"delta", o.delta},
            {"beta_max", o.beta_max}, {"coef_max", o.coef_max}, {"tol_grad", o.tol_grad},
            {"max_iter", o.max_iter}, {"n_starts", o.n_starts}};
  j["initial_intensity"] = o.initial == InitialIntensity::zero ? "zero" : "sample_mean";
  return j;
}

inline FitOptions fit_options_from_json(const json& j) {
  FitOptions o;
  try {
    o.r_min = detail::get_or(j, "r_min", o.r_min);
    o.r_max = detail::get_or(j, "r_max", o.r_max);
    o.delta = detail::get_or(j, "delta", o.delta);
    o.beta_max = detail::get_or(j, "beta_max", o.beta_max);
    o.coef_max = detail::get_or(j, "coef_max", o.coef_max);
    o.tol_grad = detail::get_or(j, "tol_grad", o.tol_grad);
    o.max_iter = detail::get_or(j, "max_iter", o.max_iter);
    o.n_starts = detail::get_or(j, "n_starts", o.n_starts);
    const auto init = detail::get_or<std::string>(j, "initial_intensity", "zero");
    if (init == "zero") {
      o.initial = InitialIntensity::zero;
    } else if (init == "sample_mean") {
      o.initial = InitialIntensity::sample_mean;
    } else {
      throw ValidationError("initial_intensity must be 'zero' or 'sample_mean'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid fit options: ") + e.what());
  }
  o.validate();
  return o;
}

inline json to_json(const FitResult& f) {
  json j;
  j["coefficients"] = json::array();
  for (auto name : kCoefNames) j["coefficients"].push_back(std::string(name));
  j["theta_hat"] = detail::coef_object(f.theta_hat);
  j["r_hat"] = f.r_hat;
  j["loglik"] = f.loglik;
  j["loglik_sum"] = f.loglik_sum;
  j["se"] = detail::coef_object(f.se);
  json ci = json::object();
  for (std::size_t k = 0; k < 5; ++k) {
    ci[std::string(kCoefNames[k])] = {detail::number_or_null(f.ci95[k].first),
                                      detail::number_or_null(f.ci95[k].second)};
  }
  j["ci95"] = ci;
  j["boundary_flags"] = detail::coef_flags(f.boundary_flags);
  j["pinned"] = detail::coef_flags(f.pinned);
  json sigma = json::array();
  for (const auto& row : f.sigma_hat) {
    json r = json::array();
    for (double v : row) r.push_back(detail::number_or_null(v));
    sigma.push_back(r);
  }
  j["sigma_hat"] = sigma;
  json profile = json::array();
  for (const auto& pt : f.profile) {
    profile.push_back({{"r", pt.r},
                       {"theta", detail::coef_object(pt.theta)},
                       {"loglik", pt.loglik},
                       {"converged", pt.converged}});
  }
  j["profile"] = profile;
  j["effective_nt"] = f.effective_nt;
  j["n_nodes"] = f.n_nodes;
  j["t_obs"] = f.t_obs;
  j["n_over_t"] = f.t_obs > 0 ? static_cast<double>(f.n_nodes) / static_cast<double>(f.t_obs) : 0.0;
  j["converged"] = f.converged;
  j["flagged"] = f.flagged;
  j["sigma_singular"] = f.sigma_singular;
  j["sigma_message"] = f.sigma_message;
  j["node_ids"] = f.node_ids;
  return j;
}

inline FitResult fit_result_from_json(const json& j) {
  FitResult f;
  try {
    f.theta_hat = detail::read_coef_object(j.at("theta_hat"), "theta_hat");
    f.r_hat = j.at("r_hat").get<long>();
    f.loglik = detail::number_or_nan(j.at("loglik"));
    f.loglik_sum = detail::number_or_nan(detail::get_or(j, "loglik_sum", json(0.0)));
    const auto& sigma = j.at("sigma_hat");
    if (!sigma.is_array() || sigma.size() != 5) throw ValidationError("sigma_hat must be 5x5");
    for (std::size_t m = 0; m < 5; ++m) {
      if (!sigma[m].is_array() || sigma[m].size() != 5) throw ValidationError("sigma_hat must be 5x5");
      for (std::size_t n = 0; n < 5; ++n) f.sigma_hat[m][n] = detail::number_or_nan(sigma[m][n]);
    }
    f.effective_nt = j.at("effective_nt").get<std::size_t>();
    if (f.effective_nt == 0) throw ValidationError("effective_nt must be positive");
    if (j.contains("se")) f.se = detail::read_coef_object(j.at("se"), "se");
    if (j.contains("ci95")) {
      for (std::size_t k = 0; k < 5; ++k) {
        const auto& pair = j.at("ci95").at(std::string(kCoefNames[k]));
        f.ci95[k] = {detail::number_or_nan(pair.at(0)), detail::number_or_nan(pair.at(1))};
      }
    }
    for (const char* key : {"boundary_flags", "pinned"}) {
      if (!j.contains(key)) continue;
      auto& flags = std::string(key) == "pinned" ? f.pinned : f.boundary_flags;
      for (std::size_t k = 0; k < 5; ++k) flags[k] = j.at(key).at(std::string(kCoefNames[k])).get<bool>();
    }
    if (j.contains("profile")) {
      for (const auto& pt : j.at("profile")) {
        f.profile.push_back({pt.at("r").get<long>(), detail::read_coef_object(pt.at("theta"), "profile theta"),
                             detail::number_or_nan(pt.at("loglik")), pt.at("converged").get<bool>()});
      }
    }
    f.n_nodes = detail::get_or<std::size_t>(j, "n_nodes", 0);
    f.t_obs = detail::get_or<std::size_t>(j, "t_obs", 0);
    f.converged = detail::get_or(j, "converged", false);
    f.flagged = detail::get_or(j, "flagged", false);
    f.sigma_singular = detail::get_or(j, "sigma_singular", false);
    f.sigma_message = detail::get_or<std::string>(j, "sigma_message", "");
    f.node_ids = detail::get_or(j, "node_ids", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid fit JSON: ") + e.what());
  }
  return f;
}

inline json to_json(const WaldResult& w) {
  return {{"statistic", w.statistic},
          {"df", w.df},
          {"p_value", w.p_value},
          {"label", w.label},
          {"warnings", w.warnings}};
}

inline json to_json(const NetworkSpec& s) {
  return {{"kind", to_string(s.kind)}, {"d", s.band},           {"d_max", s.d_max},
          {"a", s.scaling},            {"k", s.blocks},         {"p_in", s.p_in},
          {"p_out_scale", s.p_out_scale}};
}

inline NetworkSpec network_spec_from_json(const json& j) {
  NetworkSpec s;
  try {
    s.kind = parse_net_kind(j.at("kind").get<std::string>());
    s.band = detail::get_or(j, "d", s.band);
    s.d_max = detail::get_or(j, "d_max", s.d_max);
    s.scaling = detail::get_or(j, "a", s.scaling);
    s.blocks = detail::get_or(j, "k", s.blocks);
    s.p_in = detail::get_or(j, "p_in", s.p_in);
    s.p_out_scale = detail::get_or(j, "p_out_scale", s.p_out_scale);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid network spec: ") + e.what());
  }
  return s;
}

/// {"network": {...}, "ladder": [[T, N], ...], "true_params": {...},
///  "m_reps": M, "base_seed": S, "burn_in": B, "fit": {...},
///  "rotate_starts": true, "threads": 0}
inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.network = network_spec_from_json(j.at("network"));
    for (const auto& pt : j.at("ladder")) {
      if (!pt.is_array() || pt.size() != 2) throw ValidationError("ladder entries must be [T, N]");
      cfg.ladder.push_back({pt[0].get<std::size_t>(), pt[1].get<std::size_t>()});
    }
    cfg.true_params = params_from_json(j.at("true_params"));
    cfg.m_reps = detail::get_or(j, "m_reps", cfg.m_reps);
    cfg.base_seed = detail::get_or<std::uint64_t>(j, "base_seed", cfg.base_seed);
    cfg.burn_in = detail::get_or<std::size_t>(j, "burn_in", cfg.burn_in);
    if (j.contains("fit")) cfg.fit_opts = fit_options_from_json(j.at("fit"));
    cfg.rotate_starts = detail::get_or(j, "rotate_starts", cfg.rotate_starts);
    cfg.threads = detail::get_or(j, "threads", cfg.threads);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline json to_json(const ExperimentConfig& cfg) {
  json ladder = json::array();
  for (const auto& pt : cfg.ladder) ladder.push_back({pt.t_len, pt.n_nodes});
  return {{"network", to_json(cfg.network)},   {"ladder", ladder},
          {"true_params", to_json(cfg.true_params)}, {"m_reps", cfg.m_reps},
          {"base_seed", cfg.base_seed},        {"burn_in", cfg.burn_in},
          {"fit", to_json(cfg.fit_opts)},      {"rotate_starts", cfg.rotate_starts}};
}

inline json to_json(const ExperimentReport& rep, const ExperimentConfig& cfg) {
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json reps = json::array();
    for (const auto& r : row.replications) {
      json jr = {{"m", r.m}, {"ok", r.ok}};
      if (r.ok) {
        jr["theta"] = detail::coef_object(r.theta);
        jr["se"] = detail::coef_object(r.se);
        jr["r_hat"] = r.r_hat;
        jr["covered"] = detail::coef_flags(r.covered);
        jr["converged"] = r.converged;
        jr["wald"] = {{"threshold", r.wald_threshold},
                      {"garch", r.wald_garch},
                      {"network", r.wald_network}};
      } else {
        jr["error"] = r.error;
      }
      reps.push_back(std::move(jr));
    }
    rows.push_back({{"T", row.point.t_len},
                    {"N", row.point.n_nodes},
                    {"rmse", detail::coef_object(row.rmse)},
                    {"cp", detail::coef_object(row.cp)},
                    {"mean_r_hat", row.mean_r_hat},
                    {"successes", row.successes},
                    {"failures", row.failures},
                    {"valid", row.valid},
                    {"rejection_rate_5pct",
                     {{"threshold", row.reject_threshold},
                      {"garch", row.reject_garch},
                      {"network", row.reject_network}}},
                    {"replications", std::move(reps)}});
  }
  return {{"config", to_json(cfg)}, {"rows", rows}};
}

inline void write_qq_csv(const std::vector<QQSeries>& series, std::ostream& out) {
  out << "coefficient,theoretical,empirical\n";
  char buf[64];
  for (const auto& s : series) {
    for (std::size_t j = 0; j < s.empirical.size(); ++j) {
      out << s.coefficient;
      std::snprintf(buf, sizeof buf, ",%.17g", s.theoretical[j]);
      out << buf;
      std::snprintf(buf, sizeof buf, ",%.17g\n", s.empirical[j]);
      out << buf;
    }
  }
}

}  // namespace ptngarch
