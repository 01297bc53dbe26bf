#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptngarch/dgp.hpp"
#include "ptngarch/error.hpp"
#include "ptngarch/estimate.hpp"
#include "ptngarch/inference.hpp"
#include "ptngarch/io.hpp"
#include "ptngarch/montecarlo.hpp"
#include "ptngarch/network.hpp"

namespace ptngarch::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2 };

namespace detail {

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("PTNGARCH_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
  }
  return 1;
}

// Accepts inline JSON ("{...}") or a path to a JSON file.
inline json json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("invalid inline JSON: ") + e.what());
    }
  }
  return load_json(arg);
}

// Numeric matrix from a file path or inline text; rows separated by newlines
// or ';', entries by ','.
inline std::vector<std::vector<double>> numeric_rows(const std::string& arg) {
  std::string text = arg;
  if (std::filesystem::exists(arg)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  for (auto& c : text) {
    if (c == ';') c = '\n';
  }
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto view = ptngarch::detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<double> row;
    for (auto cell : ptngarch::detail::split_csv_row(view)) {
      try {
        std::size_t used = 0;
        const std::string s(cell);
        row.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw ValidationError("'" + std::string(cell) + "' is not a number");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. Returns 0 on success,
/// 1 on validation errors (including usage errors), 2 on numerical failure.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Threshold network GARCH toolkit for count panels", "ptngarch"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads for Monte Carlo (default: PTNGARCH_THREADS or all cores)");

  // gen-net
  auto* gen = app.add_subcommand("gen-net", "Generate a network edge list");
  std::string kind = "band", net_out;
  std::size_t n_nodes = 0;
  long band = 2;
  std::size_t blocks = 3;
  double d_max = 5.0, scaling = 2.5, p_in = 0.5, p_out_scale = 0.001;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--kind", kind, "band|random|powerlaw|block")->required();
  gen->add_option("--n", n_nodes, "Node count")->required();
  gen->add_option("--d", band, "Band width D (band)");
  gen->add_option("--k", blocks, "Block count K (block)");
  gen->add_option("--dmax", d_max, "Upper bound of the uniform out-degree draw (random, powerlaw)");
  gen->add_option("--a", scaling, "Power-law scaling (powerlaw)");
  gen->add_option("--p-in", p_in, "Within-block link probability (block)");
  gen->add_option("--p-out-scale", p_out_scale, "Cross-block probability times N (block)");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", net_out, "Output edge list")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a count panel");
  std::string sim_net, sim_params, sim_out, sim_lambda_out;
  std::size_t sim_t = 0, sim_burn = 500;
  std::optional<std::uint64_t> sim_seed;
  bool sim_header = false;
  sim->add_option("--net", sim_net, "Edge list file")->required();
  sim->add_option("--params", sim_params, "Parameter JSON (inline or file)")->required();
  sim->add_option("--t", sim_t, "Number of time points")->required();
  sim->add_option("--burn", sim_burn, "Burn-in steps");
  sim->add_option("--seed", sim_seed, "RNG seed (default: PTNGARCH_SEED or 1)");
  sim->add_option("--out", sim_out, "Output panel CSV")->required();
  sim->add_option("--lambda-out", sim_lambda_out, "Also write the latent intensities as CSV");
  sim->add_flag("--header", sim_header, "Write a header row of node ids");

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit the model by two-step maximum likelihood");
  std::string fit_panel, fit_net, fit_out, fit_init = "zero";
  FitOptions fopts;
  bool fit_symmetrize = false;
  fitc->add_option("--panel", fit_panel, "Panel CSV (rows = time, columns = nodes)")->required();
  fitc->add_option("--net", fit_net, "Edge list file")->required();
  fitc->add_option("--rmin", fopts.r_min, "Smallest threshold in the grid");
  fitc->add_option("--rmax", fopts.r_max, "Largest threshold (default: 95th percentile of counts)");
  fitc->add_option("--delta", fopts.delta, "Lower bound for omega");
  fitc->add_option("--beta-max", fopts.beta_max, "Upper bound for beta");
  fitc->add_option("--coef-max", fopts.coef_max, "Upper bound for the other coefficients");
  fitc->add_option("--starts", fopts.n_starts, "Multistart count");
  fitc->add_option("--max-iter", fopts.max_iter, "Iteration cap per start");
  fitc->add_option("--init", fit_init, "Initial intensity: zero|sample_mean");
  fitc->add_flag("--symmetrize", fit_symmetrize, "Add the reverse of every edge");
  fitc->add_option("--out", fit_out, "Output fit JSON")->required();

  // test
  auto* testc = app.add_subcommand("test", "Wald test of linear restrictions on a fit");
  std::string test_fit, test_hyp, test_gamma, test_eta, test_out;
  testc->add_option("--fit", test_fit, "Fit JSON")->required();
  auto* hyp_opt = testc->add_option("--hypothesis", test_hyp, "threshold|garch|network");
  auto* gamma_opt = testc->add_option("--gamma", test_gamma, "Restriction matrix (CSV file or inline, rows split by ';')");
  auto* eta_opt = testc->add_option("--eta", test_eta, "Restriction targets (CSV file or inline)");
  testc->add_option("--out", test_out, "Write the result JSON here as well as to stdout");
  hyp_opt->excludes(gamma_opt)->excludes(eta_opt);
  gamma_opt->needs(eta_opt);
  eta_opt->needs(gamma_opt);

  // mc
  auto* mcc = app.add_subcommand("mc", "Monte Carlo replication experiment");
  std::string mc_config, mc_out, mc_qq;
  mcc->add_option("--config", mc_config, "Experiment JSON")->required();
  mcc->add_option("--out", mc_out, "Report JSON")->required();
  mcc->add_option("--qq", mc_qq, "Q-Q table CSV for the last ladder point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    if (gen->parsed()) {
      NetworkSpec spec;
      spec.kind = parse_net_kind(kind);
      spec.band = band;
      spec.blocks = blocks;
      spec.d_max = d_max;
      spec.scaling = scaling;
      spec.p_in = p_in;
      spec.p_out_scale = p_out_scale;
      const Network net = make_network(spec, n_nodes, gen_seed.value_or(detail::default_seed()));
      write_file_atomically(net_out, [&](std::ostream& o) { write_edge_list(net, o); });
      out << "wrote " << net.size() << " nodes, " << net.edge_count() << " edges to " << net_out << '\n';
    } else if (sim->parsed()) {
      const Network net = load_edge_list(sim_net);
      const ThresholdParams p = params_from_json(detail::json_argument(sim_params));
      SimulationOptions sopts;
      sopts.burn_in = sim_burn;
      sopts.keep_lambda = !sim_lambda_out.empty();
      const auto stat = check_stationarity(p);
      if (!stat.satisfied) {
        err << "warning: alpha* + xi + beta = " << stat.total
            << " >= 1; the sufficient stationarity condition does not hold\n";
      }
      SimulationResult res = simulate_path(p, net, sim_t, sim_seed.value_or(detail::default_seed()), sopts);
      if (sim_header) {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < net.size(); ++i) ids.push_back("node_" + std::to_string(i));
        res.panel.set_node_ids(std::move(ids));
      }
      save_panel(res.panel, sim_out);
      if (sopts.keep_lambda) {
        write_file_atomically(sim_lambda_out, [&](std::ostream& o) {
          char buf[40];
          for (std::size_t t = 0; t < sim_t; ++t) {
            for (std::size_t i = 0; i < net.size(); ++i) {
              std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", res.lambda[i * sim_t + t]);
              o << buf;
            }
            o << '\n';
          }
        });
      }
      out << "wrote " << net.size() << " x " << sim_t << " panel to " << sim_out << '\n';
    } else if (fitc->parsed()) {
      if (fit_init == "zero") {
        fopts.initial = InitialIntensity::zero;
      } else if (fit_init == "sample_mean") {
        fopts.initial = InitialIntensity::sample_mean;
      } else {
        throw ValidationError("--init must be zero or sample_mean");
      }
      const Panel panel = load_panel(fit_panel);
      EdgeListOptions eopts;
      eopts.n_nodes = panel.n_nodes();
      eopts.symmetrize = fit_symmetrize;
      const Network net = load_edge_list(fit_net, eopts);
      const FitResult f = fit(panel, net, fopts);
      json j = to_json(f);
      j["options"] = to_json(fopts);
      save_json(j, fit_out);
      out << "r_hat = " << f.r_hat << ", loglik = " << f.loglik << (f.flagged ? " (FLAGGED)" : "")
          << '\n';
    } else if (testc->parsed()) {
      const FitResult f = fit_result_from_json(load_json(test_fit));
      WaldResult w;
      if (!test_hyp.empty()) {
        if (test_hyp == "threshold") {
          w = threshold_test(f);
        } else if (test_hyp == "garch") {
          w = garch_test(f);
        } else if (test_hyp == "network") {
          w = network_test(f);
        } else {
          throw ValidationError("unknown hypothesis '" + test_hyp + "' (threshold|garch|network)");
        }
      } else if (!test_gamma.empty()) {
        const auto rows = detail::numeric_rows(test_gamma);
        for (const auto& row : rows) {
          if (row.size() != 5) throw ValidationError("every --gamma row needs 5 entries");
        }
        WaldSpec spec;
        spec.gamma = Matrix::from_rows(rows);
        for (const auto& row : detail::numeric_rows(test_eta)) {
          spec.eta.insert(spec.eta.end(), row.begin(), row.end());
        }
        spec.label = "custom linear restriction";
        w = wald_test(f, spec);
      } else {
        throw ValidationError("test needs --hypothesis or --gamma/--eta");
      }
      const json j = to_json(w);
      if (!test_out.empty()) save_json(j, test_out);
      out << j.dump(2) << '\n';
    } else if (mcc->parsed()) {
      ExperimentConfig cfg = experiment_config_from_json(load_json(mc_config));
      if (threads > 0) cfg.threads = threads;
      const ExperimentReport rep = run_experiment(cfg);
      json j = to_json(rep, cfg);
      if (!mc_qq.empty()) {
        const auto& row = rep.rows.back();
        std::vector<Theta> est;
        std::vector<Vec5> se;
        for (const auto& r : row.replications) {
          if (!r.ok) continue;
          est.push_back(r.theta);
          se.push_back(r.se);
        }
        if (est.size() < 20) {
          throw ValidationError("Q-Q output needs at least 20 successful replications, got " +
                                std::to_string(est.size()));
        }
        const auto series = qq_data(est, cfg.true_params.theta(), se);
        for (const auto& s : series) {
          if (!s.diagnostic.empty()) err << "warning: " << s.coefficient << ": " << s.diagnostic << '\n';
        }
        save_json(j, mc_out);
        write_file_atomically(mc_qq, [&](std::ostream& o) { write_qq_csv(series, o); });
      } else {
        save_json(j, mc_out);
      }
      for (const auto& row : rep.rows) {
        out << "T=" << row.point.t_len << " N=" << row.point.n_nodes << " ok=" << row.successes
            << " failed=" << row.failures << " mean_r=" << row.mean_r_hat << '\n';
      }
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}

}  // namespace ptngarch::cli
