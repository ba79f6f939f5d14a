// fwlab: command-line front end.
//
//   fwlab simulate CONFIG... [--jobs N]
//   fwlab profiles CONFIG --t T [--theta THETA] [--out FILE|-]
//   fwlab verify [--only NAME,...] [--none]
//   fwlab compare-kdvb CONFIG
//   fwlab fit RUN_DIR --window T0 T1 [--log-power Q] [--label LABEL]
//
// Exit codes: 0 ok, 1 verification or analysis failure, 2 configuration
// error, 3 blow-up.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include "fwlab/io.hpp"
#include "fwlab/run.hpp"
#include "fwlab/verify_suite.hpp"

namespace {

using fwlab::io::json;

enum Exit { kOk = 0, kVerifyFailed = 1, kConfig = 2, kBlowUp = 3 };

int classify(const std::exception_ptr& ep, std::string& msg) {
  try {
    std::rethrow_exception(ep);
  } catch (const fwlab::BlowUpError& e) {
    msg = std::string(e.what()) + " [t = " + fwlab::io::format_double(e.time) + "]";
    return kBlowUp;
  } catch (const fwlab::DomainTruncationError& e) {
    msg = std::string(e.what()) + " [t = " + fwlab::io::format_double(e.time) + "]";
    return kConfig;
  } catch (const fwlab::ConfigError& e) {
    msg = e.what();
    return kConfig;
  } catch (const fwlab::ConsistencyError& e) {
    msg = e.what();
    return kConfig;
  } catch (const fwlab::DomainError& e) {
    msg = e.what();
    return kConfig;
  } catch (const std::exception& e) {
    msg = e.what();
    return kVerifyFailed;
  }
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (...) {
    std::string msg;
    const int code = classify(std::current_exception(), msg);
    std::fprintf(stderr, "fwlab: error: %s\n", msg.c_str());
    return code;
  }
}

int cmd_simulate(const std::vector<std::string>& configs, int jobs) {
  const auto root = fwlab::io::run_root();
  std::atomic<std::size_t> next{0};
  std::vector<int> codes(configs.size(), kOk);
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      codes[i] = guarded([&] {
        const auto cfg = fwlab::io::load_run_config(configs[i]);
        const auto res = fwlab::run::simulate_run(cfg, root);
        std::lock_guard<std::mutex> lock(log_mu);
        std::printf("%s: %zu snapshots, mass drift %.3g -> %s\n", configs[i].c_str(),
                    res.traj.size(), res.mass_drift, res.dir.string().c_str());
        return kOk;
      });
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

int cmd_profiles(const std::string& config, double t, std::optional<double> theta_opt,
                 const std::string& out) {
  return guarded([&] {
    const auto cfg = fwlab::io::load_run_config(config);
    if (t < 0.0) throw fwlab::ConfigError("profiles: t must be >= 0");
    const fwlab::Grid g(cfg.half_length, cfg.size);
    const auto u0 = fwlab::run::make_initial_data(cfg, g);
    cfg.model.validate();
    fwlab::ThirdProfile tp(cfg.model, fwlab::make_profile_constants(cfg.model, u0.integral()));
    const auto theta = theta_opt ? theta_opt : cfg.analyses.theta_value;
    if (!theta) throw fwlab::ConfigError("profiles: the W column needs theta (--theta or theta_value)");
    tp.set_theta(*theta);
    const double shift = cfg.solver.moving_frame ? fwlab::derive(cfg.model).alpha * t : 0.0;
    const std::string csv = fwlab::run::profiles_csv(g, t, shift, tp);
    if (out == "-") {
      std::fwrite(csv.data(), 1, csv.size(), stdout);
    } else {
      const auto path = out.empty() ? fwlab::io::run_root() / cfg.name /
                                          ("profiles_t" + fwlab::run::time_tag(t) + ".csv")
                                    : std::filesystem::path(out);
      fwlab::io::write_text(path, csv);
      std::printf("%s\n", path.string().c_str());
    }
    return kOk;
  });
}

int cmd_verify(const std::string& only_csv, bool none, const std::string& inject) {
  return guarded([&] {
    fwlab::oracle::VerifyOptions opt;
    if (inject == "resolvent-sign")
      opt.flip_resolvent_sign = true;
    else if (!inject.empty())
      throw fwlab::ConfigError("verify: unknown fault '" + inject + "'");
    std::vector<std::string> only;
    std::stringstream ss(only_csv);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) only.push_back(item);
    const auto reports = fwlab::oracle::run_checks(opt, only, none);
    json out = json::array();
    bool ok = true;
    for (const auto& r : reports) {
      ok = ok && r.passed;
      out.push_back({{"name", r.name},
                     {"max_abs_diff", fwlab::io::format_double(r.max_abs_diff)},
                     {"tolerance", r.tolerance},
                     {"passed", r.passed}});
    }
    std::printf("%s\n", out.dump(2).c_str());
    return ok ? kOk : kVerifyFailed;
  });
}

int cmd_compare(const std::string& config) {
  return guarded([&] {
    const auto cfg = fwlab::io::load_run_config(config);
    const json report = fwlab::run::compare_kdvb_run(cfg, fwlab::io::run_root());
    std::printf("%s\n", report.dump(2).c_str());
    return kOk;
  });
}

int cmd_fit(const std::string& run_dir, const std::vector<double>& window, int q,
            const std::string& label) {
  return guarded([&] {
    if (window.size() != 2 || !(window[0] < window[1]))
      throw fwlab::ConfigError("fit: --window needs T0 < T1");
    const auto path = std::filesystem::path(run_dir) / "norms.csv";
    const auto series = fwlab::io::parse_norms_csv(fwlab::io::read_text(path), path.string());
    json out = json::array();
    for (const auto& s : series) {
      if (!label.empty() && s.label != label) continue;
      const auto f = fwlab::decay_fit(s, q, fwlab::FitWindow{window[0], window[1]});
      out.push_back(fwlab::io::to_json(f, s));
    }
    if (out.empty()) throw fwlab::ConfigError("fit: no series matched");
    std::printf("%s\n", out.dump(2).c_str());
    return kOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscous Fornberg-Whitham numerical laboratory"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run simulations and write artifacts");
  std::vector<std::string> sim_configs;
  int jobs = 1;
  sim->add_option("config", sim_configs, "Run configuration files")->required()->check(CLI::ExistingFile);
  sim->add_option("--jobs,-j", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto* prof = app.add_subcommand("profiles", "Dump chi, eta, V, W, Psi, Q at time t");
  std::string prof_config, prof_out;
  double prof_t = 0.0;
  std::optional<double> prof_theta;
  prof->add_option("config", prof_config)->required()->check(CLI::ExistingFile);
  prof->add_option("--t", prof_t, "Time")->required();
  prof->add_option("--theta", prof_theta, "Third-profile amplitude for W");
  prof->add_option("--out", prof_out, "Output file, '-' for stdout");

  auto* ver = app.add_subcommand("verify", "Run the oracle suite");
  std::string only, inject;
  bool none = false;
  ver->add_option("--only", only, "Comma-separated check names");
  ver->add_flag("--none", none, "Select no checks");
  ver->add_option("--inject-fault", inject, "Negative control (resolvent-sign)")->group("");

  auto* cmp = app.add_subcommand("compare-kdvb", "Compare theta with its KdV-Burgers twin");
  std::string cmp_config;
  cmp->add_option("config", cmp_config)->required()->check(CLI::ExistingFile);

  auto* fit = app.add_subcommand("fit", "Re-fit a stored norms.csv");
  std::string fit_dir, fit_label;
  std::vector<double> window;
  int q = 0;
  fit->add_option("run_dir", fit_dir)->required()->check(CLI::ExistingDirectory);
  fit->add_option("--window", window, "T0 T1")->expected(2)->required();
  fit->add_option("--log-power", q, "q in t^p (log t)^q")->check(CLI::IsMember({0, 1}));
  fit->add_option("--label", fit_label, "Only this series label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  if (*sim) return cmd_simulate(sim_configs, jobs);
  if (*prof) return cmd_profiles(prof_config, prof_t, prof_theta, prof_out);
  if (*ver) return cmd_verify(only, none, inject);
  if (*cmp) return cmd_compare(cmp_config);
  if (*fit) return cmd_fit(fit_dir, window, q, fit_label);
  return kConfig;
}
