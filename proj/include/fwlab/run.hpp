#pragma once

// Run orchestration behind the CLI commands: initial data, simulation,
// requested analyses, and the artifacts of one run directory.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fwlab/analysis.hpp"
#include "fwlab/io.hpp"
#include "fwlab/profiles.hpp"
#include "fwlab/solver.hpp"

namespace fwlab::run {

using io::json;
namespace fs = std::filesystem;

inline Field make_initial_data(const io::RunConfig& cfg, const Grid& g) {
  const auto& in = cfg.initial;
  if (in.family == "zero") return Field(g);
  if (in.family == "chi") {
    ProfileConstants c;
    c.mass = in.mass;
    return Field::sample(g, [&](double x) { return chi(x, 0.0, c, cfg.model); });
  }
  if (in.family == "from-file") {
    const fs::path p = fs::path(in.path).is_absolute() ? fs::path(in.path) : cfg.base_dir / in.path;
    return io::parse_field_csv(io::read_text(p), g, p.string());
  }
  return Field::sample(g, [&](double x) {
    double v = 0.0;
    for (std::size_t k = 0; k < in.amps.size(); ++k) {
      const double y = (x - in.centers[k]) / in.widths[k];
      v += in.amps[k] * std::exp(-y * y);
    }
    return v;
  });
}

inline EquationKind make_kind(EquationTag tag) {
  switch (tag) {
    case EquationTag::ViscousFW: return EquationKind::viscous_fw();
    case EquationTag::KdVBurgers: return EquationKind::kdv_burgers();
    case EquationTag::Burgers: return EquationKind::burgers();
    case EquationTag::AuxLinear: break;
  }
  throw ConfigError("run: AuxLinear is not available from a config file");
}

/// Largest relative deviation of the snapshot masses from the first one.
inline double mass_drift(const Trajectory& traj) {
  if (traj.size() == 0) return 0.0;
  const double m0 = traj.snapshots.front().integral();
  double drift = 0.0;
  for (const auto& s : traj.snapshots) drift = std::max(drift, std::abs(s.integral() - m0));
  return m0 != 0.0 ? drift / std::abs(m0) : drift;
}

/// x, chi, eta, V, W, Psi, Q at time t on the grid shifted by `shift`.
inline std::string profiles_csv(const Grid& g, double t, double shift, const ThirdProfile& tp) {
  const auto& c = tp.constants();
  const auto& p = tp.params();
  std::string s = "x,chi,eta,V,W,Psi,Q\n";
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j) + shift;
    const double w = tp.w(x, t);
    const double ps = tp.psi(x, t);
    s += io::format_double(x) + "," + io::format_double(chi(x, t, c, p)) + "," +
         io::format_double(eta(x, t, c, p)) + "," + io::format_double(second_profile_V(x, t, c, p)) +
         "," + io::format_double(w) + "," + io::format_double(ps) + "," + io::format_double(w + ps) +
         "\n";
  }
  return s;
}

inline std::string time_tag(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

/// q = 0 and q = 1 fits of a series; a failed fit becomes an "error" record.
inline json fit_records(const NormSeries& s, std::optional<FitWindow> window) {
  json out = json::array();
  for (int q : {0, 1}) {
    try {
      out.push_back(io::to_json(decay_fit(s, q, window), s));
    } catch (const std::exception& e) {
      out.push_back({{"label", s.label},
                     {"p", io::format_double(s.p)},
                     {"l", s.l},
                     {"log_power", q},
                     {"error", e.what()}});
    }
  }
  return out;
}

struct SimulateResult {
  fs::path dir;
  Trajectory traj;
  std::vector<NormSeries> series;
  json fits = json::array();
  std::optional<ThetaEstimate> theta;
  double mass_drift = 0.0;
};

inline bool needs_profiles(const io::RunConfig& cfg) {
  const auto& a = cfg.analyses;
  return !a.profile_times.empty() || !a.norm_orders.empty() || a.theta;
}

inline SimulateResult simulate_run(const io::RunConfig& cfg, const fs::path& root) {
  const Grid g(cfg.half_length, cfg.size);
  const Field u0 = make_initial_data(cfg, g);
  const auto& p = cfg.model;
  SimulateResult res;
  res.dir = root / cfg.name;
  res.traj = simulate(p, make_kind(cfg.kind), cfg.solver, u0);
  res.mass_drift = mass_drift(res.traj);
  const auto& traj = res.traj;
  const auto& a = cfg.analyses;

  std::unique_ptr<ThirdProfile> tp;
  if (needs_profiles(cfg)) {
    p.validate();
    tp = std::make_unique<ThirdProfile>(p, make_profile_constants(p, u0.integral()));
    if (a.theta) {
      res.theta = theta(traj, tp->constants(), p);
      tp->set_theta(res.theta->value);
    } else if (a.theta_value) {
      tp->set_theta(*a.theta_value);
    }
  }

  for (int order : a.norm_orders) {
    if (order == 3 && !tp->constants().theta)
      throw ConfigError("analysis: norm order 3 needs theta (set theta = true or theta_value)");
    for (double np : a.norm_p)
      for (int l : a.norm_l) res.series.push_back(residual_series(traj, *tp, order, np, l));
  }
  for (int l : a.kernel_gap_l) {
    if (a.kernel_gap_times.empty()) break;
    for (double np : a.norm_p) res.series.push_back(kernel_gap_series(p, g, a.kernel_gap_times, l, np));
  }
  for (const auto& s : res.series)
    for (auto& rec : fit_records(s, a.fit_window)) res.fits.push_back(rec);

  io::ArtifactWriter out(res.dir);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < traj.size(); i += cfg.snapshot_stride) keep.push_back(i);
  if (traj.size() > 0 && keep.back() != traj.size() - 1) keep.push_back(traj.size() - 1);
  json manifest;
  manifest["config"] = io::to_json(cfg);
  manifest["trajectory"] = io::write_snapshots(out, traj, keep);
  manifest["mass"] = {{"initial", u0.integral()}, {"max_relative_drift", res.mass_drift}};

  out.write("norms.csv", io::norms_csv(res.series));
  json fits_doc;
  fits_doc["fits"] = res.fits;
  fits_doc["theta"] = res.theta ? io::to_json(*res.theta) : json(nullptr);
  out.write("fits.json", fits_doc.dump(2) + "\n");
  manifest["fits"] = res.fits;
  manifest["theta"] = fits_doc["theta"];

  for (double t : a.profile_times) {
    if (!tp->constants().theta)
      throw ConfigError("analysis: profile_times needs theta for the W column (theta or theta_value)");
    const double shift = cfg.solver.moving_frame ? derive(p).alpha * t : 0.0;
    out.write("profiles/profiles_t" + time_tag(t) + ".csv", profiles_csv(g, t, shift, *tp));
  }
  io::write_manifest(out, manifest);
  return res;
}

/// Matched ViscousFW and KdV-Burgers runs from the same initial data.
inline json compare_kdvb_run(const io::RunConfig& cfg, const fs::path& root) {
  const Grid g(cfg.half_length, cfg.size);
  const Field u0 = make_initial_data(cfg, g);
  const auto& p = cfg.model;
  p.validate();
  const Trajectory vfw = simulate(p, EquationKind::viscous_fw(), cfg.solver, u0);
  const Trajectory kdvb = simulate(p, EquationKind::kdv_burgers(), cfg.solver, u0);
  const ProfileConstants c = make_profile_constants(p, u0.integral());
  const ThetaEstimate th = theta(vfw, c, p);
  const ThetaEstimate tt = theta_tilde(kdvb, c, p);
  ThirdProfile tp_v(p, c);
  tp_v.set_theta(th.value);
  ThirdProfile tp_k = tp_v;
  tp_k.set_theta(tt.value);
  NormSeries sv = residual_series(vfw, tp_v, 3, 2.0);
  NormSeries sk = residual_series(kdvb, tp_k, 3, 2.0);
  sv.label = "vfw:u-chi-V-Q";
  sk.label = "kdvb:u-chi-V-Q";
  const auto window = cfg.analyses.fit_window;
  json report;
  report["theta"] = th.value;
  report["theta_uncertainty"] = th.uncertainty;
  report["theta_tilde"] = tt.value;
  report["theta_tilde_uncertainty"] = tt.uncertainty;
  report["theta0"] = theta0(u0, c, p);
  report["order3_fit_vfw"] = fit_records(sv, window)[0];
  report["order3_fit_kdvb"] = fit_records(sk, window)[0];

  io::ArtifactWriter out(root / cfg.name);
  out.write("compare_kdvb.json", report.dump(2) + "\n");
  out.write("norms.csv", io::norms_csv({sv, sk}));
  json manifest;
  manifest["config"] = io::to_json(cfg);
  manifest["mass"] = {{"initial", u0.integral()},
                      {"max_relative_drift_vfw", mass_drift(vfw)},
                      {"max_relative_drift_kdvb", mass_drift(kdvb)}};
  io::write_manifest(out, manifest);
  return report;
}

}  // namespace fwlab::run
