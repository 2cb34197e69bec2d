#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "manifest.hpp"
#include "spsaoi/aoi.hpp"
#include "spsaoi/csv.hpp"
#include "spsaoi/oracles.hpp"
#include "spsaoi/sim.hpp"

namespace spsaoi::tools {

namespace {

using nlohmann::ordered_json;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Bounded worker pool over [0, n); fn must be safe to run concurrently for
// distinct indices.
void parallel_for(int threads, std::size_t n,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  const int workers = std::min<std::size_t>(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> head{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = head.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string csv_of_pmf_cdf(const Pmf& pmf, const std::string& header) {
  std::ostringstream ss;
  write_pmf_cdf_csv(ss, pmf, header);
  return ss.str();
}

std::string csv_of_pmf(const Pmf& pmf, const std::string& vh,
                       const std::string& ph) {
  std::ostringstream ss;
  write_pmf_csv(ss, pmf, vh, ph);
  return ss.str();
}

struct SimPoint {
  Pmf aoi;
  double avg_aoi = 0.0;
  double psi = 0.0;
  double censored_fraction = 0.0;
  double mean_empty = 0.0;
  Pmf reservation_b;
  std::int64_t n_reservations = 0;
};

SimPoint simulate_point(const SystemConfig& cfg, std::int64_t theta,
                        bool pool_nodes, TraceSet* keep_traces = nullptr) {
  TraceSet tr = run_simulation(cfg);
  auto dist = empirical_aoi_pmf(tr, 0, pool_nodes);
  SimPoint p;
  p.aoi = std::move(dist.averaged);
  p.censored_fraction = dist.censored_fraction;
  p.avg_aoi = mean(p.aoi) / p.aoi.mass();
  p.psi = std::clamp(1.0 - p.aoi.cdf(theta) / p.aoi.mass(), 0.0, 1.0);
  double mean_n = 0.0;
  for (std::int64_t x = 0; x < tr.frames(); ++x) mean_n += tr.empty_count(x);
  p.mean_empty = mean_n / static_cast<double>(tr.frames());
  auto rs = reservation_statistics(tr, 0, pool_nodes);
  p.reservation_b = std::move(rs.duration_at_end);
  p.n_reservations = rs.n_completed;
  if (keep_traces) *keep_traces = std::move(tr);
  return p;
}

struct AnalyticPoint {
  Pmf aoi;
  double avg_aoi = 0.0;
  double psi = 0.0;
  double e_n = 0.0;
  int fp_iterations = 0;
  double fp_residual = 0.0;
  std::vector<double> fp_trajectory;
  double deficit = 0.0;
  double singleton_weight = 0.0;
  double collision_weight = 0.0;
  Pmf collision_duration;
};

AnalyticPoint analytic_point(const ExperimentSpec& spec,
                             const SystemConfig& cfg) {
  AnalyticParams params =
      AnalyticParams::from_config(cfg, spec.w_bar, spec.b_bar);
  params.geometric_form = spec.geometric_form;
  AnalyticModel model(params);
  AnalyticPoint p;
  p.aoi = model.aoi_pmf_averaged();
  p.avg_aoi = model.average_aoi();
  p.psi = model.violation_probability(spec.theta);
  p.e_n = model.empty_slots();
  if (model.fixed_point()) {
    p.fp_iterations = model.fixed_point()->iterations;
    p.fp_residual = model.fixed_point()->residual;
    p.fp_trajectory = model.fixed_point()->trajectory;
  }
  p.deficit = model.truncation_deficit();
  p.singleton_weight = model.singleton_weight();
  p.collision_weight = model.collision_weight();
  p.collision_duration = model.collision_duration();
  return p;
}

ordered_json sim_json(const SimPoint& p) {
  ordered_json j;
  j["avg_aoi"] = p.avg_aoi;
  j["psi_theta"] = p.psi;
  j["aoi_mass"] = p.aoi.mass();
  j["censored_fraction"] = p.censored_fraction;
  j["mean_empty_slots"] = p.mean_empty;
  j["reservations"] = p.n_reservations;
  return j;
}

ordered_json analytic_json(const AnalyticPoint& p) {
  ordered_json j;
  j["avg_aoi"] = p.avg_aoi;
  j["psi_theta"] = p.psi;
  j["aoi_mass"] = p.aoi.mass();
  j["expected_empty_slots"] = p.e_n;
  j["fixed_point_iterations"] = p.fp_iterations;
  j["fixed_point_residual"] = p.fp_residual;
  j["truncation_deficit"] = p.deficit;
  j["singleton_weight"] = p.singleton_weight;
  j["collision_weight"] = p.collision_weight;
  j["renormalized_metrics"] = true;
  return j;
}

std::string fixed_point_csv(const std::vector<double>& traj) {
  std::ostringstream ss;
  ss << "iteration,E_N\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    ss << i << ',' << format_real(traj[i]) << '\n';
  }
  return ss.str();
}

std::string combined_cdf_csv(const Pmf& analytic, const Pmf& sim) {
  std::ostringstream ss;
  ss << "delta,cdf_analytic,cdf_sim\n";
  const std::int64_t hi = std::max(analytic.max_value(), sim.max_value());
  double ca = 0.0, cs = 0.0;
  for (std::int64_t d = 0; d <= hi; ++d) {
    ca += analytic.at(d);
    cs += sim.at(d);
    ss << d << ',' << format_real(ca) << ',' << format_real(cs) << '\n';
  }
  return ss.str();
}

SystemConfig apply_axis(const SystemConfig& base, const std::string& param,
                        double value) {
  SystemConfig cfg = base;
  if (param == "p_E" || param == "p_e") {
    cfg.ending_prob = value;
  } else if (param == "V" || param == "nodes") {
    cfg.num_nodes = static_cast<int>(std::llround(value));
  } else if (param == "m" || param == "frame_size") {
    cfg.frame_size = static_cast<int>(std::llround(value));
  } else {
    throw std::runtime_error("sweep parameter must be one of p_E, V, m");
  }
  cfg.validate();
  return cfg;
}

int run_simulate(const ExperimentSpec& spec, OutputBundle& out) {
  const auto t0 = std::chrono::steady_clock::now();
  TraceSet tr;
  SimPoint p = simulate_point(spec.base, spec.theta, spec.pool_nodes, &tr);
  if (spec.emit_csv) {
    out.write_file("aoi_cdf_sim.csv", csv_of_pmf_cdf(p.aoi, "delta"));
    out.write_file("reservation_durations_sim.csv",
                   csv_of_pmf(p.reservation_b, "b", "pmf"));
    const auto er = empty_slot_report(tr);
    out.write_file("empty_slots_sim.csv", csv_of_pmf(er.empirical, "n", "pmf"));
  }
  if (spec.dump_trace) {
    std::ofstream bin(out.dir() / "trace.bin", std::ios::binary);
    tr.write_binary(bin);
    bin.close();
    out.record("trace.bin");
  }
  if (spec.emit_json) {
    ordered_json j;
    j["spec"] = spec.echo();
    j["sim"] = sim_json(p);
    j["wall_time_s"] = elapsed_s(t0);
    out.write_file("metrics.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_analytic(const ExperimentSpec& spec, OutputBundle& out) {
  const auto t0 = std::chrono::steady_clock::now();
  AnalyticPoint p = analytic_point(spec, spec.base);
  if (spec.emit_csv) {
    out.write_file("aoi_cdf_analytic.csv", csv_of_pmf_cdf(p.aoi, "delta"));
    out.write_file("collision_duration_analytic.csv",
                   csv_of_pmf(p.collision_duration, "c", "pmf"));
    out.write_file("fixed_point.csv", fixed_point_csv(p.fp_trajectory));
  }
  if (spec.emit_json) {
    ordered_json j;
    j["spec"] = spec.echo();
    j["analytic"] = analytic_json(p);
    j["wall_time_s"] = elapsed_s(t0);
    out.write_file("metrics.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_compare(const ExperimentSpec& spec, OutputBundle& out) {
  const auto t0 = std::chrono::steady_clock::now();
  AnalyticPoint ana = analytic_point(spec, spec.base);
  SimPoint sim = simulate_point(spec.base, spec.theta, spec.pool_nodes);
  const double tv = total_variation(ana.aoi, sim.aoi);
  if (spec.emit_csv) {
    out.write_file("aoi_cdf_analytic.csv", csv_of_pmf_cdf(ana.aoi, "delta"));
    out.write_file("aoi_cdf_sim.csv", csv_of_pmf_cdf(sim.aoi, "delta"));
    out.write_file("aoi_cdf.csv", combined_cdf_csv(ana.aoi, sim.aoi));
    out.write_file("fixed_point.csv", fixed_point_csv(ana.fp_trajectory));
  }
  if (spec.emit_json) {
    ordered_json j;
    j["spec"] = spec.echo();
    j["analytic"] = analytic_json(ana);
    j["sim"] = sim_json(sim);
    j["tv_aoi"] = tv;
    j["wall_time_s"] = elapsed_s(t0);
    out.write_file("metrics.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_sweep(const ExperimentSpec& spec, OutputBundle& out) {
  if (!spec.sweep_parameter || spec.sweep_values.empty()) {
    throw std::runtime_error("sweep mode requires sweep.parameter and sweep.values");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = spec.sweep_values.size();
  std::vector<SystemConfig> cfgs(n);
  for (std::size_t i = 0; i < n; ++i) {
    cfgs[i] = apply_axis(spec.base, *spec.sweep_parameter, spec.sweep_values[i]);
  }
  std::vector<AnalyticPoint> ana(n);
  std::vector<SimPoint> sim(n);
  parallel_for(spec.threads, n, [&](std::size_t i) {
    ana[i] = analytic_point(spec, cfgs[i]);
    sim[i] = simulate_point(cfgs[i], spec.theta, spec.pool_nodes);
  });

  std::ostringstream ss;
  ss << "p_E,V,m,avg_aoi_analytic,avg_aoi_sim,psi_analytic,psi_sim\n";
  ordered_json points = ordered_json::array();
  for (std::size_t i = 0; i < n; ++i) {
    ss << format_real(cfgs[i].ending_prob) << ',' << cfgs[i].num_nodes << ','
       << cfgs[i].frame_size << ',' << format_real(ana[i].avg_aoi) << ','
       << format_real(sim[i].avg_aoi) << ',' << format_real(ana[i].psi) << ','
       << format_real(sim[i].psi) << '\n';
    ordered_json pj;
    pj["index"] = i;
    pj["p_E"] = cfgs[i].ending_prob;
    pj["V"] = cfgs[i].num_nodes;
    pj["m"] = cfgs[i].frame_size;
    pj["analytic"] = analytic_json(ana[i]);
    pj["sim"] = sim_json(sim[i]);
    pj["tv_aoi"] = total_variation(ana[i].aoi, sim[i].aoi);
    points.push_back(pj);

    char name[64];
    std::snprintf(name, sizeof(name), "point_%03zu_aoi_cdf.csv", i);
    if (spec.emit_csv) {
      out.write_file(name, combined_cdf_csv(ana[i].aoi, sim[i].aoi));
    }
  }
  if (spec.emit_csv) {
    out.write_file("sweep.csv", ss.str());
    out.write_file("psi_vs_pe.csv", ss.str());
  }
  if (spec.emit_json) {
    ordered_json j;
    j["spec"] = spec.echo();
    j["points"] = points;
    j["wall_time_s"] = elapsed_s(t0);
    out.write_file("metrics.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_validate(const ExperimentSpec& spec, OutputBundle& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = spec.validate_m_values.size();
  std::vector<SystemConfig> cfgs(n);
  for (std::size_t i = 0; i < n; ++i) {
    SystemConfig cfg = spec.base;
    cfg.frame_size = static_cast<int>(spec.validate_m_values[i]);
    cfg.num_nodes = static_cast<int>(
        std::floor(spec.validate_load * static_cast<double>(cfg.frame_size)));
    cfg.validate();
    cfgs[i] = cfg;
  }
  std::vector<AssumptionDistances> dist(n);
  parallel_for(spec.threads, n, [&](std::size_t i) {
    TraceSet tr = run_simulation(cfgs[i]);
    dist[i] = assumption_distance(tr, 0, /*pool_all_nodes=*/true);
  });

  std::ostringstream ss;
  ss << "m,load,d_collision,d_singleton\n";
  ordered_json points = ordered_json::array();
  for (std::size_t i = 0; i < n; ++i) {
    ss << cfgs[i].frame_size << ',' << format_real(cfgs[i].load()) << ','
       << format_real(dist[i].d_collision) << ','
       << format_real(dist[i].d_singleton) << '\n';
    ordered_json pj;
    pj["m"] = cfgs[i].frame_size;
    pj["V"] = cfgs[i].num_nodes;
    pj["d_collision"] = dist[i].d_collision;
    pj["d_singleton"] = dist[i].d_singleton;
    pj["n_collision"] = dist[i].n_collision;
    pj["n_singleton"] = dist[i].n_singleton;
    pj["low_confidence"] = dist[i].low_confidence;
    points.push_back(pj);
  }

  // Empty-slot concentration study on the base configuration.
  TraceSet tr = run_simulation(spec.base);
  const auto er = empty_slot_report(tr);
  if (spec.emit_csv) {
    out.write_file("var_dist.csv", ss.str());
    out.write_file("empty_slots.csv", csv_of_pmf(er.empirical, "n", "pmf"));
  }
  if (spec.emit_json) {
    ordered_json j;
    j["spec"] = spec.echo();
    j["points"] = points;
    j["empty_slots"] = {{"mean_empirical", er.mean_empirical},
                        {"fixed_point", er.e_n_fixed_point},
                        {"tv_vs_delta", er.tv_vs_delta}};
    j["wall_time_s"] = elapsed_s(t0);
    out.write_file("metrics.json", j.dump(2) + "\n");
  }
  return 0;
}

int run_oracle(const ExperimentSpec& spec, OutputBundle& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExactAoiResult exact = exact_aoi_small(spec.base, spec.oracle_cap);
  SimPoint sim = simulate_point(spec.base, spec.theta, spec.pool_nodes);
  AnalyticPoint ana = analytic_point(spec, spec.base);

  const double tv_sim = total_variation(exact.aoi_averaged, sim.aoi);
  const double tv_analytic = total_variation(exact.aoi_averaged, ana.aoi);

  if (spec.emit_csv) {
    out.write_file("aoi_cdf_exact.csv",
                   csv_of_pmf_cdf(exact.aoi_averaged, "delta"));
    out.write_file("collision_duration_exact.csv",
                   csv_of_pmf(exact.collision_duration, "c", "pmf"));
    out.write_file("aoi_cdf_sim.csv", csv_of_pmf_cdf(sim.aoi, "delta"));
    out.write_file("aoi_cdf_analytic.csv", csv_of_pmf_cdf(ana.aoi, "delta"));
  }
  if (spec.emit_json) {
    ordered_json j;
    j["spec"] = spec.echo();
    j["exact"] = {{"cap", exact.cap},
                  {"deficit_collision", exact.deficit_c},
                  {"deficit_aoi", exact.deficit_aoi},
                  {"cap_warning", exact.cap_warning}};
    j["sim"] = sim_json(sim);
    j["analytic"] = analytic_json(ana);
    j["tv_sim_vs_exact"] = tv_sim;
    j["tv_analytic_vs_exact"] = tv_analytic;
    j["wall_time_s"] = elapsed_s(t0);
    out.write_file("metrics.json", j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

Mode mode_from_string(const std::string& s) {
  if (s == "simulate") return Mode::simulate;
  if (s == "analytic") return Mode::analytic;
  if (s == "compare") return Mode::compare;
  if (s == "validate") return Mode::validate;
  if (s == "sweep") return Mode::sweep;
  if (s == "oracle") return Mode::oracle;
  throw std::runtime_error("unknown mode: " + s);
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::analytic: return "analytic";
    case Mode::compare: return "compare";
    case Mode::validate: return "validate";
    case Mode::sweep: return "sweep";
    case Mode::oracle: return "oracle";
  }
  return "?";
}

ExperimentSpec ExperimentSpec::from_kv(const KvConfig& kv) {
  ExperimentSpec spec;
  spec.mode = mode_from_string(kv.get_or("mode", "compare"));

  spec.base.num_nodes = static_cast<int>(kv.get_int("nodes", 0));
  spec.base.frame_size = static_cast<int>(kv.get_int("frame_size", 0));
  spec.base.ending_prob = kv.get_real("p_e", 0.0);
  spec.base.rng_seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  spec.base.warmup_frames = kv.get_int("warmup_frames", 50000);
  spec.base.measured_frames = kv.get_int("measured_frames", 500000);
  const std::string counter = kv.get_or("counter.model", "geometric");
  if (counter == "uniform") {
    UniformCounter uc;
    uc.lo = static_cast<int>(kv.get_int("counter.lo", 5));
    uc.hi = static_cast<int>(kv.get_int("counter.hi", 15));
    uc.p_keep = kv.get_real("counter.p_keep", 0.0);
    spec.base.counter_model = uc;
  } else if (counter != "geometric") {
    throw std::runtime_error("counter.model must be geometric or uniform");
  }
  spec.base.validate();

  spec.w_bar = static_cast<int>(kv.get_int("analytic.w_bar", 50));
  spec.b_bar = static_cast<int>(kv.get_int("analytic.b_bar", 1000));
  const std::string form = kv.get_or("analytic.geometric_form", "normalized");
  if (form == "literal") {
    spec.geometric_form = GeometricForm::literal;
  } else if (form != "normalized") {
    throw std::runtime_error("analytic.geometric_form must be normalized or literal");
  }

  if (kv.has("sweep.parameter")) spec.sweep_parameter = *kv.get("sweep.parameter");
  spec.sweep_values = kv.get_real_list("sweep.values");
  spec.theta = kv.get_int("theta", 400);
  if (spec.theta < 0) throw std::runtime_error("theta must be >= 0");
  spec.pool_nodes = kv.get_bool("pool_nodes", false);
  spec.dump_trace = kv.get_bool("dump_trace", false);

  if (kv.has("validate.m_values")) {
    spec.validate_m_values = kv.get_int_list("validate.m_values");
  }
  spec.validate_load = kv.get_real("validate.load", 0.65);
  spec.oracle_cap = kv.get_int("oracle.cap_c", -1);

  spec.output_dir = kv.get_or("out", "results");
  const auto formats = kv.get_list("formats");
  if (!formats.empty()) {
    spec.emit_csv = false;
    spec.emit_json = false;
    for (const auto& f : formats) {
      if (f == "csv") spec.emit_csv = true;
      else if (f == "json") spec.emit_json = true;
      else throw std::runtime_error("formats must be a subset of csv,json");
    }
  }
  spec.threads = static_cast<int>(kv.get_int("threads", 0));
  return spec;
}

ordered_json ExperimentSpec::echo() const {
  ordered_json j;
  j["mode"] = to_string(mode);
  j["nodes"] = base.num_nodes;
  j["frame_size"] = base.frame_size;
  j["p_e"] = base.ending_prob;
  j["seed"] = base.rng_seed;
  j["warmup_frames"] = base.warmup_frames;
  j["measured_frames"] = base.measured_frames;
  if (const auto* uc = std::get_if<UniformCounter>(&base.counter_model)) {
    j["counter"] = {{"model", "uniform"},
                    {"lo", uc->lo},
                    {"hi", uc->hi},
                    {"p_keep", uc->p_keep}};
  } else {
    j["counter"] = {{"model", "geometric"}};
  }
  j["w_bar"] = w_bar;
  j["b_bar"] = b_bar;
  j["geometric_form"] =
      geometric_form == GeometricForm::normalized ? "normalized" : "literal";
  j["theta"] = theta;
  j["pool_nodes"] = pool_nodes;
  if (sweep_parameter) {
    j["sweep"] = {{"parameter", *sweep_parameter}, {"values", sweep_values}};
  }
  if (mode == Mode::validate) {
    j["validate"] = {{"m_values", validate_m_values}, {"load", validate_load}};
  }
  return j;
}

int run_experiment(const ExperimentSpec& spec) {
  OutputBundle out(spec.output_dir);
  int rc = 1;
  switch (spec.mode) {
    case Mode::simulate: rc = run_simulate(spec, out); break;
    case Mode::analytic: rc = run_analytic(spec, out); break;
    case Mode::compare: rc = run_compare(spec, out); break;
    case Mode::validate: rc = run_validate(spec, out); break;
    case Mode::sweep: rc = run_sweep(spec, out); break;
    case Mode::oracle: rc = run_oracle(spec, out); break;
  }
  out.write_manifest();
  return rc;
}

ordered_json pmf_to_json(const Pmf& pmf) {
  ordered_json j;
  j["offset"] = pmf.offset();
  j["weights"] = pmf.weights();
  j["mass"] = pmf.mass();
  return j;
}

Pmf pmf_from_json(const nlohmann::json& j) {
  return Pmf(j.at("offset").get<std::int64_t>(),
             j.at("weights").get<std::vector<double>>());
}

}  // namespace spsaoi::tools
