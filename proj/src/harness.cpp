#include "lagan/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "lagan/verify.hpp"

namespace lagan {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

}  // namespace

FiniteProblem make_finite_problem(const RunConfig& cfg) {
  if (cfg.dataset != Dataset::finite) throw ConfigError("descent needs dataset=finite");
  Rng rng(cfg.seed, Stream::data);
  return {random_distribution(cfg.space_size, rng),
          TransformationSet::uniform(TransformationSet::cyclic_group(cfg.space_size, cfg.K))};
}

oracle::DescentOptions descent_options(const RunConfig& cfg, const FiniteProblem& problem) {
  oracle::DescentOptions o;
  o.steps = cfg.steps;
  o.lr = cfg.descent_lr;
  o.disc_mode = cfg.disc_mode;
  o.n_dis = cfg.n_dis;
  o.disc_lr = cfg.disc_lr;
  o.lambda_d = cfg.resolved_lambda_d();
  o.lambda_g = cfg.resolved_lambda_g();
  o.identity_weight = cfg.identity_weight;
  o.seed = cfg.seed;
  if (cfg.init == InitKind::rotated) o.init = pushforward(problem.set[1], problem.pd);
  return o;
}

std::string trajectory_csv(const oracle::DescentResult& result) {
  std::string s = "step,tv,tv_mixture,objective,grad_norm\n";
  for (const auto& r : result.trajectory)
    s += std::to_string(r.step) + "," + num(r.tv) + "," + num(r.tv_mixture) + "," + num(r.objective) +
         "," + num(r.grad_norm) + "\n";
  return s;
}

oracle::DescentResult cmd_descent(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto problem = make_finite_problem(cfg);
  auto result = oracle::exact_descent(cfg.method, problem.pd, problem.set,
                                      descent_options(cfg, problem));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text(dir / "trajectory.csv", trajectory_csv(result));
  write_text(dir / "config.txt", emit_config(cfg));
  const auto& last = result.trajectory.back();
  write_text(dir / "summary.txt", "status=ok\nfinal_mmd=NA\nleaked_mass=NA\ntv_final=" + num(last.tv) +
                                      "\ntv_mixture_final=" + num(last.tv_mixture) +
                                      "\nwall_seconds=" + num(secs) + "\n" + emit_config(cfg));
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepResult cmd_sweep(const RunConfig& base, const std::string& key,
                      const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds,
                      std::size_t workers, const CellRunner& runner) {
  if (values.empty()) throw ConfigError("sweep: no values given for " + key);
  if (seeds.empty()) throw ConfigError("sweep: no seeds given");
  {
    // Reject an unknown key or a malformed value before any cell starts.
    RunConfig probe = base;
    for (const auto& v : values) apply_setting(probe, key, v);
  }

  SweepResult result;
  result.key = key;
  std::vector<RunConfig> configs;
  for (const auto& v : values)
    for (const auto s : seeds) {
      RunConfig c = base;
      apply_setting(c, key, v);
      if (key != "seed") c.seed = s;
      c.out_dir = (fs::path(base.out_dir) / (key + "=" + v) / ("seed=" + std::to_string(c.seed))).string();
      configs.push_back(c);
      SweepCell cell;
      cell.value = v;
      cell.seed = c.seed;
      cell.out_dir = c.out_dir;
      result.cells.push_back(std::move(cell));
    }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      auto& cell = result.cells[i];
      try {
        validate(configs[i]);
        const auto rep = runner(configs[i]);
        cell.ok = !rep.failed;
        cell.error = rep.failure;
        cell.final_mmd = rep.final_mmd;
        cell.leaked_mass = rep.leaked_mass;
        cell.wall_seconds = rep.wall_seconds;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, configs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  fs::create_directories(base.out_dir);
  write_text(fs::path(base.out_dir) / "runs.csv", sweep_runs_csv(result));
  write_text(fs::path(base.out_dir) / "sweep.csv", sweep_summary_csv(result));
  return result;
}

std::string sweep_runs_csv(const SweepResult& r) {
  std::string s = "key,value,seed,status,final_mmd,leaked_mass,wall_seconds,out_dir\n";
  for (const auto& c : r.cells)
    s += r.key + "," + c.value + "," + std::to_string(c.seed) + "," + (c.ok ? "ok" : "failed") + "," +
         (c.ok ? num(c.final_mmd) : "NA") + "," + (c.leaked_mass ? num(*c.leaked_mass) : "NA") + "," +
         num(c.wall_seconds) + "," + c.out_dir + "\n";
  return s;
}

std::string sweep_summary_csv(const SweepResult& r) {
  std::string s = "key,value,runs,failed,mmd_mean,mmd_sd,mmd_min,mmd_max,leak_mean,leak_sd\n";
  std::vector<std::string> order;
  for (const auto& c : r.cells)
    if (std::find(order.begin(), order.end(), c.value) == order.end()) order.push_back(c.value);
  auto stats = [](const std::vector<double>& v) {
    struct { double mean, sd, lo, hi; } st{NAN, NAN, NAN, NAN};
    if (v.empty()) return st;
    double sum = 0.0;
    for (double x : v) sum += x;
    st.mean = sum / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - st.mean) * (x - st.mean);
    st.sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
    st.lo = *std::min_element(v.begin(), v.end());
    st.hi = *std::max_element(v.begin(), v.end());
    return st;
  };
  auto cell = [](double v) { return std::isnan(v) ? std::string("NA") : num(v); };
  for (const auto& value : order) {
    std::vector<double> mmd, leak;
    std::size_t runs = 0, failed = 0;
    for (const auto& c : r.cells) {
      if (c.value != value) continue;
      ++runs;
      if (!c.ok) {
        ++failed;
        continue;
      }
      mmd.push_back(c.final_mmd);
      if (c.leaked_mass) leak.push_back(*c.leaked_mass);
    }
    const auto m = stats(mmd), l = stats(leak);
    s += r.key + "," + value + "," + std::to_string(runs) + "," + std::to_string(failed) + "," +
         cell(m.mean) + "," + cell(m.sd) + "," + cell(m.lo) + "," + cell(m.hi) + "," + cell(l.mean) +
         "," + cell(l.sd) + "\n";
  }
  return s;
}

}  // namespace lagan
