// blfix command-line front end: solve, check, gen, metric, bench.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "blfix/blfix.hpp"

namespace fs = std::filesystem;
using blfix::Json;

namespace {

constexpr const char* kSchema = "blfix/1";
constexpr std::uint64_t kCheckCriticalLimit = 1000000;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

struct RunRequest {
  std::string solver = "gmu";
  std::optional<double> tol;
  int max_iter = 10000;
  double eps = 1e-6;
  std::optional<double> mu;
  std::string x0 = "identity";
};

// Stopping tolerance when none is given: Thompson step for the fixed-point
// solvers, Riemannian gradient norm for rgd.
double effective_tol(const RunRequest& req) {
  if (req.tol) return *req.tol;
  return req.solver == "rgd" ? 1e-8 : 1e-10;
}

std::optional<blfix::SpdMatrix> load_x0(const std::string& arg) {
  if (arg == "identity") return std::nullopt;
  return blfix::load_spd_matrix(arg);
}

blfix::SolveOutput run_solver(const blfix::BLDatum& datum, const RunRequest& req) {
  const double tol = effective_tol(req);
  if (req.solver == "rgd") {
    blfix::RgdConfig cfg;
    cfg.tol_grad = tol;
    cfg.max_iter = req.max_iter;
    cfg.x0 = load_x0(req.x0);
    return blfix::solve_rgd(datum, cfg);
  }
  blfix::SolveConfig cfg;
  if (req.solver == "g") {
    cfg.solver = blfix::SolverKind::PlainG;
  } else if (req.solver == "gmu") {
    cfg.solver = blfix::SolverKind::Regularized;
  } else if (req.solver == "gtilde") {
    cfg.solver = blfix::SolverKind::Normalized;
  } else {
    throw UsageError("unknown solver '" + req.solver + "' (expected g, gmu, gtilde or rgd)");
  }
  cfg.tol = tol;
  cfg.max_iter = req.max_iter;
  cfg.epsilon = req.eps;
  cfg.mu_override = req.mu;
  cfg.x0 = load_x0(req.x0);
  return blfix::solve_fixed_point(datum, cfg);
}

int exit_code(blfix::Status s) {
  switch (s) {
    case blfix::Status::Converged:
      return 0;
    case blfix::Status::MaxIter:
      return 2;
    case blfix::Status::InfeasibilitySuspected:
      return 3;
  }
  return 1;
}

Json result_json(const blfix::SolveOutput& out) {
  const blfix::SolveResult& r = out.result;
  Json mu_changes = Json::array();
  for (const blfix::MuChange& c : out.trace.mu_changes) {
    mu_changes.push_back({{"iter", c.iter}, {"mu", c.mu}, {"R_est", c.R_est}});
  }
  return {{"status", blfix::to_string(r.status)},
          {"converged", r.converged},
          {"bl_constant", r.bl_constant},
          {"F_value", r.F_value},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"grad_norm", r.grad_norm},
          {"mu", r.mu},
          {"mu_changes", std::move(mu_changes)},
          {"X_star", blfix::matrix_to_json(r.X_star.matrix())}};
}

std::string trace_csv(const blfix::IterTrace& trace) {
  std::ostringstream ss;
  trace.write_csv(ss);
  return ss.str();
}

// Non-finite doubles are written as null.
std::string dump(const Json& j) { return j.dump(2); }

Json command_echo(int argc, char** argv) {
  Json echo = Json::array();
  for (int i = 1; i < argc; ++i) echo.push_back(argv[i]);
  return echo;
}

int cmd_solve(const std::string& datum_path, const RunRequest& req,
              const std::string& trace_path, const Json& echo) {
  const auto start = std::chrono::steady_clock::now();
  const std::string bytes = blfix::detail::read_file(datum_path);
  const blfix::BLDatum datum = blfix::datum_from_json(
      blfix::detail::parse_json(bytes, datum_path), datum_path);
  const blfix::SolveOutput out = run_solver(datum, req);
  if (!trace_path.empty()) blfix::write_file_atomic(trace_path, trace_csv(out.trace));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json config = {{"solver", req.solver},
                 {"tol", effective_tol(req)},
                 {"max_iter", req.max_iter},
                 {"eps", req.eps},
                 {"mu", req.mu ? Json(*req.mu) : Json(nullptr)},
                 {"x0", req.x0}};
  Json summary = {{"schema", kSchema},
                  {"command", echo},
                  {"datum", {{"path", datum_path},
                             {"fnv1a64", fnv1a_hex(bytes)},
                             {"d", datum.d},
                             {"dprime", datum.dprime},
                             {"m", datum.m()}}},
                  {"config", std::move(config)},
                  {"result", result_json(out)},
                  {"wall_time_s", wall}};
  std::cout << dump(summary) << '\n';
  const int code = exit_code(out.result.status);
  if (code != 0) {
    std::cerr << "blfix solve: " << blfix::to_string(out.result.status) << " after "
              << out.result.iterations << " iterations\n";
  }
  return code;
}

int cmd_check(const std::string& datum_path) {
  const blfix::BLDatum datum = blfix::load_datum(datum_path);
  blfix::check_shape(datum);
  const blfix::ValidationReport rep = blfix::validate(datum);
  Json rank_ok = Json::array();
  for (bool b : rep.rank_ok) rank_ok.push_back(b);
  Json out = {{"schema", kSchema},
              {"datum", datum_path},
              {"accepted", rep.accepted()},
              {"rank_ok", std::move(rank_ok)},
              {"scaling_ok", rep.scaling_ok},
              {"scaling_residual", rep.scaling_residual},
              {"weight_range_ok", rep.weight_range_ok},
              {"subspace_heuristic_ok", rep.subspace_heuristic_ok},
              {"sampled_violations", rep.sampled_violations}};
  if (blfix::binomial(datum.d, datum.dprime) <= kCheckCriticalLimit) {
    out["critical_c"] = blfix::critical_c(datum, kCheckCriticalLimit);
  } else {
    out["critical_c"] = nullptr;
  }
  std::cout << dump(out) << '\n';
  if (!rep.accepted()) {
    std::cerr << "blfix check: datum rejected by the hard checks\n";
    return 1;
  }
  return 0;
}

int cmd_gen(const std::string& kind, int d, int dprime, int m, std::uint64_t seed,
            const std::string& output) {
  blfix::BLDatum datum;
  if (kind == "holder") {
    datum = blfix::gen_holder(d, m);
  } else if (kind == "young") {
    datum = blfix::gen_young();
  } else if (kind == "random") {
    datum = blfix::gen_random(d, dprime, m, seed);
  } else {
    throw UsageError("unknown generator '" + kind + "' (expected holder, young or random)");
  }
  if (output.empty() || output == "-") {
    std::cout << blfix::datum_to_json(datum).dump(2) << '\n';
  } else {
    blfix::save_datum(datum, output);
  }
  return 0;
}

int cmd_metric(const std::string& kind, const std::string& x_path, const std::string& y_path) {
  const blfix::SpdMatrix x = blfix::load_spd_matrix(x_path);
  const blfix::SpdMatrix y = blfix::load_spd_matrix(y_path);
  double v = 0.0;
  if (kind == "thompson") {
    v = blfix::thompson(x, y);
  } else if (kind == "hilbert") {
    v = blfix::hilbert(x, y);
  } else {
    throw UsageError("unknown metric '" + kind + "' (expected thompson or hilbert)");
  }
  std::cout << blfix::format_double(v) << '\n';
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct BenchRun {
  std::string solver;
  std::optional<blfix::SolveOutput> out;
  std::string error;
};

int cmd_bench(const std::string& datum_path, int d, int dprime, int m, std::uint64_t seed,
              const std::string& solvers, const RunRequest& base, const std::string& out_dir,
              bool parallel) {
  const blfix::BLDatum datum =
      datum_path.empty() ? blfix::gen_random(d, dprime, m, seed) : blfix::load_datum(datum_path);
  const std::vector<std::string> names = split_list(solvers);
  if (names.empty()) throw UsageError("--solvers is empty");
  for (const std::string& n : names) {
    if (n != "g" && n != "gmu" && n != "gtilde" && n != "rgd") {
      throw UsageError("unknown solver '" + n + "' in --solvers");
    }
  }
  fs::create_directories(out_dir);

  std::vector<BenchRun> runs(names.size());
  auto work = [&](std::size_t i) {
    runs[i].solver = names[i];
    RunRequest req = base;
    req.solver = names[i];
    try {
      runs[i].out = run_solver(datum, req);
    } catch (const std::exception& e) {
      runs[i].error = e.what();
    }
  };
  if (parallel) {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < names.size(); ++i) threads.emplace_back(work, i);
    for (std::thread& t : threads) t.join();
  } else {
    for (std::size_t i = 0; i < names.size(); ++i) work(i);
  }

  std::ostringstream summary;
  summary << "solver,status,iterations,iterations_to_tol,residual,F,bl_constant\n";
  std::ostringstream table;
  table << std::left << std::setw(8) << "solver" << std::setw(24) << "status" << std::setw(12)
        << "iterations" << std::setw(14) << "iters_to_tol" << "bl_constant\n";
  bool failed = false;
  for (const BenchRun& r : runs) {
    if (!r.out) {
      failed = true;
      std::cerr << "blfix bench: " << r.solver << ": " << r.error << '\n';
      summary << r.solver << ",error,,,,,\n";
      table << std::setw(8) << r.solver << "error\n";
      continue;
    }
    const blfix::SolveResult& res = r.out->result;
    blfix::write_file_atomic(fs::path(out_dir) / (r.solver + ".csv"), trace_csv(r.out->trace));
    const std::string to_tol = res.converged ? std::to_string(res.iterations) : "";
    summary << r.solver << ',' << blfix::to_string(res.status) << ',' << res.iterations << ','
            << to_tol << ',' << blfix::format_double(res.residual) << ','
            << blfix::format_double(res.F_value) << ',' << blfix::format_double(res.bl_constant)
            << '\n';
    table << std::setw(8) << r.solver << std::setw(24) << blfix::to_string(res.status)
          << std::setw(12) << res.iterations << std::setw(14) << (to_tol.empty() ? "-" : to_tol)
          << blfix::format_double(res.bl_constant) << '\n';
  }
  blfix::write_file_atomic(fs::path(out_dir) / "summary.csv", summary.str());
  std::cout << table.str();
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brascamp-Lieb constants by fixed-point iteration"};
  app.require_subcommand(1);

  RunRequest req;
  std::string datum_path;
  std::string trace_path;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--tol", req.tol, "stopping tolerance");
    sub->add_option("--max-iter", req.max_iter, "iteration budget")->check(CLI::PositiveNumber);
    sub->add_option("--eps", req.eps, "target accuracy used to choose mu")
        ->check(CLI::PositiveNumber);
    sub->add_option("--mu", req.mu, "fixed regularization for gmu");
    sub->add_option("--x0", req.x0, "starting point: matrix JSON file or 'identity'");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve a datum and print a run summary");
  solve->add_option("datum", datum_path, "datum JSON file")->required();
  solve->add_option("--solver", req.solver, "g, gmu, gtilde or rgd")
      ->check(CLI::IsMember({"g", "gmu", "gtilde", "rgd"}));
  solve->add_option("--trace", trace_path, "write the iteration trace CSV here");
  add_run_flags(solve);

  CLI::App* check = app.add_subcommand("check", "validate a datum");
  check->add_option("datum", datum_path, "datum JSON file")->required();

  std::string gen_kind;
  int d = 2;
  int dprime = 1;
  int m = 3;
  std::uint64_t seed = 0;
  std::string output;
  CLI::App* gen = app.add_subcommand("gen", "generate a datum");
  gen->add_option("kind", gen_kind, "holder, young or random")
      ->required()
      ->check(CLI::IsMember({"holder", "young", "random"}));
  gen->add_option("--d", d, "ambient dimension");
  gen->add_option("--dprime", dprime, "codomain dimension");
  gen->add_option("--m", m, "number of maps");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("-o,--output", output, "output file (stdout when omitted)");

  std::string metric_kind;
  std::string x_path;
  std::string y_path;
  CLI::App* metric = app.add_subcommand("metric", "distance between two SPD matrices");
  metric->add_option("kind", metric_kind, "thompson or hilbert")
      ->required()
      ->check(CLI::IsMember({"thompson", "hilbert"}));
  metric->add_option("X", x_path, "matrix JSON file")->required();
  metric->add_option("Y", y_path, "matrix JSON file")->required();

  std::string solvers = "g,gmu,gtilde,rgd";
  std::string out_dir = "bench_out";
  bool parallel = false;
  int bench_d = 10;
  int bench_dprime = 5;
  int bench_m = 8;
  std::uint64_t bench_seed = 0;
  CLI::App* bench = app.add_subcommand("bench", "run several solvers and write their traces");
  bench->add_option("--datum", datum_path, "datum JSON file (random datum when omitted)");
  bench->add_option("--d", bench_d, "ambient dimension of the random datum");
  bench->add_option("--dprime", bench_dprime, "codomain dimension of the random datum");
  bench->add_option("--m", bench_m, "number of maps of the random datum");
  bench->add_option("--seed", bench_seed, "seed of the random datum");
  bench->add_option("--solvers", solvers, "comma-separated solver list");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_flag("--parallel", parallel, "one thread per solver");
  add_run_flags(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "blfix: " << e.what() << '\n';
    return 1;
  }

  try {
    if (req.tol && !(*req.tol > 0.0)) throw UsageError("--tol must be positive");
    if (*solve) return cmd_solve(datum_path, req, trace_path, command_echo(argc, argv));
    if (*check) return cmd_check(datum_path);
    if (*gen) return cmd_gen(gen_kind, d, dprime, m, seed, output);
    if (*metric) return cmd_metric(metric_kind, x_path, y_path);
    if (*bench) {
      const double tol = req.tol.value_or(1e-8);
      req.tol = tol;
      return cmd_bench(datum_path, bench_d, bench_dprime, bench_m, bench_seed, solvers, req,
                       out_dir, parallel);
    }
  } catch (const blfix::IterationFailure& e) {
    std::cerr << "blfix: iteration " << e.iteration() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "blfix: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
