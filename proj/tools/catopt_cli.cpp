// Command-line harness for the catopt solvers: run a single solver on a
// single problem, benchmark a solver matrix over the builtin catalog, or
// compare the ablation variants.
//
// Exit codes: 0 tolerance reached, 1 nonconvergence, 2 usage error,
// 3 internal error.

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "catopt/catopt.hpp"

namespace {

constexpr int kExitOptimal = 0;
constexpr int kExitNonconvergence = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct RunOptions {
  std::string problem;
  int dim = 0;  // 0 means the problem's default
  std::string solver = "cat";
  double eps = 1e-5;
  long max_iter = 100000;
  double max_time = 18000.0;
  std::uint64_t seed = 0;
  std::optional<double> r1;
  bool classic_rho = false;
  bool conference_radius_rule = false;
  bool fixed_initial_radius = false;
  std::string trace_path;
  std::string quadratic_file;
  std::string format = "csv";
};

const std::vector<std::string> kSolverNames = {"cat", "cat-conference", "gd"};

void add_shared_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--eps", opt.eps, "gradient-norm tolerance")->capture_default_str();
  cmd->add_option("--max-iter", opt.max_iter, "iteration limit")->capture_default_str();
  cmd->add_option("--max-time", opt.max_time, "wall-time limit in seconds")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "seed for the subproblem solver's random vectors")
      ->capture_default_str();
  cmd->add_option("--r1", opt.r1, "explicit initial trust radius");
  cmd->add_flag("--classic-rho", opt.classic_rho,
                "ablation: plain reduction ratio instead of the padded one");
  cmd->add_flag("--conference-radius-rule", opt.conference_radius_rule,
                "ablation: radius update centered on ||d||");
  cmd->add_flag("--fixed-initial-radius", opt.fixed_initial_radius,
                "ablation: r1 = 1 instead of the scaling heuristic");
}

int count_ablation_flags(const RunOptions& opt) {
  return int(opt.classic_rho) + int(opt.conference_radius_rule) + int(opt.fixed_initial_radius);
}

catopt::SolverConfig build_config(const RunOptions& opt) {
  catopt::SolverConfig cfg;
  cfg.eps_tol = opt.eps;
  cfg.max_iter = opt.max_iter;
  cfg.max_time = opt.max_time;
  cfg.seed = opt.seed;
  cfg.r1_override = opt.r1;
  cfg.use_classic_rho = opt.classic_rho;
  cfg.conference_radius_rule = opt.conference_radius_rule;
  cfg.fixed_initial_radius = opt.fixed_initial_radius;
  if (opt.solver == "cat-conference") {
    cfg.conference_radius_rule = true;
    cfg.fixed_initial_radius = true;
  }
  return cfg;
}

catopt::Problem resolve_problem(const RunOptions& opt) {
  if (!opt.quadratic_file.empty()) return catopt::load_quadratic(opt.quadratic_file);
  const int dim = opt.dim > 0 ? opt.dim : catopt::default_problem_dim(opt.problem);
  return catopt::make_problem(opt.problem, dim);
}

void write_cat_trace(const std::string& path, const std::vector<catopt::TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "# catopt-trace v1\n";
  out << "k,f,grad_norm,eps,radius,step_norm,delta,f_trial,b_k,trial_grad_norm,rho,"
         "trial_grad_evaluated,accepted,successful\n";
  for (const auto& t : trace) {
    out << t.k << ',' << catopt::detail::format_double(t.f) << ','
        << catopt::detail::format_double(t.grad_norm) << ','
        << catopt::detail::format_double(t.eps) << ','
        << catopt::detail::format_double(t.radius) << ','
        << catopt::detail::format_double(t.step_norm) << ','
        << catopt::detail::format_double(t.delta) << ','
        << catopt::detail::format_double(t.f_trial) << ','
        << catopt::detail::format_double(t.b_k) << ','
        << catopt::detail::format_double(t.trial_grad_norm) << ','
        << catopt::detail::format_double(t.rho) << ',' << t.trial_grad_evaluated << ','
        << t.accepted << ',' << t.successful << "\n";
  }
}

void write_gd_trace(const std::string& path, const std::vector<catopt::GdTraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "# catopt-gd-trace v1\n";
  out << "k,f,grad_norm,eta,backtracks,f_next\n";
  for (const auto& t : trace) {
    out << t.k << ',' << catopt::detail::format_double(t.f) << ','
        << catopt::detail::format_double(t.grad_norm) << ','
        << catopt::detail::format_double(t.eta) << ',' << t.backtracks << ','
        << catopt::detail::format_double(t.f_next) << "\n";
  }
}

catopt::BenchRecord run_one(const catopt::Problem& problem, const std::string& solver,
                            const RunOptions& opt, const std::string* trace_path = nullptr) {
  catopt::SolveResult result;
  std::vector<catopt::GdTraceRecord> gd_trace;
  if (solver == "gd") {
    catopt::ArmijoConfig acfg;
    acfg.eps_tol = opt.eps;
    acfg.max_iter = opt.max_iter;
    acfg.max_time = opt.max_time;
    acfg.collect_trace = trace_path != nullptr;
    result = catopt::gd_solve(problem.objective, problem.spec.x1, acfg,
                              trace_path ? &gd_trace : nullptr);
    if (trace_path) write_gd_trace(*trace_path, gd_trace);
  } else {
    RunOptions solver_opt = opt;
    solver_opt.solver = solver;
    catopt::SolverConfig cfg = build_config(solver_opt);
    cfg.collect_trace = trace_path != nullptr;
    result = catopt::solve(problem.objective, problem.spec.x1, cfg);
    if (trace_path) write_cat_trace(*trace_path, result.trace);
  }
  if (result.status == catopt::Status::ConfigError) {
    throw std::runtime_error("configuration rejected: " + result.message);
  }
  catopt::BenchRecord record;
  record.problem = problem.spec.name + ":" + std::to_string(problem.spec.dim);
  record.solver = solver;
  record.status = result.status;
  record.iterations = result.iterations;
  record.n_f = result.counts.n_f;
  record.n_grad = result.counts.n_grad;
  record.n_hess = result.counts.n_hess;
  record.n_fact = result.counts.n_fact;
  record.wall_seconds = result.wall_seconds;
  record.f_final = result.f_final;
  record.grad_norm_final = result.grad_norm_final;
  return record;
}

void print_record(const catopt::BenchRecord& r, const std::string& format) {
  if (format == "json") {
    nlohmann::json j;
    j["problem"] = r.problem;
    j["solver"] = r.solver;
    j["status"] = catopt::to_string(r.status);
    j["iterations"] = r.iterations;
    j["n_f"] = r.n_f;
    j["n_grad"] = r.n_grad;
    j["n_hess"] = r.n_hess;
    j["n_fact"] = r.n_fact;
    j["wall_seconds"] = r.wall_seconds;
    j["f_final"] = r.f_final;
    j["grad_norm_final"] = r.grad_norm_final;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::cout << "problem,solver,status,iterations,n_f,n_grad,n_hess,n_fact,wall_seconds,"
               "f_final,grad_norm_final\n";
  std::cout << r.problem << ',' << r.solver << ',' << catopt::to_string(r.status) << ','
            << r.iterations << ',' << r.n_f << ',' << r.n_grad << ',' << r.n_hess << ','
            << r.n_fact << ',' << catopt::detail::format_double(r.wall_seconds) << ','
            << catopt::detail::format_double(r.f_final) << ','
            << catopt::detail::format_double(r.grad_norm_final) << "\n";
}

// Suite entries are problem names with an optional ":dim" suffix; "all" is
// the whole builtin catalog at default dimensions.
std::vector<std::pair<std::string, int>> parse_suite(const std::string& suite) {
  std::vector<std::pair<std::string, int>> entries;
  if (suite == "all") {
    for (const auto& name : catopt::builtin_problem_names()) {
      entries.emplace_back(name, catopt::default_problem_dim(name));
    }
    return entries;
  }
  std::stringstream stream(suite);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      entries.emplace_back(item, catopt::default_problem_dim(item));
    } else {
      const std::string name = item.substr(0, colon);
      const int dim = std::stoi(item.substr(colon + 1));
      catopt::default_problem_dim(name);  // validates the name
      entries.emplace_back(name, dim);
    }
  }
  if (entries.empty()) throw CLI::ValidationError("--suite", "suite is empty");
  return entries;
}

std::vector<std::string> parse_solvers(const std::string& solvers) {
  std::vector<std::string> names;
  std::stringstream stream(solvers);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    if (std::find(kSolverNames.begin(), kSolverNames.end(), item) == kSolverNames.end()) {
      throw CLI::ValidationError("--solvers", "unknown solver: " + item);
    }
    names.push_back(item);
  }
  if (names.empty()) throw CLI::ValidationError("--solvers", "no solvers given");
  return names;
}

std::vector<catopt::BenchRecord> run_sweep(
    const std::vector<std::pair<std::string, int>>& suite,
    const std::vector<std::string>& solvers, const RunOptions& opt) {
  std::vector<catopt::BenchRecord> records;
  for (const auto& [name, dim] : suite) {
    catopt::Problem problem = catopt::make_problem(name, dim);
    for (const auto& solver : solvers) {
      try {
        records.push_back(run_one(problem, solver, opt));
      } catch (const std::exception& e) {
        // Failures become rows; the sweep never aborts.
        catopt::BenchRecord record;
        record.problem = problem.spec.name + ":" + std::to_string(problem.spec.dim);
        record.solver = solver;
        record.status = catopt::Status::SubproblemError;
        records.push_back(record);
        std::cerr << "warning: " << record.problem << "/" << solver << ": " << e.what() << "\n";
      }
    }
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.problem, a.solver) < std::tie(b.problem, b.solver);
  });
  return records;
}

int cmd_run(const RunOptions& opt) {
  catopt::Problem problem = resolve_problem(opt);
  const std::string* trace = opt.trace_path.empty() ? nullptr : &opt.trace_path;
  catopt::BenchRecord record = run_one(problem, opt.solver, opt, trace);
  print_record(record, opt.format);
  return record.status == catopt::Status::Optimal ? kExitOptimal : kExitNonconvergence;
}

int cmd_bench(const RunOptions& opt, const std::string& suite, const std::string& solvers,
              const std::string& out_dir) {
  const auto entries = parse_suite(suite);
  const auto solver_names = parse_solvers(solvers);
  std::filesystem::create_directories(out_dir);
  const auto records = run_sweep(entries, solver_names, opt);
  catopt::write_records_csv(out_dir + "/records.csv", records, opt.max_iter, opt.max_time);
  catopt::write_aggregates_csv(out_dir + "/aggregates.csv",
                               catopt::aggregate_records(records, opt.max_iter, opt.max_time),
                               opt.max_iter, opt.max_time);
  catopt::write_profile_csv(out_dir + "/profile.csv",
                            catopt::performance_profile(records, opt.max_iter, opt.max_time));
  const bool all_optimal = std::all_of(records.begin(), records.end(), [](const auto& r) {
    return r.status == catopt::Status::Optimal;
  });
  std::cout << "wrote " << records.size() << " records to " << out_dir << "\n";
  return all_optimal ? kExitOptimal : kExitNonconvergence;
}

int cmd_ablate(const RunOptions& opt, const std::string& suite, const std::string& out_dir) {
  const auto entries = parse_suite(suite);
  std::filesystem::create_directories(out_dir);

  struct Variant {
    std::string name;
    void (*apply)(RunOptions&);
  };
  const std::vector<Variant> variants = {
      {"default", [](RunOptions&) {}},
      {"classic_rho", [](RunOptions& o) { o.classic_rho = true; }},
      {"conference_radius_rule", [](RunOptions& o) { o.conference_radius_rule = true; }},
      {"fixed_initial_radius", [](RunOptions& o) { o.fixed_initial_radius = true; }},
  };

  std::ofstream out(out_dir + "/ablation.csv");
  if (!out) throw std::runtime_error("cannot write " + out_dir + "/ablation.csv");
  out << "# catopt-ablation v1 max_iter=" << opt.max_iter
      << " max_time=" << catopt::detail::format_double(opt.max_time) << "\n";
  out << "variant,metric,median\n";
  bool all_optimal = true;
  for (const auto& variant : variants) {
    RunOptions vopt = opt;
    variant.apply(vopt);
    const auto records = run_sweep(entries, {"cat"}, vopt);
    for (const std::string metric : {"n_f", "n_grad", "n_hess", "wall_seconds"}) {
      std::vector<double> values;
      for (const auto& r : records) {
        values.push_back(catopt::penalized_metric(r, metric, opt.max_iter, opt.max_time));
        all_optimal = all_optimal && r.status == catopt::Status::Optimal;
      }
      out << variant.name << ',' << metric << ','
          << catopt::detail::format_double(catopt::median(values)) << "\n";
    }
  }
  std::cout << "wrote ablation medians to " << out_dir << "/ablation.csv\n";
  return all_optimal ? kExitOptimal : kExitNonconvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catopt: adaptive trust-region optimization harness"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "run one solver on one problem");
  run->add_option("--problem", run_opt.problem, "builtin problem name");
  run->add_option("--dim", run_opt.dim, "problem dimension (0 = problem default)");
  run->add_option("--solver", run_opt.solver, "cat | cat-conference | gd")
      ->check(CLI::IsMember(kSolverNames))
      ->capture_default_str();
  run->add_option("--trace", run_opt.trace_path, "write a per-iteration trace CSV");
  run->add_option("--quadratic-file", run_opt.quadratic_file,
                  "load a quadratic problem from a file instead of the catalog");
  run->add_option("--format", run_opt.format, "record output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  add_shared_run_flags(run, run_opt);

  RunOptions bench_opt;
  std::string bench_suite = "all";
  std::string bench_solvers = "cat,cat-conference,gd";
  std::string bench_out = "bench-out";
  CLI::App* bench = app.add_subcommand("bench", "benchmark a solver matrix over a suite");
  bench->add_option("--suite", bench_suite, "comma-separated problem[:dim] list, or 'all'")
      ->capture_default_str();
  bench->add_option("--solvers", bench_solvers, "comma-separated solver list")
      ->capture_default_str();
  bench->add_option("--out-dir", bench_out, "output directory")->capture_default_str();
  add_shared_run_flags(bench, bench_opt);

  RunOptions ablate_opt;
  std::string ablate_suite = "all";
  std::string ablate_out = "ablate-out";
  CLI::App* ablate = app.add_subcommand(
      "ablate",
      "compare the default configuration against each single-flag variant "
      "(classic-rho, conference-radius-rule, fixed-initial-radius); the "
      "legacy subproblem solver is not available as a variant");
  ablate->add_option("--suite", ablate_suite, "comma-separated problem[:dim] list, or 'all'")
      ->capture_default_str();
  ablate->add_option("--out-dir", ablate_out, "output directory")->capture_default_str();
  add_shared_run_flags(ablate, ablate_opt);

  try {
    app.parse(argc, argv);

    if (run->parsed()) {
      if (count_ablation_flags(run_opt) > 1) {
        std::cerr << "error: at most one ablation flag may be set per run\n";
        return kExitUsage;
      }
      if (run_opt.solver == "cat-conference" && count_ablation_flags(run_opt) > 0) {
        std::cerr << "error: cat-conference already fixes the radius rules; "
                     "ablation flags apply to the cat solver\n";
        return kExitUsage;
      }
      if (run_opt.problem.empty() && run_opt.quadratic_file.empty()) {
        std::cerr << "error: one of --problem or --quadratic-file is required\n";
        return kExitUsage;
      }
      if (!run_opt.problem.empty() && !run_opt.quadratic_file.empty()) {
        std::cerr << "error: --problem and --quadratic-file are mutually exclusive\n";
        return kExitUsage;
      }
      return cmd_run(run_opt);
    }
    if (bench->parsed()) {
      if (count_ablation_flags(bench_opt) > 1) {
        std::cerr << "error: at most one ablation flag may be set per run\n";
        return kExitUsage;
      }
      return cmd_bench(bench_opt, bench_suite, bench_solvers, bench_out);
    }
    if (ablate->parsed()) {
      if (count_ablation_flags(ablate_opt) > 0) {
        std::cerr << "error: ablate enumerates the variants itself; "
                     "ablation flags are not accepted\n";
        return kExitUsage;
      }
      return cmd_ablate(ablate_opt, ablate_suite, ablate_out);
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  } catch (const catopt::ProblemParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
