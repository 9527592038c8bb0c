#pragma once

// Command-line front end. Each command takes its arguments (without the
// program and command names) and writes human-readable output to `out`,
// diagnostics to `err`, and returns the process exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tropkraus/automaton.hpp"
#include "tropkraus/error.hpp"
#include "tropkraus/io.hpp"
#include "tropkraus/kraus.hpp"
#include "tropkraus/loewner.hpp"
#include "tropkraus/parallel.hpp"
#include "tropkraus/random.hpp"
#include "tropkraus/riccati.hpp"

namespace tropkraus::cli {

using io::json;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNotConverged = 2,
  kInvalidCertificate = 2,
  kEscape = 3,
  kNumericError = 4,
};

namespace detail {

inline int parse_args(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                      bool& done) {
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    done = true;
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  done = false;
  return kOk;
}

/// Maps library errors onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const EscapeError& e) {
    err << "error: " << e.what() << '\n';
    return kEscape;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline json automaton_descriptor(const Automaton& aut, std::size_t order) {
  json j;
  j["kind"] = "de_bruijn";
  j["order"] = order;
  j["nodes"] = aut.node_count();
  j["edges"] = aut.edges().size();
  return j;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// jsr

struct JsrParams {
  std::size_t order = 6;
  std::string selection = "trace";
  double eps = 1e-3;
  bool eps_absolute = false;
  double tol = 1e-9;
  std::size_t max_iter = 10'000;
  bool multiplicative = false;
  unsigned threads = 1;
};

struct JsrRun {
  Automaton automaton;
  EigenResult result;
  double loop_ms = 0.0;
};

inline JsrRun run_jsr(const MatrixFamily& family, const JsrParams& p) {
  JsrRun run{de_bruijn(family.size(), p.order), {}, 0.0};
  KrausOptions opt;
  opt.selection = Selection::parse(p.selection);
  opt.eps = p.eps;
  opt.eps_relative = !p.eps_absolute;
  opt.tol = p.tol;
  opt.max_iter = p.max_iter;
  opt.threads = p.threads;
  const auto t0 = std::chrono::steady_clock::now();
  run.result = p.multiplicative ? km_iterate_multiplicative(family, run.automaton, opt)
                                : km_iterate(family, run.automaton, opt);
  run.loop_ms = detail::elapsed_ms(t0);
  return run;
}

inline json jsr_report(const MatrixFamily& family, const JsrParams& p, const JsrRun& run) {
  json r;
  r["tool"] = "tropkraus";
  r["version"] = kToolVersion;
  r["command"] = "jsr";
  r["instance"] = {{"family_hash", io::family_hash(family)},
                   {"n", family.dim()},
                   {"m", family.size()},
                   {"automaton", detail::automaton_descriptor(run.automaton, p.order)}};
  r["parameters"] = {{"order", p.order},
                     {"selection", Selection::parse(p.selection).name()},
                     {"variant", p.multiplicative ? "multiplicative" : "additive"},
                     {"eps", p.eps},
                     {"eps_relative", !p.eps_absolute},
                     {"shift", run.result.shift},
                     {"tau", nullptr},
                     {"tol", p.tol},
                     {"max_iter", p.max_iter},
                     {"seed", nullptr}};
  r["results"] = {{"rho_cert", run.result.rho_cert},
                  {"lambda", run.result.lambda},
                  {"sqrt_lambda", std::sqrt(run.result.lambda)},
                  {"iterations", run.result.iterations},
                  {"converged", run.result.converged},
                  {"residual", run.result.residual},
                  {"wall_clock_ms", run.loop_ms}};
  return r;
}

inline io::Certificate jsr_certificate(const MatrixFamily& family, const JsrParams& p, const JsrRun& run) {
  return io::Certificate{run.result.rho_cert, run.automaton, run.result.state, p.eps, io::family_hash(family),
                         std::nullopt};
}

inline int cmd_jsr(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Upper bound on the joint spectral radius from a tropical Kraus eigenvector", "tropkraus jsr"};
  std::string input, report_path, cert_path;
  JsrParams p;
  app.add_option("--input", input, "Matrix family JSON")->required();
  app.add_option("--order", p.order, "De Bruijn graph order")->capture_default_str();
  app.add_option("--selection", p.selection, "Minimal upper bound selection")
      ->check(CLI::IsMember({"trace", "tr", "det"}))
      ->capture_default_str();
  app.add_option("--eps", p.eps, "Regularization added to each edge term")->capture_default_str();
  app.add_flag("--eps-absolute", p.eps_absolute, "Add eps*I as is instead of eps/(n p)*I");
  app.add_option("--tol", p.tol, "Stop when successive iterates differ by at most this")->capture_default_str();
  app.add_option("--max-iter", p.max_iter, "Iteration limit")->capture_default_str();
  app.add_flag("--multiplicative", p.multiplicative, "Use the geometric-mean iteration");
  app.add_option("--out", report_path, "Write the run report here");
  app.add_option("--certificate", cert_path, "Write the certificate here");
  bool done = false;
  if (int code = detail::parse_args(app, args, out, err, done); done) return code;

  return detail::guarded(err, [&] {
    const MatrixFamily family = io::family_from_json(io::read_json_file(input));
    p.threads = threads_from_env();
    const JsrRun run = run_jsr(family, p);
    if (!report_path.empty()) io::write_json_file(report_path, jsr_report(family, p, run));
    if (!cert_path.empty()) io::write_json_file(cert_path, io::certificate_to_json(jsr_certificate(family, p, run)));
    const auto& r = run.result;
    out << std::setprecision(10) << "rho_cert    " << r.rho_cert << '\n'
        << "lambda      " << r.lambda << "  (sqrt " << std::sqrt(r.lambda) << ")\n"
        << "iterations  " << r.iterations << (r.converged ? "" : "  (not converged)") << '\n'
        << "residual    " << r.residual << '\n';
    if (!r.converged) {
      err << "warning: no convergence within " << p.max_iter << " iterations; the certificate is still valid\n";
      return static_cast<int>(kNotConverged);
    }
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------
// hjb

inline int cmd_hjb(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Max-plus approximation of a switched LQ value function", "tropkraus hjb"};
  std::string input, report_path, value_path;
  std::size_t order = 2;
  std::string selection = "det";
  HjbOptions opt;
  int samples = 720;
  app.add_option("--input", input, "LQ problem JSON")->required();
  app.add_option("--order", order, "De Bruijn graph order")->capture_default_str();
  app.add_option("--tau", opt.tau, "Riccati time step")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--selection", selection, "Minimal upper bound selection")
      ->check(CLI::IsMember({"trace", "tr", "det"}))
      ->capture_default_str();
  app.add_option("--init-scale", opt.init_scale, "Start from X_i = c I")->capture_default_str();
  app.add_option("--samples", samples, "Angles for the back-substitution error")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol", opt.tol, "Stop when successive iterates differ by at most this")->capture_default_str();
  app.add_option("--max-iter", opt.max_iter, "Iteration limit")->capture_default_str();
  app.add_option("--out", report_path, "Write the run report here");
  app.add_option("--value-out", value_path, "Write the value function pieces here");
  bool done = false;
  if (int code = detail::parse_args(app, args, out, err, done); done) return code;

  return detail::guarded(err, [&] {
    const LQProblem prob = io::lq_from_json(io::read_json_file(input));
    opt.selection = Selection::parse(selection);
    opt.threads = threads_from_env();
    const Automaton aut = de_bruijn(prob.mode_count(), order);
    const ValueApprox start{KrausState::constant(prob.dim(), aut.node_count(), opt.init_scale), opt.tau, aut};
    const bool planar = prob.dim() >= 2;
    const double initial = planar ? backsub_error(start, prob, samples) : std::nan("");

    const auto t0 = std::chrono::steady_clock::now();
    const HjbResult res = hjb_fixed_point(prob, aut, opt);
    const double ms = detail::elapsed_ms(t0);
    const double final_err = planar ? backsub_error(res.value, prob, samples) : std::nan("");

    if (!report_path.empty()) {
      json r;
      r["tool"] = "tropkraus";
      r["version"] = kToolVersion;
      r["command"] = "hjb";
      r["instance"] = {{"lq_hash", io::lq_hash(prob)},
                       {"n", prob.dim()},
                       {"m", prob.mode_count()},
                       {"gamma", prob.gamma()},
                       {"automaton", detail::automaton_descriptor(aut, order)}};
      r["parameters"] = {{"order", order},
                         {"selection", opt.selection.name()},
                         {"eps", nullptr},
                         {"tau", opt.tau},
                         {"init_scale", opt.init_scale},
                         {"samples", samples},
                         {"tol", opt.tol},
                         {"max_iter", opt.max_iter},
                         {"seed", nullptr}};
      // NaN serializes as null: the error is undefined below dimension 2
      r["results"] = {{"initial_error", initial},
                      {"final_error", final_err},
                      {"iterations", res.iterations},
                      {"converged", res.converged},
                      {"residual", res.residual},
                      {"wall_clock_ms", ms}};
      io::write_json_file(report_path, r);
    }
    if (!value_path.empty()) {
      io::Certificate c{std::nan(""), aut, res.value.state, 0.0, io::lq_hash(prob), opt.tau};
      io::write_json_file(value_path, io::certificate_to_json(c));
    }
    out << std::setprecision(6) << "initial error  " << initial << '\n'
        << "final error    " << final_err << '\n'
        << "iterations     " << res.iterations << (res.converged ? "" : "  (not converged)") << '\n'
        << "cpu time       " << ms / 1000.0 << " s\n";
    return static_cast<int>(res.converged ? kOk : kNotConverged);
  });
}

// ---------------------------------------------------------------------------
// bench

struct BenchRow {
  Index n = 0;
  double mean_cpu_ms = 0.0;
  double mean_rho_cert = 0.0;
  double mean_iterations = 0.0;
  std::string status;
};

/// Seed of instance k at dimension n; independent of the other requested dimensions.
inline std::uint64_t bench_instance_seed(std::uint64_t seed, Index n, std::size_t k) {
  return detail::splitmix64(detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(n))) + k);
}

/// m i.i.d. standard normal n-by-n matrices.
inline MatrixFamily random_family(Index n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SquareMatrix> mats;
  for (std::size_t s = 0; s < m; ++s) mats.push_back(gaussian_matrix(n, n, rng));
  return MatrixFamily(std::move(mats));
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << "n,mean_cpu_ms,mean_rho_cert,mean_iterations,status\n";
  for (const auto& r : rows) {
    os << r.n << ',';
    if (r.status == "skipped") {
      os << ",,,";
    } else {
      os << r.mean_cpu_ms << ',' << r.mean_rho_cert << ',' << r.mean_iterations << ',';
    }
    os << r.status << '\n';
  }
  return os.str();
}

inline int cmd_bench(const std::vector<std::string>& args, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  CLI::App app{"Benchmark the JSR bound on seeded random families", "tropkraus bench"};
  std::vector<Index> dims;
  std::size_t count = 1, modes = 2;
  std::uint64_t seed = 0;
  Index max_dim = 500;
  std::string csv_path, cert_dir;
  JsrParams p;
  app.add_option("--dims", dims, "Comma-separated matrix dimensions")->delimiter(',');
  app.add_option("--count", count, "Instances per dimension")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "Base seed")->capture_default_str();
  app.add_option("--order", p.order, "De Bruijn graph order")->capture_default_str();
  app.add_option("--modes", modes, "Matrices per family")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--max-dim", max_dim, "Dimensions above this are skipped")->capture_default_str();
  app.add_option("--selection", p.selection, "Minimal upper bound selection")
      ->check(CLI::IsMember({"trace", "tr", "det"}))
      ->capture_default_str();
  app.add_option("--eps", p.eps, "Regularization")->capture_default_str();
  app.add_option("--tol", p.tol, "Stopping tolerance")->capture_default_str();
  app.add_option("--max-iter", p.max_iter, "Iteration limit")->capture_default_str();
  app.add_option("--out", csv_path, "CSV output (default: stdout)");
  app.add_option("--certificates", cert_dir, "Write each family and its certificate into this directory");
  bool done = false;
  if (int code = detail::parse_args(app, args, out, err, done); done) return code;

  return detail::guarded(err, [&] {
    if (dims.empty()) throw UsageError("bench: --dims must list at least one dimension");
    for (Index n : dims)
      if (n < 1) throw UsageError("bench: dimensions must be positive");
    Selection::parse(p.selection);
    if (!cert_dir.empty()) std::filesystem::create_directories(cert_dir);

    struct Task {
      std::size_t row;
      Index n;
      std::size_t k;
    };
    struct Outcome {
      double ms = 0, rho = 0;
      std::size_t iterations = 0;
      bool converged = false;
      std::string failure;
    };
    std::vector<BenchRow> rows(dims.size());
    std::vector<Task> tasks;
    for (std::size_t r = 0; r < dims.size(); ++r) {
      rows[r].n = dims[r];
      if (dims[r] > max_dim) {
        rows[r].status = "skipped";
        continue;
      }
      for (std::size_t k = 0; k < count; ++k) tasks.push_back({r, dims[r], k});
    }
    std::vector<Outcome> outcomes(tasks.size());
    p.threads = 1;
    parallel_for(tasks.size(), threads_from_env(), [&](std::size_t t) {
      const Task& task = tasks[t];
      Outcome& o = outcomes[t];
      try {
        const MatrixFamily family = random_family(task.n, modes, bench_instance_seed(seed, task.n, task.k));
        const JsrRun run = run_jsr(family, p);
        o.ms = run.loop_ms;
        o.rho = run.result.rho_cert;
        o.iterations = run.result.iterations;
        o.converged = run.result.converged;
        if (!cert_dir.empty()) {
          const std::string stem = cert_dir + "/n" + std::to_string(task.n) + "_k" + std::to_string(task.k);
          io::write_json_file(stem + "_family.json", io::family_to_json(family));
          io::write_json_file(stem + "_certificate.json", io::certificate_to_json(jsr_certificate(family, p, run)));
        }
      } catch (const ResourceError& e) {
        o.failure = "skipped";
      } catch (const Error& e) {
        o.failure = std::string("failed: ") + e.what();
      }
    });

    bool all_converged = true;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].status == "skipped") continue;
      std::size_t used = 0;
      bool converged = true;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].row != r) continue;
        const Outcome& o = outcomes[t];
        if (!o.failure.empty()) {
          rows[r].status = o.failure == "skipped" ? "skipped" : "failed";
          if (o.failure != "skipped") err << "n = " << rows[r].n << ": " << o.failure << '\n';
          continue;
        }
        ++used;
        rows[r].mean_cpu_ms += o.ms;
        rows[r].mean_rho_cert += o.rho;
        rows[r].mean_iterations += static_cast<double>(o.iterations);
        converged = converged && o.converged;
      }
      if (!rows[r].status.empty()) continue;
      const auto c = static_cast<double>(used);
      rows[r].mean_cpu_ms /= c;
      rows[r].mean_rho_cert /= c;
      rows[r].mean_iterations /= c;
      rows[r].status = converged ? "ok" : "not_converged";
      all_converged = all_converged && converged;
    }

    const std::string csv = bench_csv(rows);
    if (csv_path.empty()) {
      out << csv;
    } else {
      std::ofstream f(csv_path, std::ios::binary);
      if (!f) throw InputError("cannot write " + csv_path);
      f << csv;
    }
    for (const auto& r : rows)
      if (r.status == "failed") return static_cast<int>(kNumericError);
    return static_cast<int>(all_converged ? kOk : kNotConverged);
  });
}

// ---------------------------------------------------------------------------
// check

struct CheckReport {
  bool valid = false;
  double worst_margin = std::numeric_limits<double>::infinity();
  Edge worst_edge{};
  /// Largest spectral norm among the rho^2 X_j; margins are compared against -tol * scale.
  double scale = 0.0;
  double sum_min_eigenvalue = 0.0;
};

/// Re-verifies rho^2 X_j >= A_s^T X_i A_s on every edge and sum_j X_j > 0.
inline CheckReport check_certificate(const io::Certificate& cert, const MatrixFamily& family, double tol) {
  if (cert.automaton.alphabet_size() != family.size()) throw InputError("certificate alphabet does not match family");
  if (cert.x.dim() != family.dim()) throw InputError("certificate blocks do not match the family dimension");
  CheckReport rep;
  if (!std::isfinite(cert.rho) || cert.rho < 0 || !cert.x.all_finite()) return rep;
  const double r2 = cert.rho * cert.rho;
  SymMatrix sum = SymMatrix::zero(family.dim());
  for (const auto& b : cert.x.blocks()) {
    rep.scale = std::max(rep.scale, r2 * b.max_abs());
    rep.scale = std::max(rep.scale, std::abs(r2 * max_eigenvalue(b)));
    sum += b;
  }
  if (!(rep.scale > 0)) rep.scale = 1.0;
  for (const auto& e : cert.automaton.edges()) {
    const double m = min_eigenvalue(r2 * cert.x[e.to] - congruence(family[e.letter], cert.x[e.from]));
    if (m < rep.worst_margin) {
      rep.worst_margin = m;
      rep.worst_edge = e;
    }
  }
  rep.sum_min_eigenvalue = min_eigenvalue(sum);
  rep.valid = rep.sum_min_eigenvalue > 0 && rep.worst_margin >= -tol * rep.scale;
  return rep;
}

inline int cmd_check(const std::vector<std::string>& args, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  CLI::App app{"Verify a JSR certificate against its matrix family", "tropkraus check"};
  std::string cert_path, input;
  double tol = 1e-8;
  app.add_option("--certificate", cert_path, "Certificate JSON")->required();
  app.add_option("--input", input, "Matrix family JSON")->required();
  app.add_option("--tol", tol, "Relative tolerance on edge margins")->capture_default_str();
  bool done = false;
  if (int code = detail::parse_args(app, args, out, err, done); done) return code;

  return detail::guarded(err, [&] {
    const MatrixFamily family = io::family_from_json(io::read_json_file(input));
    const io::Certificate cert = io::certificate_from_json(io::read_json_file(cert_path));
    const std::string h = io::family_hash(family);
    if (h != cert.family_hash) {
      err << "error: family hash " << h << " does not match certificate hash " << cert.family_hash << '\n';
      return static_cast<int>(kInputError);
    }
    const CheckReport rep = check_certificate(cert, family, tol);
    out << std::setprecision(6) << "rho                 " << cert.rho << '\n'
        << "worst edge margin   " << rep.worst_margin << " at (" << rep.worst_edge.from << ", "
        << rep.worst_edge.letter << ", " << rep.worst_edge.to << "), allowed " << -tol * rep.scale << '\n'
        << "min eig of sum X_j  " << rep.sum_min_eigenvalue << '\n'
        << (rep.valid ? "valid" : "INVALID") << '\n';
    return static_cast<int>(rep.valid ? kOk : kInvalidCertificate);
  });
}

// ---------------------------------------------------------------------------

inline constexpr const char* kUsage =
    "usage: tropkraus <command> [options]\n"
    "\n"
    "commands:\n"
    "  jsr     bound the joint spectral radius of a matrix family\n"
    "  hjb     approximate a switched LQ value function\n"
    "  bench   time the JSR bound on random families, CSV output\n"
    "  check   verify a JSR certificate\n"
    "\n"
    "Run 'tropkraus <command> --help' for options. TK_THREADS caps worker threads.\n";

inline int run(const std::vector<std::string>& argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  if (argv.size() < 2) {
    err << kUsage;
    return kInputError;
  }
  const std::string& cmd = argv[1];
  const std::vector<std::string> rest(argv.begin() + 2, argv.end());
  if (cmd == "jsr") return cmd_jsr(rest, out, err);
  if (cmd == "hjb") return cmd_hjb(rest, out, err);
  if (cmd == "bench") return cmd_bench(rest, out, err);
  if (cmd == "check") return cmd_check(rest, out, err);
  if (cmd == "-h" || cmd == "--help" || cmd == "help") {
    out << kUsage;
    return kOk;
  }
  if (cmd == "--version") {
    out << "tropkraus " << kToolVersion << '\n';
    return kOk;
  }
  err << "unknown command '" << cmd << "'\n" << kUsage;
  return kInputError;
}

}  // namespace tropkraus::cli
