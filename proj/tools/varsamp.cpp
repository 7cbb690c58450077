// varsamp: kernel checks, operator tables and variation studies as CSV.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <varsamp/varsamp.hpp>

namespace {

using namespace varsamp;

enum ExitCode { kPass = 0, kCheckFailure = 1, kUsageError = 2, kNonConvergence = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Grid {
  double start = 0.0;
  double stop = 1.0;
  int count = 2;

  std::vector<double> points() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
    out.back() = stop;
    return out;
  }
};

Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw UsageError("--grid expects start:stop:count, got '" + text + "'");
  Grid g;
  try {
    std::size_t used = 0;
    g.start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    g.stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    g.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("--grid expects start:stop:count, got '" + text + "'");
  }
  if (g.count < 2) throw UsageError("--grid count must be at least 2");
  if (!(g.start < g.stop)) throw UsageError("--grid start must be below stop");
  return g;
}

struct RunConfig {
  std::string kernel_id = "bspline:2";
  std::string signal_id = "hat:1";
  int m = 1;
  std::vector<double> w_list;
  std::string grid_text;
  double tol = -1.0;  // negative: command default
  std::string output_path;
  bool emit_plot_script = false;
  bool timing = false;

  double tolerance(double fallback) const { return tol > 0.0 ? tol : fallback; }

  Grid grid(const Grid& fallback) const { return grid_text.empty() ? fallback : parse_grid(grid_text); }

  std::vector<double> rates(std::vector<double> fallback) const {
    auto ws = w_list.empty() ? fallback : w_list;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      if (!(ws[i] > 0.0)) throw UsageError("--w values must be positive");
      if (i > 0 && !(ws[i] > ws[i - 1])) throw UsageError("--w values must be given in ascending order");
    }
    return ws;
  }

  void validate() const {
    if (m < 1) throw UsageError("--m must be a positive integer");
    if (tol == 0.0 || (tol < 0.0 && tol != -1.0)) throw UsageError("--tol must be positive");
  }
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV or report text, sent to --out when given and to stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::out | std::ios::trunc | std::ios::binary);
      if (!file_) throw UsageError("cannot open output file '" + path_ + "' for writing");
    }
  }

  std::ostream& stream() { return path_.empty() ? std::cout : file_; }

  void row(const std::vector<std::string>& cells) {
    auto& os = stream();
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  void finish() {
    stream().flush();
    if (!stream()) throw UsageError("write to '" + (path_.empty() ? std::string("stdout") : path_) + "' failed");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

Signal signal_of(const RunConfig& cfg) { return parse_signal(cfg.signal_id); }

Kernel base_of(const RunConfig& cfg) {
  const auto parsed = parse_kernel(cfg.kernel_id);
  return parsed.kernel();
}

void write_plot_script(const RunConfig& cfg, const std::vector<std::string>& columns, const std::string& title) {
  if (!cfg.emit_plot_script) return;
  if (cfg.output_path.empty()) throw UsageError("--plot needs --out so the script can reference the CSV");
  const std::string script_path = cfg.output_path + ".gp";
  std::ofstream gp(script_path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!gp) throw UsageError("cannot open plot script '" + script_path + "' for writing");
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set grid\n"
     << "plot ";
  for (std::size_t i = 1; i < columns.size(); ++i)
    gp << (i > 1 ? ", \\\n     " : "") << "'" << cfg.output_path << "' using 1:" << i + 1 << " with lines";
  gp << "\npause -1\n";
  if (!gp) throw UsageError("write to '" + script_path + "' failed");
}

// ---------------------------------------------------------------------------

int cmd_check_kernel(const RunConfig& cfg) {
  const Kernel k = base_of(cfg);
  const double pou_tol = cfg.tolerance(k.is_compact() ? 1e-8 : 1e-5);
  const double trunc_tol = k.is_compact() ? kDefaultCheckTruncationTol : 1e-5;
  const auto grid = cfg.grid({0.0, 1.0, 101}).points();

  Output out(cfg.output_path);
  auto& os = out.stream();
  bool ok = true;
  os << "kernel " << k.id << '\n';

  const auto pou = check_partition_of_unity(k, grid, pou_tol, trunc_tol);
  ok = ok && pou.pass;
  os << "partition_of_unity max_deviation=" << num(pou.max_deviation) << " radius=" << pou.radius
     << " tol=" << num(pou_tol + pou.truncation_tolerance) << ' ' << pass_fail(pou.pass) << '\n';

  const double a = absolute_moment_sup(k, grid, trunc_tol);
  const bool a_ok = std::isfinite(a) && (!k.nonnegative || std::abs(a - 1.0) <= 1e-4 + pou.truncation_tolerance);
  ok = ok && a_ok;
  os << "absolute_moment A=" << num(a) << ' ' << pass_fail(a_ok) << '\n';

  const auto l1 = l1_norm(k);
  bool l1_ok = std::isfinite(l1.upper());
  if (k.nonnegative) l1_ok = l1_ok && std::abs(l1.value - 1.0) <= (k.is_compact() ? 1e-8 : 1e-5) + l1.tail_bound;
  ok = ok && l1_ok;
  os << "l1_norm value=" << num(l1.value) << " tail_bound=" << num(l1.tail_bound) << ' ' << pass_fail(l1_ok) << '\n';

  for (int kk : {0, 1, -1, 2, -2, 3, -3}) {
    const auto fc = fourier_check(k, kk, k.is_compact() ? 1e-5 : 1e-4);
    const double limit = 1e-6 + fc.tail_bound;
    const bool f_ok = fc.deviation <= limit;
    ok = ok && f_ok;
    os << "fourier k=" << kk << " re=" << num(fc.value.real()) << " im=" << num(fc.value.imag())
       << " deviation=" << num(fc.deviation) << " limit=" << num(limit) << ' ' << pass_fail(f_ok) << '\n';
  }
  os << "overall " << pass_fail(ok) << '\n';
  out.finish();
  return ok ? kPass : kCheckFailure;
}

int cmd_kernel_table(const RunConfig& cfg) {
  const Kernel k = base_of(cfg);
  const AveragedKernel avg(k, cfg.m);
  const auto ts = cfg.grid({-3.0, 3.0, 601}).points();
  const std::vector<std::string> columns{"t", "chi", "chi_bar"};
  const auto rows = parallel_map<std::vector<std::string>>(ts.size(), [&](std::size_t i) {
    return std::vector<std::string>{num(ts[i]), num(k(ts[i])), num(avg(ts[i]))};
  });
  Output out(cfg.output_path);
  out.row(columns);
  for (const auto& r : rows) out.row(r);
  out.finish();
  write_plot_script(cfg, columns, k.id + " and its average, m=" + std::to_string(cfg.m));
  return kPass;
}

int cmd_eval(const RunConfig& cfg) {
  const Signal f = signal_of(cfg);
  const Kernel k = base_of(cfg);
  const AveragedKernel ak(k, cfg.m);
  const auto ws = cfg.rates({1.0});
  const Grid grid = cfg.grid({f.essential_window.lo - 2.0, f.essential_window.hi + 2.0, 201});
  const auto ts = grid.points();
  const Interval range{grid.start, grid.stop};

  const std::vector<std::string> columns{"w", "t", "f", "sampling", "averaged", "averaged_derivative", "kantorovich"};
  const auto blocks = parallel_map<std::vector<std::vector<std::string>>>(ws.size(), [&](std::size_t i) {
    const double w = ws[i];
    const SamplingOperators ops(f, ak, w, range);
    const KantorovichSeries kw(f, k, w, range);
    std::vector<std::vector<std::string>> rows;
    for (double t : ts)
      rows.push_back({num(w), num(t), num(f(t)), num(ops.sampling(t)), num(ops.averaged(t)),
                      num(ops.averaged_derivative(t)), num(kw(t))});
    return rows;
  });
  Output out(cfg.output_path);
  out.row(columns);
  for (const auto& block : blocks)
    for (const auto& r : block) out.row(r);
  out.finish();
  write_plot_script(cfg, columns, f.id + " through " + k.id);
  return kPass;
}

int cmd_detract(const RunConfig& cfg) {
  const Signal f = signal_of(cfg);
  const Kernel k = base_of(cfg);
  const auto ws = cfg.rates({1.0, 2.0, 4.0, 8.0, 16.0});
  const auto reports = parallel_map<DetractingReport>(
      ws.size(), [&](std::size_t i) { return detracting_check(f, k, cfg.m, ws[i]); });
  Output out(cfg.output_path);
  out.row({"w", "variation", "tail_bound", "lhs", "rhs", "corrected_rhs", "pass", "corrected_pass"});
  bool ok = true;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto& r = reports[i];
    ok = ok && r.pass;
    out.row({num(ws[i]), num(r.estimate.value), num(r.estimate.tail_bound), num(r.lhs), num(r.rhs),
             num(r.corrected_rhs), r.pass ? "1" : "0", r.corrected_pass ? "1" : "0"});
  }
  out.finish();
  return ok ? kPass : kCheckFailure;
}

int cmd_derivative_identity(const RunConfig& cfg) {
  const Signal f = signal_of(cfg);
  if (!f.is_ac || !f.has_derivative())
    throw UsageError("signal '" + f.id +
                     "' is not absolutely continuous: the derivative identity needs an AC signal with a known "
                     "derivative");
  const Kernel k = base_of(cfg);
  const double tol = cfg.tolerance(1e-6);
  const auto ws = cfg.rates({4.0});
  const auto ts = cfg.grid({f.essential_window.lo - 1.0, f.essential_window.hi + 1.0, 21}).points();
  const auto residuals = parallel_map<std::vector<double>>(
      ws.size(), [&](std::size_t i) { return derivative_identity_residuals(f, k, cfg.m, ws[i], ts); });

  Output out(cfg.output_path);
  auto& os = out.stream();
  bool ok = true;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const double worst = *std::max_element(residuals[i].begin(), residuals[i].end());
    const bool pass = worst <= tol;
    ok = ok && pass;
    os << "signal=" << f.id << " kernel=" << k.id << " m=" << cfg.m << " w=" << num(ws[i])
       << " points=" << ts.size() << " max_residual=" << num(worst) << " tol=" << num(tol) << ' '
       << pass_fail(pass) << '\n';
  }
  os << "overall " << pass_fail(ok) << '\n';
  out.finish();
  return ok ? kPass : kCheckFailure;
}

int cmd_converge(const RunConfig& cfg) {
  const Signal f = signal_of(cfg);
  const Kernel k = base_of(cfg);
  const auto ws = cfg.rates({2.0, 4.0, 8.0, 16.0, 32.0});
  StudyOptions opts;
  if (cfg.tol > 0.0) opts.refinement.rel_tol = cfg.tol;
  const auto rows = convergence_study(f, k, cfg.m, ws, opts);

  std::vector<std::string> columns{"w", "v_diff", "v_op", "bound"};
  if (cfg.timing) columns.push_back("wall_time");
  Output out(cfg.output_path);
  out.row(columns);
  bool capped = false;
  for (const auto& r : rows) {
    capped = capped || r.v_diff.capped;
    std::vector<std::string> cells{num(r.w), num(r.v_diff.value), num(r.v_op.value), num(r.bound)};
    if (cfg.timing) cells.push_back(num(r.wall_time));
    out.row(cells);
    if (!cfg.timing) std::cerr << "w=" << num(r.w) << " wall_time=" << r.wall_time << "s\n";
  }
  out.finish();
  write_plot_script(cfg, columns, "variation study: " + f.id + ", " + k.id + ", m=" + std::to_string(cfg.m));
  if (capped) throw NonConvergence("partition refinement hit the point cap; v_diff is a lower bound");
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling operators in variation: kernel checks, tables and studies"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub, bool signal, bool rates, bool plot) {
    sub->add_option("--kernel", cfg.kernel_id, "kernel id: bspline:<n>, fejer, bochner-riesz:<g>, avg:<m>:<kernel>")
        ->capture_default_str();
    if (signal)
      sub->add_option("--signal", cfg.signal_id,
                      "signal id: hat:<a>, witch, bump, heaviside, staircase3, ramp_clip, const:<c>")
          ->capture_default_str();
    sub->add_option("--m", cfg.m, "averaging order")->capture_default_str();
    if (rates) sub->add_option("--w", cfg.w_list, "sampling rate (repeatable, ascending)");
    sub->add_option("--grid", cfg.grid_text, "grid start:stop:count (write --grid=-2:2:401 for a negative start)");
    sub->add_option("--tol", cfg.tol, "tolerance");
    sub->add_option("--out", cfg.output_path, "output path (default stdout)");
    if (plot) sub->add_flag("--plot", cfg.emit_plot_script, "also write a gnuplot script <out>.gp");
  };

  auto* check = app.add_subcommand("check-kernel", "partition of unity, A_chi, L1 norm and Fourier checks");
  add_common(check, false, false, false);
  auto* table = app.add_subcommand("kernel-table", "CSV of a kernel and its average");
  add_common(table, false, false, true);
  auto* eval = app.add_subcommand("eval", "CSV of S_w f, S_bar f, (S_bar f)' and K_w f on a grid");
  add_common(eval, true, true, true);
  auto* detract = app.add_subcommand("detract", "V[S_bar f] against ||chi||_1 V[f] / m");
  add_common(detract, true, true, false);
  auto* ident = app.add_subcommand("derivative-identity", "max residual of the derivative identity on a grid");
  add_common(ident, true, true, false);
  auto* converge = app.add_subcommand("converge", "CSV of V[S_bar f - f], V[S_bar f] and the bound per rate");
  add_common(converge, true, true, true);
  converge->add_flag("--timing", cfg.timing, "add a wall_time column (output is then not reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsageError;
  }

  try {
    cfg.validate();
    if (check->parsed()) return cmd_check_kernel(cfg);
    if (table->parsed()) return cmd_kernel_table(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (detract->parsed()) return cmd_detract(cfg);
    if (ident->parsed()) return cmd_derivative_identity(cfg);
    if (converge->parsed()) return cmd_converge(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UnknownId& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const WindowTooSmall& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const QuadratureError& e) {
    std::cerr << "error: quadrature did not converge: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
