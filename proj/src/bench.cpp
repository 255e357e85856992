#include "mpoc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "mpoc/dense.hpp"
#include "mpoc/errors.hpp"
#include "mpoc/mpo_io.hpp"
#include "mpoc/trotter.hpp"

namespace mpoc {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string circuit_name(std::size_t depth) { return "circuit_L" + std::to_string(depth) + ".circ"; }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw FileError("cannot write " + p.string());
  os << text;
}

std::vector<std::size_t> ladder_up_to(std::size_t chi) {
  std::vector<std::size_t> l;
  for (std::size_t c : {16, 32, 64, 128})
    if (c < chi) l.push_back(c);
  l.push_back(chi);
  return l;
}

// Multiplies every gate by exp(-i eps H) with a random Hermitian H.
void perturb_circuit(Circuit& c, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Layer& l : c.layers) {
    for (Gate& g : l) {
      Matrix a(4, 4);
      for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) a(i, j) = cplx(normal(rng), normal(rng));
      g.u = hermitian_exp(0.5 * (a + a.adjoint()), eps) * g.u;
    }
  }
}

struct ReportEntry {
  std::string file;
  std::map<std::string, std::string> fields;
};

std::vector<ReportEntry> read_report(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw FileError("missing " + p.string() + " (run compile first)");
  std::vector<ReportEntry> out;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head != "circuit") continue;
    ReportEntry e;
    ls >> e.file;
    std::string k, v;
    while (ls >> k >> v) e.fields[k] = v;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

void RunManifest::validate() const {
  if (config_path.empty()) throw UsageError("--config is required");
  if (!fs::exists(config_path)) throw FileError("config file " + config_path + " not found");
  if (depths.empty()) throw UsageError("depth list is empty");
  for (std::size_t d : depths)
    if (d == 0) throw UsageError("depths must be positive");
  if (chi == 0 || k == 0) throw UsageError("--chi and --k must be positive");
  if (!(budget > 0.0)) throw UsageError("--budget must be positive");
}

CompileOutput cmd_compile(const RunManifest& m, std::ostream& log) {
  m.validate();
  const HamiltonianSpec spec = load_spec(m.config_path);
  const TermList terms = build_terms(spec);
  for (std::size_t depth : m.depths) ansatz_from_trotter(terms, spec.t, depth);
  fs::create_directories(m.out_dir);
  const fs::path out(m.out_dir);

  TargetOptions topt;
  topt.k = m.k;
  topt.chi_ladder = ladder_up_to(m.chi);
  CompileOutput res;
  {
    TargetResult full = build_target(terms, spec.t, topt);
    log << "target: chi " << full.report.chi << ", max bond " << full.report.max_bond << '\n';
    res.target = precompress_target(full.mpo, m.budget, full.report);
    log << "precompressed: max bond " << res.target.mpo.max_bond() << ", cost "
        << res.target.report.final_cost << '\n';
  }
  save_mpo((out / "target.mpo").string(), res.target.mpo);

  std::ostringstream report;
  report << "model " << model_tag(spec.model) << "\nn " << spec.n << "\n"
         << res.target.report.to_text();

  for (std::size_t depth : m.depths) {
    CompileRun run;
    run.depth = depth;
    Circuit init = ansatz_from_trotter(terms, spec.t, depth, &run.init);
    if (m.perturb > 0.0) perturb_circuit(init, m.perturb, m.seed);
    OptimizerConfig cfg;
    cfg.chi_train = m.chi;
    cfg.chi_cap = std::max<std::size_t>(4 * m.chi, m.chi + 4 * cfg.chi_escalation);
    cfg.max_sweeps = m.max_sweeps;
    cfg.cost_tol = m.cost_tol;
    run.result = optimize(init, res.target.mpo, cfg);
    const OptimizeResult& r = run.result;
    save_circuit((out / circuit_name(depth)).string(), r.circuit);
    write_text(out / ("trace_L" + std::to_string(depth) + ".csv"), r.trace.to_csv());
    report << "circuit " << circuit_name(depth) << " depth " << depth << " order "
           << run.init.order << " k " << run.init.steps << " padding " << run.init.padding
           << " init_cost " << fmt(r.init_cost) << " final_cost " << fmt(r.final_cost)
           << " chi " << r.chi_train << " sweeps " << (r.trace.records.size() - 1) << '\n';
    log << "L=" << depth << ": order " << run.init.order << " k=" << run.init.steps
        << ", cost " << r.init_cost << " -> " << r.final_cost << '\n';
    res.runs.push_back(std::move(run));
  }
  write_text(out / "report.txt", report.str());
  return res;
}

TrotterBaseline::TrotterBaseline(std::vector<BaselinePoint> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end(), [](const BaselinePoint& a, const BaselinePoint& b) {
    return a.order != b.order ? a.order < b.order : a.depth < b.depth;
  });
}

double TrotterBaseline::interpolate(int order, double depth) const {
  const BaselinePoint* prev = nullptr;
  for (const BaselinePoint& p : points_) {
    if (p.order != order) continue;
    if (static_cast<double>(p.depth) == depth) return p.cost;
    if (prev && static_cast<double>(p.depth) > depth) {
      const double x0 = static_cast<double>(prev->depth), x1 = static_cast<double>(p.depth);
      const double y0 = std::log(std::max(prev->cost, kCostFloor));
      const double y1 = std::log(std::max(p.cost, kCostFloor));
      return std::exp(y0 + (y1 - y0) * (depth - x0) / (x1 - x0));
    }
    if (static_cast<double>(p.depth) > depth) return -1.0;
    prev = &p;
  }
  return -1.0;
}

ComparisonRow TrotterBaseline::compare(std::size_t depth, double compiled) const {
  ComparisonRow row;
  row.depth = depth;
  row.compiled_cost = compiled;
  row.trotter_cost = std::numeric_limits<double>::infinity();
  for (const BaselinePoint& p : points_) {
    if (p.depth <= depth && p.cost < row.trotter_cost) {
      row.trotter_cost = p.cost;
      row.trotter_order = p.order;
      row.trotter_k = p.k;
    }
  }
  for (int order : {1, 2, 4}) {
    const double c = interpolate(order, static_cast<double>(depth));
    if (c >= 0.0 && c < row.trotter_cost) {
      row.trotter_cost = c;
      row.trotter_order = order;
      row.trotter_k = 0;
    }
  }
  if (row.trotter_cost <= kCostFloor && compiled <= kCostFloor) {
    row.reduction = 1.0;
  } else {
    row.reduction = row.trotter_cost / std::max(compiled, kCostFloor);
  }

  const double target = std::log(std::max(compiled, kCostFloor));
  double best = std::numeric_limits<double>::infinity();
  double deepest = 0.0;
  const BaselinePoint* prev = nullptr;
  for (const BaselinePoint& p : points_) {
    if (prev && prev->order != p.order) prev = nullptr;
    const double y = std::log(std::max(p.cost, kCostFloor));
    deepest = std::max(deepest, static_cast<double>(p.depth));
    if (y <= target) {
      double x = static_cast<double>(p.depth);
      if (prev) {
        const double y0 = std::log(std::max(prev->cost, kCostFloor));
        if (y0 > target) {
          x = static_cast<double>(prev->depth) +
              (target - y0) / (y - y0) * static_cast<double>(p.depth - prev->depth);
        }
      }
      best = std::min(best, x);
    }
    prev = &p;
  }
  if (std::isinf(best)) {
    row.compression_lower_bound = true;
    best = deepest;
  }
  row.compression = best / static_cast<double>(depth);
  return row;
}

std::vector<BaselinePoint> trotter_baseline_points(const TermList& terms, double t,
                                                   std::size_t depth_cap, const Matrix& exact,
                                                   const Mpo* target, std::size_t chi) {
  const StepPlan plan = step_plan(terms);
  std::vector<BaselinePoint> pts;
  for (int order : {1, 2, 4}) {
    for (std::size_t k = 1;; ++k) {
      const Circuit c = merged_trotterization(plan, t, order, k);
      if (c.depth() > depth_cap) break;
      double cost;
      if (exact.size() > 0) {
        cost = dense_hst(circuit_to_dense(c), exact);
      } else {
        cost = hst_cost(circuit_to_mpo(c, Truncation{chi, 1e-14}), *target);
      }
      pts.push_back({order, k, c.depth(), cost});
    }
  }
  return pts;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "depth,compiled_cost,trotter_cost,trotter_order,trotter_k,reduction,compression,"
        "compression_lower_bound\n";
  for (const ComparisonRow& r : rows) {
    os << r.depth << ',' << fmt(r.compiled_cost) << ',' << fmt(r.trotter_cost) << ','
       << r.trotter_order << ',' << r.trotter_k << ',' << fmt(r.reduction) << ','
       << fmt(r.compression) << ',' << (r.compression_lower_bound ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<ComparisonRow> cmd_baseline(const RunManifest& m, std::ostream& log) {
  m.validate();
  const fs::path out(m.out_dir);
  if (!fs::exists(out / "report.txt")) cmd_compile(m, log);
  const HamiltonianSpec spec = load_spec(m.config_path);
  const TermList terms = build_terms(spec);
  const Mpo target = load_mpo((out / "target.mpo").string());

  Matrix exact;
  if (spec.n <= kVerifyQubitLimit) exact = dense_propagator(terms, spec.t);
  const std::size_t max_depth = *std::max_element(m.depths.begin(), m.depths.end());
  const std::size_t cap = m.depth_cap ? m.depth_cap : std::max<std::size_t>(4 * max_depth, 24);
  const std::size_t chi = 2 * m.chi;
  const TrotterBaseline base(trotter_baseline_points(terms, spec.t, cap, exact, &target, chi));

  std::vector<ComparisonRow> rows;
  for (std::size_t depth : m.depths) {
    const fs::path cp = out / circuit_name(depth);
    if (!fs::exists(cp)) {
      log << "no circuit for L=" << depth << ", skipped\n";
      continue;
    }
    const Circuit c = load_circuit(cp.string());
    const double cost = exact.size() > 0 ? dense_hst(circuit_to_dense(c), exact)
                                         : hst_cost(circuit_to_mpo(c, {chi, 1e-14}), target);
    rows.push_back(base.compare(depth, cost));
    const ComparisonRow& r = rows.back();
    log << "L=" << depth << ": compiled " << r.compiled_cost << ", Trotter " << r.trotter_cost
        << ", reduction " << r.reduction << ", compression " << r.compression
        << (r.compression_lower_bound ? " (lower bound)" : "") << '\n';
  }
  std::ostringstream pts;
  pts << "order,k,depth,cost\n";
  for (const BaselinePoint& p : base.points()) {
    pts << p.order << ',' << p.k << ',' << p.depth << ',' << fmt(p.cost) << '\n';
  }
  write_text(out / "trotter_points.csv", pts.str());
  write_text(out / "baseline.csv", comparison_csv(rows));
  return rows;
}

std::vector<std::vector<double>> cmd_diagnose(const RunManifest& m, std::ostream& log) {
  m.validate();
  const fs::path out(m.out_dir);
  const std::size_t depth = *std::max_element(m.depths.begin(), m.depths.end());
  const fs::path cp = out / circuit_name(depth);
  if (!fs::exists(cp)) throw FileError("missing " + cp.string() + " (run compile first)");
  const Circuit c = load_circuit(cp.string());
  const Mpo target = load_mpo((out / "target.mpo").string());
  const auto spectra = schmidt_decay_diagnostic(c, target, 2 * m.chi);
  std::ostringstream os;
  os << "i,values\n";
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    os << i;
    for (double s : spectra[i]) os << ',' << fmt(s);
    os << '\n';
  }
  write_text(out / "spectra.csv", os.str());
  log << "spectra for L=" << depth << " written (" << spectra.size() << " rows)\n";
  return spectra;
}

bool cmd_verify(const RunManifest& m, std::ostream& log) {
  m.validate();
  const HamiltonianSpec spec = load_spec(m.config_path);
  if (spec.n > kVerifyQubitLimit) {
    throw UsageError("verify builds 2^n matrices and is limited to n <= " +
                     std::to_string(kVerifyQubitLimit));
  }
  const fs::path out(m.out_dir);
  const TermList terms = build_terms(spec);
  const Matrix exact = dense_propagator(terms, spec.t);
  const Mpo target = load_mpo((out / "target.mpo").string());
  const Matrix dense_target = to_dense(target);
  log << "target vs exact (dense): " << dense_hst(dense_target, exact) << '\n';

  bool ok = true;
  const std::size_t chi = std::size_t{1} << spec.n;
  for (const ReportEntry& e : read_report(out / "report.txt")) {
    const Circuit c = load_circuit((out / e.file).string());
    const double dense = dense_hst(circuit_to_dense(c), dense_target);
    const double mpo = hst_cost(circuit_to_mpo(c, {chi, 0.0}), target);
    bool pass = std::abs(dense - mpo) <= 1e-9;
    const auto rec = e.fields.find("final_cost");
    if (rec != e.fields.end() && std::abs(std::stod(rec->second) - dense) > 1e-9) pass = false;
    log << e.file << ": dense " << dense << ", mpo " << mpo
        << (rec != e.fields.end() ? ", recorded " + rec->second : std::string())
        << ", vs exact " << dense_hst(circuit_to_dense(c), exact) << (pass ? "  ok" : "  MISMATCH")
        << '\n';
    ok = ok && pass;
  }
  return ok;
}

}  // namespace mpoc
