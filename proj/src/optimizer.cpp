#include "mpoc/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "mpoc/compress.hpp"

namespace mpoc {

namespace {

// A tensor with its norm held separately as a log.
struct Scaled {
  Tensor t;
  double log = 0.0;

  void normalize() {
    const double nrm = t.norm();
    if (nrm > 0.0 && std::isfinite(nrm)) {
      t *= cplx(1.0 / nrm);
      log += std::log(nrm);
    }
  }
};

Scaled unit_env() { return {Tensor({1, 1}, {cplx(1.0)}), 0.0}; }

Matrix lohi_matrix(const Gate& g) {
  if (g.a < g.b) return g.u;
  const Matrix s = swap_gate();
  return s * g.u * s;
}

void store_lohi(Gate& g, const Matrix& m) {
  if (g.a < g.b) {
    g.u = m;
  } else {
    const Matrix s = swap_gate();
    g.u = s * m * s;
  }
}

std::vector<std::size_t> sorted_gates(const Layer& layer) {
  std::vector<std::size_t> order(layer.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return layer[x].lo() < layer[y].lo(); });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (layer[order[k]].lo() <= layer[order[k - 1]].hi()) {
      throw ValidationError("gates of one layer must occupy disjoint chain intervals");
    }
  }
  return order;
}

// Contractions of the ladder Tr(W G B). W and B sites are [l, out, in, r];
// W's in-leg meets the gate output, the gate input meets B's out-leg, and
// B's in-leg closes onto W's out-leg.
class Ladder {
 public:
  Ladder(const Mpo& w, const Mpo& b) : w_(w), b_(b) {}

  void absorb_left(Scaled& env, std::size_t s) const {
    const Tensor t = contract(env.t, w_.sites[s], {{0, 0}});            // [b, x, y, w']
    env.t = contract(t, b_.sites[s], {{0, 0}, {1, 2}, {2, 1}});         // [w', b']
    env.normalize();
  }

  void absorb_right(Scaled& env, std::size_t s) const {
    const Tensor t = contract(w_.sites[s], env.t, {{3, 0}});            // [w, x, y, b']
    env.t = contract(t, b_.sites[s], {{1, 2}, {2, 1}, {3, 3}});         // [w, b]
    env.normalize();
  }

  // [y_p, z_p, y_q, z_q, w, b] with the open legs of sites p and q.
  Scaled open_from_left(const Scaled& left, std::size_t p, std::size_t q) const {
    Scaled x{contract(left.t, w_.sites[p], {{0, 0}}), left.log};        // [b, x, y, w']
    x.t = contract(x.t, b_.sites[p], {{0, 0}, {1, 2}}).permute({0, 2, 1, 3});
    x.normalize();                                                      // [y, z, w', b']
    for (std::size_t s = p + 1; s < q; ++s) {
      x.t = contract(x.t, w_.sites[s], {{2, 0}});                       // [y, z, b, x, y', w']
      x.t = contract(x.t, b_.sites[s], {{2, 0}, {3, 2}, {4, 1}});       // [y, z, w', b']
      x.normalize();
    }
    x.t = contract(x.t, w_.sites[q], {{2, 0}});                         // [y, z, b, xq, yq, w']
    x.t = contract(x.t, b_.sites[q], {{2, 0}, {3, 2}})                  // [y, z, yq, w', zq, b']
              .permute({0, 1, 2, 4, 3, 5});
    x.normalize();
    return x;
  }

  // [w, b, y_p, z_p, y_q, z_q]
  Scaled open_from_right(const Scaled& right, std::size_t p, std::size_t q) const {
    Scaled x{contract(w_.sites[q], right.t, {{3, 0}}), right.log};      // [w, x, yq, b']
    x.t = contract(x.t, b_.sites[q], {{1, 2}, {3, 3}}).permute({1, 3, 0, 2});
    x.normalize();                                                      // [yq, zq, w, b]
    for (std::size_t s = q - 1; s > p; --s) {
      x.t = contract(w_.sites[s], x.t, {{3, 2}});                       // [w, x, y, yq, zq, b']
      x.t = contract(x.t, b_.sites[s], {{1, 2}, {2, 1}, {5, 3}})        // [w, yq, zq, b]
                .permute({1, 2, 0, 3});
      x.normalize();
    }
    x.t = contract(w_.sites[p], x.t, {{3, 2}});                         // [w, xp, yp, yq, zq, b']
    x.t = contract(x.t, b_.sites[p], {{1, 2}, {5, 3}})                  // [w, yp, yq, zq, b, zp]
              .permute({0, 4, 1, 5, 2, 3});
    x.normalize();
    return x;
  }

 private:
  const Mpo& w_;
  const Mpo& b_;
};

Tensor gate_tensor(const Matrix& g) { return Tensor::from_matrix(g, {2, 2, 2, 2}); }

// E[(zp zq), (yp yq)] from [yp, zp, yq, zq].
Matrix env_matrix(const Tensor& e) { return e.permute({1, 3, 0, 2}).matrix(2); }

Scaled close_left(const Scaled& y, const Matrix& g) {
  Scaled out{contract(gate_tensor(g), y.t, {{0, 0}, {1, 2}, {2, 1}, {3, 3}}), y.log};
  out.normalize();
  return out;
}

Scaled close_right(const Scaled& y, const Matrix& g) {
  Scaled out{contract(gate_tensor(g), y.t, {{0, 2}, {1, 4}, {2, 3}, {3, 5}}), y.log};
  out.normalize();
  return out;
}

struct Update {
  Matrix gate;
  double gain = 0.0;
  double overlap = 0.0;
  bool degenerate = false;
};

// `e` is scaled by exp(log) in normalized-overlap units.
Update best_gate(const Matrix& e, double log, const Matrix& old) {
  const double scale = std::exp(log);
  const double before = std::abs((old * e).trace()) * scale;
  const SvdResult s = svd(e);
  Update u;
  if (s.singular.size() == 0 || s.singular[0] * scale < 1e-14) {
    u.gate = old;
    u.overlap = before;
    u.degenerate = true;
    return u;
  }
  u.gate = s.right * s.left.adjoint();
  u.overlap = s.singular.sum() * scale;
  u.gain = u.overlap - before;
  return u;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (chi_train == 0 || micro_sweeps == 0 || verify_multiplier == 0) {
    throw ConfigError("optimizer settings must be positive");
  }
  if (!(cost_tol >= 0.0)) throw ConfigError("cost_tol must be non-negative");
  if (chi_cap < chi_train) throw ConfigError("chi_cap is below chi_train");
}

std::string CostTrace::to_csv() const {
  std::ostringstream os;
  os << "sweep,cost,chi,discarded_weight,seconds\n";
  for (const SweepRecord& r : records) {
    os << r.sweep << ',' << fmt(r.cost) << ',' << r.chi << ',' << fmt(r.discarded_weight) << ','
       << fmt(r.seconds) << '\n';
  }
  return os.str();
}

EnvironmentCache::EnvironmentCache(const Circuit& circ, const Mpo& v_targ,
                                   const Truncation& trunc, bool variational)
    : n_(circ.n), depth_(circ.depth()), trunc_(trunc), variational_(variational) {
  if (v_targ.size() != circ.n) {
    throw DimensionError("target has " + std::to_string(v_targ.size()) + " qubits, circuit " +
                         std::to_string(circ.n));
  }
  if (depth_ == 0) throw ConfigError("cannot optimize an empty circuit");
  for (const Layer& l : circ.layers) sorted_gates(l);
  layer_ = depth_ - 1;
  top_ = canonicalize(adjoint(v_targ), 0);
  bottom_ = canonicalize(mpo_identity(n_), 0);
  for (std::size_t i = 0; i + 1 < depth_; ++i) absorb(bottom_, circ.layers[i], false, Side::Out);
}

void EnvironmentCache::absorb(Mpo& env, const Layer& layer, bool adj, Side side) {
  Truncation t = trunc_;
  if (variational_) t.chi_max *= 2;
  for (const Gate& g : layer) {
    const Matrix u = adj ? Matrix(g.u.adjoint()) : g.u;
    env = apply_gate(std::move(env), u, g.a, g.b, t, &stats_, side);
  }
  if (variational_ && env.max_bond() > trunc_.chi_max) {
    env = variational_compress(env, trunc_.chi_max).mpo;
  }
  move_center(env, 0);
  stats_.record(0.0, env.max_bond());
}

void EnvironmentCache::check_sync(const Circuit& circ) const {
  if (circ.n != n_ || circ.depth() != depth_) {
    throw InternalStateError("environment cache was built for a different circuit shape");
  }
}

void EnvironmentCache::move_down(const Circuit& circ) {
  check_sync(circ);
  if (layer_ == 0) throw UsageError("cache is already at the bottom layer");
  absorb(top_, circ.layers[layer_], false, Side::In);
  --layer_;
  absorb(bottom_, circ.layers[layer_], true, Side::Out);
}

void EnvironmentCache::move_up(const Circuit& circ) {
  check_sync(circ);
  if (layer_ + 1 >= depth_) throw UsageError("cache is already at the top layer");
  absorb(bottom_, circ.layers[layer_], false, Side::Out);
  ++layer_;
  absorb(top_, circ.layers[layer_], true, Side::In);
}

void EnvironmentCache::reset_outer(const Circuit& circ, const Mpo& v_targ) {
  (void)circ;
  bool done = false;
  if (layer_ == 0) {
    bottom_ = canonicalize(mpo_identity(n_), 0);
    done = true;
  }
  if (layer_ + 1 == depth_) {
    top_ = canonicalize(adjoint(v_targ), 0);
    done = true;
  }
  if (!done) throw UsageError("environment resets only apply at the first or last layer");
}

Matrix EnvironmentCache::gate_environment(const Circuit& circ, std::size_t gate) const {
  check_sync(circ);
  const Layer& layer = circ.layers.at(layer_);
  if (gate >= layer.size()) throw InternalStateError("gate index outside the current layer");
  const std::vector<std::size_t> order = sorted_gates(layer);
  const Ladder ladder(top_, bottom_);
  const std::size_t p = layer[gate].lo(), q = layer[gate].hi();

  Scaled left = unit_env();
  std::size_t s = 0;
  for (std::size_t gi : order) {
    if (gi == gate) break;
    const Gate& g = layer[gi];
    for (; s < g.lo(); ++s) ladder.absorb_left(left, s);
    left = close_left(ladder.open_from_left(left, g.lo(), g.hi()), lohi_matrix(g));
    s = g.hi() + 1;
  }
  for (; s < p; ++s) ladder.absorb_left(left, s);

  Scaled right = unit_env();
  s = n_;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (*it == gate) break;
    const Gate& g = layer[*it];
    for (; s > g.hi() + 1; --s) ladder.absorb_right(right, s - 1);
    right = close_right(ladder.open_from_right(right, g.lo(), g.hi()), lohi_matrix(g));
    s = g.lo();
  }
  for (; s > q + 1; --s) ladder.absorb_right(right, s - 1);

  const Scaled y = ladder.open_from_left(left, p, q);
  const Tensor e = contract(y.t, right.t, {{4, 0}, {5, 1}});
  Matrix em = env_matrix(e) * std::exp(y.log + right.log);
  if (layer[gate].a > layer[gate].b) {
    const Matrix sw = swap_gate();
    em = sw * em * sw;
  }
  return em;
}

cplx EnvironmentCache::overlap(const Circuit& circ) const {
  check_sync(circ);
  const Layer& layer = circ.layers.at(layer_);
  if (layer.empty()) {
    const Ladder ladder(top_, bottom_);
    Scaled env = unit_env();
    for (std::size_t s = 0; s < n_; ++s) ladder.absorb_left(env, s);
    return env.t[0] * std::exp(env.log);
  }
  return (layer[0].u * gate_environment(circ, 0)).trace();
}

std::pair<Matrix, double> EnvironmentCache::update_gate(Circuit& circ, std::size_t gate,
                                                        bool* degenerate) const {
  const Matrix e = gate_environment(circ, gate);
  Gate& g = circ.layers[layer_][gate];
  const Update u = best_gate(e, 0.0, g.u);
  g.u = u.gate;
  if (degenerate) *degenerate = u.degenerate;
  return {u.gate, u.gain};
}

LayerVisit EnvironmentCache::optimize_layer(Circuit& circ, std::size_t micro_sweeps) {
  check_sync(circ);
  Layer& layer = circ.layers.at(layer_);
  LayerVisit visit;
  if (layer.empty()) {
    visit.overlap = std::abs(overlap(circ));
    return visit;
  }
  const std::vector<std::size_t> order = sorted_gates(layer);
  const std::size_t m = order.size();
  const Ladder ladder(top_, bottom_);
  std::vector<Scaled> left(m), right(m);  // left[j]: sites < p_j, right[j]: sites > q_j

  auto lo = [&](std::size_t j) { return layer[order[j]].lo(); };
  auto hi = [&](std::size_t j) { return layer[order[j]].hi(); };

  auto fill_right = [&]() {
    Scaled env = unit_env();
    std::size_t s = n_;
    for (std::size_t j = m; j-- > 0;) {
      for (; s > hi(j) + 1; --s) ladder.absorb_right(env, s - 1);
      right[j] = env;
      env = close_right(ladder.open_from_right(env, lo(j), hi(j)), lohi_matrix(layer[order[j]]));
      s = lo(j);
    }
  };

  auto record = [&](const Update& u) {
    ++visit.updates;
    if (u.degenerate) ++visit.degenerate;
    visit.min_gain = visit.updates == 1 ? u.gain : std::min(visit.min_gain, u.gain);
    visit.overlap = u.overlap;
  };

  fill_right();
  for (std::size_t pass = 0; pass < micro_sweeps; ++pass) {
    if (pass % 2 == 0) {
      Scaled env = unit_env();
      std::size_t s = 0;
      for (std::size_t j = 0; j < m; ++j) {
        for (; s < lo(j); ++s) ladder.absorb_left(env, s);
        left[j] = env;
        const Scaled y = ladder.open_from_left(env, lo(j), hi(j));
        const Tensor e = contract(y.t, right[j].t, {{4, 0}, {5, 1}});
        Gate& g = layer[order[j]];
        const Update u = best_gate(env_matrix(e), y.log + right[j].log, lohi_matrix(g));
        store_lohi(g, u.gate);
        record(u);
        env = close_left(y, u.gate);
        s = hi(j) + 1;
      }
    } else {
      Scaled env = unit_env();
      std::size_t s = n_;
      for (std::size_t j = m; j-- > 0;) {
        for (; s > hi(j) + 1; --s) ladder.absorb_right(env, s - 1);
        right[j] = env;
        const Scaled y = ladder.open_from_right(env, lo(j), hi(j));
        const Tensor e = contract(left[j].t, y.t, {{0, 0}, {1, 1}});
        Gate& g = layer[order[j]];
        const Update u = best_gate(env_matrix(e), y.log + left[j].log, lohi_matrix(g));
        store_lohi(g, u.gate);
        record(u);
        env = close_right(y, u.gate);
        s = lo(j);
      }
    }
  }
  return visit;
}

SweepRecord sweep(Circuit& circ, const Mpo& v_targ, EnvironmentCache& cache,
                  const OptimizerConfig& cfg) {
  const std::size_t depth = circ.depth();
  if (cache.layer() + 1 != depth) throw InternalStateError("sweep must start at the last layer");
  const auto start = std::chrono::steady_clock::now();
  cache.clear_stats();
  SweepRecord rec;
  bool first = true;
  auto visit = [&]() {
    const LayerVisit v = cache.optimize_layer(circ, cfg.micro_sweeps);
    rec.updates += v.updates;
    rec.degenerate += v.degenerate;
    if (v.updates > 0) rec.min_gain = first ? v.min_gain : std::min(rec.min_gain, v.min_gain);
    if (v.updates > 0) first = false;
    rec.cost = std::clamp(1.0 - v.overlap * v.overlap, 0.0, 1.0);
  };

  visit();
  while (cache.layer() > 0) {
    cache.move_down(circ);
    if (cache.layer() == 0 && cfg.resets) cache.reset_outer(circ, v_targ);
    visit();
  }
  while (cache.layer() + 2 < depth) {
    cache.move_up(circ);
    visit();
  }
  if (depth > 1) {
    cache.move_up(circ);
    if (cfg.resets) cache.reset_outer(circ, v_targ);
  }
  rec.chi = cache.stats().max_bond;
  rec.discarded_weight = cache.stats().discarded_weight;
  rec.chi_train = cfg.chi_train;
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

double circuit_cost(const Circuit& circ, const Mpo& v_targ, std::size_t chi, double weight_tol) {
  return hst_cost(circuit_to_mpo(circ, Truncation{chi, weight_tol}), v_targ);
}

OptimizeResult optimize(const Circuit& init, const Mpo& v_targ, const OptimizerConfig& cfg) {
  cfg.validate();
  init.validate();
  OptimizeResult res;
  res.chi_train = cfg.chi_train;
  const std::size_t chi_verify = cfg.chi_train * cfg.verify_multiplier;
  res.init_cost = circuit_cost(init, v_targ, chi_verify, cfg.weight_tol);

  SweepRecord zero;
  zero.cost = circuit_cost(init, v_targ, cfg.chi_train, cfg.weight_tol);
  zero.cold_cost = zero.cost;
  zero.chi_train = cfg.chi_train;
  res.trace.records.push_back(zero);

  Circuit circ = init;
  Circuit best = init;
  double best_cost = zero.cost;
  double prev = zero.cost;
  std::size_t chi = cfg.chi_train;

  if (cfg.max_sweeps > 0 && init.depth() > 0) {
    auto cache = std::make_unique<EnvironmentCache>(
        circ, v_targ, Truncation{chi, cfg.weight_tol}, cfg.variational_envs);
    for (std::size_t s = 1; s <= cfg.max_sweeps; ++s) {
      OptimizerConfig run = cfg;
      run.chi_train = chi;
      SweepRecord rec = sweep(circ, v_targ, *cache, run);
      rec.sweep = s;
      if (cfg.cold_cost) rec.cold_cost = circuit_cost(circ, v_targ, chi, cfg.weight_tol);
      res.trace.records.push_back(rec);
      if (rec.cost < best_cost) {
        best_cost = rec.cost;
        best = circ;
      }
      if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, {circ, chi, s});

      const bool rose = rec.cost > prev + 10.0 * rec.discarded_weight + 1e-12;
      if (rose && cfg.escalate) {
        chi += cfg.chi_escalation;
        if (chi > cfg.chi_cap) {
          res.circuit = best;
          res.final_cost = circuit_cost(best, v_targ, chi_verify, cfg.weight_tol);
          res.chi_train = chi - cfg.chi_escalation;
          throw OptimizeCapacityError("training bond dimension would exceed chi_cap " +
                                          std::to_string(cfg.chi_cap),
                                      rec.cost, res);
        }
        cache = std::make_unique<EnvironmentCache>(
            circ, v_targ, Truncation{chi, cfg.weight_tol}, cfg.variational_envs);
        prev = rec.cost;
        continue;
      }
      const double improvement = prev > 0.0 ? (prev - rec.cost) / prev : 0.0;
      prev = rec.cost;
      if (rec.cost <= 0.0 || improvement < cfg.cost_tol) break;
    }
  }

  res.chi_train = chi;
  const double best_verified = circuit_cost(best, v_targ, chi_verify, cfg.weight_tol);
  if (best_verified <= res.init_cost) {
    res.circuit = std::move(best);
    res.final_cost = best_verified;
  } else {
    res.circuit = init;
    res.final_cost = res.init_cost;
  }
  return res;
}

std::vector<std::vector<double>> schmidt_decay_diagnostic(const Circuit& circ, const Mpo& v_targ,
                                                          std::size_t chi) {
  if (circ.n < 2) throw DimensionError("the diagnostic needs at least two qubits");
  const std::size_t bond = circ.n / 2 - 1;
  std::vector<std::vector<double>> out;
  Mpo m = v_targ;
  out.push_back(schmidt_spectrum(m, bond));
  const Truncation trunc{chi, 1e-14};
  for (std::size_t i = 1; i <= circ.depth(); ++i) {
    for (const Gate& g : circ.layers[circ.depth() - i]) {
      m = apply_gate(std::move(m), g.u.adjoint(), g.a, g.b, trunc, nullptr, Side::Out);
    }
    out.push_back(schmidt_spectrum(m, bond));
  }
  return out;
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  nlohmann::json j;
  j["chi"] = cp.chi;
  j["sweep"] = cp.sweep;
  j["circuit"] = nlohmann::json::parse(circuit_to_json(cp.circuit));
  std::ofstream os(path);
  if (!os) throw FileError("cannot open " + path + " for writing");
  os << j.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FileError("cannot open " + path);
  try {
    const nlohmann::json j = nlohmann::json::parse(is);
    Checkpoint cp;
    cp.chi = j.at("chi").get<std::size_t>();
    cp.sweep = j.at("sweep").get<std::size_t>();
    cp.circuit = circuit_from_json(j.at("circuit").dump());
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw FileError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace mpoc
