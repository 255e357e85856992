#include "mpoc/trotter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

struct Slot {
  std::size_t a, b;
  Routing router;
};
using SlotLayer = std::vector<Slot>;

std::vector<SlotLayer> tfim_chain_slots(std::size_t n) {
  SlotLayer even, odd;
  for (std::size_t i = 0; i + 1 < n; ++i) (i % 2 ? odd : even).push_back({i, i + 1, Routing::None});
  return {even, odd};
}

std::vector<SlotLayer> j1j2_slots(std::size_t n) {
  std::vector<SlotLayer> l(6);
  auto add = [&](std::size_t layer, std::size_t a, Routing r) {
    if (a + 1 < n) l[layer].push_back({a, a + 1, r});
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t r = i % 4;
    if (r == 3) add(0, i, Routing::Swap);
    if (r == 2 || (r == 0 && i > 0)) add(1, i, Routing::None);
    if (r == 1 || r == 3) add(2, i, Routing::Swap);
    if (r % 2 == 0) add(3, i, Routing::None);
    if (r == 1) add(4, i, Routing::Swap);
    if (r % 2 == 0) add(5, i, Routing::None);
  }
  return l;
}

std::vector<SlotLayer> hubbard_slots(std::size_t n) {
  const std::size_t sites = n / 2;
  std::vector<SlotLayer> l(5);
  for (std::size_t i = 0; i < sites; ++i) {
    if (i % 2 == 1) l[0].push_back({2 * i, 2 * i + 1, Routing::FermionicSwap});
    l[2].push_back({2 * i, 2 * i + 1, Routing::FermionicSwap});
    if (i % 2 == 0) l[4].push_back({2 * i, 2 * i + 1, Routing::FermionicSwap});
    if (i + 1 < sites) {
      l[1].push_back({2 * i + 1, 2 * i + 2, Routing::None});
      l[3].push_back({2 * i + 1, 2 * i + 2, Routing::None});
    }
  }
  return l;
}

std::vector<SlotLayer> graph_slots(const TermList& terms) {
  const std::size_t ncol = terms.group_names.size() - 1;
  std::vector<SlotLayer> l(ncol);
  for (const Term& t : terms.terms) {
    if (t.support.size() == 2) l.at(t.group).push_back({t.support[0], t.support[1], Routing::None});
  }
  for (SlotLayer& s : l) {
    std::sort(s.begin(), s.end(), [](const Slot& x, const Slot& y) { return x.a < y.a; });
  }
  return l;
}

Matrix swap_frame(const Matrix& m) {
  const Matrix s = swap_gate();
  return s * m * s;
}

Matrix embed_one(const Matrix& m, bool first) {
  const Matrix id = Matrix::Identity(2, 2);
  Matrix out = Matrix::Zero(4, 4);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      out.block(i * 2, j * 2, 2, 2) = first ? Matrix(m(i, j) * id) : Matrix(id(i, j) * m);
  return out;
}

Circuit circuit_shell(const StepPlan& plan) {
  Circuit c;
  c.n = plan.n;
  c.topology = plan.topology;
  c.edges = plan.edges;
  return c;
}

void append_first_order(Circuit& c, const StepPlan& plan, double tau, bool reversed) {
  const std::size_t m = plan.layers.size();
  for (std::size_t k = 0; k < m; ++k) {
    const PlanLayer& pl = plan.layers[reversed ? m - 1 - k : k];
    Layer layer;
    for (const PlanGate& g : pl) {
      layer.push_back(Gate{g.a, g.b, router_matrix(g.router) * hermitian_exp(g.h, tau)});
    }
    c.layers.push_back(std::move(layer));
  }
}

void append_second_order(Circuit& c, const StepPlan& plan, double tau) {
  append_first_order(c, plan, tau / 2, false);
  append_first_order(c, plan, tau / 2, true);
}

}  // namespace

Matrix router_matrix(Routing r) {
  switch (r) {
    case Routing::None: return Matrix::Identity(4, 4);
    case Routing::Swap: return swap_gate();
    case Routing::FermionicSwap: return fermionic_swap_gate();
  }
  return Matrix::Identity(4, 4);
}

Matrix hermitian_exp(const Matrix& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of a term failed");
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<cplx>() * cplx(0.0, -dt)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

StepPlan step_plan(const TermList& terms) {
  terms.validate();
  const std::size_t n = terms.n;
  std::vector<SlotLayer> slots;
  StepPlan plan;
  plan.n = n;
  switch (terms.model) {
    case Model::Tfim1d: slots = tfim_chain_slots(n); break;
    case Model::J1J2_1d: slots = j1j2_slots(n); break;
    case Model::Hubbard1d: slots = hubbard_slots(n); break;
    case Model::TfimGraph:
      slots = graph_slots(terms);
      plan.topology = "graph";
      plan.edges = terms.edges;
      std::sort(plan.edges.begin(), plan.edges.end());
      break;
  }

  std::vector<std::size_t> at(n);  // logical qubit at each position
  std::iota(at.begin(), at.end(), 0);
  std::vector<bool> done(terms.terms.size(), false);
  for (const SlotLayer& sl : slots) {
    PlanLayer layer;
    for (const Slot& s : sl) {
      const std::size_t qa = at[s.a], qb = at[s.b];
      PlanGate g{s.a, s.b, s.router, Matrix::Zero(4, 4)};
      bool used = false;
      for (std::size_t ti = 0; ti < terms.terms.size(); ++ti) {
        const Term& t = terms.terms[ti];
        if (done[ti]) continue;
        if (t.support.size() == 2) {
          if (t.support[0] == qa && t.support[1] == qb) {
            g.h += t.matrix;
          } else if (t.support[0] == qb && t.support[1] == qa) {
            g.h += swap_frame(t.matrix);
          } else {
            continue;
          }
          if (t.routing != Routing::None && s.router != Routing::None && t.routing != s.router) {
            throw InternalStateError("term routed with the wrong kind of swap");
          }
        } else if (t.support[0] == qa || t.support[0] == qb) {
          g.h += embed_one(t.matrix, t.support[0] == qa);
        } else {
          continue;
        }
        done[ti] = used = true;
      }
      if (used || s.router != Routing::None) layer.push_back(std::move(g));
      if (s.router != Routing::None) std::swap(at[s.a], at[s.b]);
    }
    if (!layer.empty()) plan.layers.push_back(std::move(layer));
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (at[p] != p) throw InternalStateError("Trotter routing does not return to the identity");
  }
  for (std::size_t ti = 0; ti < done.size(); ++ti) {
    if (!done[ti]) {
      throw ConfigError("term on qubit " + std::to_string(terms.terms[ti].support[0]) +
                        " has no gate to attach to");
    }
  }
  return plan;
}

Circuit trotter_circuit(const StepPlan& plan, double dt, int order, std::size_t steps) {
  Circuit c = circuit_shell(plan);
  const double p = 1.0 / (4.0 - std::cbrt(4.0));
  for (std::size_t s = 0; s < steps; ++s) {
    switch (order) {
      case 1: append_first_order(c, plan, dt, false); break;
      case 2: append_second_order(c, plan, dt); break;
      case 4:
        append_second_order(c, plan, p * dt);
        append_second_order(c, plan, p * dt);
        append_second_order(c, plan, (1.0 - 4.0 * p) * dt);
        append_second_order(c, plan, p * dt);
        append_second_order(c, plan, p * dt);
        break;
      default: throw ConfigError("unsupported Trotter order " + std::to_string(order));
    }
  }
  return c;
}

Circuit trotter_circuit(const TermList& terms, double dt, int order, std::size_t steps) {
  return trotter_circuit(step_plan(terms), dt, order, steps);
}

Circuit merge_adjacent_layers(const Circuit& circ) {
  Circuit out = circ;
  out.layers.clear();
  for (const Layer& layer : circ.layers) {
    if (!out.layers.empty() && layer_support(out.layers.back()) == layer_support(layer)) {
      for (Gate& prev : out.layers.back()) {
        const auto next = std::find_if(layer.begin(), layer.end(), [&](const Gate& g) {
          return g.lo() == prev.lo() && g.hi() == prev.hi();
        });
        const Matrix u = next->a == prev.a ? next->u : swap_frame(next->u);
        prev.u = u * prev.u;
      }
    } else {
      out.layers.push_back(layer);
    }
  }
  return out;
}

Circuit merged_trotterization(const StepPlan& plan, double t, int order, std::size_t k) {
  if (k == 0) throw ConfigError("Trotterization needs at least one step");
  return merge_adjacent_layers(trotter_circuit(plan, t / static_cast<double>(k), order, k));
}

std::size_t merged_depth(const StepPlan& plan, int order, std::size_t k) {
  return merged_trotterization(plan, 0.1, order, k).depth();
}

TrotterChoice choose_trotter(const StepPlan& plan, std::size_t depth_layers) {
  for (int order : {4, 2, 1}) {
    TrotterChoice best;
    for (std::size_t k = 1;; ++k) {
      const std::size_t d = merged_depth(plan, order, k);
      if (d > depth_layers) break;
      best = {order, k, d, depth_layers - d};
      if (d == 0) break;
    }
    if (best.steps > 0) return best;
  }
  throw ConfigError("depth " + std::to_string(depth_layers) +
                    " is below one first-order Trotter step (" +
                    std::to_string(plan.layers.size()) + " layers)");
}

Circuit ansatz_from_trotter(const TermList& terms, double t, std::size_t depth_layers,
                            TrotterChoice* choice) {
  const StepPlan plan = step_plan(terms);
  const TrotterChoice ch = choose_trotter(plan, depth_layers);
  Circuit c = merged_trotterization(plan, t, ch.order, ch.steps);

  const std::size_t m = plan.layers.size();
  std::size_t next = 0;
  if (!c.layers.empty()) {
    const std::vector<Edge> last = layer_support(c.layers.back());
    for (std::size_t j = 0; j < m; ++j) {
      Layer probe;
      for (const PlanGate& g : plan.layers[j]) probe.push_back(Gate{g.a, g.b});
      if (layer_support(probe) == last) next = (j + 1) % m;
    }
  }
  while (c.depth() < depth_layers) {
    Layer pad;
    for (const PlanGate& g : plan.layers[next]) pad.push_back(Gate{g.a, g.b});
    c.layers.push_back(std::move(pad));
    next = (next + 1) % m;
  }
  if (choice) *choice = ch;
  return c;
}

}  // namespace mpoc
