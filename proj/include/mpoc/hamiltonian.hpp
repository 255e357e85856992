#pragma once

// Model Hamiltonians as lists of one- and two-qubit Hermitian terms, and
// coupling graphs wound onto a 1D chain.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpoc/tensor.hpp"

namespace mpoc {

enum class Model { Tfim1d, Hubbard1d, J1J2_1d, TfimGraph };

Model parse_model(const std::string& tag);
std::string model_tag(Model m);

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected graph; `nodes` is listed in winding order and edges refer to
/// node indices.
struct CouplingGraph {
  std::string name;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;

  std::size_t size() const { return nodes.size(); }
  std::size_t max_degree() const;
};

struct ModelParams {
  double h = 1.0;
  double U = 4.0;
  double t_hop = 1.0;
  double J1 = 1.0;
  double J2 = 0.25;
};

struct HamiltonianSpec {
  Model model = Model::Tfim1d;
  std::size_t n = 0;  // qubits; twice the site count for Hubbard
  ModelParams params;
  double t = 0.0;
  std::optional<CouplingGraph> graph;

  void validate() const;
};

/// How a two-qubit term is brought onto neighbouring positions of the chain.
enum class Routing { None, Swap, FermionicSwap };

struct Term {
  std::vector<std::size_t> support;  // one qubit, or two with support[0] < support[1]
  Matrix matrix;                     // 2x2 or 4x4 Hermitian
  std::size_t group = 0;
  Routing routing = Routing::None;
};

struct TermList {
  Model model = Model::Tfim1d;
  std::size_t n = 0;
  std::vector<Term> terms;
  std::vector<std::string> group_names;
  std::vector<Edge> edges;  // chain positions, for graph models only

  /// Checks hermiticity, index ranges and disjointness within groups.
  void validate() const;
};

TermList build_terms(const HamiltonianSpec& spec);

TermList tfim_chain_terms(std::size_t n, double h);
TermList j1j2_chain_terms(std::size_t n, double j1, double j2);
/// Qubit order is (site0 up, site0 down, site1 up, ...).
TermList hubbard_staggered_terms(std::size_t n_sites, double u, double t_hop);
/// Edges are taken from `spans` (chain positions), fields on every position.
TermList tfim_graph_terms(std::size_t n, const std::vector<Edge>& spans, double h);

/// SWAP followed by a sign on |11>.
Matrix fermionic_swap_gate();

/// Greedy largest-degree-first colouring. Edges sharing a colour have
/// disjoint closed intervals [min, max] on the chain.
std::vector<std::size_t> colour_edges(std::size_t n, const std::vector<Edge>& spans);

CouplingGraph load_graph(const std::string& path);
CouplingGraph parse_graph(const std::string& yaml_text);
/// Validated heavy-hex style graph: no self loops, duplicates or dangling
/// endpoints, degree at most 3.
CouplingGraph heavy_hex_graph(const std::string& path);

/// Position of every node under `winding`, then one (min, max) span per edge.
std::vector<Edge> map_graph_to_chain(const CouplingGraph& g,
                                     const std::vector<std::size_t>& winding);
/// Winding equal to the node listing order.
std::vector<Edge> map_graph_to_chain(const CouplingGraph& g);

/// Config file: model, n, t, params {h, U, t_hop, J1, J2}, optional graph
/// path resolved relative to the config file.
HamiltonianSpec load_spec(const std::string& path);
HamiltonianSpec parse_spec(const std::string& yaml_text, const std::string& base_dir = ".");

}  // namespace mpoc
