#include "mpoc/hamiltonian.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <yaml-cpp/yaml.h>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

Matrix pauli(char p) {
  Matrix m = Matrix::Zero(2, 2);
  switch (p) {
    case 'I': m(0, 0) = m(1, 1) = 1.0; break;
    case 'X': m(0, 1) = m(1, 0) = 1.0; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw InternalStateError("unknown Pauli label");
  }
  return m;
}

Matrix kron2(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix pauli2(char a, char b) { return kron2(pauli(a), pauli(b)); }

Term two_site(std::size_t a, std::size_t b, Matrix m, std::size_t group,
              Routing routing = Routing::None) {
  return Term{{a, b}, std::move(m), group, routing};
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FileError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

Model parse_model(const std::string& tag) {
  if (tag == "tfim-1d") return Model::Tfim1d;
  if (tag == "hubbard-1d") return Model::Hubbard1d;
  if (tag == "j1j2-1d") return Model::J1J2_1d;
  if (tag == "tfim-graph") return Model::TfimGraph;
  throw ConfigError("unknown model tag '" + tag + "'");
}

std::string model_tag(Model m) {
  switch (m) {
    case Model::Tfim1d: return "tfim-1d";
    case Model::Hubbard1d: return "hubbard-1d";
    case Model::J1J2_1d: return "j1j2-1d";
    case Model::TfimGraph: return "tfim-graph";
  }
  return "?";
}

std::size_t CouplingGraph::max_degree() const {
  std::vector<std::size_t> deg(nodes.size(), 0);
  for (const auto& [u, v] : edges) {
    ++deg.at(u);
    ++deg.at(v);
  }
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

void HamiltonianSpec::validate() const {
  if (n == 0) throw ConfigError("qubit count must be positive");
  if (model == Model::Hubbard1d && n % 2 != 0) {
    throw ConfigError("Hubbard chains need an even qubit count (two per site)");
  }
  if (model == Model::TfimGraph) {
    if (!graph) throw ConfigError("tfim-graph needs a graph file");
    if (graph->size() != n) {
      throw ConfigError("graph has " + std::to_string(graph->size()) + " nodes but n = " +
                        std::to_string(n));
    }
  } else if (n < 2) {
    throw ConfigError("chain models need at least two qubits");
  }
  if (!(t >= 0.0)) throw ConfigError("evolution time must be non-negative");
}

void TermList::validate() const {
  std::vector<std::set<std::size_t>> used(group_names.size());
  for (const Term& term : terms) {
    const std::size_t k = term.support.size();
    if (k != 1 && k != 2) throw ValidationError("terms act on one or two qubits");
    if (term.matrix.rows() != (k == 1 ? 2 : 4) || term.matrix.cols() != term.matrix.rows()) {
      throw ValidationError("term matrix does not match its support");
    }
    if (k == 2 && !(term.support[0] < term.support[1])) {
      throw ValidationError("two-qubit support must be ascending");
    }
    if ((term.matrix - term.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError("term is not Hermitian");
    }
    if (term.group >= group_names.size()) throw ValidationError("term group out of range");
    for (std::size_t q : term.support) {
      if (q >= n) throw ValidationError("term qubit out of range");
      if (!used[term.group].insert(q).second) {
        throw ValidationError("overlapping supports in group " + group_names[term.group]);
      }
    }
  }
}

Matrix fermionic_swap_gate() {
  Matrix f = Matrix::Zero(4, 4);
  f(0, 0) = 1.0;
  f(1, 2) = f(2, 1) = 1.0;
  f(3, 3) = -1.0;
  return f;
}

TermList tfim_chain_terms(std::size_t n, double h) {
  TermList tl;
  tl.model = Model::Tfim1d;
  tl.n = n;
  tl.group_names = {"even", "odd", "field"};
  const Matrix zz = pauli2('Z', 'Z');
  for (std::size_t i = 0; i + 1 < n; ++i) tl.terms.push_back(two_site(i, i + 1, zz, i % 2));
  if (h != 0.0) {
    for (std::size_t i = 0; i < n; ++i) tl.terms.push_back(Term{{i}, h * pauli('X'), 2});
  }
  return tl;
}

TermList j1j2_chain_terms(std::size_t n, double j1, double j2) {
  TermList tl;
  tl.model = Model::J1J2_1d;
  tl.n = n;
  tl.group_names = {"j1-even", "j1-odd", "j2-a", "j2-b"};
  const Matrix heis = pauli2('X', 'X') + pauli2('Y', 'Y') + pauli2('Z', 'Z');
  if (j1 != 0.0) {
    for (std::size_t i = 0; i + 1 < n; ++i) tl.terms.push_back(two_site(i, i + 1, j1 * heis, i % 2));
  }
  if (j2 != 0.0) {
    for (std::size_t i = 0; i + 2 < n; ++i) {
      tl.terms.push_back(two_site(i, i + 2, j2 * heis, 2 + (i % 4) / 2, Routing::Swap));
    }
  }
  return tl;
}

TermList hubbard_staggered_terms(std::size_t n_sites, double u, double t_hop) {
  if (n_sites == 0) throw ConfigError("Hubbard chain needs at least one site");
  TermList tl;
  tl.model = Model::Hubbard1d;
  tl.n = 2 * n_sites;
  tl.group_names = {"interaction", "hop-even", "hop-odd"};
  if (u != 0.0) {
    Matrix nn = Matrix::Zero(4, 4);
    nn(3, 3) = u;
    for (std::size_t i = 0; i < n_sites; ++i) tl.terms.push_back(two_site(2 * i, 2 * i + 1, nn, 0));
  }
  if (t_hop != 0.0) {
    const Matrix hop = -t_hop * 0.5 * (pauli2('X', 'X') + pauli2('Y', 'Y'));
    for (std::size_t i = 0; i + 1 < n_sites; ++i) {
      for (std::size_t spin = 0; spin < 2; ++spin) {
        tl.terms.push_back(two_site(2 * i + spin, 2 * i + 2 + spin, hop, 1 + i % 2,
                                    Routing::FermionicSwap));
      }
    }
  }
  return tl;
}

std::vector<std::size_t> colour_edges(std::size_t n, const std::vector<Edge>& spans) {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [a, b] : spans) {
    if (a >= n || b >= n || a == b) throw ConfigError("bad edge in colouring");
    ++deg[a];
    ++deg[b];
  }
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t e) {
    return std::max(deg[spans[e].first], deg[spans[e].second]) * (n + 1) +
           std::min(deg[spans[e].first], deg[spans[e].second]);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return key(x) > key(y); });

  std::vector<std::size_t> colour(spans.size(), 0);
  std::vector<std::vector<Edge>> classes;
  for (std::size_t e : order) {
    const auto lo = std::min(spans[e].first, spans[e].second);
    const auto hi = std::max(spans[e].first, spans[e].second);
    std::size_t c = 0;
    for (; c < classes.size(); ++c) {
      const bool clash = std::any_of(classes[c].begin(), classes[c].end(), [&](const Edge& iv) {
        return !(hi < iv.first || iv.second < lo);
      });
      if (!clash) break;
    }
    if (c == classes.size()) classes.emplace_back();
    classes[c].push_back({lo, hi});
    colour[e] = c;
  }
  return colour;
}

TermList tfim_graph_terms(std::size_t n, const std::vector<Edge>& spans, double h) {
  TermList tl;
  tl.model = Model::TfimGraph;
  tl.n = n;
  const std::vector<std::size_t> colour = colour_edges(n, spans);
  const std::size_t ncol =
      colour.empty() ? 0 : *std::max_element(colour.begin(), colour.end()) + 1;
  for (std::size_t c = 0; c < ncol; ++c) tl.group_names.push_back("colour-" + std::to_string(c));
  tl.group_names.push_back("field");
  const Matrix zz = pauli2('Z', 'Z');
  for (std::size_t e = 0; e < spans.size(); ++e) {
    const auto lo = std::min(spans[e].first, spans[e].second);
    const auto hi = std::max(spans[e].first, spans[e].second);
    tl.terms.push_back(two_site(lo, hi, zz, colour[e]));
    tl.edges.push_back({lo, hi});
  }
  if (h != 0.0) {
    for (std::size_t i = 0; i < n; ++i) tl.terms.push_back(Term{{i}, h * pauli('X'), ncol});
  }
  return tl;
}

TermList build_terms(const HamiltonianSpec& spec) {
  spec.validate();
  const ModelParams& p = spec.params;
  TermList tl;
  switch (spec.model) {
    case Model::Tfim1d: tl = tfim_chain_terms(spec.n, p.h); break;
    case Model::J1J2_1d: tl = j1j2_chain_terms(spec.n, p.J1, p.J2); break;
    case Model::Hubbard1d: tl = hubbard_staggered_terms(spec.n / 2, p.U, p.t_hop); break;
    case Model::TfimGraph:
      tl = tfim_graph_terms(spec.n, map_graph_to_chain(*spec.graph), p.h);
      break;
  }
  tl.validate();
  return tl;
}

CouplingGraph parse_graph(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("graph file: ") + e.what());
  }
  if (!root["nodes"] || !root["nodes"].IsSequence()) throw ConfigError("graph file needs 'nodes'");
  if (!root["edges"] || !root["edges"].IsSequence()) throw ConfigError("graph file needs 'edges'");
  CouplingGraph g;
  g.name = root["name"] ? root["name"].as<std::string>() : "graph";
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& node : root["nodes"]) {
    const auto label = node.as<std::string>();
    if (!index.emplace(label, g.nodes.size()).second) {
      throw ConfigError("duplicate node '" + label + "'");
    }
    g.nodes.push_back(label);
  }
  std::set<Edge> seen;
  for (const auto& e : root["edges"]) {
    if (!e.IsSequence() || e.size() != 2) throw ConfigError("edges must be [u, v] pairs");
    const auto u = e[0].as<std::string>(), v = e[1].as<std::string>();
    const auto iu = index.find(u), iv = index.find(v);
    if (iu == index.end() || iv == index.end()) {
      throw ConfigError("dangling edge " + u + " - " + v);
    }
    if (iu->second == iv->second) throw ConfigError("self loop on " + u);
    const Edge key{std::min(iu->second, iv->second), std::max(iu->second, iv->second)};
    if (!seen.insert(key).second) throw ConfigError("duplicate edge " + u + " - " + v);
    g.edges.push_back({iu->second, iv->second});
  }
  return g;
}

CouplingGraph load_graph(const std::string& path) { return parse_graph(read_file(path)); }

CouplingGraph heavy_hex_graph(const std::string& path) {
  CouplingGraph g = load_graph(path);
  if (g.max_degree() > 3) throw ConfigError("heavy-hex graphs have degree at most 3");
  return g;
}

std::vector<Edge> map_graph_to_chain(const CouplingGraph& g,
                                     const std::vector<std::size_t>& winding) {
  const std::size_t n = g.size();
  if (winding.size() != n) throw ConfigError("winding must list every node once");
  std::vector<std::size_t> pos(n, n);
  for (std::size_t p = 0; p < n; ++p) {
    if (winding[p] >= n || pos[winding[p]] != n) {
      throw ConfigError("winding is not a permutation of the nodes");
    }
    pos[winding[p]] = p;
  }
  std::vector<Edge> spans;
  spans.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) {
    spans.push_back({std::min(pos[u], pos[v]), std::max(pos[u], pos[v])});
  }
  return spans;
}

std::vector<Edge> map_graph_to_chain(const CouplingGraph& g) {
  std::vector<std::size_t> id(g.size());
  std::iota(id.begin(), id.end(), 0);
  return map_graph_to_chain(g, id);
}

HamiltonianSpec parse_spec(const std::string& yaml_text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config must be a key/value map");
  HamiltonianSpec spec;
  try {
    if (!root["model"]) throw ConfigError("config needs 'model'");
    spec.model = parse_model(root["model"].as<std::string>());
    if (root["graph"]) {
      std::filesystem::path gp = root["graph"].as<std::string>();
      if (gp.is_relative()) gp = std::filesystem::path(base_dir) / gp;
      spec.graph = heavy_hex_graph(gp.string());
    }
    if (root["n"]) {
      spec.n = root["n"].as<std::size_t>();
    } else if (spec.graph) {
      spec.n = spec.graph->size();
    } else {
      throw ConfigError("config needs 'n'");
    }
    if (!root["t"]) throw ConfigError("config needs 't'");
    spec.t = root["t"].as<double>();
    if (const auto p = root["params"]) {
      if (p["h"]) spec.params.h = p["h"].as<double>();
      if (p["U"]) spec.params.U = p["U"].as<double>();
      if (p["t_hop"]) spec.params.t_hop = p["t_hop"].as<double>();
      if (p["J1"]) spec.params.J1 = p["J1"].as<double>();
      if (p["J2"]) spec.params.J2 = p["J2"].as<double>();
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config value: ") + e.what());
  }
  spec.validate();
  return spec;
}

HamiltonianSpec load_spec(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_spec(read_file(path), dir.empty() ? "." : dir);
}

}  // namespace mpoc
