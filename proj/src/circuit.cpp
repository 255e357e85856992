#include "mpoc/circuit.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mpoc/errors.hpp"

namespace mpoc {

using nlohmann::json;

inline constexpr int kCircuitFormatVersion = 1;

std::size_t Circuit::gate_count() const {
  std::size_t c = 0;
  for (const Layer& l : layers) c += l.size();
  return c;
}

void Circuit::validate() const {
  std::set<Edge> allowed(edges.begin(), edges.end());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    std::vector<bool> used(n, false);
    for (const Gate& g : layers[li]) {
      const std::string where = "layer " + std::to_string(li);
      if (g.a >= n || g.b >= n || g.a == g.b) throw ValidationError(where + ": bad gate qubits");
      if (used[g.a] || used[g.b]) throw ValidationError(where + ": overlapping gates");
      used[g.a] = used[g.b] = true;
      const bool on_topology =
          edges.empty() ? g.hi() == g.lo() + 1 : allowed.count({g.lo(), g.hi()}) > 0;
      if (!on_topology) {
        throw ValidationError(where + ": gate (" + std::to_string(g.a) + "," +
                              std::to_string(g.b) + ") is not on the topology");
      }
      require_unitary(g.u, "circuit gate");
    }
  }
}

bool Circuit::intervals_disjoint() const {
  for (const Layer& l : layers) {
    const std::vector<Edge> s = layer_support(l);
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i].first <= s[i - 1].second) return false;
  }
  return true;
}

std::vector<Edge> layer_support(const Layer& layer) {
  std::vector<Edge> s;
  for (const Gate& g : layer) s.push_back({g.lo(), g.hi()});
  std::sort(s.begin(), s.end());
  return s;
}

Mpo apply_layers(Mpo mpo, const Circuit& circ, std::size_t first, std::size_t last,
                 const Truncation& trunc, TruncationStats* stats, Side side) {
  for (std::size_t li = first; li < last; ++li) {
    for (const Gate& g : circ.layers.at(li)) {
      mpo = apply_gate(std::move(mpo), g.u, g.a, g.b, trunc, stats, side);
    }
  }
  return mpo;
}

Mpo circuit_to_mpo(const Circuit& circ, const Truncation& trunc, TruncationStats* stats) {
  return apply_layers(mpo_identity(circ.n), circ, 0, circ.depth(), trunc, stats);
}

std::string circuit_to_json(const Circuit& circ) {
  json j;
  j["version"] = kCircuitFormatVersion;
  j["n"] = circ.n;
  j["topology"] = circ.topology;
  if (!circ.edges.empty()) {
    json e = json::array();
    for (const auto& [a, b] : circ.edges) e.push_back({a, b});
    j["edges"] = e;
  }
  json layers = json::array();
  for (const Layer& l : circ.layers) {
    json jl = json::array();
    for (const Gate& g : l) {
      json u = json::array();
      for (Eigen::Index r = 0; r < 4; ++r)
        for (Eigen::Index c = 0; c < 4; ++c) u.push_back({g.u(r, c).real(), g.u(r, c).imag()});
      jl.push_back({{"sites", {g.a, g.b}}, {"unitary", u}});
    }
    layers.push_back(jl);
  }
  j["layers"] = layers;
  return j.dump(1);
}

Circuit circuit_from_json(const std::string& text) {
  Circuit c;
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != kCircuitFormatVersion) {
      throw FileError("unsupported circuit format version");
    }
    c.n = j.at("n").get<std::size_t>();
    c.topology = j.at("topology").get<std::string>();
    if (j.contains("edges")) {
      for (const auto& e : j["edges"]) c.edges.push_back({e.at(0), e.at(1)});
    }
    for (const auto& jl : j.at("layers")) {
      Layer l;
      for (const auto& jg : jl) {
        Gate g;
        g.a = jg.at("sites").at(0).get<std::size_t>();
        g.b = jg.at("sites").at(1).get<std::size_t>();
        const auto& u = jg.at("unitary");
        if (u.size() != 16) throw FileError("gate unitary needs 16 entries");
        for (std::size_t k = 0; k < 16; ++k) {
          g.u(k / 4, k % 4) = cplx(u[k].at(0).get<double>(), u[k].at(1).get<double>());
        }
        l.push_back(std::move(g));
      }
      c.layers.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw FileError(std::string("malformed circuit file: ") + e.what());
  }
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw FileError(std::string("invalid circuit file: ") + e.what());
  }
  return c;
}

void save_circuit(const std::string& path, const Circuit& circ) {
  std::ofstream os(path);
  if (!os) throw FileError("cannot open " + path + " for writing");
  os << circuit_to_json(circ) << '\n';
}

Circuit load_circuit(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FileError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return circuit_from_json(os.str());
}

}  // namespace mpoc
