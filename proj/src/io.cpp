#include "coarse/io.hpp"

#include "coarse/spaces.hpp"

#include <fstream>

namespace coarse::io {

namespace {

std::vector<long long> ids_of(const SpacePtr& space, const std::vector<int>& indices) {
  std::vector<long long> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(space->id(i));
  return out;
}

std::vector<int> indices_of(const SpacePtr& space, const json& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(space->index_of(id.get<long long>()));
  return out;
}

json subspace_to_json(const Subspace& s) { return json(ids_of(s.parent, s.members)); }

Subspace subspace_from_json(const SpacePtr& space, const json& j) {
  return Subspace(space, indices_of(space, j));
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error("parse-error", std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace

json num_to_json(const Num& v) {
  if (v.exact()) return json(num_to_string(v));
  return json(v.value());
}

Num num_from_json(const json& j) {
  if (j.is_string()) return num_from_string(j.get<std::string>());
  if (j.is_number_integer()) return Num(j.get<long long>());
  if (j.is_number_float()) return Num::real(j.get<double>());
  throw Error("parse-error", "expected a number or \"p/q\" string");
}

json space_to_json(const SpacePtr& space) {
  json j;
  j["points"] = json::array();
  for (int i = 0; i < space->size(); ++i) j["points"].push_back(space->id(i));
  j["name"] = space->name();
  json metric;
  const std::string kind = space->metric().kind();
  metric["kind"] = kind;
  if (kind == "table") {
    json distances = json::array();
    for (int a = 0; a < space->size(); ++a)
      for (int b = 0; b < space->size(); ++b) distances.push_back(num_to_json(space->dist(a, b)));
    metric["distances"] = std::move(distances);
  } else if (kind == "l1-grid") {
    const auto& grid = static_cast<const L1GridMetric&>(space->metric());
    metric["dim"] = grid.dim();
    metric["side"] = grid.side();
  } else if (kind == "l2-product") {
    const auto& prod = static_cast<const ProductMetric&>(space->metric());
    metric["left"] = space_to_json(prod.left());
    metric["right"] = space_to_json(prod.right());
  } else {
    throw Error("parse-error", "unsupported metric kind " + kind);
  }
  j["metric"] = std::move(metric);
  return j;
}

SpacePtr space_from_json(const json& j) {
  const json& metric = field(j, "metric");
  const std::string kind = field(metric, "kind").get<std::string>();
  std::vector<long long> points;
  for (const auto& p : field(j, "points")) points.push_back(p.get<long long>());
  std::string name = j.value("name", std::string());
  if (kind == "table") {
    const json& distances = field(metric, "distances");
    std::vector<Num> table;
    table.reserve(distances.size());
    for (const auto& d : distances) table.push_back(num_from_json(d));
    auto backend = std::make_shared<TableMetric>(static_cast<int>(points.size()), std::move(table));
    return std::make_shared<FiniteMetricSpace>(std::move(points), std::move(backend), name);
  }
  if (kind == "l1-grid") {
    int dim = field(metric, "dim").get<int>();
    int side = field(metric, "side").get<int>();
    auto backend = std::make_shared<L1GridMetric>(dim, side);
    return std::make_shared<FiniteMetricSpace>(std::move(points), std::move(backend), name);
  }
  if (kind == "l2-product") {
    SpacePtr left = space_from_json(field(metric, "left"));
    SpacePtr right = space_from_json(field(metric, "right"));
    auto backend = std::make_shared<ProductMetric>(left, right);
    return std::make_shared<FiniteMetricSpace>(std::move(points), std::move(backend), name);
  }
  if (kind == "graph") {
    std::vector<WeightedEdge> edges;
    for (const auto& e : field(metric, "edges")) {
      Num w = num_from_json(e.at(2));
      edges.push_back({e.at(0).get<long long>(), e.at(1).get<long long>(), w.rat()});
    }
    return build_graph_metric(edges);
  }
  throw Error("parse-error", "unknown metric kind " + kind);
}

json witness_to_json(const DecompositionWitness& w) {
  json j;
  j["space"] = space_to_json(w.space());
  j["domain"] = subspace_to_json(w.domain);
  json gaps = json::array();
  for (const Num& g : w.gaps) gaps.push_back(num_to_json(g));
  j["R"] = std::move(gaps);
  json families = json::array();
  for (size_t i = 0; i < w.families.size(); ++i) {
    json fam;
    fam["gap"] = num_to_json(w.gaps[i]);
    json pieces = json::array();
    for (const auto& p : w.families[i].pieces) pieces.push_back(subspace_to_json(p));
    fam["pieces"] = std::move(pieces);
    families.push_back(std::move(fam));
  }
  j["families"] = std::move(families);
  j["depth"] = w.depth;
  j["pieceBound"] = num_to_json(w.piece_bound);
  j["provenance"] = w.provenance;
  return j;
}

DecompositionWitness witness_from_json(const json& j) {
  return witness_from_json(j, space_from_json(field(j, "space")));
}

DecompositionWitness witness_from_json(const json& j, const SpacePtr& space) {
  DecompositionWitness w;
  if (canonical_dump(space_to_json(space)) !=
      canonical_dump(space_to_json(space_from_json(field(j, "space")))))
    throw Error("parse-error", "witness space does not match the provided space");
  w.domain = subspace_from_json(space, field(j, "domain"));
  for (const auto& g : field(j, "R")) w.gaps.push_back(num_from_json(g));
  for (const auto& fam : field(j, "families")) {
    SubspaceFamily f;
    f.declared_gap = num_from_json(field(fam, "gap"));
    for (const auto& p : field(fam, "pieces")) f.pieces.push_back(subspace_from_json(space, p));
    w.families.push_back(std::move(f));
  }
  if (w.gaps.size() != w.families.size())
    throw Error("parse-error", "witness R and families lengths differ");
  w.depth = field(j, "depth").get<int>();
  w.piece_bound = num_from_json(field(j, "pieceBound"));
  if (j.contains("provenance"))
    for (const auto& p : j["provenance"]) w.provenance.push_back(p.get<std::string>());
  return w;
}

json kernel_to_json(const KernelCertificate& c) {
  json j;
  j["space"] = space_to_json(c.kernel.space);
  json rows = json::object();
  for (int x = 0; x < c.kernel.space->size(); ++x) {
    if (c.kernel.rows[x].empty()) continue;
    json row = json::object();
    for (const auto& [y, wgt] : c.kernel.rows[x])
      if (!wgt.is_zero()) row[std::to_string(c.kernel.space->id(y))] = num_to_json(wgt);
    rows[std::to_string(c.kernel.space->id(x))] = std::move(row);
  }
  j["rows"] = std::move(rows);
  j["supportRadius"] = num_to_json(c.kernel.support_radius);
  j["measuredVariation"] = num_to_json(c.measured_variation);
  if (c.paper_bound || c.used_radii_bound) {
    json bounds;
    if (c.paper_bound) bounds["paperE"] = num_to_json(*c.paper_bound);
    if (c.used_radii_bound) bounds["usedRadiiBound"] = num_to_json(*c.used_radii_bound);
    j["bounds"] = std::move(bounds);
  }
  return j;
}

KernelCertificate kernel_from_json(const json& j) {
  KernelCertificate c;
  c.kernel.space = space_from_json(field(j, "space"));
  c.kernel.rows.resize(c.kernel.space->size());
  for (const auto& [xkey, row] : field(j, "rows").items()) {
    int x = c.kernel.space->index_of(std::stoll(xkey));
    for (const auto& [ykey, wgt] : row.items())
      c.kernel.rows[x][c.kernel.space->index_of(std::stoll(ykey))] = num_from_json(wgt);
  }
  c.kernel.support_radius = num_from_json(field(j, "supportRadius"));
  c.measured_variation = num_from_json(field(j, "measuredVariation"));
  if (j.contains("bounds")) {
    const json& bounds = j["bounds"];
    if (bounds.contains("paperE")) c.paper_bound = num_from_json(bounds["paperE"]);
    if (bounds.contains("usedRadiiBound"))
      c.used_radii_bound = num_from_json(bounds["usedRadiiBound"]);
  }
  return c;
}

json chain_to_json(const SfdcChain& c) {
  json j;
  j["space"] = space_to_json(c.space());
  j["domain"] = subspace_to_json(c.domain);
  json stages = json::array();
  for (const auto& stage : c.stages) {
    json s = json::array();
    for (const auto& el : stage) s.push_back(subspace_to_json(el));
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  json gaps = json::array();
  for (const Num& g : c.link_gaps) gaps.push_back(num_to_json(g));
  j["linkGaps"] = std::move(gaps);
  j["finalBound"] = num_to_json(c.final_bound);
  return j;
}

SfdcChain chain_from_json(const json& j) {
  SfdcChain c;
  SpacePtr space = space_from_json(field(j, "space"));
  c.domain = subspace_from_json(space, field(j, "domain"));
  for (const auto& stage : field(j, "stages")) {
    std::vector<Subspace> s;
    for (const auto& el : stage) s.push_back(subspace_from_json(space, el));
    c.stages.push_back(std::move(s));
  }
  for (const auto& g : field(j, "linkGaps")) c.link_gaps.push_back(num_from_json(g));
  c.final_bound = num_from_json(field(j, "finalBound"));
  return c;
}

json map_to_json(const MapCertificate& m) {
  json j;
  j["domainSpace"] = space_to_json(m.map.domain.parent);
  j["domain"] = subspace_to_json(m.map.domain);
  j["codomainSpace"] = space_to_json(m.map.codomain);
  j["image"] = json(ids_of(m.map.codomain, m.map.image));
  json rho1 = json::array();
  for (const auto& [t, v] : m.rho1.breakpoints()) rho1.push_back(json{num_to_json(t), num_to_json(v)});
  j["rho1"] = std::move(rho1);
  json rho2 = json::array();
  for (const auto& [t, v] : m.rho2.breakpoints()) rho2.push_back(json{num_to_json(t), num_to_json(v)});
  j["rho2"] = std::move(rho2);
  return j;
}

MapCertificate map_from_json(const json& j) {
  MapCertificate m;
  SpacePtr domain_space = space_from_json(field(j, "domainSpace"));
  m.map.domain = subspace_from_json(domain_space, field(j, "domain"));
  m.map.codomain = space_from_json(field(j, "codomainSpace"));
  m.map.image = indices_of(m.map.codomain, field(j, "image"));
  auto parse_control = [&](const char* key) {
    std::vector<std::pair<Num, Num>> pts;
    for (const auto& bp : field(j, key))
      pts.emplace_back(num_from_json(bp.at(0)), num_from_json(bp.at(1)));
    return ControlFunction(std::move(pts));
  };
  m.rho1 = parse_control("rho1");
  m.rho2 = parse_control("rho2");
  return m;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse-error", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("parse-error", path + ": " + e.what());
  }
  return j;
}

void save_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("parse-error", "cannot write " + path);
  out << canonical_dump(j);
}

CertificateKind detect_kind(const json& j) {
  if (j.contains("families")) return CertificateKind::Witness;
  if (j.contains("rows")) return CertificateKind::Kernel;
  if (j.contains("stages")) return CertificateKind::Chain;
  if (j.contains("image")) return CertificateKind::Map;
  if (j.contains("metric")) return CertificateKind::Space;
  throw Error("parse-error", "unrecognized certificate");
}

}  // namespace coarse::io
