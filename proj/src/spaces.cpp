#include "coarse/spaces.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace coarse {

namespace {

void check_cap(long long n, const std::string& what) {
  if (n > max_points())
    throw Error("size-limit", what + " would have " + std::to_string(n) + " points (cap " +
                                  std::to_string(max_points()) + ")");
}

SpacePtr make_space(std::vector<long long> ids, std::shared_ptr<const MetricBackend> m,
                    std::string name = "") {
  return std::make_shared<FiniteMetricSpace>(std::move(ids), std::move(m), std::move(name));
}

std::vector<long long> iota_ids(long long n) {
  std::vector<long long> ids(n);
  for (long long i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

}  // namespace

SpacePtr build_grid_box(int dim, int side, GridNorm norm) {
  if (dim < 1 || side < 1) throw Error("size-limit", "grid dimensions must be positive");
  long long total = 1;
  for (int d = 0; d < dim; ++d) {
    total *= side;
    check_cap(total, "grid box");
  }
  if (norm == GridNorm::L1 || dim == 1)
    return make_space(iota_ids(total), std::make_shared<L1GridMetric>(dim, side), "grid");
  SpacePtr acc = build_grid_box(1, side, GridNorm::L1);
  for (int d = 1; d < dim; ++d) acc = build_product(acc, build_grid_box(1, side, GridNorm::L1));
  return acc;
}

SpacePtr build_graph_metric(const std::vector<WeightedEdge>& edges) {
  std::set<long long> node_set;
  for (const auto& e : edges) {
    if (e.weight <= Rat(0)) throw Error("invalid-metric", "edge weights must be positive");
    node_set.insert(e.u);
    node_set.insert(e.v);
  }
  if (node_set.empty()) throw Error("disconnected-graph", "graph has no edges");
  std::vector<long long> ids(node_set.begin(), node_set.end());
  const int n = static_cast<int>(ids.size());
  check_cap(n, "graph");
  if (static_cast<long long>(n) * n > 16LL * 1024 * 1024)
    throw Error("size-limit", "graph too large for a dense distance table");

  std::map<long long, int> index;
  for (int i = 0; i < n; ++i) index[ids[i]] = i;
  std::vector<std::vector<std::pair<int, Rat>>> adj(n);
  for (const auto& e : edges) {
    int u = index[e.u], v = index[e.v];
    if (u == v) continue;
    adj[u].push_back({v, e.weight});
    adj[v].push_back({u, e.weight});
  }

  std::vector<Num> table(static_cast<size_t>(n) * n, Num(0));
  for (int src = 0; src < n; ++src) {
    std::vector<std::optional<Rat>> dist(n);
    std::set<std::pair<Rat, int>> frontier;
    dist[src] = Rat(0);
    frontier.insert({Rat(0), src});
    while (!frontier.empty()) {
      auto [d, u] = *frontier.begin();
      frontier.erase(frontier.begin());
      for (const auto& [v, w] : adj[u]) {
        Rat nd = d + w;
        if (!dist[v] || nd < *dist[v]) {
          if (dist[v]) frontier.erase({*dist[v], v});
          dist[v] = nd;
          frontier.insert({nd, v});
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      if (!dist[j]) throw Error("disconnected-graph", "node " + std::to_string(ids[j]) +
                                                          " unreachable from " + std::to_string(ids[src]));
      table[static_cast<size_t>(src) * n + j] = Num(*dist[j]);
    }
  }
  return make_space(std::move(ids), std::make_shared<TableMetric>(n, std::move(table)), "graph");
}

SpacePtr build_product(const SpacePtr& left, const SpacePtr& right) {
  long long total = static_cast<long long>(left->size()) * right->size();
  check_cap(total, "product space");
  return make_space(iota_ids(total), std::make_shared<ProductMetric>(left, right), "product");
}

CayleyPreset parse_preset(const std::string& text) {
  auto colon = text.find(':');
  std::string head = colon == std::string::npos ? text : text.substr(0, colon);
  int param = colon == std::string::npos ? 0 : std::atoi(text.c_str() + colon + 1);
  CayleyPreset p;
  p.param = param;
  if (head == "free")
    p.kind = CayleyPreset::Kind::Free;
  else if (head == "free-abelian")
    p.kind = CayleyPreset::Kind::FreeAbelian;
  else if (head == "dihedral")
    p.kind = CayleyPreset::Kind::Dihedral;
  else if (head == "lamplighter-truncation")
    p.kind = CayleyPreset::Kind::LamplighterTruncation;
  else
    throw Error("parse-error", "unknown group preset: " + text);
  if (p.param < 1) throw Error("parse-error", "preset parameter must be positive: " + text);
  return p;
}

namespace {

Rat preset_weight(const CayleyPreset& preset, size_t g) {
  if (g < preset.generator_weights.size()) return preset.generator_weights[g];
  return Rat(1);
}

// ---- free groups: reduced words over k generator pairs ---------------------

struct FreeWord {
  std::vector<int> letters;  // +g / -g with g in 1..k
};

Rat free_length(const CayleyPreset& preset, const FreeWord& w) {
  Rat total(0);
  for (int l : w.letters) total += preset_weight(preset, static_cast<size_t>(std::abs(l)) - 1);
  return total;
}

std::string free_label(const FreeWord& w) {
  if (w.letters.empty()) return "e";
  std::string s;
  for (int l : w.letters) {
    char c = static_cast<char>('a' + std::abs(l) - 1);
    s += l > 0 ? c : static_cast<char>(std::toupper(c));
  }
  return s;
}

FreeWord free_mul(const FreeWord& a, const FreeWord& b) {
  FreeWord out = a;
  for (int l : b.letters) {
    if (!out.letters.empty() && out.letters.back() == -l)
      out.letters.pop_back();
    else
      out.letters.push_back(l);
  }
  return out;
}

FreeWord free_inv(const FreeWord& a) {
  FreeWord out;
  for (auto it = a.letters.rbegin(); it != a.letters.rend(); ++it) out.letters.push_back(-*it);
  return out;
}

CayleyBall build_free_ball(const CayleyPreset& preset, const Rat& radius) {
  const int k = preset.param;
  std::vector<FreeWord> elements;
  std::map<std::string, int> index;
  std::queue<FreeWord> queue;
  queue.push(FreeWord{});
  elements.push_back(FreeWord{});
  index["e"] = 0;
  while (!queue.empty()) {
    FreeWord w = queue.front();
    queue.pop();
    for (int g = 1; g <= k; ++g)
      for (int sign : {1, -1}) {
        int letter = sign * g;
        if (!w.letters.empty() && w.letters.back() == -letter) continue;
        FreeWord next = w;
        next.letters.push_back(letter);
        if (free_length(preset, next) > radius) continue;
        check_cap(static_cast<long long>(elements.size()) + 1, "free group ball");
        index[free_label(next)] = static_cast<int>(elements.size());
        elements.push_back(next);
        queue.push(next);
      }
  }
  const int n = static_cast<int>(elements.size());
  std::vector<Num> table(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      table[static_cast<size_t>(i) * n + j] =
          Num(free_length(preset, free_mul(free_inv(elements[i]), elements[j])));
  CayleyBall ball;
  ball.space = make_space(iota_ids(n), std::make_shared<TableMetric>(n, std::move(table)),
                          "cayley-free");
  for (const auto& e : elements) ball.labels.push_back(free_label(e));
  auto idx = std::make_shared<std::map<std::string, int>>(std::move(index));
  auto elems = std::make_shared<std::vector<FreeWord>>(std::move(elements));
  ball.multiply = [idx, elems](int i, int j) -> std::optional<int> {
    auto it = idx->find(free_label(free_mul((*elems)[i], (*elems)[j])));
    if (it == idx->end()) return std::nullopt;
    return it->second;
  };
  ball.word_length = [elems, preset](int i) { return Num(free_length(preset, (*elems)[i])); };
  return ball;
}

// ---- free abelian: integer vectors under a weighted l1 metric --------------

CayleyBall build_abelian_ball(const CayleyPreset& preset, const Rat& radius) {
  const int n_dims = preset.param;
  std::vector<std::vector<long long>> elements;
  std::vector<long long> current(n_dims, 0);
  std::function<void(int, Rat)> enumerate = [&](int d, Rat budget) {
    if (d == n_dims) {
      check_cap(static_cast<long long>(elements.size()) + 1, "free-abelian ball");
      elements.push_back(current);
      return;
    }
    Rat w = preset_weight(preset, d);
    long long bound = static_cast<long long>(boost::rational_cast<BigInt>(budget / w));
    for (long long v = -bound; v <= bound; ++v) {
      current[d] = v;
      Rat used = w * Rat(v < 0 ? -v : v);
      enumerate(d + 1, budget - used);
    }
    current[d] = 0;
  };
  enumerate(0, radius);
  std::sort(elements.begin(), elements.end());
  const int n = static_cast<int>(elements.size());
  auto wdist = [&](const std::vector<long long>& a, const std::vector<long long>& b) {
    Rat total(0);
    for (int d = 0; d < n_dims; ++d) {
      long long delta = a[d] > b[d] ? a[d] - b[d] : b[d] - a[d];
      total += preset_weight(preset, d) * Rat(delta);
    }
    return total;
  };
  std::vector<Num> table(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      table[static_cast<size_t>(i) * n + j] = Num(wdist(elements[i], elements[j]));
  CayleyBall ball;
  ball.space = make_space(iota_ids(n), std::make_shared<TableMetric>(n, std::move(table)),
                          "cayley-free-abelian");
  std::map<std::vector<long long>, int> index;
  for (int i = 0; i < n; ++i) {
    index[elements[i]] = i;
    std::ostringstream os;
    os << "(";
    for (int d = 0; d < n_dims; ++d) os << (d ? "," : "") << elements[i][d];
    os << ")";
    ball.labels.push_back(os.str());
  }
  auto idx = std::make_shared<std::map<std::vector<long long>, int>>(std::move(index));
  auto elems = std::make_shared<std::vector<std::vector<long long>>>(std::move(elements));
  ball.multiply = [idx, elems, n_dims](int i, int j) -> std::optional<int> {
    std::vector<long long> sum(n_dims);
    for (int d = 0; d < n_dims; ++d) sum[d] = (*elems)[i][d] + (*elems)[j][d];
    auto it = idx->find(sum);
    if (it == idx->end()) return std::nullopt;
    return it->second;
  };
  ball.word_length = [elems, preset, n_dims](int i) {
    Rat total(0);
    for (int d = 0; d < n_dims; ++d) {
      long long v = (*elems)[i][d];
      total += preset_weight(preset, d) * Rat(v < 0 ? -v : v);
    }
    return Num(total);
  };
  return ball;
}

// ---- dihedral: elements t^r s^f, generators {t, t^-1, s} -------------------

CayleyBall build_dihedral_ball(const CayleyPreset& preset, const Rat& radius) {
  const int n_rot = preset.param;
  const int order = 2 * n_rot;
  check_cap(order, "dihedral group");
  Rat wt = preset_weight(preset, 0);
  Rat ws = preset_weight(preset, 1);
  auto encode = [n_rot](int r, int f) { return f * n_rot + ((r % n_rot) + n_rot) % n_rot; };
  auto mul = [n_rot, encode](int a, int b) {
    int r1 = a % n_rot, f1 = a / n_rot, r2 = b % n_rot, f2 = b / n_rot;
    return encode(f1 == 0 ? r1 + r2 : r1 - r2, f1 ^ f2);
  };
  auto inv = [n_rot, encode](int a) {
    int r = a % n_rot, f = a / n_rot;
    return f == 0 ? encode(-r, 0) : a;
  };
  // Word length from the identity over the full group.
  std::vector<std::optional<Rat>> len(order);
  std::set<std::pair<Rat, int>> frontier;
  len[encode(0, 0)] = Rat(0);
  frontier.insert({Rat(0), encode(0, 0)});
  while (!frontier.empty()) {
    auto [d, g] = *frontier.begin();
    frontier.erase(frontier.begin());
    std::vector<std::pair<int, Rat>> steps = {
        {mul(g, encode(1, 0)), wt}, {mul(g, encode(-1, 0)), wt}, {mul(g, encode(0, 1)), ws}};
    for (auto& [h, w] : steps) {
      Rat nd = d + w;
      if (!len[h] || nd < *len[h]) {
        if (len[h]) frontier.erase({*len[h], h});
        len[h] = nd;
        frontier.insert({nd, h});
      }
    }
  }
  std::vector<int> members;
  for (int g = 0; g < order; ++g)
    if (*len[g] <= radius) members.push_back(g);
  const int n = static_cast<int>(members.size());
  std::map<int, int> index;
  for (int i = 0; i < n; ++i) index[members[i]] = i;
  std::vector<Num> table(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      table[static_cast<size_t>(i) * n + j] = Num(*len[mul(inv(members[i]), members[j])]);
  CayleyBall ball;
  ball.space = make_space(iota_ids(n), std::make_shared<TableMetric>(n, std::move(table)),
                          "cayley-dihedral");
  for (int g : members) {
    std::ostringstream os;
    os << "t^" << g % n_rot << (g / n_rot ? " s" : "");
    ball.labels.push_back(os.str());
  }
  auto idx = std::make_shared<std::map<int, int>>(std::move(index));
  auto mems = std::make_shared<std::vector<int>>(std::move(members));
  ball.multiply = [idx, mems, mul](int i, int j) -> std::optional<int> {
    auto it = idx->find(mul((*mems)[i], (*mems)[j]));
    if (it == idx->end()) return std::nullopt;
    return it->second;
  };
  auto len_copy = std::make_shared<std::vector<std::optional<Rat>>>(std::move(len));
  ball.word_length = [len_copy, mems](int i) { return Num(*(*len_copy)[(*mems)[i]]); };
  return ball;
}

// ---- lamplighter truncation over Z_2 wr Z ----------------------------------
//
// Elements (lamp configuration on [-depth, depth], position in [-depth, depth]).
// Generators: the move t (weight 1) and the toggles a_j at offset j from the
// current position for |j| <= depth, weight 1+|j| (a proper weight function
// on the truncated generating set).

struct LampState {
  long long lamps;  // bitmask over window positions
  int pos;
};

CayleyBall build_lamplighter_ball(const CayleyPreset& preset, const Rat& radius) {
  const int depth = preset.param;
  const int pad = 2 * depth + 2;  // word-length states live in [-pad, pad]
  const int width = 2 * pad + 1;
  if (depth > 3) throw Error("size-limit", "lamplighter truncation depth capped at 3");
  const long long state_count = (1LL << width) * width;
  auto state_id = [width, pad](long long lamps, int pos) {
    return lamps * width + (pos + pad);
  };
  // Dijkstra from the identity over absolute states; lamp bit b corresponds
  // to lattice position b - pad.
  std::vector<Rat> len(static_cast<size_t>(state_count), Rat(-1));
  std::set<std::pair<Rat, long long>> frontier;
  long long start = state_id(0, 0);
  len[start] = Rat(0);
  frontier.insert({Rat(0), start});
  while (!frontier.empty()) {
    auto [d, s] = *frontier.begin();
    frontier.erase(frontier.begin());
    long long lamps = s / width;
    int pos = static_cast<int>(s % width) - pad;
    std::vector<std::pair<long long, Rat>> steps;
    if (pos + 1 <= pad) steps.push_back({state_id(lamps, pos + 1), Rat(1)});
    if (pos - 1 >= -pad) steps.push_back({state_id(lamps, pos - 1), Rat(1)});
    for (int j = -depth; j <= depth; ++j) {
      int at = pos + j;
      if (at < -pad || at > pad) continue;
      steps.push_back({state_id(lamps ^ (1LL << (at + pad)), pos), Rat(1 + std::abs(j))});
    }
    for (auto& [t, w] : steps) {
      Rat nd = d + w;
      if (len[t] < Rat(0) || nd < len[t]) {
        if (len[t] >= Rat(0)) frontier.erase({len[t], t});
        len[t] = nd;
        frontier.insert({nd, t});
      }
    }
  }
  auto word_len = [&](long long lamps, int pos) -> Rat {
    Rat v = len[state_id(lamps, pos)];
    if (v < Rat(0)) throw Error("invalid-metric", "lamplighter state unreachable");
    return v;
  };
  // Enumerate ball members: lamps within [-depth, depth], position likewise.
  std::vector<LampState> members;
  const int window = 2 * depth + 1;
  for (long long lamps = 0; lamps < (1LL << window); ++lamps) {
    long long abs_lamps = lamps << (pad - depth);  // shift window into padded frame
    for (int pos = -depth; pos <= depth; ++pos) {
      if (word_len(abs_lamps, pos) <= radius) members.push_back({abs_lamps, pos});
      check_cap(static_cast<long long>(members.size()), "lamplighter ball");
    }
  }
  const int n = static_cast<int>(members.size());
  // d(g, h) = |g^{-1} h|: lamp difference shifted by -pos(g), position difference.
  auto diff_len = [&](const LampState& g, const LampState& h) {
    long long delta = g.lamps ^ h.lamps;
    int shift = -g.pos;
    long long shifted = shift >= 0 ? (delta << shift) : (delta >> -shift);
    return word_len(shifted, h.pos - g.pos);
  };
  std::vector<Num> table(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      table[static_cast<size_t>(i) * n + j] = Num(diff_len(members[i], members[j]));
  CayleyBall ball;
  ball.space = make_space(iota_ids(n), std::make_shared<TableMetric>(n, std::move(table)),
                          "cayley-lamplighter");
  std::map<std::pair<long long, int>, int> index;
  for (int i = 0; i < n; ++i) {
    index[{members[i].lamps, members[i].pos}] = i;
    std::ostringstream os;
    for (int b = -depth; b <= depth; ++b)
      os << ((members[i].lamps >> (b + pad)) & 1 ? '1' : '0');
    os << "@" << members[i].pos;
    ball.labels.push_back(os.str());
  }
  auto idx = std::make_shared<std::map<std::pair<long long, int>, int>>(std::move(index));
  auto mems = std::make_shared<std::vector<LampState>>(std::move(members));
  ball.multiply = [idx, mems](int i, int j) -> std::optional<int> {
    const LampState& a = (*mems)[i];
    const LampState& b = (*mems)[j];
    long long shifted = a.pos >= 0 ? (b.lamps << a.pos) : (b.lamps >> -a.pos);
    LampState prod{a.lamps ^ shifted, a.pos + b.pos};
    auto it = idx->find({prod.lamps, prod.pos});
    if (it == idx->end()) return std::nullopt;
    return it->second;
  };
  auto lens = std::make_shared<std::vector<Rat>>(std::move(len));
  ball.word_length = [lens, mems, state_id](int i) {
    return Num((*lens)[state_id((*mems)[i].lamps, (*mems)[i].pos)]);
  };
  return ball;
}

}  // namespace

CayleyBall build_cayley_ball(const CayleyPreset& preset, const Rat& radius) {
  switch (preset.kind) {
    case CayleyPreset::Kind::Free:
      return build_free_ball(preset, radius);
    case CayleyPreset::Kind::FreeAbelian:
      return build_abelian_ball(preset, radius);
    case CayleyPreset::Kind::Dihedral:
      return build_dihedral_ball(preset, radius);
    case CayleyPreset::Kind::LamplighterTruncation:
      return build_lamplighter_ball(preset, radius);
  }
  throw Error("parse-error", "unknown preset kind");
}

SpacePtr build_named_space(const std::string& desc) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= desc.size()) {
    size_t colon = desc.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(desc.substr(start));
      break;
    }
    parts.push_back(desc.substr(start, colon - start));
    start = colon + 1;
  }
  auto arg = [&](size_t i) -> long long {
    if (i >= parts.size() || parts[i].empty())
      throw Error("parse-error", "space descriptor " + desc + " is missing arguments");
    return std::atoll(parts[i].c_str());
  };
  auto rename = [&](const SpacePtr& s) {
    std::vector<long long> ids;
    for (int i = 0; i < s->size(); ++i) ids.push_back(s->id(i));
    return std::make_shared<const FiniteMetricSpace>(std::move(ids), s->metric_ptr(), desc);
  };
  const std::string& head = parts[0];
  if (head == "path") return rename(build_grid_box(1, static_cast<int>(arg(1)), GridNorm::L1));
  if (head == "grid")
    return rename(build_grid_box(static_cast<int>(arg(1)), static_cast<int>(arg(2)), GridNorm::L1));
  if (head == "grid-l2")
    return rename(build_grid_box(static_cast<int>(arg(1)), static_cast<int>(arg(2)), GridNorm::L2));
  if (head == "cycle") {
    long long n = arg(1);
    if (n < 3) throw Error("parse-error", "cycle needs at least 3 points");
    std::vector<WeightedEdge> edges;
    for (long long i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, Rat(1)});
    return rename(build_graph_metric(edges));
  }
  if (head == "tree") {
    long long depth = arg(1);
    long long nodes = (1LL << (depth + 1)) - 1;
    std::vector<WeightedEdge> edges;
    for (long long i = 0; 2 * i + 2 < nodes; ++i) {
      edges.push_back({i, 2 * i + 1, Rat(1)});
      edges.push_back({i, 2 * i + 2, Rat(1)});
    }
    return rename(build_graph_metric(edges));
  }
  if (head == "free" || head == "free-abelian" || head == "dihedral" || head == "lamplighter") {
    CayleyPreset preset =
        parse_preset((head == "lamplighter" ? "lamplighter-truncation" : head) + ":" + parts[1]);
    return rename(build_cayley_ball(preset, Rat(arg(2))).space);
  }
  throw Error("parse-error", "unknown space descriptor " + desc);
}

std::optional<GridShape> grid_shape(const SpacePtr& space) {
  const MetricBackend* m = &space->metric();
  if (auto* g = dynamic_cast<const L1GridMetric*>(m)) {
    GridShape shape;
    shape.norm = GridNorm::L1;
    shape.sides.assign(g->dim(), g->side());
    return shape;
  }
  if (auto* p = dynamic_cast<const ProductMetric*>(m)) {
    auto left = grid_shape(p->left());
    auto right = grid_shape(p->right());
    if (!left || !right) return std::nullopt;
    GridShape shape;
    shape.norm = GridNorm::L2;
    shape.sides = left->sides;
    shape.sides.insert(shape.sides.end(), right->sides.begin(), right->sides.end());
    return shape;
  }
  return std::nullopt;
}

}  // namespace coarse
