#include "coarse/decomp.hpp"

#include "coarse/spaces.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace coarse {

namespace {

std::string id_of(const SpacePtr& space, int idx) { return std::to_string(space->id(idx)); }

Num max_piece_diameter(const std::vector<SubspaceFamily>& families) {
  Num bound(0);
  for (const auto& f : families)
    for (const auto& p : f.pieces) bound = num_max(bound, diameter(p));
  return bound;
}

bool same_members(const Subspace& a, const Subspace& b) {
  return a.parent == b.parent && a.members == b.members;
}

void require_positive(const DecompositionRequest& req) {
  if (req.R.empty()) throw Error("sequence-exhausted", "request sequence is empty");
  for (const auto& r : req.R)
    if (!gt_strict(r, Num(0))) throw Error("invalid-witness", "request entries must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// Verification

Verdict verify_witness(const DecompositionWitness& w, const DecompositionRequest& req) {
  Verdict v;
  if (w.families.size() != w.gaps.size()) {
    v.fail("witness has " + std::to_string(w.families.size()) + " families but " +
           std::to_string(w.gaps.size()) + " gaps");
    return v;
  }
  if (w.families.size() > req.R.size()) {
    v.fail("witness has more families (" + std::to_string(w.families.size()) +
           ") than the request has entries (" + std::to_string(req.R.size()) + ")");
    return v;
  }
  const SpacePtr& space = w.space();
  std::vector<char> covered(space->size(), 0);
  for (size_t fi = 0; fi < w.families.size(); ++fi) {
    const SubspaceFamily& fam = w.families[fi];
    const Num& r = req.R[fi];
    for (const auto& piece : fam.pieces) {
      if (piece.parent != space) {
        v.fail("family " + std::to_string(fi + 1) + " has a piece over a foreign space");
        continue;
      }
      for (int x : piece.members) {
        if (!w.domain.contains(x))
          v.fail("family " + std::to_string(fi + 1) + " piece leaves the domain at id " +
                 id_of(space, x));
        covered[x] = 1;
      }
      Num d = diameter(piece);
      if (!le_approx(d, w.piece_bound))
        v.fail("family " + std::to_string(fi + 1) + " piece with min id " +
               id_of(space, piece.members.front()) + " has diameter " + num_to_string(d) +
               " > pieceBound " + num_to_string(w.piece_bound));
    }
    for (size_t p = 0; p < fam.pieces.size(); ++p)
      for (size_t q = p + 1; q < fam.pieces.size(); ++q) {
        if (members_intersect(fam.pieces[p].members, fam.pieces[q].members)) {
          v.fail("family " + std::to_string(fi + 1) + " pieces " + std::to_string(p) + "," +
                 std::to_string(q) + " overlap");
          continue;
        }
        for (int x : fam.pieces[p].members)
          for (int y : fam.pieces[q].members)
            if (!gt_strict(space->dist(x, y), r))
              v.fail("family " + std::to_string(fi + 1) + " not " + num_to_string(r) +
                     "-disjoint: d(" + id_of(space, x) + "," + id_of(space, y) + ") = " +
                     num_to_string(space->dist(x, y)));
      }
  }
  for (int x : w.domain.members)
    if (!covered[x]) v.fail("uncovered point id " + id_of(space, x));
  return v;
}

Verdict verify_witness(const DecompositionWitness& w) {
  DecompositionRequest req;
  req.R = w.gaps;
  return verify_witness(w, req);
}

// ---------------------------------------------------------------------------
// Rearrangement

RearrangedArray::RearrangedArray(std::vector<Num> r) : r_(std::move(r)) {
  if (r_.empty()) throw Error("sequence-exhausted", "cannot rearrange an empty sequence");
}

long long RearrangedArray::cell_index(int i, int j) const {
  if (i < 1 || j < 1) throw Error("sequence-exhausted", "rearrangement cells are 1-based");
  long long n = i + j - 2;
  long long idx = n * (n + 1) / 2 + i;
  if (idx > static_cast<long long>(r_.size()))
    throw Error("sequence-exhausted", "rearrangement cell (" + std::to_string(i) + "," +
                                          std::to_string(j) + ") needs entry " +
                                          std::to_string(idx) + " of a length-" +
                                          std::to_string(r_.size()) + " prefix");
  return idx;
}

const Num& RearrangedArray::cell(int i, int j) const { return r_[cell_index(i, j) - 1]; }

std::vector<Num> RearrangedArray::column(int j, int length) const {
  std::vector<Num> col;
  col.reserve(length);
  for (int i = 1; i <= length; ++i) col.push_back(cell(i, j));
  return col;
}

// ---------------------------------------------------------------------------
// Search

namespace {

std::vector<int> grid_strides(const GridShape& shape) {
  std::vector<int> strides(shape.sides.size());
  int acc = 1;
  for (int a = static_cast<int>(shape.sides.size()) - 1; a >= 0; --a) {
    strides[a] = acc;
    acc *= shape.sides[a];
  }
  return strides;
}

DecompositionWitness search_shifted_brick(const Subspace& x, const DecompositionRequest& req) {
  auto shape = grid_shape(x.parent);
  if (!shape)
    throw Error("not-found", "shifted-brick requires an l1 grid or a product of grid lines");
  const int n = static_cast<int>(shape->sides.size());
  const int k = n + 1;
  std::vector<Num> gaps;
  if (req.R.size() == 1) {
    gaps.assign(k, req.R[0]);  // single-scale request, replicated
  } else if (static_cast<int>(req.R.size()) < k) {
    throw Error("sequence-exhausted", "shifted-brick on a " + std::to_string(n) +
                                          "-dim grid needs " + std::to_string(k) + " entries");
  } else {
    gaps.assign(req.R.begin(), req.R.begin() + k);
  }
  Num r = gaps[0];
  for (const Num& g : gaps) r = num_max(r, g);
  const long long g = std::max(1LL, ceil_int(r));
  const long long period = static_cast<long long>(k) * g;
  const long long box = static_cast<long long>(n) * g;  // points per axis per brick

  std::vector<int> strides = grid_strides(*shape);
  DecompositionWitness w;
  w.domain = x;
  w.gaps = gaps;
  w.depth = 1;
  std::ostringstream prov;
  prov << "shifted-brick g=" << g << " dims=" << n;
  w.provenance.push_back(prov.str());

  for (int j = 0; j < k; ++j) {
    // Family j covers points whose every coordinate lies in the residue
    // window [j*g, j*g + n*g - 1] mod period; bricks are the products of
    // the per-axis window instances, clipped to the box.
    std::map<std::vector<long long>, std::vector<int>> bricks;
    for (int idx : x.members) {
      std::vector<long long> key(n);
      bool inside = true;
      for (int a = 0; a < n && inside; ++a) {
        long long c = (idx / strides[a]) % shape->sides[a];
        long long offset = ((c - static_cast<long long>(j) * g) % period + period) % period;
        if (offset >= box) {
          inside = false;
        } else {
          key[a] = (c - offset + period) / period;  // brick instance along axis a
        }
      }
      if (inside) bricks[key].push_back(idx);
    }
    SubspaceFamily fam;
    fam.declared_gap = gaps[j];
    for (auto& [key, members] : bricks) fam.pieces.emplace_back(x.parent, std::move(members));
    canonicalize_family(fam);
    w.families.push_back(std::move(fam));
  }
  w.piece_bound = max_piece_diameter(w.families);
  return w;
}

struct GreedyResult {
  std::vector<SubspaceFamily> families;
  bool covered;
};

GreedyResult greedy_try(const Subspace& x, const std::vector<Num>& gaps, const Num& bound) {
  const SpacePtr& space = x.parent;
  std::vector<char> covered_flag(space->size(), 0);
  int remaining = x.size();
  GreedyResult out;
  for (const Num& r : gaps) {
    SubspaceFamily fam;
    fam.declared_gap = r;
    std::vector<char> blocked(space->size(), 0);
    while (remaining > 0) {
      int seed = -1;
      for (int idx : x.members)
        if (!covered_flag[idx] && !blocked[idx]) {
          seed = idx;
          break;
        }
      if (seed < 0) break;
      std::vector<int> piece{seed};
      for (int idx : x.members) {
        if (idx == seed || covered_flag[idx] || blocked[idx]) continue;
        bool fits = true;
        for (int y : piece)
          if (!le_approx(space->dist(idx, y), bound)) {
            fits = false;
            break;
          }
        if (fits) piece.push_back(idx);
      }
      for (int idx : piece) {
        covered_flag[idx] = 1;
        --remaining;
      }
      for (int idx : x.members)
        if (!covered_flag[idx] && !blocked[idx] && !gt_strict(dist_to_subspace(space, idx, Subspace(space, piece)), r))
          blocked[idx] = 1;
      fam.pieces.emplace_back(space, std::move(piece));
    }
    canonicalize_family(fam);
    out.families.push_back(std::move(fam));
    if (remaining == 0) break;
  }
  while (out.families.size() < gaps.size()) {
    SubspaceFamily empty;
    empty.declared_gap = gaps[out.families.size()];
    out.families.push_back(std::move(empty));
  }
  out.covered = remaining == 0;
  return out;
}

DecompositionWitness search_greedy(const Subspace& x, const DecompositionRequest& req) {
  std::vector<Num> gaps = req.R;
  DecompositionWitness w;
  w.domain = x;
  w.gaps = gaps;
  w.depth = 1;
  if (req.target_bound) {
    GreedyResult res = greedy_try(x, gaps, *req.target_bound);
    if (!res.covered)
      throw Error("not-found", "greedy search failed at pieceBound " +
                                   num_to_string(*req.target_bound));
    w.families = std::move(res.families);
  } else {
    // Doubling scan over the piece bound, from the minimum positive
    // distance up to the diameter.
    Num lo(0);
    for (size_t a = 0; a < x.members.size(); ++a)
      for (size_t b = a + 1; b < x.members.size(); ++b) {
        Num d = x.parent->dist(x.members[a], x.members[b]);
        if (lo.is_zero() || d < lo) lo = d;
      }
    Num diam = x.size() > 1 ? diameter(x) : Num(0);
    Num bound = lo;
    bool done = false;
    while (true) {
      GreedyResult res = greedy_try(x, gaps, bound);
      if (res.covered) {
        w.families = std::move(res.families);
        done = true;
        break;
      }
      if (!lt_strict(bound, diam)) break;
      bound = num_min(bound + bound, diam);
    }
    if (!done) {
      // Last resort: everything in one piece per family 1.
      GreedyResult res = greedy_try(x, gaps, diam);
      if (!res.covered) throw Error("not-found", "greedy search exhausted its bound schedule");
      w.families = std::move(res.families);
    }
  }
  w.piece_bound = max_piece_diameter(w.families);
  w.provenance.push_back("greedy");
  return w;
}

struct ExhaustiveState {
  const Subspace& x;
  const std::vector<Num>& gaps;
  Num bound;
  std::vector<int> assignment;  // family per member position, -1 unassigned
  long long nodes = 0;
  static constexpr long long kBudget = 4'000'000;
};

bool exhaustive_assign(ExhaustiveState& st, size_t pos) {
  if (++st.nodes > ExhaustiveState::kBudget) return false;
  if (pos == st.x.members.size()) return true;
  const SpacePtr& space = st.x.parent;
  int xi = st.x.members[pos];
  for (size_t f = 0; f < st.gaps.size(); ++f) {
    // The piece containing xi in family f is the <=R_f linkage component;
    // merging it must stay within the diameter bound.
    std::vector<int> merged{xi};
    std::vector<char> in_merged(st.x.members.size(), 0);
    bool grew = true;
    while (grew) {
      grew = false;
      for (size_t q = 0; q < pos; ++q) {
        if (in_merged[q] || st.assignment[q] != static_cast<int>(f)) continue;
        int yq = st.x.members[q];
        for (int m : merged)
          if (!gt_strict(space->dist(yq, m), st.gaps[f])) {
            merged.push_back(yq);
            in_merged[q] = 1;
            grew = true;
            break;
          }
      }
    }
    bool ok = true;
    for (size_t a = 0; a < merged.size() && ok; ++a)
      for (size_t b = a + 1; b < merged.size() && ok; ++b)
        if (!le_approx(space->dist(merged[a], merged[b]), st.bound)) ok = false;
    if (!ok) continue;
    st.assignment[pos] = static_cast<int>(f);
    if (exhaustive_assign(st, pos + 1)) return true;
    st.assignment[pos] = -1;
    if (st.nodes > ExhaustiveState::kBudget) return false;
  }
  return false;
}

DecompositionWitness search_exhaustive(const Subspace& x, const DecompositionRequest& req) {
  if (x.size() > 24) throw Error("not-found", "exhaustive search is capped at 24 points");
  std::vector<Num> candidates{Num(0)};
  for (size_t a = 0; a < x.members.size(); ++a)
    for (size_t b = a + 1; b < x.members.size(); ++b)
      candidates.push_back(x.parent->dist(x.members[a], x.members[b]));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (req.target_bound)
    candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                    [&](const Num& c) { return c > *req.target_bound; }),
                     candidates.end());
  for (const Num& bound : candidates) {
    ExhaustiveState st{x, req.R, bound, std::vector<int>(x.members.size(), -1)};
    if (exhaustive_assign(st, 0)) {
      DecompositionWitness w;
      w.domain = x;
      w.gaps = req.R;
      w.depth = 1;
      for (size_t f = 0; f < req.R.size(); ++f) {
        SubspaceFamily fam;
        fam.declared_gap = req.R[f];
        // Pieces are the linkage components of the family's points.
        std::vector<char> used(x.members.size(), 0);
        for (size_t p = 0; p < x.members.size(); ++p) {
          if (used[p] || st.assignment[p] != static_cast<int>(f)) continue;
          std::vector<int> piece{x.members[p]};
          used[p] = 1;
          bool grew = true;
          while (grew) {
            grew = false;
            for (size_t q = 0; q < x.members.size(); ++q) {
              if (used[q] || st.assignment[q] != static_cast<int>(f)) continue;
              for (int m : piece)
                if (!gt_strict(x.parent->dist(x.members[q], m), req.R[f])) {
                  piece.push_back(x.members[q]);
                  used[q] = 1;
                  grew = true;
                  break;
                }
            }
          }
          fam.pieces.emplace_back(x.parent, std::move(piece));
        }
        canonicalize_family(fam);
        w.families.push_back(std::move(fam));
      }
      w.piece_bound = max_piece_diameter(w.families);
      w.provenance.push_back("exhaustive bound=" + num_to_string(bound));
      return w;
    }
  }
  throw Error("not-found", "exhaustive search found no witness within budget");
}

}  // namespace

DecompositionWitness search_decomposition(const Subspace& x, const DecompositionRequest& req,
                                          SearchStrategy strategy) {
  require_positive(req);
  switch (strategy) {
    case SearchStrategy::ShiftedBrick:
      return search_shifted_brick(x, req);
    case SearchStrategy::Greedy:
      return search_greedy(x, req);
    case SearchStrategy::Exhaustive:
      return search_exhaustive(x, req);
  }
  throw Error("not-found", "unknown strategy");
}

// ---------------------------------------------------------------------------
// Composition

namespace {

struct SortedColumn {
  std::vector<Num> values;   // ascending
  std::vector<int> rows;     // original 1-based row of each sorted value
};

SortedColumn sorted_column(const RearrangedArray& arr, int j, int length) {
  std::vector<Num> col = arr.column(j, length);
  std::vector<int> order(length);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return col[a] < col[b]; });
  SortedColumn out;
  for (int o : order) {
    out.values.push_back(col[o]);
    out.rows.push_back(o + 1);
  }
  return out;
}

}  // namespace

DecompositionWitness compose(const DecompositionWitness& outer,
                             const std::vector<std::vector<DecompositionWitness>>& inner,
                             const DecompositionRequest& req) {
  require_positive(req);
  const int k = static_cast<int>(outer.families.size());
  if (static_cast<int>(inner.size()) != k)
    throw Error("supplier-failure", "need one inner witness list per outer family");
  RearrangedArray arr(req.R);

  DecompositionWitness out;
  out.domain = outer.domain;
  int max_inner_depth = 0;
  long long max_index = 0;
  // out families keyed by original sequence index.
  std::map<long long, SubspaceFamily> slots;

  for (int j = 1; j <= k; ++j) {
    const SubspaceFamily& outer_fam = outer.families[j - 1];
    const auto& inners = inner[j - 1];
    if (inners.size() != outer_fam.pieces.size())
      throw Error("supplier-failure", "outer family " + std::to_string(j) + " has " +
                                          std::to_string(outer_fam.pieces.size()) +
                                          " pieces but " + std::to_string(inners.size()) +
                                          " inner witnesses");
    int kj = 0;
    for (const auto& wi : inners) kj = std::max(kj, static_cast<int>(wi.families.size()));
    if (kj == 0) continue;
    SortedColumn col = sorted_column(arr, j, kj);
    const Num& pj = col.values.back();
    if (!check_r_disjoint(outer_fam, pj))
      throw Error("invalid-witness", "outer family " + std::to_string(j) + " is not " +
                                         num_to_string(pj) + "-disjoint");
    for (size_t l = 0; l < inners.size(); ++l) {
      const DecompositionWitness& wi = inners[l];
      if (!same_members(wi.domain, outer_fam.pieces[l]))
        throw Error("supplier-failure", "inner witness domain mismatch at family " +
                                            std::to_string(j) + " piece " + std::to_string(l));
      DecompositionRequest sub;
      sub.R.assign(col.values.begin(), col.values.begin() + wi.families.size());
      Verdict v = verify_witness(wi, sub);
      if (!v.ok)
        throw Error("supplier-failure", "inner witness at family " + std::to_string(j) +
                                            " piece " + std::to_string(l) +
                                            " fails against the sorted column: " +
                                            v.violations.front());
      max_inner_depth = std::max(max_inner_depth, wi.depth);
      for (size_t i = 0; i < wi.families.size(); ++i) {
        long long t = arr.cell_index(col.rows[i], j);
        max_index = std::max(max_index, t);
        SubspaceFamily& slot = slots[t];
        slot.declared_gap = req.R[t - 1];
        for (const auto& piece : wi.families[i].pieces) slot.pieces.push_back(piece);
      }
    }
  }
  if (slots.empty()) throw Error("supplier-failure", "composition produced no families");
  for (long long t = 1; t <= max_index; ++t) {
    SubspaceFamily fam = slots.count(t) ? std::move(slots[t]) : SubspaceFamily{};
    fam.declared_gap = req.R[t - 1];
    canonicalize_family(fam);
    out.families.push_back(std::move(fam));
    out.gaps.push_back(req.R[t - 1]);
  }
  out.depth = outer.depth + max_inner_depth;
  out.piece_bound = max_piece_diameter(out.families);
  out.provenance = outer.provenance;
  std::ostringstream prov;
  prov << "compose k=" << k;
  for (int j = 1; j <= k; ++j) {
    const auto& inners = inner[j - 1];
    int kj = 0;
    for (const auto& wi : inners) kj = std::max(kj, static_cast<int>(wi.families.size()));
    if (kj == 0) continue;
    SortedColumn col = sorted_column(arr, j, kj);
    prov << " col" << j << "=(";
    for (size_t i = 0; i < col.rows.size(); ++i) prov << (i ? "," : "") << col.rows[i];
    prov << ")";
  }
  out.provenance.push_back(prov.str());
  return out;
}

// ---------------------------------------------------------------------------
// Product permanence

namespace {

/// Runs the searcher against sorted column prefixes of growing length until
/// it succeeds; returns the witness and the consumed prefix.
struct ColumnDecomposition {
  DecompositionWitness witness;
  SortedColumn column;
};

ColumnDecomposition decompose_against_column(const Subspace& x, const RearrangedArray& arr,
                                             int j, const std::optional<Num>& bound,
                                             const Searcher& search) {
  int available = 0;
  while (true) {
    try {
      arr.cell_index(available + 1, j);
      ++available;
    } catch (const Error&) {
      break;
    }
  }
  std::string last_error = "column empty";
  for (int len = 1; len <= available; ++len) {
    SortedColumn col = sorted_column(arr, j, len);
    DecompositionRequest sub;
    sub.R = col.values;
    sub.target_bound = bound;
    try {
      DecompositionWitness w = search(x, sub);
      if (static_cast<int>(w.families.size()) > len) {
        last_error = "searcher returned too many families";
        continue;
      }
      col = sorted_column(arr, j, static_cast<int>(w.families.size()));
      return {std::move(w), std::move(col)};
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error("supplier-failure",
              "no decomposition against column " + std::to_string(j) + ": " + last_error);
}

/// Decomposes every piece against sorted column-j prefixes of growing
/// length; all pieces must succeed at a common length, and each witness is
/// padded with empty families up to it.
std::vector<DecompositionWitness> decompose_pieces_against_column(
    const std::vector<Subspace>& pieces, const RearrangedArray& arr, int j,
    const std::optional<Num>& bound, const Searcher& search) {
  int available = 0;
  while (true) {
    try {
      arr.cell_index(available + 1, j);
      ++available;
    } catch (const Error&) {
      break;
    }
  }
  std::string last_error = "column empty";
  for (int len = 1; len <= available; ++len) {
    SortedColumn col = sorted_column(arr, j, len);
    std::vector<DecompositionWitness> out;
    bool ok = true;
    for (const Subspace& piece : pieces) {
      DecompositionRequest sub;
      sub.R = col.values;
      sub.target_bound = bound;
      try {
        DecompositionWitness w = search(piece, sub);
        if (static_cast<int>(w.families.size()) > len) {
          ok = false;
          last_error = "searcher returned too many families";
          break;
        }
        while (static_cast<int>(w.families.size()) < len) {
          SubspaceFamily empty;
          empty.declared_gap = col.values[w.families.size()];
          w.gaps.push_back(col.values[w.families.size()]);
          w.families.push_back(std::move(empty));
        }
        out.push_back(std::move(w));
      } catch (const Error& e) {
        ok = false;
        last_error = e.what();
        break;
      }
    }
    if (ok) return out;
  }
  throw Error("supplier-failure",
              "no decomposition against column " + std::to_string(j) + ": " + last_error);
}

}  // namespace

DecompositionWitness compose_with(const DecompositionWitness& outer, const Searcher& search,
                                  const DecompositionRequest& req) {
  require_positive(req);
  RearrangedArray arr(req.R);
  std::vector<std::vector<DecompositionWitness>> inner;
  for (size_t j = 1; j <= outer.families.size(); ++j) {
    const auto& pieces = outer.families[j - 1].pieces;
    if (pieces.empty()) {
      inner.emplace_back();
      continue;
    }
    inner.push_back(decompose_pieces_against_column(pieces, arr, static_cast<int>(j),
                                                    req.target_bound, search));
  }
  return compose(outer, inner, req);
}

DecompositionWitness product_decompose(const SpacePtr& x, const SpacePtr& y,
                                       const DecompositionRequest& req, const Searcher& search_x,
                                       const Searcher& search_y) {
  require_positive(req);
  RearrangedArray arr(req.R);
  SpacePtr product = build_product(x, y);
  Subspace whole_x = whole_space(x);
  Subspace whole_y = whole_space(y);

  // Grow the column count until the Y-searcher fits within it.
  std::vector<ColumnDecomposition> columns;
  DecompositionWitness wy;
  int used_columns = 0;
  const int max_columns = static_cast<int>(req.R.size());
  std::string last_error = "no columns available";
  for (int k = 1; k <= max_columns; ++k) {
    try {
      while (static_cast<int>(columns.size()) < k)
        columns.push_back(decompose_against_column(whole_x, arr, static_cast<int>(columns.size()) + 1,
                                                   req.target_bound, search_x));
      std::vector<Num> p;
      for (int j = 0; j < k; ++j) p.push_back(columns[j].column.values.back());
      DecompositionRequest yreq;
      yreq.R = std::move(p);
      yreq.target_bound = req.target_bound;
      DecompositionWitness cand = search_y(whole_y, yreq);
      if (static_cast<int>(cand.families.size()) > k) {
        last_error = "Y decomposition used more families than columns";
        continue;
      }
      wy = std::move(cand);
      used_columns = static_cast<int>(wy.families.size());
      break;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (used_columns == 0)
    throw Error("supplier-failure", "product decomposition failed: " + last_error);

  DecompositionWitness out;
  out.domain = whole_space(product);
  int right = y->size();
  long long max_index = 0;
  std::map<long long, SubspaceFamily> slots;
  for (int j = 1; j <= used_columns; ++j) {
    const ColumnDecomposition& cd = columns[j - 1];
    const SubspaceFamily& yfam = wy.families[j - 1];
    if (yfam.pieces.empty()) continue;
    for (size_t i = 0; i < cd.witness.families.size(); ++i) {
      long long t = arr.cell_index(cd.column.rows[i], j);
      max_index = std::max(max_index, t);
      SubspaceFamily& slot = slots[t];
      for (const auto& u : cd.witness.families[i].pieces)
        for (const auto& v : yfam.pieces) {
          std::vector<int> members;
          members.reserve(u.members.size() * v.members.size());
          for (int ui : u.members)
            for (int vi : v.members) members.push_back(ui * right + vi);
          slot.pieces.emplace_back(product, std::move(members));
        }
    }
  }
  if (slots.empty()) throw Error("supplier-failure", "product decomposition produced no pieces");
  for (long long t = 1; t <= max_index; ++t) {
    SubspaceFamily fam = slots.count(t) ? std::move(slots[t]) : SubspaceFamily{};
    fam.declared_gap = req.R[t - 1];
    canonicalize_family(fam);
    out.families.push_back(std::move(fam));
    out.gaps.push_back(req.R[t - 1]);
  }
  out.depth = wy.depth;
  for (const auto& cd : columns) out.depth = std::max(out.depth, cd.witness.depth);
  out.piece_bound = max_piece_diameter(out.families);
  out.provenance.push_back("product k=" + std::to_string(used_columns));
  return out;
}

// ---------------------------------------------------------------------------
// Union, limit

DecompositionWitness union_decompose(
    const std::vector<Subspace>& parts,
    const std::function<std::optional<Subspace>(const Num&)>& excision,
    const DecompositionRequest& req) {
  require_positive(req);
  if (parts.empty()) throw Error("invalid-witness", "union of no parts");
  const SpacePtr& space = parts.front().parent;
  std::vector<char> in_domain(space->size(), 0);
  for (const auto& p : parts) {
    if (p.parent != space) throw Error("invalid-witness", "parts over different spaces");
    for (int m : p.members) in_domain[m] = 1;
  }
  const Num& r1 = req.R[0];
  std::optional<Subspace> shaved_zone = excision(r1);
  std::vector<char> in_y(space->size(), 0);
  if (shaved_zone) {
    if (shaved_zone->parent != space)
      throw Error("invalid-witness", "excision subspace over a foreign space");
    for (int m : shaved_zone->members) {
      if (!in_domain[m])
        throw Error("excision-insufficient", "excision set leaves the union at id " +
                                                 id_of(space, m));
      in_y[m] = 1;
    }
  }
  SubspaceFamily first;
  first.declared_gap = r1;
  for (const auto& p : parts) {
    std::vector<int> kept;
    for (int m : p.members)
      if (!in_y[m]) kept.push_back(m);
    if (!kept.empty()) first.pieces.emplace_back(space, std::move(kept));
  }
  canonicalize_family(first);
  if (!check_r_disjoint(first, r1))
    throw Error("excision-insufficient",
                "shaved parts are not " + num_to_string(r1) + "-disjoint");

  DecompositionWitness w;
  std::vector<int> domain_members;
  for (int i = 0; i < space->size(); ++i)
    if (in_domain[i]) domain_members.push_back(i);
  w.domain = Subspace(space, std::move(domain_members));
  w.families.push_back(std::move(first));
  w.gaps.push_back(r1);
  if (shaved_zone) {
    if (req.R.size() < 2)
      throw Error("sequence-exhausted", "union decomposition needs two entries");
    SubspaceFamily second;
    second.declared_gap = req.R[1];
    second.pieces.push_back(*shaved_zone);
    w.families.push_back(std::move(second));
    w.gaps.push_back(req.R[1]);
  }
  w.depth = 1;
  w.piece_bound = max_piece_diameter(w.families);
  w.provenance.push_back("union");
  return w;
}

DecompositionWitness limit_decompose(
    const SpacePtr& x, const std::function<std::vector<Subspace>(const Num&)>& splitter,
    const DecompositionRequest& req) {
  require_positive(req);
  const Num& r1 = req.R[0];
  std::vector<Subspace> pieces = splitter(r1);
  std::vector<char> seen(x->size(), 0);
  for (const auto& p : pieces) {
    if (p.parent != x) throw Error("splitter-violation", "piece over a foreign space");
    for (int m : p.members) {
      if (seen[m])
        throw Error("splitter-violation", "pieces overlap at id " + id_of(x, m));
      seen[m] = 1;
    }
  }
  for (int i = 0; i < x->size(); ++i)
    if (!seen[i]) throw Error("splitter-violation", "splitter misses id " + id_of(x, i));
  SubspaceFamily fam;
  fam.declared_gap = r1;
  fam.pieces = std::move(pieces);
  canonicalize_family(fam);
  if (!check_r_disjoint(fam, r1))
    throw Error("splitter-violation", "pieces are not " + num_to_string(r1) + "-disjoint");
  DecompositionWitness w;
  w.domain = whole_space(x);
  w.families.push_back(std::move(fam));
  w.gaps.push_back(r1);
  w.depth = 1;
  w.piece_bound = max_piece_diameter(w.families);
  w.provenance.push_back("limit");
  return w;
}

// ---------------------------------------------------------------------------
// Control functions and pullbacks

ControlFunction::ControlFunction(std::vector<std::pair<Num, Num>> breakpoints)
    : pts_(std::move(breakpoints)) {
  if (pts_.empty()) throw Error("control-function-violation", "control function needs points");
  for (size_t i = 1; i < pts_.size(); ++i)
    if (pts_[i].first <= pts_[i - 1].first || pts_[i].second < pts_[i - 1].second)
      throw Error("control-function-violation", "breakpoints must increase and be nondecreasing");
}

ControlFunction ControlFunction::identity() {
  return ControlFunction({{Num(0), Num(0)}, {Num(1), Num(1)}});
}

ControlFunction ControlFunction::linear(const Num& slope) {
  return ControlFunction({{Num(0), Num(0)}, {Num(1), slope}});
}

Num ControlFunction::operator()(const Num& t) const {
  if (t <= pts_.front().first) return pts_.front().second;
  for (size_t i = 1; i < pts_.size(); ++i) {
    if (t <= pts_[i].first) {
      const auto& [t0, v0] = pts_[i - 1];
      const auto& [t1, v1] = pts_[i];
      return v0 + (t - t0) * (v1 - v0) / (t1 - t0);
    }
  }
  if (pts_.size() == 1) return pts_.back().second;
  const auto& [t0, v0] = pts_[pts_.size() - 2];
  const auto& [t1, v1] = pts_.back();
  return v1 + (t - t1) * (v1 - v0) / (t1 - t0);
}

bool ControlFunction::proper() const {
  if (pts_.size() < 2) return false;
  return pts_.back().second > pts_[pts_.size() - 2].second;
}

std::optional<Num> ControlFunction::preimage_sup(const Num& bound) const {
  if (!proper()) return std::nullopt;
  const auto& [t0, v0] = pts_[pts_.size() - 2];
  const auto& [t1, v1] = pts_.back();
  if (bound >= v1) return t1 + (bound - v1) * (t1 - t0) / (v1 - v0);
  // Scan segments for the rightmost crossing.
  Num best = pts_.front().first;
  for (size_t i = 1; i < pts_.size(); ++i) {
    const auto& [a, va] = pts_[i - 1];
    const auto& [b, vb] = pts_[i];
    if (va > bound) break;
    if (vb <= bound) {
      best = b;
      continue;
    }
    best = a + (bound - va) * (b - a) / (vb - va);
    break;
  }
  return best;
}

int CoarseMap::apply(int domain_index) const {
  auto it = std::lower_bound(domain.members.begin(), domain.members.end(), domain_index);
  if (it == domain.members.end() || *it != domain_index)
    throw Error("control-function-violation", "point outside the map's domain");
  return image[it - domain.members.begin()];
}

Verdict check_controls(const MapFamily& f) {
  Verdict v;
  for (size_t mi = 0; mi < f.maps.size(); ++mi) {
    const CoarseMap& m = f.maps[mi];
    if (m.image.size() != m.domain.members.size()) {
      v.fail("map " + std::to_string(mi) + " image size mismatch");
      continue;
    }
    for (size_t p = 0; p < m.domain.members.size(); ++p)
      for (size_t q = p + 1; q < m.domain.members.size(); ++q) {
        Num dd = m.domain.parent->dist(m.domain.members[p], m.domain.members[q]);
        Num dc = m.codomain->dist(m.image[p], m.image[q]);
        if (!ge_approx(dc, f.rho1(dd)))
          v.fail("map " + std::to_string(mi) + ": rho1 violated on ids " +
                 id_of(m.domain.parent, m.domain.members[p]) + "," +
                 id_of(m.domain.parent, m.domain.members[q]));
        if (!le_approx(dc, f.rho2(dd)))
          v.fail("map " + std::to_string(mi) + ": rho2 violated on ids " +
                 id_of(m.domain.parent, m.domain.members[p]) + "," +
                 id_of(m.domain.parent, m.domain.members[q]));
      }
  }
  return v;
}

DecompositionWitness pullback_witness(const MapFamily& f, const CoarseMap& map,
                                      const DecompositionWitness& w,
                                      const DecompositionRequest& req) {
  require_positive(req);
  Verdict controls = check_controls(f);
  if (!controls.ok)
    throw Error("control-function-violation", controls.violations.front());
  if (map.codomain != w.space())
    throw Error("invalid-witness", "witness lives on a different space than the map's codomain");
  if (w.families.size() > req.R.size())
    throw Error("sequence-exhausted", "witness needs more sequence entries than requested");
  DecompositionRequest upstairs;
  for (size_t i = 0; i < w.families.size(); ++i) upstairs.R.push_back(f.rho2(req.R[i]));
  Verdict v = verify_witness(w, upstairs);
  if (!v.ok)
    throw Error("invalid-witness",
                "codomain witness fails at rho2(R): " + v.violations.front());

  DecompositionWitness out;
  out.domain = map.domain;
  for (size_t j = 0; j < w.families.size(); ++j) {
    SubspaceFamily fam;
    fam.declared_gap = req.R[j];
    for (const auto& piece : w.families[j].pieces) {
      std::vector<int> pre;
      for (size_t p = 0; p < map.domain.members.size(); ++p)
        if (piece.contains(map.image[p])) pre.push_back(map.domain.members[p]);
      if (!pre.empty()) fam.pieces.emplace_back(map.domain.parent, std::move(pre));
    }
    canonicalize_family(fam);
    out.families.push_back(std::move(fam));
    out.gaps.push_back(req.R[j]);
  }
  out.depth = w.depth;
  out.piece_bound = max_piece_diameter(out.families);
  // An isometric pullback reproduces the witness; return it unchanged so
  // certificates round-trip bit-for-bit.
  if (out.domain.parent == w.space() && same_members(out.domain, w.domain) &&
      out.gaps == w.gaps) {
    bool identical = out.families.size() == w.families.size();
    for (size_t j = 0; identical && j < out.families.size(); ++j) {
      identical = out.families[j].pieces.size() == w.families[j].pieces.size();
      for (size_t p = 0; identical && p < out.families[j].pieces.size(); ++p)
        identical = same_members(out.families[j].pieces[p], w.families[j].pieces[p]);
    }
    if (identical) return w;
  }
  out.provenance = w.provenance;
  std::ostringstream prov;
  prov << "pullback";
  if (f.rho1.proper() && f.rho1.preimage_sup(w.piece_bound))
    prov << " rho1-bound=" << num_to_string(*f.rho1.preimage_sup(w.piece_bound));
  out.provenance.push_back(prov.str());
  return out;
}

DecompositionWitness fiber_compose(const MapFamily& f, const CoarseMap& map,
                                   const DecompositionWitness& w_y,
                                   const std::vector<std::vector<DecompositionWitness>>& inner,
                                   const DecompositionRequest& req) {
  require_positive(req);
  RearrangedArray arr(req.R);
  const int k = static_cast<int>(w_y.families.size());
  if (static_cast<int>(inner.size()) != k)
    throw Error("supplier-failure", "need one inner list per codomain family");
  // P_j = max of the sorted column-j prefix actually consumed.
  DecompositionRequest p;
  for (int j = 1; j <= k; ++j) {
    int kj = 0;
    for (const auto& wi : inner[j - 1]) kj = std::max(kj, static_cast<int>(wi.families.size()));
    if (kj == 0) kj = 1;
    p.R.push_back(sorted_column(arr, j, kj).values.back());
  }
  DecompositionWitness outer = pullback_witness(f, map, w_y, p);
  DecompositionWitness out = compose(outer, inner, req);
  out.provenance.push_back("fiber");
  return out;
}

DecompositionWitness fiber_compose_with(const MapFamily& f, const CoarseMap& map,
                                        const DecompositionWitness& w_y, const Searcher& search,
                                        const DecompositionRequest& req) {
  require_positive(req);
  RearrangedArray arr(req.R);
  // Nonempty preimages of the codomain pieces, in the canonical order the
  // pullback will use.
  std::vector<std::vector<DecompositionWitness>> inner;
  for (size_t j = 0; j < w_y.families.size(); ++j) {
    SubspaceFamily pre;
    for (const auto& piece : w_y.families[j].pieces) {
      std::vector<int> members;
      for (size_t p = 0; p < map.domain.members.size(); ++p)
        if (piece.contains(map.image[p])) members.push_back(map.domain.members[p]);
      if (!members.empty()) pre.pieces.emplace_back(map.domain.parent, std::move(members));
    }
    canonicalize_family(pre);
    if (pre.pieces.empty()) {
      inner.emplace_back();
      continue;
    }
    inner.push_back(decompose_pieces_against_column(pre.pieces, arr, static_cast<int>(j) + 1,
                                                    req.target_bound, search));
  }
  return fiber_compose(f, map, w_y, inner, req);
}

}  // namespace coarse
