#include "coarse/metric.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace coarse {

TableMetric::TableMetric(int n, std::vector<Num> full_table)
    : n_(n), table_(std::move(full_table)) {
  if (table_.size() != static_cast<size_t>(n) * n)
    throw Error("invalid-metric", "table size does not match point count");
  exact_ = std::all_of(table_.begin(), table_.end(), [](const Num& v) { return v.exact(); });
}

Num L1GridMetric::dist(int i, int j) const {
  long long total = 0;
  for (int d = 0; d < dim_; ++d) {
    total += std::abs(i % side_ - j % side_);
    i /= side_;
    j /= side_;
  }
  return Num(total);
}

ProductMetric::ProductMetric(SpacePtr left, SpacePtr right)
    : left_(std::move(left)), right_(std::move(right)), right_size_(right_->size()) {}

Num ProductMetric::dist(int i, int j) const {
  Num dl = left_->dist(i / right_size_, j / right_size_);
  Num dr = right_->dist(i % right_size_, j % right_size_);
  if (dl.is_zero()) return dr;
  if (dr.is_zero()) return dl;
  return num_sqrt(dl * dl + dr * dr);
}

bool ProductMetric::exact() const {
  if (left_->size() == 1) return right_->exact();
  if (right_->size() == 1) return left_->exact();
  return false;
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<long long> ids,
                                     std::shared_ptr<const MetricBackend> metric,
                                     std::string name)
    : ids_(std::move(ids)), metric_(std::move(metric)), name_(std::move(name)) {
  index_.reserve(ids_.size());
  for (int i = 0; i < static_cast<int>(ids_.size()); ++i) {
    if (!index_.emplace(ids_[i], i).second)
      throw Error("invalid-metric", "duplicate point id " + std::to_string(ids_[i]));
  }
}

int FiniteMetricSpace::index_of(long long id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw Error("invalid-metric", "unknown point id " + std::to_string(id));
  return it->second;
}

void FiniteMetricSpace::validate() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (!dist(i, i).is_zero())
      throw Error("invalid-metric", "d(x,x) != 0 at id " + std::to_string(ids_[i]));
    for (int j = i + 1; j < n; ++j) {
      Num dij = dist(i, j);
      if (!gt_strict(dij, Num(0)))
        throw Error("invalid-metric", "d(x,y) <= 0 for distinct ids " +
                                          std::to_string(ids_[i]) + "," + std::to_string(ids_[j]));
      if (dij != dist(j, i))
        throw Error("invalid-metric", "asymmetric distance at ids " + std::to_string(ids_[i]) +
                                          "," + std::to_string(ids_[j]));
    }
  }
  auto check_triple = [&](int i, int j, int k) {
    if (gt_strict(dist(i, k), dist(i, j) + dist(j, k)))
      throw Error("invalid-metric",
                  "triangle inequality fails on ids " + std::to_string(ids_[i]) + "," +
                      std::to_string(ids_[j]) + "," + std::to_string(ids_[k]));
  };
  if (n <= 512) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) check_triple(i, j, k);
  } else {
    // Deterministic sample: stride the triple lattice.
    int stride = std::max(1, n / 64);
    for (int i = 0; i < n; i += stride)
      for (int j = 1; j < n; j += stride)
        for (int k = 2; k < n; k += stride) check_triple(i, j % n, k % n);
  }
}

int max_points() {
  if (const char* env = std::getenv("COARSE_DECOMP_MAX_POINTS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 65536;
}

Subspace::Subspace(SpacePtr p, std::vector<int> m) : parent(std::move(p)), members(std::move(m)) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.empty()) throw Error("empty-subspace", "subspace must be nonempty");
  if (members.front() < 0 || members.back() >= parent->size())
    throw Error("invalid-metric", "subspace member out of range");
}

bool Subspace::contains(int idx) const {
  return std::binary_search(members.begin(), members.end(), idx);
}

Subspace whole_space(const SpacePtr& space) {
  std::vector<int> all(space->size());
  for (int i = 0; i < space->size(); ++i) all[i] = i;
  return Subspace(space, std::move(all));
}

void canonicalize_family(SubspaceFamily& f) {
  std::sort(f.pieces.begin(), f.pieces.end(), [](const Subspace& a, const Subspace& b) {
    long long ia = a.parent->id(a.members.front());
    long long ib = b.parent->id(b.members.front());
    if (ia != ib) return ia < ib;
    if (a.size() != b.size()) return a.size() < b.size();
    return a.members < b.members;
  });
}

bool members_intersect(const std::vector<int>& a, const std::vector<int>& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j])
      ++i;
    else
      ++j;
  }
  return false;
}

Num gap(const Subspace& a, const Subspace& b) {
  if (a.parent != b.parent)
    throw Error("overlapping-subspaces", "gap requires a common parent space");
  if (members_intersect(a.members, b.members))
    throw Error("overlapping-subspaces", "gap undefined for overlapping subspaces");
  bool first = true;
  Num best;
  for (int x : a.members)
    for (int y : b.members) {
      Num d = a.parent->dist(x, y);
      if (first || d < best) {
        best = d;
        first = false;
      }
    }
  return best;
}

bool check_r_disjoint(const SubspaceFamily& f, const Num& r) {
  for (size_t p = 0; p < f.pieces.size(); ++p)
    for (size_t q = p + 1; q < f.pieces.size(); ++q) {
      const Subspace& a = f.pieces[p];
      const Subspace& b = f.pieces[q];
      for (int x : a.members)
        for (int y : b.members)
          if (!gt_strict(a.parent->dist(x, y), r)) return false;
    }
  return true;
}

Num diameter(const Subspace& a) {
  if (a.members.empty()) throw Error("empty-subspace", "diameter of empty subspace");
  Num best(0);
  for (size_t i = 0; i < a.members.size(); ++i)
    for (size_t j = i + 1; j < a.members.size(); ++j)
      best = num_max(best, a.parent->dist(a.members[i], a.members[j]));
  return best;
}

Num dist_to_subspace(const SpacePtr& space, int x, const Subspace& a) {
  bool first = true;
  Num best;
  for (int y : a.members) {
    Num d = space->dist(x, y);
    if (first || d < best) {
      best = d;
      first = false;
    }
  }
  return best;
}

Subspace neighborhood(const Subspace& a, const Num& r) {
  std::vector<int> out;
  for (int x = 0; x < a.parent->size(); ++x)
    if (lt_strict(dist_to_subspace(a.parent, x, a), r)) out.push_back(x);
  return Subspace(a.parent, std::move(out));
}

BoundedGeometryProfile bounded_geometry_profile(const SpacePtr& space,
                                                const std::vector<Num>& radii) {
  BoundedGeometryProfile profile;
  profile.radii = radii;
  for (const Num& r : radii) {
    int best = 0;
    for (int x = 0; x < space->size(); ++x) {
      int count = 0;
      for (int y = 0; y < space->size(); ++y)
        if (le_approx(space->dist(x, y), r)) ++count;
      best = std::max(best, count);
    }
    profile.counts.push_back(best);
  }
  return profile;
}

}  // namespace coarse
