#pragma once

#include "coarse/error.hpp"
#include "coarse/num.hpp"

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace coarse {

class FiniteMetricSpace;
using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

/// Distance backend. Indices run 0..size-1 in the owning space.
class MetricBackend {
 public:
  virtual ~MetricBackend() = default;
  virtual Num dist(int i, int j) const = 0;
  /// True when every distance this backend produces is an exact rational.
  virtual bool exact() const = 0;
  virtual std::string kind() const = 0;
};

class TableMetric : public MetricBackend {
 public:
  TableMetric(int n, std::vector<Num> full_table);
  Num dist(int i, int j) const override { return table_[static_cast<size_t>(i) * n_ + j]; }
  bool exact() const override { return exact_; }
  std::string kind() const override { return "table"; }
  int size() const { return n_; }

 private:
  int n_;
  std::vector<Num> table_;
  bool exact_;
};

/// Lattice points of [0, side-1]^dim under the l1 norm, row-major ids.
class L1GridMetric : public MetricBackend {
 public:
  L1GridMetric(int dim, int side) : dim_(dim), side_(side) {}
  Num dist(int i, int j) const override;
  bool exact() const override { return true; }
  std::string kind() const override { return "l1-grid"; }
  int dim() const { return dim_; }
  int side() const { return side_; }

 private:
  int dim_;
  int side_;
};

/// X x Y with d = sqrt(dX^2 + dY^2); id = idxLeft * |Y| + idxRight.
/// Distances stay exact when one factor collapses to a single point.
class ProductMetric : public MetricBackend {
 public:
  ProductMetric(SpacePtr left, SpacePtr right);
  Num dist(int i, int j) const override;
  bool exact() const override;
  std::string kind() const override { return "l2-product"; }
  const SpacePtr& left() const { return left_; }
  const SpacePtr& right() const { return right_; }

 private:
  SpacePtr left_;
  SpacePtr right_;
  int right_size_;
};

/// Immutable finite metric space: point ids plus a distance backend.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace(std::vector<long long> ids, std::shared_ptr<const MetricBackend> metric,
                    std::string name = "");

  int size() const { return static_cast<int>(ids_.size()); }
  Num dist(int i, int j) const { return metric_->dist(i, j); }
  long long id(int i) const { return ids_[i]; }
  int index_of(long long id) const;
  bool exact() const { return metric_->exact(); }
  const MetricBackend& metric() const { return *metric_; }
  const std::shared_ptr<const MetricBackend>& metric_ptr() const { return metric_; }
  const std::string& name() const { return name_; }

  /// Checks the metric axioms. Triangle inequality is exhaustive up to
  /// 512 points and sampled deterministically above. Throws invalid-metric.
  void validate() const;

 private:
  std::vector<long long> ids_;
  std::unordered_map<long long, int> index_;
  std::shared_ptr<const MetricBackend> metric_;
  std::string name_;
};

/// Point-set cap for builders; COARSE_DECOMP_MAX_POINTS overrides.
int max_points();

/// Nonempty subset of a space, stored as sorted indices.
struct Subspace {
  SpacePtr parent;
  std::vector<int> members;  // sorted, unique, nonempty

  Subspace() = default;
  Subspace(SpacePtr p, std::vector<int> m);

  bool contains(int idx) const;
  int size() const { return static_cast<int>(members.size()); }
};

Subspace whole_space(const SpacePtr& space);

/// A list of pieces over a common parent with a declared disjointness gap.
/// An empty family is legal and r-disjoint for every r.
struct SubspaceFamily {
  std::vector<Subspace> pieces;
  Num declared_gap;
};

/// Canonical piece order: by (min id, size), then lexicographic ids.
void canonicalize_family(SubspaceFamily& f);

struct BoundedGeometryProfile {
  std::vector<Num> radii;
  std::vector<int> counts;  // max closed-ball cardinality per radius
};

/// min_{x in A, y in B} d(x, y). Throws overlapping-subspaces when A and B
/// share a point or live over different parents.
Num gap(const Subspace& a, const Subspace& b);

/// Every cross-piece pair strictly further than r apart. Families with
/// fewer than two pieces pass for every r.
bool check_r_disjoint(const SubspaceFamily& f, const Num& r);

/// Max pairwise distance; 0 for singletons. Throws empty-subspace.
Num diameter(const Subspace& a);

/// Open R-neighborhood: all parent points with d(x, A) < R.
Subspace neighborhood(const Subspace& a, const Num& r);

/// d(x, A) = min over members; x may be any parent index.
Num dist_to_subspace(const SpacePtr& space, int x, const Subspace& a);

BoundedGeometryProfile bounded_geometry_profile(const SpacePtr& space,
                                                const std::vector<Num>& radii);

/// True when the two sorted index sets intersect.
bool members_intersect(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace coarse
