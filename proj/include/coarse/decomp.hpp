#pragma once

#include "coarse/metric.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace coarse {

/// Finite prefix of a gap sequence. Constructions consume entries in order
/// and signal sequence-exhausted instead of inventing more.
struct DecompositionRequest {
  std::vector<Num> R;  // positive entries
  std::optional<Num> target_bound;
};

/// Certificate of a uniform R-decomposition: families[i] must be gaps[i]-
/// disjoint, the pieces jointly cover `domain`, and every piece diameter
/// stays within piece_bound. `depth` is the finite decomposition depth.
struct DecompositionWitness {
  Subspace domain;
  std::vector<Num> gaps;  // one per family
  std::vector<SubspaceFamily> families;
  int depth = 1;
  Num piece_bound;
  std::vector<std::string> provenance;

  const SpacePtr& space() const { return domain.parent; }
};

struct Verdict {
  bool ok = true;
  std::vector<std::string> violations;

  void fail(std::string v) {
    ok = false;
    violations.push_back(std::move(v));
  }
};

/// Checks the three witness invariants against a request: per-family
/// disjointness at req.R[i], exact coverage of the domain, and the piece
/// bound. Failures are reported, never thrown.
Verdict verify_witness(const DecompositionWitness& w, const DecompositionRequest& req);

/// Self-check against the witness's own declared gaps.
Verdict verify_witness(const DecompositionWitness& w);

/// Anti-diagonal rearrangement of a sequence into a 2-d array:
/// cell(i, j) = R[T(i+j-2) + i] with T(n) = n(n+1)/2, 1-based.
class RearrangedArray {
 public:
  explicit RearrangedArray(std::vector<Num> r);

  /// 1-based original index of cell (i, j); throws sequence-exhausted
  /// when it exceeds the stored prefix.
  long long cell_index(int i, int j) const;
  const Num& cell(int i, int j) const;
  /// Column j prefix of the given length.
  std::vector<Num> column(int j, int length) const;
  size_t size() const { return r_.size(); }

 private:
  std::vector<Num> r_;
};

inline RearrangedArray rearrange(std::vector<Num> r) { return RearrangedArray(std::move(r)); }

enum class SearchStrategy { ShiftedBrick, Greedy, Exhaustive };

/// Produces a verified witness for the requested gaps. Shifted-brick
/// requires a grid-shaped parent; exhaustive is capped at 24 points.
/// A single-entry request is treated as a constant scale and replicated
/// to the family count the strategy needs.
DecompositionWitness search_decomposition(const Subspace& x, const DecompositionRequest& req,
                                          SearchStrategy strategy);

/// Two-level composition of witnesses: outer family j (which must
/// be P_j-disjoint, P_j = max of the sorted column-j prefix) is refined by
/// the per-piece inner witnesses; the output is flattened back to original
/// sequence order with empty families padding the gaps.
/// inner[j][l] decomposes outer family j's piece l against the sorted
/// column-j prefix of the rearranged sequence.
DecompositionWitness compose(const DecompositionWitness& outer,
                             const std::vector<std::vector<DecompositionWitness>>& inner,
                             const DecompositionRequest& req);

using Searcher =
    std::function<DecompositionWitness(const Subspace&, const DecompositionRequest&)>;

/// Search-driven composition: per outer family the searcher decomposes
/// every piece against sorted column prefixes of growing length until all
/// pieces succeed at a common length; the inner witnesses are padded with
/// empty families to that length and fed to compose().
DecompositionWitness compose_with(const DecompositionWitness& outer, const Searcher& search,
                                  const DecompositionRequest& req);

/// Product permanence: decompose X against rearranged columns, Y against
/// the per-column maxima P, and emit product pieces U x V on X x Y.
DecompositionWitness product_decompose(const SpacePtr& x, const SpacePtr& y,
                                       const DecompositionRequest& req, const Searcher& search_x,
                                       const Searcher& search_y);

/// Union permanence: family 1 = {X_i - Y(R_1)} (verified R_1-disjoint),
/// family 2 = {Y(R_1)} when nonempty.
DecompositionWitness union_decompose(const std::vector<Subspace>& parts,
                                     const std::function<std::optional<Subspace>(const Num&)>& excision,
                                     const DecompositionRequest& req);

/// Limit permanence: one family at gap R_1 whose pieces come from the
/// splitter, verified to partition the space R_1-disjointly.
DecompositionWitness limit_decompose(const SpacePtr& x,
                                     const std::function<std::vector<Subspace>(const Num&)>& splitter,
                                     const DecompositionRequest& req);

/// Monotone piecewise-linear control function. Left of the first
/// breakpoint evaluation clamps; right of the last it extrapolates the
/// final slope. Proper means that final slope is positive.
class ControlFunction {
 public:
  ControlFunction() = default;
  explicit ControlFunction(std::vector<std::pair<Num, Num>> breakpoints);

  static ControlFunction identity();
  static ControlFunction linear(const Num& slope);

  Num operator()(const Num& t) const;
  bool proper() const;
  /// sup { t : f(t) <= bound }; nullopt when f never exceeds bound.
  std::optional<Num> preimage_sup(const Num& bound) const;
  const std::vector<std::pair<Num, Num>>& breakpoints() const { return pts_; }

 private:
  std::vector<std::pair<Num, Num>> pts_;
};

/// One leg of a coarse embedding: a point map between finite spaces.
struct CoarseMap {
  Subspace domain;
  SpacePtr codomain;
  std::vector<int> image;  // image[p] = codomain index of domain.members[p]

  int apply(int domain_index) const;
};

struct MapFamily {
  std::vector<CoarseMap> maps;
  ControlFunction rho1;
  ControlFunction rho2;
};

/// Checks rho1(d(x,x')) <= d(f x, f x') <= rho2(d(x,x')) on every pair of
/// every map.
Verdict check_controls(const MapFamily& f);

/// Coarse-invariance pullback: preimages of a witness that verifies at
/// S_i = rho2(R_i) form an R-witness on the domain. Throws
/// control-function-violation when the map breaks its bounds.
DecompositionWitness pullback_witness(const MapFamily& f, const CoarseMap& map,
                                      const DecompositionWitness& w,
                                      const DecompositionRequest& req);

/// Fibering: pull wY back along the map at the per-column maxima P, then
/// compose with the per-fiber witnesses. Output depth <= depth(wY) + max
/// inner depth. inner[j][l] decomposes the preimage of wY family j piece l.
DecompositionWitness fiber_compose(const MapFamily& f, const CoarseMap& map,
                                   const DecompositionWitness& w_y,
                                   const std::vector<std::vector<DecompositionWitness>>& inner,
                                   const DecompositionRequest& req);

/// Search-driven fibering: decomposes the preimages of wY's pieces with
/// the searcher (same column protocol as compose_with), then fibers.
DecompositionWitness fiber_compose_with(const MapFamily& f, const CoarseMap& map,
                                        const DecompositionWitness& w_y, const Searcher& search,
                                        const DecompositionRequest& req);

}  // namespace coarse
