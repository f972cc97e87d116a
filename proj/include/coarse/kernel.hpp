#pragma once

#include "coarse/decomp.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace coarse {

/// A kernel X -> l1(X): one finitely supported nonnegative row per point.
/// supp xi_x stays inside the closed ball B(x, support_radius).
struct Kernel {
  SpacePtr space;
  std::vector<std::map<int, Num>> rows;  // rows[x][y] = weight, absent = 0
  Num support_radius;

  Num row_norm(int x) const;
  /// Smallest radius actually covering every positive weight.
  Num tight_support_radius() const;
  /// Checks weight nonnegativity and the declared support radius.
  void validate() const;
};

/// Constant uniform distribution over `piece`, attached to every point of
/// `piece` (zero rows elsewhere): normed, zero variation, support radius =
/// the piece diameter.
Kernel uniform_piece_kernel(const Subspace& piece);

/// Averaging over closed balls of the given radius; normed by construction.
Kernel ball_average_kernel(const SpacePtr& space, const Num& radius);

/// Dirac rows xi_x = delta_x.
Kernel dirac_kernel(const SpacePtr& space);

struct VariationReport {
  Num epsilon;  // smallest eps such that the kernel has eps-variation
  int worst_x = -1;
  int worst_y = -1;
  long long worst_k = 0;
};

/// epsilon = max over pairs of ||xi_x - xi_y||_1 / ceil(d(x,y)); checking
/// k = ceil(d) per pair suffices since larger k only weakens the constraint.
VariationReport measure_variation(const Kernel& xi);

/// Pointwise sum; support radius = max of the parts'.
Kernel sum_kernels(const std::vector<Kernel>& parts);

/// Divides every row by its l1 norm. Requires ||xi_x||_1 >= 1 everywhere;
/// throws norm-deficit listing the offending points otherwise.
Kernel normalize(const Kernel& xi);

/// Cutoff used by extend: 1 on U, min(1, d(x, X \ N(U,R)) / R) outside,
/// 0 beyond the open R-neighborhood. 1/R-Lipschitz.
Num extension_cutoff(const Subspace& u, const Num& r, int x);

/// Nearest point of U (ties to the smallest index).
int nearest_in(const Subspace& u, int x);

/// Spreads a kernel supported on U across the space: row x becomes
/// eta(x) * xi_{u(x)}. For integer R and a normed input of variation eps
/// and support radius S, the result has variation <= (2R+1)eps + 1/R and
/// support radius <= R + S.
Kernel extend(const Kernel& xi, const Subspace& u, const Num& r);

struct AssemblyParams {
  std::vector<Num> R;    // per family
  std::vector<Num> eps;  // per family
  /// Per-family extension radii; empty selects the default R[i] / 2, which
  /// keeps the extended neighborhoods of an R[i]-disjoint family disjoint.
  std::vector<Num> extension_radii;
};

struct AssemblyResult {
  Kernel kernel;
  Num paper_bound;        // 2 * sum_i ((2 R_i + 1) eps_i + 1 / R_i)
  Num used_radii_bound;   // same formula with the radii actually used
  VariationReport variation;
};

/// Builds a normed kernel from per-piece kernels over a verified witness:
/// extend each piece kernel at the family's radius, sum, normalize.
/// per_piece[i][l] must be normed on families[i].pieces[l] with measured
/// variation <= eps[i]. Coverage guarantees every pre-normalization row
/// norm >= 1.
AssemblyResult assemble(const DecompositionWitness& w,
                        const std::vector<std::vector<Kernel>>& per_piece,
                        const AssemblyParams& params);

struct ScheduleParams {
  long long n = 1;
  std::vector<Num> R;    // R_i = 2^{i+1} N
  std::vector<Num> eps;  // eps_i = 1 / (4^{i+2} N)
};

/// The geometric radius/variation schedule for target variation 1/N.
ScheduleParams schedule(long long n, int depth);

struct PropertyAVerdict {
  bool ok = true;
  Num common_s;  // single support radius bounding every member
  std::vector<std::string> failures;
};

using KernelBuilder = std::function<Kernel(const SpacePtr&)>;

/// Passes iff every built kernel is normed, has measured variation <=
/// epsilon, and one S bounds all support radii; returns that S.
PropertyAVerdict check_uniform_property_a(const std::vector<SpacePtr>& family, const Num& epsilon,
                                          const KernelBuilder& builder);

}  // namespace coarse
