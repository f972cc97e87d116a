#include "coarse/kernel.hpp"

#include <algorithm>
#include <sstream>

namespace coarse {

namespace {

Num l1_diff(const std::map<int, Num>& a, const std::map<int, Num>& b) {
  Num total(0);
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      total = total + ia->second.abs();
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      total = total + ib->second.abs();
      ++ib;
    } else {
      total = total + (ia->second - ib->second).abs();
      ++ia;
      ++ib;
    }
  }
  return total;
}

bool is_one(const Num& v) {
  if (v.exact()) return v == Num(1);
  return std::abs(v.value() - 1.0) <= Num::kEps;
}

}  // namespace

Num Kernel::row_norm(int x) const {
  Num total(0);
  for (const auto& [y, wgt] : rows[x]) total = total + wgt;
  return total;
}

Num Kernel::tight_support_radius() const {
  Num best(0);
  for (int x = 0; x < space->size(); ++x)
    for (const auto& [y, wgt] : rows[x])
      if (!wgt.is_zero()) best = num_max(best, space->dist(x, y));
  return best;
}

void Kernel::validate() const {
  if (static_cast<int>(rows.size()) != space->size())
    throw Error("invalid-witness", "kernel row count does not match the space");
  for (int x = 0; x < space->size(); ++x)
    for (const auto& [y, wgt] : rows[x]) {
      if (lt_strict(wgt, Num(0)))
        throw Error("invalid-witness", "negative weight at (" + std::to_string(space->id(x)) +
                                           "," + std::to_string(space->id(y)) + ")");
      if (!wgt.is_zero() && !le_approx(space->dist(x, y), support_radius))
        throw Error("invalid-witness",
                    "weight outside the declared support radius at (" +
                        std::to_string(space->id(x)) + "," + std::to_string(space->id(y)) + ")");
    }
}

Kernel uniform_piece_kernel(const Subspace& piece) {
  Kernel k;
  k.space = piece.parent;
  k.rows.resize(piece.parent->size());
  std::map<int, Num> row;
  Num w = Num(1) / Num(static_cast<long long>(piece.members.size()));
  for (int y : piece.members) row[y] = w;
  for (int x : piece.members) k.rows[x] = row;
  k.support_radius = diameter(piece);
  return k;
}

Kernel ball_average_kernel(const SpacePtr& space, const Num& radius) {
  Kernel k;
  k.space = space;
  k.rows.resize(space->size());
  for (int x = 0; x < space->size(); ++x) {
    std::vector<int> ball;
    for (int y = 0; y < space->size(); ++y)
      if (le_approx(space->dist(x, y), radius)) ball.push_back(y);
    Num w = Num(1) / Num(static_cast<long long>(ball.size()));
    for (int y : ball) k.rows[x][y] = w;
  }
  k.support_radius = radius;
  return k;
}

Kernel dirac_kernel(const SpacePtr& space) {
  Kernel k;
  k.space = space;
  k.rows.resize(space->size());
  for (int x = 0; x < space->size(); ++x) k.rows[x][x] = Num(1);
  k.support_radius = Num(0);
  return k;
}

VariationReport measure_variation(const Kernel& xi) {
  VariationReport report;
  report.epsilon = Num(0);
  const int n = xi.space->size();
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      long long k = ceil_int(xi.space->dist(x, y));
      if (k <= 0) k = 1;
      Num ratio = l1_diff(xi.rows[x], xi.rows[y]) / Num(k);
      if (ratio > report.epsilon) {
        report.epsilon = ratio;
        report.worst_x = x;
        report.worst_y = y;
        report.worst_k = k;
      }
    }
  return report;
}

Kernel sum_kernels(const std::vector<Kernel>& parts) {
  if (parts.empty()) throw Error("invalid-witness", "sum of no kernels");
  Kernel out;
  out.space = parts.front().space;
  out.rows.resize(out.space->size());
  out.support_radius = Num(0);
  for (const Kernel& p : parts) {
    if (p.space != out.space) throw Error("invalid-witness", "kernel sum across spaces");
    out.support_radius = num_max(out.support_radius, p.support_radius);
    for (int x = 0; x < out.space->size(); ++x)
      for (const auto& [y, wgt] : p.rows[x]) {
        auto it = out.rows[x].find(y);
        if (it == out.rows[x].end())
          out.rows[x][y] = wgt;
        else
          it->second = it->second + wgt;
      }
  }
  return out;
}

Kernel normalize(const Kernel& xi) {
  std::ostringstream deficit;
  bool bad = false;
  Kernel out;
  out.space = xi.space;
  out.rows.resize(xi.rows.size());
  out.support_radius = xi.support_radius;
  for (int x = 0; x < xi.space->size(); ++x) {
    Num norm = xi.row_norm(x);
    if (!ge_approx(norm, Num(1))) {
      if (bad) deficit << ", ";
      deficit << xi.space->id(x) << " (norm " << num_to_string(norm) << ")";
      bad = true;
      continue;
    }
    for (const auto& [y, wgt] : xi.rows[x]) out.rows[x][y] = wgt / norm;
  }
  if (bad) throw Error("norm-deficit", "rows below unit norm at ids: " + deficit.str());
  return out;
}

Num extension_cutoff(const Subspace& u, const Num& r, int x) {
  if (u.contains(x)) return Num(1);
  const SpacePtr& space = u.parent;
  // d(x, X \ N(U, r)) over the complement of the open r-neighborhood.
  bool found = false;
  Num nearest;
  for (int z = 0; z < space->size(); ++z) {
    if (lt_strict(dist_to_subspace(space, z, u), r)) continue;
    Num d = space->dist(x, z);
    if (!found || d < nearest) {
      nearest = d;
      found = true;
    }
  }
  if (!found) return Num(1);  // the neighborhood swallows the space
  return num_min(Num(1), nearest / r);
}

int nearest_in(const Subspace& u, int x) {
  int best = u.members.front();
  Num best_d = u.parent->dist(x, best);
  for (int y : u.members) {
    Num d = u.parent->dist(x, y);
    if (d < best_d) {
      best = y;
      best_d = d;
    }
  }
  return best;
}

Kernel extend(const Kernel& xi, const Subspace& u, const Num& r) {
  if (!gt_strict(r, Num(0))) throw Error("invalid-witness", "extension radius must be positive");
  const SpacePtr& space = u.parent;
  Kernel out;
  out.space = space;
  out.rows.resize(space->size());
  out.support_radius = r + xi.support_radius;
  // Precompute the complement of the open r-neighborhood once.
  std::vector<int> complement;
  for (int z = 0; z < space->size(); ++z)
    if (!lt_strict(dist_to_subspace(space, z, u), r)) complement.push_back(z);
  for (int x = 0; x < space->size(); ++x) {
    Num eta;
    if (u.contains(x)) {
      eta = Num(1);
    } else if (complement.empty()) {
      eta = Num(1);
    } else {
      bool outside = std::binary_search(complement.begin(), complement.end(), x);
      if (outside) continue;  // eta = 0
      Num nearest = space->dist(x, complement.front());
      for (int z : complement) nearest = num_min(nearest, space->dist(x, z));
      eta = num_min(Num(1), nearest / r);
    }
    if (eta.is_zero()) continue;
    int ux = nearest_in(u, x);
    for (const auto& [y, wgt] : xi.rows[ux]) out.rows[x][y] = eta * wgt;
  }
  return out;
}

AssemblyResult assemble(const DecompositionWitness& w,
                        const std::vector<std::vector<Kernel>>& per_piece,
                        const AssemblyParams& params) {
  const size_t k = w.families.size();
  if (per_piece.size() != k || params.R.size() < k || params.eps.size() < k)
    throw Error("supplier-failure", "assembly inputs do not match the witness families");
  std::vector<Num> radii = params.extension_radii;
  if (radii.empty())
    for (size_t i = 0; i < k; ++i) radii.push_back(params.R[i] / Num(2));
  if (radii.size() < k) throw Error("supplier-failure", "missing extension radii");

  std::vector<Kernel> extended;
  for (size_t i = 0; i < k; ++i) {
    const auto& fam = w.families[i];
    if (per_piece[i].size() != fam.pieces.size())
      throw Error("supplier-failure", "family " + std::to_string(i + 1) +
                                          " kernel count does not match its pieces");
    for (size_t l = 0; l < fam.pieces.size(); ++l) {
      const Kernel& piece_kernel = per_piece[i][l];
      if (piece_kernel.space != w.space())
        throw Error("supplier-failure", "piece kernel over a foreign space");
      for (int x : fam.pieces[l].members)
        if (!is_one(piece_kernel.row_norm(x)))
          throw Error("norm-deficit", "piece kernel not normed at id " +
                                          std::to_string(w.space()->id(x)));
      extended.push_back(extend(piece_kernel, fam.pieces[l], radii[i]));
    }
  }
  if (extended.empty()) throw Error("supplier-failure", "nothing to assemble");

  AssemblyResult result;
  result.kernel = normalize(sum_kernels(extended));
  result.paper_bound = Num(0);
  result.used_radii_bound = Num(0);
  for (size_t i = 0; i < k; ++i) {
    result.paper_bound =
        result.paper_bound + (Num(2) * params.R[i] + Num(1)) * params.eps[i] + Num(1) / params.R[i];
    result.used_radii_bound =
        result.used_radii_bound + (Num(2) * radii[i] + Num(1)) * params.eps[i] + Num(1) / radii[i];
  }
  result.paper_bound = Num(2) * result.paper_bound;
  result.used_radii_bound = Num(2) * result.used_radii_bound;
  result.variation = measure_variation(result.kernel);
  return result;
}

ScheduleParams schedule(long long n, int depth) {
  if (n < 1) throw Error("invalid-witness", "schedule needs N >= 1");
  ScheduleParams p;
  p.n = n;
  BigInt pow2 = 2;  // 2^{i} at loop entry for i = 1
  BigInt pow4 = 16;
  for (int i = 1; i <= depth; ++i) {
    pow2 *= 2;  // 2^{i+1}
    pow4 *= 4;  // 4^{i+2}
    p.R.push_back(Num(Rat(pow2 * n)));
    p.eps.push_back(Num(BigInt(1), pow4 * n));
  }
  return p;
}

PropertyAVerdict check_uniform_property_a(const std::vector<SpacePtr>& family, const Num& epsilon,
                                          const KernelBuilder& builder) {
  PropertyAVerdict verdict;
  verdict.common_s = Num(0);
  for (size_t m = 0; m < family.size(); ++m) {
    Kernel k;
    try {
      k = builder(family[m]);
    } catch (const Error& e) {
      verdict.ok = false;
      verdict.failures.push_back("member " + std::to_string(m) + ": builder failed: " + e.what());
      continue;
    }
    for (int x = 0; x < k.space->size(); ++x)
      if (!is_one(k.row_norm(x))) {
        verdict.ok = false;
        verdict.failures.push_back("member " + std::to_string(m) + ": row " +
                                   std::to_string(k.space->id(x)) + " is not normed");
        break;
      }
    VariationReport rep = measure_variation(k);
    if (!le_approx(rep.epsilon, epsilon)) {
      verdict.ok = false;
      verdict.failures.push_back("member " + std::to_string(m) + ": variation " +
                                 num_to_string(rep.epsilon) + " > " + num_to_string(epsilon));
    }
    verdict.common_s = num_max(verdict.common_s, k.tight_support_radius());
  }
  return verdict;
}

}  // namespace coarse
