#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coarse/kernel.hpp"
#include "coarse/spaces.hpp"

using namespace coarse;

namespace {

Num l1_row_diff(const Kernel& k, int x, int y) {
  Num total(0);
  for (int z = 0; z < k.space->size(); ++z) {
    Num a(0), b(0);
    auto ia = k.rows[x].find(z);
    if (ia != k.rows[x].end()) a = ia->second;
    auto ib = k.rows[y].find(z);
    if (ib != k.rows[y].end()) b = ib->second;
    total = total + (a - b).abs();
  }
  return total;
}

/// Independent check that eps is a valid variation bound for every k.
bool has_variation(const Kernel& k, const Num& eps) {
  const int n = k.space->size();
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      long long kk = ceil_int(k.space->dist(x, y));
      if (kk <= 0) kk = 1;
      if (!le_approx(l1_row_diff(k, x, y), Num(kk) * eps)) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("variation: constant, Dirac, ball kernels") {
  SpacePtr path = build_named_space("path:16");
  Kernel constant = uniform_piece_kernel(whole_space(path));
  CHECK(measure_variation(constant).epsilon == Num(0));

  Kernel dirac = dirac_kernel(path);
  VariationReport rep = measure_variation(dirac);
  CHECK(rep.epsilon == Num(2));  // adjacent Diracs have disjoint supports
  CHECK(rep.worst_k == 1);

  SpacePtr p32 = build_named_space("path:32");
  Kernel ball3 = ball_average_kernel(p32, Num(3));
  // Frozen by an independent exhaustive scan: worst pair is a boundary
  // neighbour pair, ratio 2/5.
  CHECK(measure_variation(ball3).epsilon == Num(BigInt(2), BigInt(5)));
}

TEST_CASE("variation report is tight and valid") {
  SpacePtr path = build_named_space("path:24");
  Kernel ball = ball_average_kernel(path, Num(2));
  VariationReport rep = measure_variation(ball);
  CHECK(has_variation(ball, rep.epsilon));
  CHECK(l1_row_diff(ball, rep.worst_x, rep.worst_y) == Num(rep.worst_k) * rep.epsilon);
  // Nothing smaller works.
  CHECK(!has_variation(ball, rep.epsilon * Num(BigInt(99), BigInt(100))));
}

TEST_CASE("kernel sum: identity, doubling, subadditivity") {
  SpacePtr path = build_named_space("path:16");
  Kernel dirac = dirac_kernel(path);
  Kernel zero;
  zero.space = path;
  zero.rows.resize(path->size());
  zero.support_radius = Num(0);
  Kernel same = sum_kernels({dirac, zero});
  CHECK(measure_variation(same).epsilon == Num(2));
  for (int x = 0; x < path->size(); ++x) CHECK(same.rows[x] == dirac.rows[x]);

  Kernel doubled = sum_kernels({dirac, dirac});
  CHECK(doubled.rows[3].at(3) == Num(2));
  CHECK(measure_variation(doubled).epsilon == Num(4));
}

TEST_CASE("normalization: idempotence, rescaling, factor two, deficits") {
  SpacePtr path = build_named_space("path:16");
  Kernel ball = ball_average_kernel(path, Num(2));
  Kernel normed = normalize(ball);
  for (int x = 0; x < path->size(); ++x) CHECK(normed.rows[x] == ball.rows[x]);

  Kernel scaled = ball;
  for (auto& row : scaled.rows)
    for (auto& [y, w] : row) w = w * Num(3);
  Kernel recovered = normalize(scaled);
  for (int x = 0; x < path->size(); ++x) CHECK(recovered.rows[x] == ball.rows[x]);

  Kernel deficient = dirac_kernel(path);
  deficient.rows[5][5] = Num(BigInt(1), BigInt(2));
  CHECK_THROWS_WITH_AS(normalize(deficient), doctest::Contains("norm-deficit"), Error);
}

TEST_CASE("extension cutoff formula and trivial cases") {
  SpacePtr path = build_named_space("path:32");
  Subspace u(path, {10, 11, 12});
  Num r(4);
  CHECK(extension_cutoff(u, r, 11) == Num(1));
  // x = 14: d(x, U) = 2 < 4; complement of N(U,4) starts at 16 (d >= 4).
  CHECK(extension_cutoff(u, r, 14) == Num(BigInt(2), BigInt(4)));
  CHECK(extension_cutoff(u, r, 16) == Num(0));
  CHECK(nearest_in(u, 20) == 12);
  CHECK(nearest_in(u, 0) == 10);

  // U = X: extension is the identity.
  Kernel ball = ball_average_kernel(path, Num(2));
  Kernel ext = extend(ball, whole_space(path), Num(3));
  for (int x = 0; x < path->size(); ++x) CHECK(ext.rows[x] == ball.rows[x]);
}

TEST_CASE("single-point extension decays linearly") {
  SpacePtr path = build_named_space("path:16");
  Subspace u(path, {8});
  Kernel dirac;
  dirac.space = path;
  dirac.rows.resize(path->size());
  dirac.rows[8][8] = Num(1);
  dirac.support_radius = Num(0);
  Kernel ext = extend(dirac, u, Num(4));
  CHECK(ext.rows[8].at(8) == Num(1));
  CHECK(ext.rows[10].at(8) == Num(BigInt(2), BigInt(4)));
  CHECK(ext.rows[12].empty());
}

TEST_CASE("lemma suite over enumerated instances") {
  // 24 enumerated instances: spaces x interval kernels x radii.
  std::vector<SpacePtr> spaces{build_named_space("path:20"), build_named_space("cycle:12"),
                               build_named_space("grid:2:5"), build_named_space("path:32"),
                               build_named_space("tree:4")};
  int instances = 0;
  for (const SpacePtr& space : spaces) {
    const int n = space->size();
    for (int variant = 0; variant < 2; ++variant) {
      Num radius(variant + 1);
      Kernel a = ball_average_kernel(space, radius);
      Kernel b = ball_average_kernel(space, radius + Num(1));

      // Lemma (sum): variation is subadditive.
      Kernel s = sum_kernels({a, b});
      Num ea = measure_variation(a).epsilon;
      Num eb = measure_variation(b).epsilon;
      CHECK(le_approx(measure_variation(s).epsilon, ea + eb));

      // Lemma (normed): factor <= 2, rows exactly 1.
      Kernel normed = normalize(s);
      for (int x = 0; x < n; ++x) CHECK(normed.row_norm(x) == Num(1));
      CHECK(le_approx(measure_variation(normed).epsilon,
                      Num(2) * measure_variation(s).epsilon));

      // Lemma (loc-supp): extend a kernel living on a sub-block.
      std::vector<int> block;
      for (int i = 0; i < n / 2; ++i) block.push_back(i);
      Subspace u(space, block);
      Kernel piece = uniform_piece_kernel(u);
      Num eps = measure_variation(piece).epsilon;  // 0 for constant rows
      for (long long rr : {2, 3}) {
        Num r(rr);
        Kernel ext = extend(piece, u, r);
        // (1) vanishes beyond the open neighborhood
        for (int x = 0; x < n; ++x)
          if (ge_approx(dist_to_subspace(space, x, u), r)) CHECK(ext.rows[x].empty());
        // (2) unchanged on U
        for (int x : u.members) CHECK(ext.rows[x] == piece.rows[x]);
        // (3) variation bound
        Num bound = (Num(2) * r + Num(1)) * eps + Num(1) / r;
        CHECK(has_variation(ext, bound));
        // (4) support radius <= R + S
        CHECK(le_approx(ext.tight_support_radius(), r + piece.support_radius));
        // eta is 1/R-Lipschitz
        for (int x = 0; x < n; ++x)
          for (int y = x + 1; y < n; ++y) {
            Num diff = (extension_cutoff(u, r, x) - extension_cutoff(u, r, y)).abs();
            CHECK(le_approx(diff * r, space->dist(x, y)));
          }
        ++instances;
      }
    }
  }
  CHECK(instances >= 20);
}

TEST_CASE("schedule closed forms") {
  ScheduleParams p1 = schedule(1, 1);
  CHECK(p1.R == std::vector<Num>{Num(4)});
  CHECK(p1.eps == std::vector<Num>{Num(BigInt(1), BigInt(64))});
  ScheduleParams p2 = schedule(2, 2);
  CHECK(p2.R[1] == Num(16));
  CHECK(p2.eps[1] == Num(BigInt(1), BigInt(512)));
  CHECK(schedule(3, 0).R.empty());
}

TEST_CASE("assembly bound formula") {
  // R = (2, 4), eps = (1/10, 1/20) -> E = 2((5/10 + 1/2) + (9/20 + 1/4)) = 17/5.
  SpacePtr path = build_named_space("path:8");
  DecompositionRequest req{{Num(1), Num(1)}, std::nullopt};
  DecompositionWitness w =
      search_decomposition(whole_space(path), req, SearchStrategy::ShiftedBrick);
  REQUIRE(verify_witness(w).ok);
  AssemblyParams params{{Num(2), Num(4)},
                        {Num(BigInt(1), BigInt(10)), Num(BigInt(1), BigInt(20))},
                        {}};
  std::vector<std::vector<Kernel>> per_piece;
  for (const auto& fam : w.families) {
    std::vector<Kernel> ks;
    for (const auto& piece : fam.pieces) ks.push_back(uniform_piece_kernel(piece));
    per_piece.push_back(std::move(ks));
  }
  AssemblyResult res = assemble(w, per_piece, params);
  CHECK(res.paper_bound == Num(BigInt(17), BigInt(5)));
  for (int x = 0; x < path->size(); ++x) CHECK(res.kernel.row_norm(x) == Num(1));
  CHECK(le_approx(res.variation.epsilon, res.used_radii_bound));
}

TEST_CASE("assembling a single whole-space piece returns the kernel") {
  SpacePtr path = build_named_space("path:12");
  DecompositionWitness w;
  w.domain = whole_space(path);
  SubspaceFamily fam;
  fam.declared_gap = Num(1);
  fam.pieces.push_back(whole_space(path));
  w.families.push_back(fam);
  w.gaps = {Num(1)};
  w.piece_bound = Num(11);
  Kernel constant = uniform_piece_kernel(whole_space(path));
  AssemblyResult res = assemble(w, {{constant}}, {{Num(4)}, {Num(0)}, {}});
  for (int x = 0; x < path->size(); ++x) CHECK(res.kernel.rows[x] == constant.rows[x]);
  CHECK(res.variation.epsilon == Num(0));
}

TEST_CASE("uniform property A verdict") {
  std::vector<SpacePtr> paths{build_named_space("path:16"), build_named_space("path:24")};
  PropertyAVerdict good = check_uniform_property_a(paths, Num(BigInt(2), BigInt(3)), [](const SpacePtr& s) {
    return ball_average_kernel(s, Num(3));
  });
  CHECK(good.ok);
  CHECK(le_approx(good.common_s, Num(3)));

  PropertyAVerdict bad = check_uniform_property_a(paths, Num(1), [](const SpacePtr& s) {
    return dirac_kernel(s);  // variation 2 > 1 on any adjacent pair
  });
  CHECK(!bad.ok);
  CHECK(!bad.failures.empty());

  PropertyAVerdict singleton = check_uniform_property_a(
      {build_named_space("path:1")}, Num(0),
      [](const SpacePtr& s) { return uniform_piece_kernel(whole_space(s)); });
  CHECK(singleton.ok);
  CHECK(singleton.common_s == Num(0));
}
