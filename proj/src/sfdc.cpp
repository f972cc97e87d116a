#include "coarse/sfdc.hpp"

#include <algorithm>

namespace coarse {

namespace {

std::vector<int> set_difference_members(const std::vector<int>& a, const std::vector<char>& drop) {
  std::vector<int> out;
  for (int m : a)
    if (!drop[m]) out.push_back(m);
  return out;
}

void sort_stage(std::vector<Subspace>& stage) {
  std::sort(stage.begin(), stage.end(), [](const Subspace& a, const Subspace& b) {
    long long ia = a.parent->id(a.members.front());
    long long ib = b.parent->id(b.members.front());
    if (ia != ib) return ia < ib;
    if (a.size() != b.size()) return a.size() < b.size();
    return a.members < b.members;
  });
}

bool is_subset(const std::vector<int>& sub, const std::vector<int>& sup) {
  return std::includes(sup.begin(), sup.end(), sub.begin(), sub.end());
}

}  // namespace

SfdcChain build_chain(const DecompositionWitness& w) {
  Verdict v = verify_witness(w);
  if (!v.ok) throw Error("invalid-witness", "chain input fails: " + v.violations.front());
  const SpacePtr& space = w.space();
  const int k = static_cast<int>(w.families.size());

  SfdcChain c;
  c.domain = w.domain;
  c.stages.push_back({w.domain});
  c.link_gaps = w.gaps;

  // covered_before[j][m]: m lies in some family-j' piece with j' < j.
  std::vector<char> covered(space->size(), 0);
  std::vector<std::vector<char>> covered_before(k + 1, std::vector<char>(space->size(), 0));
  for (int j = 1; j <= k; ++j) {
    covered_before[j] = covered;
    for (const auto& piece : w.families[j - 1].pieces)
      for (int m : piece.members) covered[m] = 1;
  }

  for (int i = 1; i <= k; ++i) {
    std::vector<Subspace> stage;
    for (int j = 1; j <= i; ++j)
      for (const auto& piece : w.families[j - 1].pieces) {
        std::vector<int> shaved = set_difference_members(piece.members, covered_before[j]);
        if (!shaved.empty()) stage.emplace_back(space, std::move(shaved));
      }
    std::vector<char> covered_through_i(space->size(), 0);
    for (int j = 1; j <= i; ++j)
      for (const auto& piece : w.families[j - 1].pieces)
        for (int m : piece.members) covered_through_i[m] = 1;
    std::vector<int> residual = set_difference_members(w.domain.members, covered_through_i);
    if (!residual.empty()) stage.emplace_back(space, std::move(residual));
    sort_stage(stage);
    c.stages.push_back(std::move(stage));
  }

  c.final_bound = Num(0);
  for (const auto& piece : c.stages.back()) c.final_bound = num_max(c.final_bound, diameter(piece));
  return c;
}

Verdict verify_chain(const SfdcChain& c) {
  Verdict v;
  if (c.stages.empty()) {
    v.fail("chain has no stages");
    return v;
  }
  const SpacePtr& space = c.space();
  if (c.link_gaps.size() + 1 != c.stages.size())
    v.fail("chain has " + std::to_string(c.stages.size()) + " stages but " +
           std::to_string(c.link_gaps.size()) + " link gaps");

  for (size_t s = 0; s < c.stages.size(); ++s) {
    std::vector<char> seen(space->size(), 0);
    for (const auto& el : c.stages[s])
      for (int m : el.members) {
        if (seen[m]) v.fail("stage " + std::to_string(s) + " elements overlap at id " +
                            std::to_string(space->id(m)));
        seen[m] = 1;
      }
    for (int m : c.domain.members)
      if (!seen[m])
        v.fail("stage " + std::to_string(s) + " misses id " + std::to_string(space->id(m)));
  }

  for (size_t link = 1; link < c.stages.size() && link <= c.link_gaps.size(); ++link) {
    const Num& r = c.link_gaps[link - 1];
    for (const auto& w : c.stages[link - 1]) {
      std::vector<const Subspace*> children;
      for (const auto& el : c.stages[link])
        if (is_subset(el.members, w.members)) children.push_back(&el);
      size_t covered = 0;
      for (const auto* ch : children) covered += ch->members.size();
      if (covered != w.members.size()) {
        v.fail("link " + std::to_string(link) + ": stage elements do not refine the part at id " +
               std::to_string(space->id(w.members.front())));
        continue;
      }
      // Two-part split: two-color the conflict graph (edges at gap <= r).
      const size_t n = children.size();
      std::vector<int> color(n, -1);
      bool split = true;
      for (size_t start = 0; start < n && split; ++start) {
        if (color[start] != -1) continue;
        color[start] = 0;
        std::vector<size_t> queue{start};
        while (!queue.empty() && split) {
          size_t cur = queue.back();
          queue.pop_back();
          for (size_t other = 0; other < n; ++other) {
            if (other == cur) continue;
            if (!members_intersect(children[cur]->members, children[other]->members) &&
                gt_strict(gap(*children[cur], *children[other]), r))
              continue;
            if (color[other] == -1) {
              color[other] = 1 - color[cur];
              queue.push_back(other);
            } else if (color[other] == color[cur]) {
              split = false;
              break;
            }
          }
        }
      }
      if (!split)
        v.fail("link " + std::to_string(link) + ": no two-part " + num_to_string(r) +
               "-disjoint split of the part at id " + std::to_string(space->id(w.members.front())));
    }
  }

  for (const auto& el : c.stages.back()) {
    Num d = diameter(el);
    if (!le_approx(d, c.final_bound))
      v.fail("final stage element at id " + std::to_string(space->id(el.members.front())) +
             " has diameter " + num_to_string(d) + " > finalBound " +
             num_to_string(c.final_bound));
  }
  return v;
}

SfdcChain extend_chain(const SfdcChain& c, const DecompositionWitness& w2) {
  if (w2.space() != c.space() || !(w2.domain.members == c.domain.members))
    throw Error("invalid-witness", "continuation witness must cover the same domain");
  SfdcChain tail = build_chain(w2);
  SfdcChain out = c;
  for (size_t i = 1; i < tail.stages.size(); ++i) {
    std::vector<Subspace> stage;
    for (const auto& a : c.stages.back())
      for (const auto& b : tail.stages[i]) {
        std::vector<int> meet;
        std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(),
                              b.members.end(), std::back_inserter(meet));
        if (!meet.empty()) stage.emplace_back(c.space(), std::move(meet));
      }
    sort_stage(stage);
    out.stages.push_back(std::move(stage));
    out.link_gaps.push_back(tail.link_gaps[i - 1]);
  }
  out.final_bound = Num(0);
  for (const auto& piece : out.stages.back())
    out.final_bound = num_max(out.final_bound, diameter(piece));
  return out;
}

}  // namespace coarse
