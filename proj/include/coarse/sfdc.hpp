#pragma once

#include "coarse/decomp.hpp"

namespace coarse {

/// Straight finite-decomposition chain: stage 0 is {X}; every element of
/// stage i-1 splits into two link_gaps[i-1]-disjoint unions of stage-i
/// elements; the final stage is uniformly bounded by final_bound.
struct SfdcChain {
  Subspace domain;
  std::vector<std::vector<Subspace>> stages;  // stages[0] = {domain}
  std::vector<Num> link_gaps;                 // one per link
  Num final_bound;

  const SpacePtr& space() const { return domain.parent; }
};

/// Builds the set-difference chain of a verified witness: stage i collects
/// each family-j piece (j <= i) shaved by all earlier families, plus the
/// not-yet-covered residual; empty differences are dropped. Coverage makes
/// the final residual empty. Throws invalid-witness when w fails its
/// self-check.
SfdcChain build_chain(const DecompositionWitness& w);

/// Checks every link: stage-i elements partition each stage-(i-1) element
/// and admit a two-part split with both parts link-gap-disjoint (conflict-
/// graph two-coloring); each stage partitions the domain; the final stage
/// respects final_bound.
Verdict verify_chain(const SfdcChain& c);

/// Continuation: refines the final stage by intersecting with the chain of
/// a second verified witness on the same domain, concatenating link gaps.
/// Empty intersections are dropped.
SfdcChain extend_chain(const SfdcChain& c, const DecompositionWitness& w2);

}  // namespace coarse
