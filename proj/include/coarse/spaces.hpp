#pragma once

#include "coarse/metric.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace coarse {

enum class GridNorm { L1, L2 };

/// Lattice box [0, side-1]^dim. L1 boxes are exact; L2 boxes are built as
/// nested l2-products of l1 lines (row-major point ids either way).
SpacePtr build_grid_box(int dim, int side, GridNorm norm);

struct WeightedEdge {
  long long u;
  long long v;
  Rat weight;  // positive
};

/// Shortest-path metric of a connected weighted graph, exact rationals.
SpacePtr build_graph_metric(const std::vector<WeightedEdge>& edges);

SpacePtr build_product(const SpacePtr& left, const SpacePtr& right);

struct CayleyPreset {
  enum class Kind { Free, FreeAbelian, Dihedral, LamplighterTruncation };
  Kind kind;
  int param;  // rank / rank / n / window depth
  std::vector<Rat> generator_weights;  // per generator pair; default all 1
};

CayleyPreset parse_preset(const std::string& text);  // "free:2", "dihedral:4", ...

/// A Cayley ball together with enough group structure for invariance checks.
struct CayleyBall {
  SpacePtr space;
  std::vector<std::string> labels;  // normal form per point index
  /// In-ball product g*h; nullopt when the product leaves the ball.
  std::function<std::optional<int>(int, int)> multiply;
  /// Weighted word length of element i.
  std::function<Num(int)> word_length;
};

/// All elements at weighted word length <= radius from the identity, with
/// the left-invariant weighted word metric d(g,h) = |g^{-1} h|.
CayleyBall build_cayley_ball(const CayleyPreset& preset, const Rat& radius);

/// Builds a space from a textual descriptor: path:N, grid:DIM:SIDE,
/// grid-l2:DIM:SIDE, cycle:N, tree:DEPTH (complete binary, unit edges),
/// free:RANK:RADIUS, free-abelian:RANK:RADIUS, dihedral:N:RADIUS,
/// lamplighter:DEPTH:RADIUS. The descriptor becomes the space name.
SpacePtr build_named_space(const std::string& desc);

/// Coordinate view of a space whose metric is an l1 grid or a nested
/// l2-product of l1 lines; nullopt otherwise. Used by the brick search.
struct GridShape {
  std::vector<int> sides;  // per axis, row-major from the slowest axis
  GridNorm norm;
};
std::optional<GridShape> grid_shape(const SpacePtr& space);

}  // namespace coarse
