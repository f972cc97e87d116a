#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coarse/io.hpp"
#include "coarse/spaces.hpp"

using namespace coarse;
using io::json;

namespace {

DecompositionWitness sample_witness(const char* desc, long long r) {
  SpacePtr space = build_named_space(desc);
  DecompositionRequest req{{Num(r)}, std::nullopt};
  return search_decomposition(whole_space(space), req, SearchStrategy::ShiftedBrick);
}

}  // namespace

TEST_CASE("numbers serialize as reduced fractions or doubles") {
  CHECK(io::num_to_json(Num(BigInt(6), BigInt(4))) == json("3/2"));
  CHECK(io::num_to_json(Num(7)) == json("7"));
  CHECK(io::num_from_json(json("3/2")) == Num(BigInt(3), BigInt(2)));
  CHECK(io::num_from_json(json(5)) == Num(5));
  Num d = io::num_from_json(json(1.25));
  CHECK(!d.exact());
  CHECK(d.value() == 1.25);
  CHECK_THROWS_AS(io::num_from_json(json::object()), Error);
}

TEST_CASE("space round-trips for every metric kind") {
  for (const char* desc : {"path:16", "grid:2:5", "grid-l2:2:4", "cycle:8", "dihedral:4:6"}) {
    SpacePtr space = build_named_space(desc);
    json j = io::space_to_json(space);
    SpacePtr back = io::space_from_json(j);
    REQUIRE(back->size() == space->size());
    for (int a = 0; a < space->size(); ++a) {
      CHECK(back->id(a) == space->id(a));
      for (int b = 0; b < space->size(); ++b) CHECK(back->dist(a, b) == space->dist(a, b));
    }
    CHECK(io::canonical_dump(io::space_to_json(back)) == io::canonical_dump(j));
  }
}

TEST_CASE("graph space files are accepted") {
  json j;
  j["points"] = {0, 1, 2};
  j["metric"] = {{"kind", "graph"},
                 {"edges", json::array({json::array({0, 1, "1"}), json::array({1, 2, "1/2"})})}};
  SpacePtr g = io::space_from_json(j);
  CHECK(g->dist(g->index_of(0), g->index_of(2)) == Num(BigInt(3), BigInt(2)));
}

TEST_CASE("witness certificates round-trip byte-identically") {
  DecompositionWitness w = sample_witness("path:32", 4);
  json j = io::witness_to_json(w);
  DecompositionWitness back = io::witness_from_json(j);
  CHECK(io::canonical_dump(io::witness_to_json(back)) == io::canonical_dump(j));
  CHECK(verify_witness(back).ok);
  CHECK(back.depth == w.depth);
  CHECK(back.gaps == w.gaps);
}

TEST_CASE("kernel certificates round-trip") {
  SpacePtr path = build_named_space("path:12");
  io::KernelCertificate cert;
  cert.kernel = ball_average_kernel(path, Num(2));
  cert.measured_variation = measure_variation(cert.kernel).epsilon;
  cert.paper_bound = Num(BigInt(17), BigInt(5));
  cert.used_radii_bound = Num(4);
  json j = io::kernel_to_json(cert);
  io::KernelCertificate back = io::kernel_from_json(j);
  CHECK(io::canonical_dump(io::kernel_to_json(back)) == io::canonical_dump(j));
  CHECK(back.measured_variation == cert.measured_variation);
  CHECK(*back.paper_bound == *cert.paper_bound);
  for (int x = 0; x < path->size(); ++x) CHECK(back.kernel.rows[x] == cert.kernel.rows[x]);
}

TEST_CASE("chain certificates round-trip") {
  DecompositionWitness w = sample_witness("path:32", 3);
  SfdcChain c = build_chain(w);
  json j = io::chain_to_json(c);
  SfdcChain back = io::chain_from_json(j);
  CHECK(io::canonical_dump(io::chain_to_json(back)) == io::canonical_dump(j));
  CHECK(verify_chain(back).ok);
}

TEST_CASE("map certificates round-trip") {
  SpacePtr small = build_named_space("path:8");
  SpacePtr big = build_named_space("path:16");
  std::vector<int> image;
  for (int i = 0; i < 8; ++i) image.push_back(2 * i);
  io::MapCertificate m{{whole_space(small), big, image},
                       ControlFunction::identity(),
                       ControlFunction::linear(Num(2))};
  json j = io::map_to_json(m);
  io::MapCertificate back = io::map_from_json(j);
  CHECK(io::canonical_dump(io::map_to_json(back)) == io::canonical_dump(j));
  CHECK(check_controls({{back.map}, back.rho1, back.rho2}).ok);
}

TEST_CASE("kind detection") {
  DecompositionWitness w = sample_witness("path:16", 3);
  CHECK(io::detect_kind(io::witness_to_json(w)) == io::CertificateKind::Witness);
  CHECK(io::detect_kind(io::space_to_json(w.space())) == io::CertificateKind::Space);
  CHECK(io::detect_kind(io::chain_to_json(build_chain(w))) == io::CertificateKind::Chain);
  CHECK_THROWS_AS(io::detect_kind(json::object()), Error);
}

TEST_CASE("missing fields raise parse errors") {
  json j = io::witness_to_json(sample_witness("path:16", 3));
  j.erase("pieceBound");
  CHECK_THROWS_WITH_AS(io::witness_from_json(j), doctest::Contains("pieceBound"), Error);
}
