#pragma once

#include "coarse/decomp.hpp"
#include "coarse/kernel.hpp"
#include "coarse/sfdc.hpp"

#include <json.hpp>

#include <string>

namespace coarse::io {

using nlohmann::json;

/// Kernel certificate payload: the kernel plus its measured variation and
/// the assembly bounds when it came out of assemble.
struct KernelCertificate {
  Kernel kernel;
  Num measured_variation;
  std::optional<Num> paper_bound;
  std::optional<Num> used_radii_bound;
};

json num_to_json(const Num& v);
Num num_from_json(const json& j);

json space_to_json(const SpacePtr& space);
SpacePtr space_from_json(const json& j);

json witness_to_json(const DecompositionWitness& w);
DecompositionWitness witness_from_json(const json& j);
/// Binds the witness to an already-built space (the embedded space JSON
/// must match it structurally).
DecompositionWitness witness_from_json(const json& j, const SpacePtr& space);

json kernel_to_json(const KernelCertificate& c);
KernelCertificate kernel_from_json(const json& j);

json chain_to_json(const SfdcChain& c);
SfdcChain chain_from_json(const json& j);

/// Map file: domain space, image ids into a codomain space, and the two
/// piecewise-linear controls as breakpoint lists.
struct MapCertificate {
  CoarseMap map;
  ControlFunction rho1;
  ControlFunction rho2;
};

json map_to_json(const MapCertificate& m);
/// The codomain space is carried by the file itself.
MapCertificate map_from_json(const json& j);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const json& j);

/// Throws parse-error on missing or malformed files.
json load_file(const std::string& path);
void save_file(const std::string& path, const json& j);

enum class CertificateKind { Space, Witness, Kernel, Chain, Map };
CertificateKind detect_kind(const json& j);

}  // namespace coarse::io
