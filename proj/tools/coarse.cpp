#include "coarse/io.hpp"
#include "coarse/spaces.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace coarse;
using io::json;

namespace {

std::vector<Num> parse_sequence(const std::string& csv) {
  std::vector<Num> out;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    std::string item =
        comma == std::string::npos ? csv.substr(start) : csv.substr(start, comma - start);
    if (!item.empty()) out.push_back(num_from_string(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error("parse-error", "empty gap sequence");
  return out;
}

SearchStrategy parse_strategy(const std::string& name, const SpacePtr& space) {
  if (name == "brick") return SearchStrategy::ShiftedBrick;
  if (name == "greedy") return SearchStrategy::Greedy;
  if (name == "exhaustive") return SearchStrategy::Exhaustive;
  if (name == "auto")
    return grid_shape(space) ? SearchStrategy::ShiftedBrick : SearchStrategy::Greedy;
  throw Error("parse-error", "unknown strategy " + name);
}

Searcher make_searcher(const std::string& name, const SpacePtr& space) {
  SearchStrategy strategy = parse_strategy(name, space);
  return [strategy](const Subspace& s, const DecompositionRequest& req) {
    return search_decomposition(s, req, strategy);
  };
}

int report_verdict(const Verdict& v) {
  for (const auto& violation : v.violations) std::cerr << violation << "\n";
  return v.ok ? 0 : 1;
}

/// Recomputes a kernel certificate's claims: validity of the declared
/// support radius, the recorded variation, and the used-radii bound.
int verify_kernel(const io::KernelCertificate& cert) {
  Verdict v;
  try {
    cert.kernel.validate();
  } catch (const Error& e) {
    v.fail(e.what());
  }
  if (v.ok) {
    VariationReport rep = measure_variation(cert.kernel);
    Num diff = (rep.epsilon - cert.measured_variation).abs();
    bool match = cert.measured_variation.exact() && rep.epsilon.exact()
                     ? rep.epsilon == cert.measured_variation
                     : diff.value() <= Num::kEps;
    if (!match)
      v.fail("recorded variation " + num_to_string(cert.measured_variation) +
             " does not match recomputed " + num_to_string(rep.epsilon));
    if (cert.used_radii_bound && !le_approx(rep.epsilon, *cert.used_radii_bound))
      v.fail("variation " + num_to_string(rep.epsilon) + " exceeds the certified bound " +
             num_to_string(*cert.used_radii_bound));
  }
  return report_verdict(v);
}

int verify_file(const std::string& path) {
  json j = io::load_file(path);
  switch (io::detect_kind(j)) {
    case io::CertificateKind::Space: {
      SpacePtr space = io::space_from_json(j);
      try {
        space->validate();
      } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
      }
      return 0;
    }
    case io::CertificateKind::Witness:
      return report_verdict(verify_witness(io::witness_from_json(j)));
    case io::CertificateKind::Kernel:
      return verify_kernel(io::kernel_from_json(j));
    case io::CertificateKind::Chain:
      return report_verdict(verify_chain(io::chain_from_json(j)));
    case io::CertificateKind::Map: {
      io::MapCertificate m = io::map_from_json(j);
      return report_verdict(check_controls({{m.map}, m.rho1, m.rho2}));
    }
  }
  return 2;
}

std::string csv_row_witness(const DecompositionWitness& w) {
  int k = 0;
  for (const auto& fam : w.families)
    if (!fam.pieces.empty()) ++k;
  return w.space()->name() + "," + std::to_string(k) + "," + num_to_string(w.piece_bound) + ",,,";
}

std::string csv_row_kernel(const io::KernelCertificate& c) {
  std::string e = c.paper_bound ? num_to_string(*c.paper_bound) : "";
  return c.kernel.space->name() + ",,," + num_to_string(c.measured_variation) + "," + e + "," +
         num_to_string(c.kernel.tight_support_radius());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarse decomposition toolkit"};
  app.require_subcommand(1);

  std::string space_desc, space_file, left_file, right_file, witness_file, map_file, out_file;
  std::string r_csv, bound_str, strategy = "auto", strategy_y = "auto";
  long long schedule_n = 1;
  std::vector<std::string> report_files;
  std::string verify_path, kernel_path, chain_path;

  auto* gen = app.add_subcommand("gen", "generate a space file");
  gen->add_option("--space", space_desc, "descriptor, e.g. path:64 or grid:2:16")->required();
  gen->add_option("-o,--out", out_file)->required();

  auto* decomp_cmd = app.add_subcommand("decompose", "search a decomposition witness");
  decomp_cmd->add_option("--space", space_file)->required();
  decomp_cmd->add_option("--R", r_csv, "comma-separated gaps")->required();
  decomp_cmd->add_option("--bound", bound_str, "target piece bound");
  decomp_cmd->add_option("--strategy", strategy, "brick|greedy|exhaustive|auto");
  decomp_cmd->add_option("-o,--out", out_file)->required();

  auto* compose_cmd = app.add_subcommand("compose", "refine a witness along rearranged columns");
  compose_cmd->add_option("--witness", witness_file)->required();
  compose_cmd->add_option("--R", r_csv)->required();
  compose_cmd->add_option("--bound", bound_str);
  compose_cmd->add_option("--strategy", strategy);
  compose_cmd->add_option("-o,--out", out_file)->required();

  auto* product_cmd = app.add_subcommand("product", "decompose a product of two spaces");
  product_cmd->add_option("--left", left_file)->required();
  product_cmd->add_option("--right", right_file)->required();
  product_cmd->add_option("--R", r_csv)->required();
  product_cmd->add_option("--bound", bound_str);
  product_cmd->add_option("--strategy", strategy, "strategy for the left factor");
  product_cmd->add_option("--strategy-y", strategy_y, "strategy for the right factor");
  product_cmd->add_option("-o,--out", out_file)->required();

  auto* pullback_cmd = app.add_subcommand("pullback", "pull a witness back along a coarse map");
  pullback_cmd->add_option("--map", map_file)->required();
  pullback_cmd->add_option("--witness", witness_file)->required();
  pullback_cmd->add_option("--R", r_csv)->required();
  pullback_cmd->add_option("-o,--out", out_file)->required();

  auto* kernel_cmd = app.add_subcommand("kernel", "property-A kernels");
  auto* kernel_build = kernel_cmd->add_subcommand("build", "assemble a kernel from a witness");
  kernel_build->add_option("--witness", witness_file)->required();
  kernel_build->add_option("--schedule", schedule_n, "variation target 1/N");
  kernel_build->add_option("-o,--out", out_file)->required();
  auto* kernel_verify = kernel_cmd->add_subcommand("verify", "recheck a kernel certificate");
  kernel_verify->add_option("file", kernel_path)->required();

  auto* sfdc_cmd = app.add_subcommand("sfdc", "straight-FDC chains");
  auto* sfdc_build = sfdc_cmd->add_subcommand("build", "build a chain from a witness");
  sfdc_build->add_option("--witness", witness_file)->required();
  sfdc_build->add_option("-o,--out", out_file)->required();
  auto* sfdc_verify = sfdc_cmd->add_subcommand("verify", "recheck a chain certificate");
  sfdc_verify->add_option("file", chain_path)->required();

  auto* verify_cmd = app.add_subcommand("verify", "auto-detect and verify a certificate");
  verify_cmd->add_option("file", verify_path)->required();

  auto* report_cmd = app.add_subcommand("report", "summarize certificates as CSV");
  report_cmd->add_option("files", report_files)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      SpacePtr space = build_named_space(space_desc);
      space->validate();
      io::save_file(out_file, io::space_to_json(space));
      return 0;
    }
    if (decomp_cmd->parsed()) {
      SpacePtr space = io::space_from_json(io::load_file(space_file));
      DecompositionRequest req{parse_sequence(r_csv), std::nullopt};
      if (!bound_str.empty()) req.target_bound = num_from_string(bound_str);
      DecompositionWitness w =
          search_decomposition(whole_space(space), req, parse_strategy(strategy, space));
      Verdict v = verify_witness(w);
      if (!v.ok) return report_verdict(v);
      io::save_file(out_file, io::witness_to_json(w));
      return 0;
    }
    if (compose_cmd->parsed()) {
      DecompositionWitness outer = io::witness_from_json(io::load_file(witness_file));
      DecompositionRequest req{parse_sequence(r_csv), std::nullopt};
      if (!bound_str.empty()) req.target_bound = num_from_string(bound_str);
      DecompositionWitness w = compose_with(outer, make_searcher(strategy, outer.space()), req);
      Verdict v = verify_witness(w);
      if (!v.ok) return report_verdict(v);
      io::save_file(out_file, io::witness_to_json(w));
      return 0;
    }
    if (product_cmd->parsed()) {
      SpacePtr left = io::space_from_json(io::load_file(left_file));
      SpacePtr right = io::space_from_json(io::load_file(right_file));
      DecompositionRequest req{parse_sequence(r_csv), std::nullopt};
      if (!bound_str.empty()) req.target_bound = num_from_string(bound_str);
      DecompositionWitness w = product_decompose(left, right, req, make_searcher(strategy, left),
                                                 make_searcher(strategy_y, right));
      Verdict v = verify_witness(w);
      if (!v.ok) return report_verdict(v);
      io::save_file(out_file, io::witness_to_json(w));
      return 0;
    }
    if (pullback_cmd->parsed()) {
      io::MapCertificate m = io::map_from_json(io::load_file(map_file));
      DecompositionWitness w =
          io::witness_from_json(io::load_file(witness_file), m.map.codomain);
      DecompositionRequest req{parse_sequence(r_csv), std::nullopt};
      DecompositionWitness out = pullback_witness({{m.map}, m.rho1, m.rho2}, m.map, w, req);
      Verdict v = verify_witness(out);
      if (!v.ok) return report_verdict(v);
      io::save_file(out_file, io::witness_to_json(out));
      return 0;
    }
    if (kernel_build->parsed()) {
      DecompositionWitness w = io::witness_from_json(io::load_file(witness_file));
      Verdict v = verify_witness(w);
      if (!v.ok) return report_verdict(v);
      ScheduleParams sched = schedule(schedule_n, static_cast<int>(w.families.size()));
      AssemblyParams params{w.gaps, sched.eps, {}};
      std::vector<std::vector<Kernel>> per_piece;
      for (const auto& fam : w.families) {
        std::vector<Kernel> kernels;
        for (const auto& piece : fam.pieces) kernels.push_back(uniform_piece_kernel(piece));
        per_piece.push_back(std::move(kernels));
      }
      AssemblyResult result = assemble(w, per_piece, params);
      io::KernelCertificate cert{result.kernel, result.variation.epsilon, result.paper_bound,
                                 result.used_radii_bound};
      io::save_file(out_file, io::kernel_to_json(cert));
      return 0;
    }
    if (kernel_verify->parsed()) return verify_kernel(io::kernel_from_json(io::load_file(kernel_path)));
    if (sfdc_build->parsed()) {
      DecompositionWitness w = io::witness_from_json(io::load_file(witness_file));
      SfdcChain chain = build_chain(w);
      Verdict v = verify_chain(chain);
      if (!v.ok) return report_verdict(v);
      io::save_file(out_file, io::chain_to_json(chain));
      return 0;
    }
    if (sfdc_verify->parsed())
      return report_verdict(verify_chain(io::chain_from_json(io::load_file(chain_path))));
    if (verify_cmd->parsed()) return verify_file(verify_path);
    if (report_cmd->parsed()) {
      std::cout << "space,k,pieceBound,measuredVariation,paperE,S\n";
      for (const auto& path : report_files) {
        json j = io::load_file(path);
        switch (io::detect_kind(j)) {
          case io::CertificateKind::Witness:
            std::cout << csv_row_witness(io::witness_from_json(j)) << "\n";
            break;
          case io::CertificateKind::Kernel:
            std::cout << csv_row_kernel(io::kernel_from_json(j)) << "\n";
            break;
          default:
            throw Error("parse-error", path + ": report takes witness or kernel certificates");
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == "parse-error" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
