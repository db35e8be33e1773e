#include "config.hpp"

#include "mqe/error.hpp"

namespace mqe::cli {

json RunConfig::to_json() const {
  return {
      {"subcommand", subcommand},
      {"dataset", dataset},
      {"family", family},
      {"params", params},
      {"gram", gram},
      {"out", out},
      {"K", K},
      {"K_grid", K_grid},
      {"scheme", scheme},
      {"schemes", schemes},
      {"embedding", embedding},
      {"kernel", kernel},
      {"reference", reference},
      {"reference_file", reference_file},
      {"m0", m0},
      {"q", q},
      {"features", features},
      {"landmarks", landmarks},
      {"seed", seed},
      {"restarts", restarts},
      {"centered", centered},
      {"rff_raw", rff_raw},
      {"subsample", subsample},
      {"subsample_size", subsample_size},
      {"train_frac", train_frac},
      {"lambdas", lambdas},
      {"N", N},
      {"d", d},
      {"m", m},
      {"classes", classes},
      {"min_center_distance", min_center_distance},
  };
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    j.at("subcommand").get_to(c.subcommand);
    j.at("dataset").get_to(c.dataset);
    j.at("family").get_to(c.family);
    j.at("params").get_to(c.params);
    j.at("gram").get_to(c.gram);
    j.at("out").get_to(c.out);
    j.at("K").get_to(c.K);
    j.at("K_grid").get_to(c.K_grid);
    j.at("scheme").get_to(c.scheme);
    j.at("schemes").get_to(c.schemes);
    j.at("embedding").get_to(c.embedding);
    j.at("kernel").get_to(c.kernel);
    j.at("reference").get_to(c.reference);
    j.at("reference_file").get_to(c.reference_file);
    j.at("m0").get_to(c.m0);
    j.at("q").get_to(c.q);
    j.at("features").get_to(c.features);
    j.at("landmarks").get_to(c.landmarks);
    j.at("seed").get_to(c.seed);
    j.at("restarts").get_to(c.restarts);
    j.at("centered").get_to(c.centered);
    j.at("rff_raw").get_to(c.rff_raw);
    j.at("subsample").get_to(c.subsample);
    j.at("subsample_size").get_to(c.subsample_size);
    j.at("train_frac").get_to(c.train_frac);
    j.at("lambdas").get_to(c.lambdas);
    j.at("N").get_to(c.N);
    j.at("d").get_to(c.d);
    j.at("m").get_to(c.m);
    j.at("classes").get_to(c.classes);
    j.at("min_center_distance").get_to(c.min_center_distance);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed run config: ") + e.what());
  }
  return c;
}

}  // namespace mqe::cli
