#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mqe/io.hpp"

namespace mqe::cli {

struct RunConfig {
  std::string subcommand;
  std::string dataset;
  std::string family;
  std::string params;
  std::string gram;
  std::string out;

  Index K = 16;
  std::vector<Index> K_grid{4, 8, 16, 32, 64, 128};
  std::string scheme = "mean";
  std::vector<std::string> schemes{"mean", "each"};
  std::string embedding = "lot";
  std::string kernel = "rbf:1";
  std::string reference = "ball";
  std::string reference_file;
  Index m0 = 500;
  Index q = 10;
  Index features = 256;
  Index landmarks = 32;
  std::uint64_t seed = 0;
  int restarts = 1;
  bool centered = false;
  bool rff_raw = false;
  bool subsample = true;
  std::size_t subsample_size = 0;
  double train_frac = 0.75;
  std::vector<double> lambdas{0.5, 1.0, 2.0};

  Index N = 60;
  Index d = 2;
  Index m = 2000;
  Index classes = 3;
  double min_center_distance = 1.0;

  json to_json() const;
  static RunConfig from_json(const json& j);
};

}  // namespace mqe::cli
