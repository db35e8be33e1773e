#include "mqe/family_io.hpp"

#include "mqe/error.hpp"
#include "mqe/io.hpp"

namespace mqe {

void save_quantized_family(const QuantizedFamily& qf, const fs::path& dir) {
  fs::create_directories(dir);
  if (qf.shared_support()) {
    save_matrix(qf.centers.front().points(), dir / "centers.csv");
  } else {
    for (std::size_t i = 0; i < qf.centers.size(); ++i)
      save_matrix(qf.centers[i].points(), dir / ("centers_" + std::to_string(i) + ".csv"));
  }
  save_matrix(qf.weights, dir / "weights.csv");
  json meta = {{"scheme", to_string(qf.scheme)},
               {"K", qf.K},
               {"seed", qf.seed},
               {"eps_K", qf.eps_K},
               {"lloyd_iters", qf.lloyd_iters}};
  write_json(meta, dir / "meta.json");
}

QuantizedFamily load_quantized_family(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  QuantizedFamily qf;
  try {
    qf.scheme = parse_scheme(meta.at("scheme").get<std::string>());
    qf.K = meta.at("K").get<Index>();
    qf.seed = meta.at("seed").get<std::uint64_t>();
    qf.eps_K = meta.at("eps_K").get<double>();
    qf.lloyd_iters = meta.at("lloyd_iters").get<std::vector<int>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, (dir / "meta.json").string() + ": " + e.what());
  }
  qf.weights = load_matrix(dir / "weights.csv");
  require(qf.weights.cols() == qf.K, ErrorKind::dimension_mismatch,
          (dir / "weights.csv").string() + ": expected " + std::to_string(qf.K) + " columns");
  if (qf.shared_support()) {
    qf.centers.emplace_back(load_matrix(dir / "centers.csv"));
  } else {
    for (Index i = 0; i < qf.weights.rows(); ++i)
      qf.centers.emplace_back(load_matrix(dir / ("centers_" + std::to_string(i) + ".csv")));
  }
  for (const auto& c : qf.centers)
    require(c.size() == qf.K, ErrorKind::dimension_mismatch, "center file row count differs from K");
  return qf;
}

}  // namespace mqe
