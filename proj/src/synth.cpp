#include "mqe/synth.hpp"

#include <cmath>

#include "mqe/error.hpp"
#include "mqe/lot.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

void ShiftScalingParams::validate() const {
  require(N >= 1 && d >= 1 && m >= 1, ErrorKind::invalid_argument, "N, d and m must be >= 1");
  require(static_cast<Index>(shifts.size()) == N && static_cast<Index>(roots.size()) == N,
          ErrorKind::invalid_argument, "need one shift and one scaling per measure");
  for (Index i = 0; i < N; ++i) {
    const auto& s = roots[static_cast<std::size_t>(i)];
    require(shifts[static_cast<std::size_t>(i)].size() == d && s.rows() == d && s.cols() == d,
            ErrorKind::dimension_mismatch, "shift or scaling of measure " + std::to_string(i) + " has wrong size");
    require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::invalid_argument,
            "scaling of measure " + std::to_string(i) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    require(eig.eigenvalues().minCoeff() >= -1e-12, ErrorKind::invalid_argument,
            "scaling of measure " + std::to_string(i) + " is not positive semi-definite");
  }
  if (labels)
    require(static_cast<Index>(labels->size()) == N, ErrorKind::invalid_argument, "label count differs from N");
}

namespace {

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

json ShiftScalingParams::to_json() const {
  json j = {{"N", N}, {"d", d}, {"m", m}, {"seed", seed}};
  j["shifts"] = json::array();
  j["roots"] = json::array();
  for (const auto& b : shifts) j["shifts"].push_back(vector_json(b));
  for (const auto& s : roots) {
    json rows = json::array();
    for (Index r = 0; r < s.rows(); ++r) rows.push_back(vector_json(s.row(r).transpose()));
    j["roots"].push_back(rows);
  }
  j["labels"] = labels ? json(*labels) : json(nullptr);
  j["class_centers"] = json::array();
  for (const auto& c : class_centers) j["class_centers"].push_back(vector_json(c));
  j["min_center_distance"] = min_center_distance;
  j["center_draws"] = center_draws;
  return j;
}

ShiftScalingParams ShiftScalingParams::from_json(const json& j) {
  ShiftScalingParams p;
  try {
    p.N = j.at("N").get<Index>();
    p.d = j.at("d").get<Index>();
    p.m = j.at("m").get<Index>();
    p.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& b : j.at("shifts")) p.shifts.push_back(vector_from(b));
    for (const auto& rows : j.at("roots")) {
      Matrix s(static_cast<Index>(rows.size()), p.d);
      for (std::size_t r = 0; r < rows.size(); ++r) s.row(static_cast<Index>(r)) = vector_from(rows[r]).transpose();
      p.roots.push_back(std::move(s));
    }
    if (j.contains("labels") && !j.at("labels").is_null())
      p.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("class_centers"))
      for (const auto& c : j.at("class_centers")) p.class_centers.push_back(vector_from(c));
    p.min_center_distance = j.value("min_center_distance", 0.0);
    p.center_draws = j.value("center_draws", 0);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("synthetic parameters: ") + e.what());
  }
  p.validate();
  return p;
}

PointMatrix sample_base(Index n, Index d, RngStream& rng) { return sample_unit_ball_radial(n, d, rng); }

Dataset gen_dataset(const ShiftScalingParams& params) {
  params.validate();
  const RngStream root(params.seed, 1);
  std::vector<std::optional<DiscreteMeasure>> built(static_cast<std::size_t>(params.N));
  parallel_for(built.size(), [&](std::size_t i) {
    RngStream rng = root.substream(i);
    const PointMatrix x = sample_base(params.m, params.d, rng);
    PointMatrix y = x * params.roots[i].transpose();
    y.rowwise() += params.shifts[i].transpose();
    built[i] = DiscreteMeasure(std::move(y));
  });
  std::vector<DiscreteMeasure> measures;
  measures.reserve(built.size());
  for (auto& b : built) measures.push_back(std::move(*b));
  return Dataset(std::move(measures), params.labels);
}

ShiftScalingParams default_params(Index N, Index d, Index m, Index classes, std::uint64_t seed,
                                  double min_center_distance, int max_draws) {
  require(classes >= 1, ErrorKind::invalid_argument, "need at least one class");
  require(max_draws >= 1, ErrorKind::invalid_argument, "max_draws must be >= 1");
  ShiftScalingParams p;
  p.N = N;
  p.d = d;
  p.m = m;
  p.seed = seed;
  p.min_center_distance = min_center_distance;
  RngStream rng(seed, 0);

  bool separated = false;
  while (!separated) {
    require(p.center_draws < max_draws, ErrorKind::invalid_argument,
            "could not place " + std::to_string(classes) + " class centers at distance " +
                format_double(min_center_distance) + " within " + std::to_string(max_draws) + " draws");
    ++p.center_draws;
    p.class_centers.clear();
    for (Index c = 0; c < classes; ++c) {
      Vector beta(d);
      for (Index t = 0; t < d; ++t) beta[t] = rng.uniform(-2.0, 2.0);
      p.class_centers.push_back(beta);
    }
    separated = true;
    for (Index a = 0; a < classes && separated; ++a)
      for (Index b = a + 1; b < classes && separated; ++b)
        separated = (p.class_centers[static_cast<std::size_t>(a)] -
                     p.class_centers[static_cast<std::size_t>(b)]).norm() >= min_center_distance;
  }

  std::vector<std::string> labels;
  for (Index i = 0; i < N; ++i) {
    const auto c = static_cast<std::size_t>(i % classes);
    Vector b = p.class_centers[c];
    for (Index t = 0; t < d; ++t) b[t] += 0.5 * rng.normal();
    Vector s(d);
    for (Index t = 0; t < d; ++t) s[t] = rng.uniform(0.75, 1.5);
    p.shifts.push_back(b);
    p.roots.push_back(s.asDiagonal());
    labels.push_back("c" + std::to_string(c));
  }
  p.labels = labels;
  return p;
}

Matrix true_lot_gram(const ShiftScalingParams& params) {
  params.validate();
  const double c = 1.0 / (3.0 * static_cast<double>(params.d));
  const Matrix id = Matrix::Identity(params.d, params.d);
  Matrix g(params.N, params.N);
  for (Index i = 0; i < params.N; ++i) {
    for (Index j = i; j < params.N; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      const double v = params.shifts[a].dot(params.shifts[b]) +
                       c * ((params.roots[a] - id).cwiseProduct(params.roots[b] - id)).sum();
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix true_kme_gram(const ShiftScalingParams& params) {
  params.validate();
  const double c = 1.0 / (3.0 * static_cast<double>(params.d));
  std::vector<Matrix> cov;
  for (const auto& s : params.roots) cov.push_back(s * s);
  Matrix g(params.N, params.N);
  for (Index i = 0; i < params.N; ++i) {
    for (Index j = i; j < params.N; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      const Vector& bi = params.shifts[a];
      const Vector& bj = params.shifts[b];
      const double dot = bi.dot(bj);
      const double v = dot + dot * dot + c * bi.dot(cov[b] * bi) + c * bj.dot(cov[a] * bj) +
                       c * c * cov[a].cwiseProduct(cov[b]).sum();
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace mqe
