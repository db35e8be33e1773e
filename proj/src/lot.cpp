#include "mqe/lot.hpp"

#include <cmath>
#include <cstring>

#include "mqe/error.hpp"
#include "mqe/ot.hpp"
#include "mqe/parallel.hpp"

namespace mqe {

std::string to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::uniform_cube: return "uniform-cube";
    case ReferenceKind::unit_ball_radial: return "unit-ball-radial";
    case ReferenceKind::external_file: return "external-file";
  }
  return "?";
}

ReferenceKind parse_reference_kind(const std::string& s) {
  if (s == "uniform-cube" || s == "cube") return ReferenceKind::uniform_cube;
  if (s == "unit-ball-radial" || s == "ball") return ReferenceKind::unit_ball_radial;
  if (s == "external-file" || s == "file") return ReferenceKind::external_file;
  fail(ErrorKind::invalid_argument, "unknown reference kind '" + s + "'");
}

std::uint64_t ReferenceMeasure::id() const {
  // FNV-1a over the shape and the raw coordinate bits.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(sample.rows()));
  mix(static_cast<std::uint64_t>(sample.cols()));
  for (Index i = 0; i < sample.size(); ++i) {
    std::uint64_t bits;
    const double v = sample.data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  return h;
}

json ReferenceMeasure::descriptor() const {
  json j = {{"kind", to_string(kind)}, {"seed", seed}, {"m0", size()}, {"dim", dim()}, {"id", id()}};
  if (kind == ReferenceKind::external_file) j["source"] = source;
  return j;
}

PointMatrix sample_unit_ball_radial(Index n, Index d, RngStream& rng) {
  PointMatrix out(n, d);
  Vector z(d);
  for (Index i = 0; i < n; ++i) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (Index t = 0; t < d; ++t) z[t] = rng.normal();
      norm = z.norm();
    }
    const double r = rng.uniform01();
    out.row(i) = (r / norm) * z.transpose();
  }
  return out;
}

PointMatrix sample_uniform_cube(Index n, Index d, RngStream& rng) {
  PointMatrix out(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index t = 0; t < d; ++t) out(i, t) = rng.uniform01();
  return out;
}

ReferenceMeasure make_reference(ReferenceKind kind, Index d, Index m0, RngStream& rng) {
  require(m0 >= 1, ErrorKind::invalid_argument, "reference size m0 must be >= 1");
  require(d >= 1, ErrorKind::invalid_argument, "dimension must be >= 1");
  ReferenceMeasure ref;
  ref.kind = kind;
  ref.seed = rng.seed();
  switch (kind) {
    case ReferenceKind::uniform_cube: ref.sample = sample_uniform_cube(m0, d, rng); break;
    case ReferenceKind::unit_ball_radial: ref.sample = sample_unit_ball_radial(m0, d, rng); break;
    case ReferenceKind::external_file:
      fail(ErrorKind::invalid_argument, "external references are loaded with reference_from_file");
  }
  return ref;
}

ReferenceMeasure reference_from_file(const std::filesystem::path& path, Index d) {
  ReferenceMeasure ref;
  ref.kind = ReferenceKind::external_file;
  ref.source = path.string();
  ref.sample = load_measure_csv(path, d, false).points();
  return ref;
}

void save_reference(const ReferenceMeasure& ref, const std::filesystem::path& dir) {
  save_matrix(ref.sample, dir / "reference.csv");
  write_json(ref.descriptor(), dir / "reference.json");
}

ReferenceMeasure load_reference(const std::filesystem::path& dir) {
  const json j = read_json(dir / "reference.json");
  ReferenceMeasure ref;
  try {
    ref.kind = parse_reference_kind(j.at("kind").get<std::string>());
    ref.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("source")) ref.source = j.at("source").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, (dir / "reference.json").string() + ": " + e.what());
  }
  ref.sample = load_matrix(dir / "reference.csv");
  return ref;
}

LotEmbedding lot_embed(const DiscreteMeasure& m, const ReferenceMeasure& ref) {
  require(m.dim() == ref.dim(), ErrorKind::dimension_mismatch,
          "measure dimension " + std::to_string(m.dim()) + " differs from reference dimension " +
              std::to_string(ref.dim()));
  const DiscreteMeasure source = ref.measure();
  const TransportPlan plan = solve_ot(source, m);
  LotEmbedding e;
  e.values = barycentric_projection(plan, source, m) - ref.sample;
  e.reference_id = ref.id();
  return e;
}

std::vector<LotEmbedding> lot_embed_all(const std::vector<DiscreteMeasure>& family,
                                        const ReferenceMeasure& ref) {
  std::vector<LotEmbedding> out(family.size());
  parallel_for(family.size(), [&](std::size_t i) { out[i] = lot_embed(family[i], ref); });
  return out;
}

namespace {
void require_same_reference(const LotEmbedding& u, const LotEmbedding& v) {
  require(u.reference_id == v.reference_id && u.values.rows() == v.values.rows() &&
              u.values.cols() == v.values.cols(),
          ErrorKind::invalid_argument, "embeddings were computed against different references");
}
}  // namespace

double lot_inner(const LotEmbedding& u, const LotEmbedding& v) {
  require_same_reference(u, v);
  double s = 0.0;
  const Index n = u.values.size();
  const double* a = u.values.data();
  const double* b = v.values.data();
  for (Index i = 0; i < n; ++i) s += a[i] * b[i];
  return s / static_cast<double>(u.values.rows());
}

double lot_distance(const LotEmbedding& u, const LotEmbedding& v) {
  require_same_reference(u, v);
  LotEmbedding diff{u.values - v.values, u.reference_id};
  return std::sqrt(std::max(0.0, lot_inner(diff, diff)));
}

Matrix lot_gram(const std::vector<LotEmbedding>& family) {
  require(!family.empty(), ErrorKind::invalid_argument, "empty embedding family");
  const std::size_t n = family.size();
  for (std::size_t i = 1; i < n; ++i) require_same_reference(family[0], family[i]);
  Matrix g(static_cast<Index>(n), static_cast<Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = lot_inner(family[i], family[j]);
      g(static_cast<Index>(i), static_cast<Index>(j)) = v;
      g(static_cast<Index>(j), static_cast<Index>(i)) = v;
    }
  });
  return g;
}

}  // namespace mqe
