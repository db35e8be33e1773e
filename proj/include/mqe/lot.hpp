#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mqe/io.hpp"
#include "mqe/measure.hpp"

namespace mqe {

enum class ReferenceKind { uniform_cube, unit_ball_radial, external_file };

std::string to_string(ReferenceKind k);
ReferenceKind parse_reference_kind(const std::string& s);

/// Uniformly weighted sample y_1..y_m0 of the reference measure.
struct ReferenceMeasure {
  ReferenceKind kind = ReferenceKind::uniform_cube;
  std::uint64_t seed = 0;
  std::string source;  // file path for external references
  PointMatrix sample;

  Index size() const noexcept { return sample.rows(); }
  Index dim() const noexcept { return sample.cols(); }
  /// Content hash of the sample; embeddings carry it to detect mixing references.
  std::uint64_t id() const;
  DiscreteMeasure measure() const { return DiscreteMeasure(sample); }
  json descriptor() const;
};

/// n points X = R Z / |Z| with R ~ U[0,1], Z ~ N(0, I_d).
PointMatrix sample_unit_ball_radial(Index n, Index d, RngStream& rng);
PointMatrix sample_uniform_cube(Index n, Index d, RngStream& rng);

ReferenceMeasure make_reference(ReferenceKind kind, Index d, Index m0, RngStream& rng);
ReferenceMeasure reference_from_file(const std::filesystem::path& path, Index d);

/// reference.csv + reference.json
void save_reference(const ReferenceMeasure& ref, const std::filesystem::path& dir);
ReferenceMeasure load_reference(const std::filesystem::path& dir);

/// Rows T(y_j) - y_j over the reference sample.
struct LotEmbedding {
  PointMatrix values;
  std::uint64_t reference_id = 0;
};

LotEmbedding lot_embed(const DiscreteMeasure& m, const ReferenceMeasure& ref);
std::vector<LotEmbedding> lot_embed_all(const std::vector<DiscreteMeasure>& family,
                                        const ReferenceMeasure& ref);

/// (1/m0) sum_j u_j . v_j
double lot_inner(const LotEmbedding& u, const LotEmbedding& v);
double lot_distance(const LotEmbedding& u, const LotEmbedding& v);
Matrix lot_gram(const std::vector<LotEmbedding>& family);

}  // namespace mqe
