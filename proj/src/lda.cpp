#include "mqe/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mqe/error.hpp"
#include "mqe/stats.hpp"

namespace mqe {

LdaModel lda_fit(const Matrix& x, const std::vector<std::string>& labels,
                 std::optional<double> shrinkage) {
  require(static_cast<Index>(labels.size()) == x.rows(), ErrorKind::invalid_argument,
          "label count differs from row count");
  require(x.allFinite(), ErrorKind::invalid_argument, "LDA input has non-finite entries");
  LdaModel model;
  model.classes = class_list(labels);
  const Index c = static_cast<Index>(model.classes.size());
  const Index p = x.cols();
  const Index n = x.rows();
  require(c >= 2, ErrorKind::invalid_argument, "LDA needs at least two classes in the training set");

  model.means = Matrix::Zero(c, p);
  model.log_priors.resize(c);
  Matrix scatter = Matrix::Zero(p, p);
  for (Index k = 0; k < c; ++k) {
    const auto members = class_members(labels, model.classes[static_cast<std::size_t>(k)]);
    for (Index i : members) model.means.row(k) += x.row(i);
    model.means.row(k) /= static_cast<double>(members.size());
    for (Index i : members) {
      const Eigen::RowVectorXd r = x.row(i) - model.means.row(k);
      scatter += r.transpose() * r;
    }
    model.log_priors[k] = std::log(static_cast<double>(members.size()) / static_cast<double>(n));
  }
  model.covariance = scatter / static_cast<double>(std::max<Index>(n - c, 1));
  if (shrinkage) {
    model.shrinkage = *shrinkage;
  } else {
    const double tr = model.covariance.trace();
    model.shrinkage = tr > 0.0 ? 1e-6 * tr / static_cast<double>(p) : 1e-6;
  }
  require(model.shrinkage >= 0.0, ErrorKind::invalid_argument, "shrinkage must be >= 0");
  model.covariance += model.shrinkage * Matrix::Identity(p, p);

  Eigen::LLT<Matrix> llt(model.covariance);
  require(llt.info() == Eigen::Success, ErrorKind::singular,
          "pooled covariance is singular; use a positive shrinkage");
  model.weights = llt.solve(model.means.transpose());
  require(model.weights.allFinite(), ErrorKind::singular, "pooled covariance is singular");
  model.offsets.resize(c);
  for (Index k = 0; k < c; ++k)
    model.offsets[k] = -0.5 * model.means.row(k).dot(model.weights.col(k)) + model.log_priors[k];
  return model;
}

std::vector<std::string> lda_predict(const LdaModel& model, const Matrix& x) {
  require(x.cols() == model.means.cols(), ErrorKind::dimension_mismatch,
          "LDA input has " + std::to_string(x.cols()) + " columns, model expects " +
              std::to_string(model.means.cols()));
  const Matrix scores = (x * model.weights).rowwise() + model.offsets.transpose();
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < scores.cols(); ++k)
      if (scores(i, k) > scores(i, best)) best = k;
    out.push_back(model.classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

namespace {

void shuffle(std::vector<Index>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

std::size_t rounded_count(double frac, std::size_t n) {
  return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
}

}  // namespace

Split train_test_split(Index n, double train_frac, RngStream& rng,
                       const std::optional<std::vector<std::string>>& labels) {
  require(n >= 1, ErrorKind::invalid_argument, "cannot split an empty set");
  require(train_frac > 0.0 && train_frac < 1.0, ErrorKind::invalid_argument,
          "train fraction must lie in (0, 1)");
  Split split;
  std::vector<std::vector<Index>> groups;
  if (labels) {
    require(static_cast<Index>(labels->size()) == n, ErrorKind::invalid_argument,
            "label count differs from N");
    bool ok = true;
    for (const auto& cls : class_list(*labels)) {
      groups.push_back(class_members(*labels, cls));
      ok = ok && groups.back().size() >= 2;
    }
    split.stratified = ok;
    if (!ok) groups.clear();
  }
  if (groups.empty()) {
    groups.emplace_back(static_cast<std::size_t>(n));
    std::iota(groups.back().begin(), groups.back().end(), Index{0});
  }
  for (auto& g : groups) {
    shuffle(g, rng);
    const std::size_t k = rounded_count(train_frac, g.size());
    split.train.insert(split.train.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k));
    split.test.insert(split.test.end(), g.begin() + static_cast<std::ptrdiff_t>(k), g.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace mqe
