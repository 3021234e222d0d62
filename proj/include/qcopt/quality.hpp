#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcopt/core.hpp"
#include "qcopt/error.hpp"

namespace qcopt {

template <typename Scalar>
using ScoreVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Reference and predicted per-model scores for one section.
template <typename Scalar>
struct ScoreVectors {
    ScoreVector<Scalar> actual;
    ScoreVector<Scalar> predicted;
};

template <typename Scalar>
struct LossWeights {
    Scalar alpha = Scalar(1);
    Scalar beta = Scalar(2.4);

    void validate() const {
        if (!(alpha >= Scalar(0)) || !(beta >= Scalar(0)))
            throw ValidationError("loss weights must be non-negative");
        if (alpha == Scalar(0) && beta == Scalar(0)) throw ValidationError("loss weights cannot both be zero");
    }
};

namespace detail {

template <typename Scalar>
Eigen::Index check_batch(std::span<const ScoreVectors<Scalar>> batch) {
    if (batch.empty()) throw ValidationError("loss of an empty batch is undefined");
    const Eigen::Index k = batch.front().actual.size();
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch[b].actual.size() != k || batch[b].predicted.size() != k)
            throw ValidationError("batch item " + std::to_string(b) + " has mismatched score lengths");
    }
    return k;
}

}  // namespace detail

/// Mean over the batch of ||y - y_hat||^2.
template <typename Scalar>
Scalar mse_loss(std::span<const ScoreVectors<Scalar>> batch) {
    detail::check_batch(batch);
    Scalar sum(0);
    for (const auto& item : batch) sum += (item.actual - item.predicted).squaredNorm();
    return sum / static_cast<Scalar>(batch.size());
}

/// Mean over the batch of the mean over unordered model pairs (p, q) of
/// ((y_p - y_q) - (y_hat_p - y_hat_q))^2. Needs K >= 2.
template <typename Scalar>
Scalar pairwise_diff_loss(std::span<const ScoreVectors<Scalar>> batch) {
    const Eigen::Index k = detail::check_batch(batch);
    if (k < 2) throw ValidationError("pairwise difference loss needs at least two models");
    const Scalar pairs = static_cast<Scalar>(k * (k - 1) / 2);
    Scalar sum(0);
    for (const auto& item : batch) {
        // With e = y - y_hat, each pair term is (e_p - e_q)^2.
        const ScoreVector<Scalar> e = item.actual - item.predicted;
        Scalar item_sum(0);
        for (Eigen::Index p = 0; p < k; ++p)
            for (Eigen::Index q = p + 1; q < k; ++q) item_sum += (e(p) - e(q)) * (e(p) - e(q));
        sum += item_sum / pairs;
    }
    return sum / static_cast<Scalar>(batch.size());
}

template <typename Scalar>
Scalar total_loss(std::span<const ScoreVectors<Scalar>> batch, const LossWeights<Scalar>& weights) {
    weights.validate();
    Scalar total(0);
    if (weights.alpha != Scalar(0)) total += weights.alpha * mse_loss(batch);
    if (weights.beta != Scalar(0)) total += weights.beta * pairwise_diff_loss(batch);
    return total;
}

/// Score file parse error naming the offending section/model.
class ScoreFileError : public ValidationError {
public:
    ScoreFileError(const std::string& what, std::string section_id, std::string model_id)
        : ValidationError(what), section_id_(std::move(section_id)), model_id_(std::move(model_id)) {}

    const std::string& section_id() const noexcept { return section_id_; }
    const std::string& model_id() const noexcept { return model_id_; }

private:
    std::string section_id_;
    std::string model_id_;
};

/// A section of the instance has no row in the score file.
class MissingSectionError : public ScoreFileError {
public:
    using ScoreFileError::ScoreFileError;
};

/// A (section, model) cell is absent.
class MissingScoreError : public ScoreFileError {
public:
    using ScoreFileError::ScoreFileError;
};

/// A score is not a number in [0, 1].
class ScoreRangeError : public ScoreFileError {
public:
    using ScoreFileError::ScoreFileError;
};

/// The file names a section or model the instance does not have.
class UnknownIdError : public ScoreFileError {
public:
    using ScoreFileError::ScoreFileError;
};

/// Scores keyed by section id, then model id, as read from a file.
struct ScoreTable {
    std::map<std::string, std::map<std::string, double>> cells;

    /// JSON `{"scores": {section: {model: value}}}`, or CSV whose header row
    /// is `<any label>,<model id>,...` and whose rows start with a section id.
    /// The format is chosen by extension (.json or .csv).
    static ScoreTable read(const std::filesystem::path& path);
    static ScoreTable parse_json(const std::string& content);
    static ScoreTable parse_csv(const std::string& content);

    /// n x K matrix in the instance's section and model order.
    Eigen::MatrixXd to_matrix(const std::vector<Section>& sections, const std::vector<ModelProfile>& models) const;
};

/// Reads a score file and checks it against the instance's ids.
Eigen::MatrixXd load_scores(const std::filesystem::path& path, const RoutingInstance& instance);

/// Boundary to an external quality predictor.
class ScorePredictor {
public:
    virtual ~ScorePredictor() = default;
    /// Predicted score per model, in the predictor's model order.
    virtual Eigen::VectorXd predict(const Section& section) const = 0;
    virtual const std::vector<std::string>& model_ids() const = 0;
};

/// Serves precomputed scores looked up by section id.
class FileScorePredictor final : public ScorePredictor {
public:
    FileScorePredictor(ScoreTable table, std::vector<std::string> model_ids);
    Eigen::VectorXd predict(const Section& section) const override;
    const std::vector<std::string>& model_ids() const override { return model_ids_; }

private:
    ScoreTable table_;
    std::vector<std::string> model_ids_;
};

/// Scores every model 0.5 regardless of input.
class UniformPredictor final : public ScorePredictor {
public:
    explicit UniformPredictor(std::vector<std::string> model_ids) : model_ids_(std::move(model_ids)) {}
    Eigen::VectorXd predict(const Section&) const override {
        return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(model_ids_.size()), 0.5);
    }
    const std::vector<std::string>& model_ids() const override { return model_ids_; }

private:
    std::vector<std::string> model_ids_;
};

/// Runs the predictor over every section; rows follow `sections`.
Eigen::MatrixXd predict_scores(const ScorePredictor& predictor, const std::vector<Section>& sections);

}  // namespace qcopt
