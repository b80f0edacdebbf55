#pragma once

#include "hostility/features.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hostility {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Column names, standardization mask and fingerprint a model is bound to.
struct ModelSchema {
    std::vector<std::string> names;
    std::vector<bool> standardized;
    std::string fingerprint;

    static ModelSchema from_layout(const FeatureLayout& layout);
    /// Anonymous schema: columns named x0.., all standardized.
    static ModelSchema dense(Eigen::Index dim);
    Eigen::Index dimension() const { return static_cast<Eigen::Index>(names.size()); }
};

struct TrainOptions {
    double lambda = 1.0;
    int max_iter = 3000;
    double tol = 1e-5; ///< stop when the gradient's max-norm drops below this
    bool single_precision = false; ///< store the standardized block as float
};

struct TrainTrace {
    std::vector<double> objective; ///< objective after each accepted step, starting at the initial point
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
};

struct LinearModel {
    Eigen::VectorXd weights; ///< in standardized feature space
    double bias = 0.0;
    double lambda = 1.0;
    Eigen::VectorXd mean;  ///< per column; 0 where not standardized
    Eigen::VectorXd scale; ///< per column; 1 where not standardized
    ModelSchema schema;
    TrainTrace trace;
};

/// Design matrix with sparse columns kept raw and standardized columns
/// materialized as a dense block.
class Design {
public:
    Design(const SparseRows& x, const std::vector<bool>& standardized, const Eigen::VectorXd& mean,
           const Eigen::VectorXd& scale);
    /// Columns ordered [sparse | dense]; `mean`/`scale` cover all columns.
    Design(SparseRows sparse, const Eigen::MatrixXd& dense, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    /// X w (w in full column order).
    Eigen::VectorXd times(const Eigen::VectorXd& w) const;
    /// X^T r in full column order.
    Eigen::VectorXd transpose_times(const Eigen::VectorXd& r) const;
    /// Keeps the dense block in single precision, halving its memory traffic.
    void use_single_precision();

private:
    Eigen::Index rows_;
    Eigen::Index cols_;
    std::vector<Eigen::Index> sparse_cols_;
    std::vector<Eigen::Index> dense_cols_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
    Eigen::MatrixXd dense_;
    Eigen::MatrixXf dense_f_;
    bool single_ = false;
};

/// Mean log-loss plus (lambda/2)||w||^2, bias unpenalized.
struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd grad_w;
    double grad_b = 0.0;
};
ObjectiveValue logistic_objective(const Design& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                                  double lambda);

/// Per-column (mean, scale) over the rows of `x` for the standardized columns.
std::pair<Eigen::VectorXd, Eigen::VectorXd> standardization(const SparseRows& x, const std::vector<bool>& standardized);

/// Full-batch gradient descent with backtracking line search.
/// Throws DataError for single-class labels, ConfigError for shape mismatch.
LinearModel train(const SparseRows& x, std::span<const int> labels, const ModelSchema& schema,
                  const TrainOptions& options = {});

/// Same, for a design split into raw sparse columns followed by standardized
/// dense columns (the schema must list them in that order).
LinearModel train(const SparseRows& sparse, const Eigen::MatrixXd& dense, std::span<const int> labels,
                  const ModelSchema& schema, const TrainOptions& options = {});

/// sigmoid(w . standardize(x) + b) for every row of `x`.
Eigen::VectorXd predict_proba(const LinearModel& model, const SparseRows& x, const std::string& fingerprint);
Eigen::VectorXd predict_proba(const LinearModel& model, const SparseRows& sparse, const Eigen::MatrixXd& dense,
                              const std::string& fingerprint);
double predict_proba(const LinearModel& model, const FeatureVector& x);

enum class CoefficientSign { Positive, Negative };

/// The k largest-magnitude weights of the requested sign, ties broken by name.
std::vector<std::pair<std::string, double>> top_coefficients(const LinearModel& model, std::size_t k,
                                                             CoefficientSign sign);

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

} // namespace hostility
