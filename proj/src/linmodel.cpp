#include "hostility/linmodel.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace hostility {

namespace {

double softplus(double z)
{
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z)
{
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double mean_log_loss(const Eigen::VectorXd& margin, std::span<const int> labels)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
        sum += softplus(margin(i)) - (labels[static_cast<std::size_t>(i)] ? margin(i) : 0.0);
    }
    return sum / static_cast<double>(margin.size());
}

} // namespace

ModelSchema ModelSchema::from_layout(const FeatureLayout& layout)
{
    return {layout.names(), layout.standardized(), layout.fingerprint()};
}

ModelSchema ModelSchema::dense(Eigen::Index dim)
{
    ModelSchema s;
    for (Eigen::Index i = 0; i < dim; ++i) {
        s.names.push_back("x" + std::to_string(i));
    }
    s.standardized.assign(static_cast<std::size_t>(dim), true);
    s.fingerprint = "dense-" + std::to_string(dim);
    return s;
}

Design::Design(const SparseRows& x, const std::vector<bool>& standardized, const Eigen::VectorXd& mean,
               const Eigen::VectorXd& scale)
    : rows_(x.rows()), cols_(x.cols())
{
    if (static_cast<Eigen::Index>(standardized.size()) != cols_ || mean.size() != cols_ || scale.size() != cols_) {
        throw ConfigError("design matrix width does not match the model schema");
    }
    std::vector<Eigen::Index> position(static_cast<std::size_t>(cols_));
    for (Eigen::Index j = 0; j < cols_; ++j) {
        auto& list = standardized[static_cast<std::size_t>(j)] ? dense_cols_ : sparse_cols_;
        position[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(list.size());
        list.push_back(j);
    }

    dense_.resize(rows_, static_cast<Eigen::Index>(dense_cols_.size()));
    for (std::size_t d = 0; d < dense_cols_.size(); ++d) {
        const auto j = dense_cols_[d];
        dense_.col(static_cast<Eigen::Index>(d)).setConstant(-mean(j) / scale(j));
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index r = 0; r < x.outerSize(); ++r) {
        for (SparseRows::InnerIterator it(x, r); it; ++it) {
            const auto j = it.col();
            const auto p = position[static_cast<std::size_t>(j)];
            if (standardized[static_cast<std::size_t>(j)]) {
                dense_(r, p) = (it.value() - mean(j)) / scale(j);
            } else {
                triplets.emplace_back(r, p, it.value());
            }
        }
    }
    sparse_.resize(rows_, static_cast<Eigen::Index>(sparse_cols_.size()));
    sparse_.setFromTriplets(triplets.begin(), triplets.end());
}

Design::Design(SparseRows sparse, const Eigen::MatrixXd& dense, const Eigen::VectorXd& mean,
               const Eigen::VectorXd& scale)
    : rows_(sparse.rows()), cols_(sparse.cols() + dense.cols()), sparse_(std::move(sparse))
{
    if (dense.rows() != rows_ || mean.size() != cols_ || scale.size() != cols_) {
        throw ConfigError("design blocks have inconsistent shapes");
    }
    for (Eigen::Index j = 0; j < sparse_.cols(); ++j) {
        sparse_cols_.push_back(j);
    }
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
        dense_cols_.push_back(sparse_.cols() + j);
    }
    dense_ = (dense.rowwise() - mean.tail(dense.cols()).transpose()).array().rowwise() /
             scale.tail(dense.cols()).transpose().array();
}

Eigen::VectorXd Design::times(const Eigen::VectorXd& w) const
{
    Eigen::VectorXd ws(static_cast<Eigen::Index>(sparse_cols_.size()));
    Eigen::VectorXd wd(static_cast<Eigen::Index>(dense_cols_.size()));
    for (std::size_t i = 0; i < sparse_cols_.size(); ++i) ws(static_cast<Eigen::Index>(i)) = w(sparse_cols_[i]);
    for (std::size_t i = 0; i < dense_cols_.size(); ++i) wd(static_cast<Eigen::Index>(i)) = w(dense_cols_[i]);
    Eigen::VectorXd out = single_ ? Eigen::VectorXd((dense_f_ * wd.cast<float>()).cast<double>()) : dense_ * wd;
    out += sparse_ * ws;
    return out;
}

Eigen::VectorXd Design::transpose_times(const Eigen::VectorXd& r) const
{
    const Eigen::VectorXd gs = sparse_.transpose() * r;
    const Eigen::VectorXd gd = single_ ? Eigen::VectorXd((dense_f_.transpose() * r.cast<float>()).cast<double>())
                                       : Eigen::VectorXd(dense_.transpose() * r);
    Eigen::VectorXd out(cols_);
    for (std::size_t i = 0; i < sparse_cols_.size(); ++i) out(sparse_cols_[i]) = gs(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < dense_cols_.size(); ++i) out(dense_cols_[i]) = gd(static_cast<Eigen::Index>(i));
    return out;
}

void Design::use_single_precision()
{
    dense_f_ = dense_.cast<float>();
    dense_.resize(0, 0);
    single_ = true;
}

ObjectiveValue logistic_objective(const Design& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                                  double lambda)
{
    const Eigen::VectorXd margin = (x.times(w).array() + b).matrix();
    Eigen::VectorXd residual(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
        residual(i) = sigmoid(margin(i)) - labels[static_cast<std::size_t>(i)];
    }
    const double n = static_cast<double>(margin.size());
    ObjectiveValue out;
    out.value = mean_log_loss(margin, labels) + 0.5 * lambda * w.squaredNorm();
    out.grad_w = x.transpose_times(residual) / n + lambda * w;
    out.grad_b = residual.sum() / n;
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> standardization(const SparseRows& x, const std::vector<bool>& standardized)
{
    const Eigen::Index d = x.cols();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r = 0; r < x.outerSize(); ++r) {
        for (SparseRows::InnerIterator it(x, r); it; ++it) {
            sum(it.col()) += it.value();
            sumsq(it.col()) += it.value() * it.value();
        }
    }
    const double n = static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!standardized[static_cast<std::size_t>(j)]) {
            continue;
        }
        mean(j) = sum(j) / n;
        const double var = std::max(0.0, sumsq(j) / n - mean(j) * mean(j));
        const double sd = std::sqrt(var);
        // Constant columns are centered only.
        scale(j) = sd > 1e-12 * std::max(1.0, std::abs(mean(j))) ? sd : 1.0;
    }
    return {mean, scale};
}

namespace {

void check_training_inputs(Eigen::Index rows, Eigen::Index cols, std::span<const int> labels, const ModelSchema& schema,
                           const TrainOptions& options)
{
    if (cols != schema.dimension()) {
        throw ConfigError("training matrix has " + std::to_string(cols) + " columns, schema expects " +
                          std::to_string(schema.dimension()));
    }
    if (static_cast<std::size_t>(rows) != labels.size() || labels.size() < 2) {
        throw DataError("training needs at least two labelled rows");
    }
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
        throw DataError("training labels contain a single class");
    }
    if (!(options.lambda >= 0) || options.max_iter < 0 || !(options.tol > 0)) {
        throw ConfigError("invalid training options");
    }
}

void fit(LinearModel& model, const Design& design, std::span<const int> labels, const TrainOptions& options)
{
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    const double n = static_cast<double>(design.rows());
    const double lambda = options.lambda;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(design.cols());
    const double base_rate = static_cast<double>(positives) / n;
    double b = std::log(base_rate / (1.0 - base_rate));

    Eigen::VectorXd margin = Eigen::VectorXd::Constant(design.rows(), b);
    auto objective_at = [&](const Eigen::VectorXd& m, double wnorm2) {
        return mean_log_loss(m, labels) + 0.5 * lambda * wnorm2;
    };
    double f = objective_at(margin, 0.0);
    model.trace.objective.push_back(f);

    double step = 1.0;
    Eigen::VectorXd residual(design.rows());
    Eigen::VectorXd trial(design.rows());
    Eigen::VectorXd prev_gw;
    double prev_gb = 0.0;
    double last_step = 0.0;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        for (Eigen::Index i = 0; i < margin.size(); ++i) {
            residual(i) = sigmoid(margin(i)) - labels[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd gw = design.transpose_times(residual) / n + lambda * w;
        const double gb = residual.sum() / n;
        const double gnorm = std::max(gw.lpNorm<Eigen::Infinity>(), std::abs(gb));
        model.trace.grad_norm = gnorm;
        if (gnorm < options.tol) {
            model.trace.converged = true;
            break;
        }
        // Barzilai-Borwein trial step; backtracking below keeps every step a descent step.
        bool bb = false;
        if (last_step > 0.0) {
            const double dg_w = (gw - prev_gw).squaredNorm();
            const double dg_b = (gb - prev_gb) * (gb - prev_gb);
            const double sy = last_step * (prev_gw.dot(prev_gw - gw) + prev_gb * (prev_gb - gb));
            if (sy > 0.0 && dg_w + dg_b > 0.0) {
                step = std::clamp(sy / (dg_w + dg_b), 1e-10, 1e6);
                bb = true;
            }
        }
        prev_gw = gw;
        prev_gb = gb;
        // Margins move linearly along the search direction, so trial points cost O(n).
        const Eigen::VectorXd dmargin = (design.times(gw).array() + gb).matrix();
        const double g2 = gw.squaredNorm() + gb * gb;
        const double wg = w.dot(gw);
        const double w2 = w.squaredNorm();
        if (!bb) {
            step = std::min(step * 2.0, 1e6);
        }
        bool accepted = false;
        double f_new = f;
        while (step > 1e-20) {
            trial = margin - step * dmargin;
            f_new = objective_at(trial, w2 - 2.0 * step * wg + step * step * gw.squaredNorm());
            if (f_new <= f - 1e-4 * step * g2 && f_new < f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break; // no decrease representable in floating point
        }
        w -= step * gw;
        b -= step * gb;
        last_step = step;
        margin = trial;
        f = f_new;
        model.trace.objective.push_back(f);
        model.trace.iterations = iter + 1;
    }
    model.weights = std::move(w);
    model.bias = b;
}

} // namespace

LinearModel train(const SparseRows& x, std::span<const int> labels, const ModelSchema& schema,
                  const TrainOptions& options)
{
    check_training_inputs(x.rows(), x.cols(), labels, schema, options);
    LinearModel model;
    model.schema = schema;
    model.lambda = options.lambda;
    std::tie(model.mean, model.scale) = standardization(x, schema.standardized);
    Design design(x, schema.standardized, model.mean, model.scale);
    if (options.single_precision) {
        design.use_single_precision();
    }
    fit(model, design, labels, options);
    return model;
}

LinearModel train(const SparseRows& sparse, const Eigen::MatrixXd& dense, std::span<const int> labels,
                  const ModelSchema& schema, const TrainOptions& options)
{
    if (sparse.rows() != dense.rows()) {
        throw ConfigError("sparse and dense blocks differ in row count");
    }
    check_training_inputs(sparse.rows(), sparse.cols() + dense.cols(), labels, schema, options);
    for (Eigen::Index j = 0; j < schema.dimension(); ++j) {
        if (schema.standardized[static_cast<std::size_t>(j)] != (j >= sparse.cols())) {
            throw ConfigError("schema must list raw sparse columns before standardized dense columns");
        }
    }
    LinearModel model;
    model.schema = schema;
    model.lambda = options.lambda;
    const Eigen::Index d = schema.dimension();
    model.mean = Eigen::VectorXd::Zero(d);
    model.scale = Eigen::VectorXd::Ones(d);
    const double n = static_cast<double>(dense.rows());
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
        const double m = dense.col(j).mean();
        const double var = std::max(0.0, dense.col(j).squaredNorm() / n - m * m);
        const double sd = std::sqrt(var);
        model.mean(sparse.cols() + j) = m;
        model.scale(sparse.cols() + j) = sd > 1e-12 * std::max(1.0, std::abs(m)) ? sd : 1.0;
    }
    Design design(sparse, dense, model.mean, model.scale);
    if (options.single_precision) {
        design.use_single_precision();
    }
    fit(model, design, labels, options);
    return model;
}

Eigen::VectorXd predict_proba(const LinearModel& model, const SparseRows& x, const std::string& fingerprint)
{
    if (fingerprint != model.schema.fingerprint) {
        throw ConfigError("feature layout fingerprint " + fingerprint + " does not match model fingerprint " +
                          model.schema.fingerprint);
    }
    const Design design(x, model.schema.standardized, model.mean, model.scale);
    Eigen::VectorXd margin = design.times(model.weights);
    return margin.unaryExpr([&](double m) { return sigmoid(m + model.bias); });
}

Eigen::VectorXd predict_proba(const LinearModel& model, const SparseRows& sparse, const Eigen::MatrixXd& dense,
                              const std::string& fingerprint)
{
    if (fingerprint != model.schema.fingerprint) {
        throw ConfigError("feature layout fingerprint " + fingerprint + " does not match model fingerprint " +
                          model.schema.fingerprint);
    }
    const Design design(sparse, dense, model.mean, model.scale);
    Eigen::VectorXd margin = design.times(model.weights);
    return margin.unaryExpr([&](double m) { return sigmoid(m + model.bias); });
}

double predict_proba(const LinearModel& model, const FeatureVector& x)
{
    if (!x.layout) {
        throw ConfigError("feature vector has no layout");
    }
    SparseRows row(1, x.values.size());
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::SparseVector<double>::InnerIterator it(x.values); it; ++it) {
        t.emplace_back(0, it.index(), it.value());
    }
    row.setFromTriplets(t.begin(), t.end());
    return predict_proba(model, row, x.layout->fingerprint())(0);
}

std::vector<std::pair<std::string, double>> top_coefficients(const LinearModel& model, std::size_t k,
                                                             CoefficientSign sign)
{
    if (k < 1) {
        throw ConfigError("top_coefficients needs k >= 1");
    }
    std::vector<std::pair<std::string, double>> picked;
    for (Eigen::Index j = 0; j < model.weights.size(); ++j) {
        const double w = model.weights(j);
        if ((sign == CoefficientSign::Positive && w > 0) || (sign == CoefficientSign::Negative && w < 0)) {
            picked.emplace_back(model.schema.names[static_cast<std::size_t>(j)], w);
        }
    }
    std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a.second);
        const double mb = std::abs(b.second);
        return ma != mb ? ma > mb : a.first < b.first;
    });
    if (picked.size() > k) {
        picked.resize(k);
    }
    return picked;
}

std::string model_to_json(const LinearModel& model)
{
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json j;
    j["fingerprint"] = model.schema.fingerprint;
    j["lambda"] = model.lambda;
    j["bias"] = model.bias;
    j["weights"] = vec(model.weights);
    j["mean"] = vec(model.mean);
    j["scale"] = vec(model.scale);
    j["names"] = model.schema.names;
    j["standardized"] = model.schema.standardized;
    j["iterations"] = model.trace.iterations;
    j["converged"] = model.trace.converged;
    return j.dump(1);
}

LinearModel model_from_json(const std::string& text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        auto vec = [](const nlohmann::json& a) {
            const auto v = a.get<std::vector<double>>();
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        };
        LinearModel m;
        m.schema.fingerprint = j.at("fingerprint").get<std::string>();
        m.schema.names = j.at("names").get<std::vector<std::string>>();
        m.schema.standardized = j.at("standardized").get<std::vector<bool>>();
        m.lambda = j.at("lambda").get<double>();
        m.bias = j.at("bias").get<double>();
        m.weights = vec(j.at("weights"));
        m.mean = vec(j.at("mean"));
        m.scale = vec(j.at("scale"));
        m.trace.iterations = j.value("iterations", 0);
        m.trace.converged = j.value("converged", false);
        const auto d = m.schema.dimension();
        if (m.weights.size() != d || m.mean.size() != d || m.scale.size() != d ||
            static_cast<Eigen::Index>(m.schema.standardized.size()) != d) {
            throw DataError("model arrays have inconsistent lengths");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
}

void save_model(const LinearModel& model, const std::filesystem::path& path)
{
    write_file_atomic(path, model_to_json(model));
}

LinearModel load_model(const std::filesystem::path& path)
{
    return model_from_json(read_file(path));
}

} // namespace hostility
