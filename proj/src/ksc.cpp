#include "hostility/ksc.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace hostility {

HostilitySeries build_series(const Corpus& corpus, std::size_t post, int hours)
{
    const auto& p = corpus.post(post);
    HostilitySeries s;
    s.post = post;
    s.post_id = p.id;
    s.values = Eigen::VectorXd::Zero(hours);
    for (const auto& c : p.comments) {
        if (!c.hostile) {
            continue;
        }
        const auto bin = static_cast<long long>(std::floor(c.t / 3600.0));
        if (bin < hours) {
            s.values(static_cast<Eigen::Index>(bin)) += 1.0;
        }
    }
    if (s.values.sum() == 0.0) {
        throw DataError("post " + p.id + " has no hostile comment in the first " + std::to_string(hours) + " hours");
    }
    return s;
}

namespace {

void orient(Eigen::VectorXd& mu)
{
    mu.normalize();
    if (mu.sum() < 0) {
        mu = -mu;
    }
}

} // namespace

Eigen::VectorXd ksc_centroid(std::span<const Eigen::VectorXd> aligned, const Eigen::VectorXd& start, double tol,
                             int max_iter)
{
    const Eigen::Index n = start.size();
    // Power iteration on c I - M with c = member count, i.e. on
    // S = sum x x^T / ||x||^2, whose top eigenvector is M's bottom one.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (const auto& x : aligned) {
        const double xx = x.squaredNorm();
        if (xx > 0) {
            s.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / xx);
        }
    }
    s = s.selfadjointView<Eigen::Lower>();

    Eigen::VectorXd v = start;
    if (!(v.norm() > 0)) {
        v = Eigen::VectorXd::Ones(n);
    }
    v.normalize();
    // A start orthogonal to the top eigenvector would stall; nudge it.
    if ((s * v).norm() < 1e-14) {
        v = Eigen::VectorXd::Ones(n).normalized();
    }
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd next = s * v;
        const double norm = next.norm();
        if (!(norm > 0)) {
            break;
        }
        next /= norm;
        if (next.dot(v) < 0) {
            next = -next;
        }
        const double change = (next - v).norm();
        v = std::move(next);
        if (change < tol) {
            break;
        }
    }
    orient(v);
    return v;
}

double ksc_objective(std::span<const Eigen::VectorXd> series, std::span<const int> assignment,
                     std::span<const Eigen::VectorXd> centroids, int max_shift)
{
    double total = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double d = ksc_distance(series[i], centroids[static_cast<std::size_t>(assignment[i])], max_shift).distance;
        total += d * d;
    }
    return total;
}

namespace {

struct Assignment {
    std::vector<int> cluster;
    std::vector<int> shift;
    std::vector<double> distance;
};

Assignment assign(std::span<const Eigen::VectorXd> series, const std::vector<Eigen::VectorXd>& centroids,
                  int max_shift)
{
    Assignment a;
    for (const auto& x : series) {
        int best = 0;
        ShiftScale<double> best_fit;
        best_fit.distance = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const auto fit = ksc_distance(x, centroids[c], max_shift);
            if (fit.distance < best_fit.distance) {
                best_fit = fit;
                best = static_cast<int>(c);
            }
        }
        a.cluster.push_back(best);
        a.shift.push_back(best_fit.shift);
        a.distance.push_back(best_fit.distance);
    }
    return a;
}

double total(const std::vector<double>& distances)
{
    double t = 0.0;
    for (double d : distances) {
        t += d * d;
    }
    return t;
}

// Cluster objective of `members` against centroid `mu`, with fresh shifts.
double member_objective(std::span<const Eigen::VectorXd> series, const std::vector<std::size_t>& members,
                        const Eigen::VectorXd& mu, int max_shift)
{
    double t = 0.0;
    for (auto i : members) {
        const double d = ksc_distance(series[i], mu, max_shift).distance;
        t += d * d;
    }
    return t;
}

} // namespace

ClusterResult ksc_cluster(std::span<const Eigen::VectorXd> series, const KscOptions& options)
{
    if (options.k < 1) {
        throw ConfigError("cluster count must be >= 1");
    }
    if (series.size() < static_cast<std::size_t>(options.k)) {
        throw ConfigError("cluster count " + std::to_string(options.k) + " exceeds the " +
                          std::to_string(series.size()) + " input series");
    }
    if (options.max_shift < 0) {
        throw ConfigError("max shift must be non-negative");
    }
    for (const auto& x : series) {
        if (!(x.squaredNorm() > 0)) {
            throw DataError("cannot cluster an all-zero series");
        }
    }

    // D^2 seeding over distinct members.
    std::mt19937_64 rng(options.seed);
    std::vector<Eigen::VectorXd> centroids;
    std::vector<bool> chosen(series.size(), false);
    std::uniform_int_distribution<std::size_t> first(0, series.size() - 1);
    std::size_t pick = first(rng);
    std::vector<double> nearest(series.size(), std::numeric_limits<double>::infinity());
    for (int c = 0; c < options.k; ++c) {
        chosen[pick] = true;
        Eigen::VectorXd mu = series[pick];
        orient(mu);
        centroids.push_back(mu);
        if (c + 1 == options.k) {
            break;
        }
        double mass = 0.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double d = ksc_distance(series[i], mu, options.max_shift).distance;
            nearest[i] = std::min(nearest[i], d * d);
            mass += chosen[i] ? 0.0 : nearest[i];
        }
        std::vector<double> weights(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) {
            weights[i] = chosen[i] ? 0.0 : (mass > 0 ? nearest[i] : 1.0);
        }
        std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
        pick = draw(rng);
    }

    ClusterResult result;
    result.k = options.k;
    std::vector<int> previous;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        auto a = assign(series, centroids, options.max_shift);
        result.iterations = iter + 1;
        result.objective_history.push_back(total(a.distance));
        result.assignment = a.cluster;
        result.shift = a.shift;
        result.distance = a.distance;
        if (a.cluster == previous) {
            result.converged = true;
            break;
        }
        previous = a.cluster;

        std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(options.k));
        for (std::size_t i = 0; i < series.size(); ++i) {
            members[static_cast<std::size_t>(a.cluster[i])].push_back(i);
        }
        for (int c = 0; c < options.k; ++c) {
            auto& m = members[static_cast<std::size_t>(c)];
            if (m.empty()) {
                // Reseed with the worst-fit series that is not alone in its cluster.
                std::size_t worst = series.size();
                for (std::size_t i = 0; i < series.size(); ++i) {
                    if (members[static_cast<std::size_t>(a.cluster[i])].size() > 1 &&
                        (worst == series.size() || a.distance[i] > a.distance[worst])) {
                        worst = i;
                    }
                }
                if (worst < series.size()) {
                    Eigen::VectorXd mu = series[worst];
                    orient(mu);
                    centroids[static_cast<std::size_t>(c)] = mu;
                }
                continue;
            }
            std::vector<Eigen::VectorXd> aligned;
            aligned.reserve(m.size());
            for (auto i : m) {
                aligned.push_back(shift_series(series[i], -a.shift[i]));
            }
            const auto& old = centroids[static_cast<std::size_t>(c)];
            Eigen::VectorXd mu = ksc_centroid(aligned, old, options.eig_tol, options.eig_max_iter);
            // Zero padding makes realignment approximate; only accept a
            // centroid that does not raise the cluster objective.
            if (member_objective(series, m, mu, options.max_shift) <=
                member_objective(series, m, old, options.max_shift)) {
                centroids[static_cast<std::size_t>(c)] = std::move(mu);
            }
        }
        result.objective_history.push_back(ksc_objective(series, a.cluster, centroids, options.max_shift));
    }

    result.centroids = centroids;
    result.cluster_objective.assign(static_cast<std::size_t>(options.k), 0.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
        result.cluster_objective[static_cast<std::size_t>(result.assignment[i])] +=
            result.distance[i] * result.distance[i];
    }
    return result;
}

namespace {

void write_row(std::ostringstream& out, const std::string& id, const Eigen::VectorXd& v)
{
    const double peak = v.maxCoeff();
    out << id;
    for (Eigen::Index h = 0; h < v.size(); ++h) {
        out << ',' << format_double(peak > 0 ? v(h) / peak : v(h));
    }
    out << '\n';
}

} // namespace

void export_clusters(const ClusterResult& result, std::span<const HostilitySeries> raw,
                     std::span<const HostilitySeries> smoothed, const std::filesystem::path& dir)
{
    if (raw.size() != result.assignment.size() || smoothed.size() != raw.size()) {
        throw ConfigError("cluster export: series count does not match the assignment");
    }
    std::ostringstream summary;
    summary << "cluster,size,mean_volume,mean_onset_hour\n";
    for (int c = 0; c < result.k; ++c) {
        std::ostringstream out;
        const auto& centroid = result.centroids[static_cast<std::size_t>(c)];
        out << "id";
        for (Eigen::Index h = 0; h < centroid.size(); ++h) {
            out << ",h" << h;
        }
        out << '\n';
        double volume = 0.0;
        double onset = 0.0;
        std::size_t size = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (result.assignment[i] != c) {
                continue;
            }
            write_row(out, smoothed[i].post_id, smoothed[i].values);
            ++size;
            volume += raw[i].values.sum();
            Eigen::Index first = 0;
            while (first < raw[i].values.size() && raw[i].values(first) == 0.0) {
                ++first;
            }
            onset += static_cast<double>(first);
        }
        write_row(out, "centroid", centroid);
        write_file_atomic(dir / ("cluster_" + std::to_string(c) + ".csv"), out.str());
        const double n = static_cast<double>(std::max<std::size_t>(size, 1));
        summary << c << ',' << size << ',' << format_double(size ? volume / n : 0.0) << ','
                << format_double(size ? onset / n : 0.0) << '\n';
    }
    write_file_atomic(dir / "summary.csv", summary.str());

    std::ostringstream log;
    log << "step,objective\n";
    for (std::size_t i = 0; i < result.objective_history.size(); ++i) {
        log << i << ',' << format_double(result.objective_history[i]) << '\n';
    }
    write_file_atomic(dir / "objective.csv", log.str());
}

} // namespace hostility
