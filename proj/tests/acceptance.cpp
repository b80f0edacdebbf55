// Acceptance checks. Prints one PASS/FAIL line per criterion and exits with
// the number of failures.

#include "cli.hpp"

#include "hostility/embed.hpp"
#include "hostility/error.hpp"
#include "hostility/eval.hpp"
#include "hostility/experiment.hpp"
#include "hostility/io.hpp"
#include "hostility/ksc.hpp"
#include "hostility/linmodel.hpp"
#include "hostility/synth.hpp"
#include "hostility/trend.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace hostility;
using namespace hostility::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<void(Outcome&)>& body)
{
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(secs < budget_seconds, "took " + std::to_string(secs) + " s");
    failures += out.pass ? 0 : 1;
    std::printf("criterion %2d %s  %-40s %7.1f s  %s\n", id, out.pass ? "PASS" : "FAIL", title, secs,
                out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::vector<double> as_vector(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

// ---- criterion 1 ----------------------------------------------------------

void metrics(Outcome& out)
{
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 49);
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            scores[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 7) / 6.0; // many ties
            labels[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 2);
        }
        labels[0] = 1;
        labels[1] = 0;
        const double got = auc(scores, labels);
        const double want = brute_force_auc(scores, labels);
        out.require(std::abs(got - want) < 1e-12, "auc mismatch at instance " + std::to_string(rep));
    }

    // Hand-checked confusion counts: tp, fp, fn at threshold 0.5.
    struct Case {
        std::vector<double> scores;
        std::vector<int> labels;
        double p, r, f1;
    };
    const std::vector<Case> cases = {
        {{0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}, 1.0, 1.0, 1.0},
        {{0.9, 0.8, 0.1, 0.2}, {0, 0, 1, 1}, 0.0, 0.0, 0.0},
        {{0.9, 0.6, 0.7, 0.2}, {1, 0, 1, 0}, 2.0 / 3, 1.0, 0.8},
        {{0.5, 0.4}, {1, 0}, 1.0, 1.0, 1.0},
        {{0.49, 0.4}, {1, 0}, 0.0, 0.0, 0.0},
        {{0.6, 0.6, 0.6, 0.6}, {1, 0, 0, 0}, 0.25, 1.0, 0.4},
        {{0.1, 0.2, 0.3}, {0, 0, 1}, 0.0, 0.0, 0.0},
        {{0.9, 0.1, 0.1, 0.1}, {1, 1, 1, 1}, 1.0, 0.25, 0.4},
        {{0.9, 0.8, 0.7, 0.1, 0.2}, {1, 0, 1, 1, 0}, 2.0 / 3, 2.0 / 3, 2.0 / 3},
        {{0.55, 0.45, 0.65, 0.35}, {0, 1, 1, 0}, 0.5, 0.5, 0.5},
        {{1.0, 1.0}, {0, 1}, 0.5, 1.0, 2.0 / 3},
        {{0.0, 0.0, 1.0}, {1, 1, 0}, 0.0, 0.0, 0.0},
        {{0.7, 0.8, 0.9, 0.95}, {1, 1, 1, 0}, 0.75, 1.0, 6.0 / 7},
        {{0.51, 0.52, 0.2, 0.3, 0.4}, {1, 0, 1, 0, 1}, 0.5, 1.0 / 3, 0.4},
        {{0.99, 0.98, 0.97, 0.2, 0.1, 0.3}, {1, 1, 0, 1, 0, 0}, 2.0 / 3, 2.0 / 3, 2.0 / 3},
        {{0.5, 0.5, 0.5}, {1, 1, 0}, 2.0 / 3, 1.0, 0.8},
        {{0.6, 0.4, 0.6, 0.4, 0.6}, {1, 1, 1, 1, 0}, 2.0 / 3, 0.5, 4.0 / 7},
        {{0.8, 0.3}, {0, 0}, 0.0, 0.0, 0.0},
        {{0.9, 0.9, 0.9, 0.1, 0.1}, {1, 1, 1, 1, 1}, 1.0, 0.6, 0.75},
        {{0.2, 0.7, 0.8, 0.6, 0.1, 0.9}, {0, 1, 0, 1, 1, 1}, 0.75, 0.75, 0.75},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        const auto m = prf1(c.scores, c.labels);
        const bool ok = std::abs(m.precision - c.p) < 1e-12 && std::abs(m.recall - c.r) < 1e-12 &&
                        std::abs(m.f1 - c.f1) < 1e-12;
        out.require(ok, "prf1 case " + std::to_string(i));
    }
}

// ---- criterion 2 ----------------------------------------------------------

void logistic(Outcome& out)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 60;
    const int d = 8;
    Eigen::MatrixXd m(n, d);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            m(i, j) = j < 3 ? std::floor(std::abs(normal(rng)) * 2) : normal(rng);
        }
        y[static_cast<std::size_t>(i)] = normal(rng) > 0 ? 1 : 0;
    }
    std::vector<bool> standardized(d, true);
    standardized[0] = standardized[1] = standardized[2] = false;
    const SparseRows x = m.sparseView(0.0, 0.0);
    const auto [mean, scale] = standardization(x, standardized);
    const Design design(x, standardized, mean, scale);
    double worst = 0.0;
    for (int point = 0; point < 50; ++point) {
        Eigen::VectorXd theta(d + 1);
        for (int j = 0; j <= d; ++j) {
            theta(j) = normal(rng);
        }
        auto f = [&](const Eigen::VectorXd& t) { return logistic_objective(design, y, t.head(d), t(d), 0.5).value; };
        const auto obj = logistic_objective(design, y, theta.head(d), theta(d), 0.5);
        Eigen::VectorXd analytic(d + 1);
        analytic << obj.grad_w, obj.grad_b;
        worst = std::max(worst, gradient_error(analytic, finite_difference(f, theta)));
    }
    out.require(worst < 1e-5, "gradient rel err " + std::to_string(worst));

    Eigen::VectorXd w(10);
    for (int j = 0; j < 10; ++j) {
        w(j) = normal(rng);
    }
    auto sample = [&](int rows, std::uint64_t seed, Eigen::MatrixXd& xs, std::vector<int>& ys, Eigen::VectorXd& truth) {
        std::mt19937_64 g(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        xs.resize(rows, 10);
        ys.resize(static_cast<std::size_t>(rows));
        truth.resize(rows);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < 10; ++j) {
                xs(i, j) = normal(g);
            }
            truth(i) = xs.row(i).dot(w);
            ys[static_cast<std::size_t>(i)] = unit(g) < 1.0 / (1.0 + std::exp(-truth(i))) ? 1 : 0;
        }
    };
    Eigen::MatrixXd xtr, xte;
    std::vector<int> ytr, yte;
    Eigen::VectorXd ttr, tte;
    sample(2000, 10, xtr, ytr, ttr);
    sample(2000, 11, xte, yte, tte);
    const auto model = train(xtr.sparseView(0.0, 0.0), ytr, ModelSchema::dense(10), {});
    const auto p = predict_proba(model, xte.sparseView(0.0, 0.0), model.schema.fingerprint);
    const double got = auc(as_vector(p), yte);
    const double bayes = auc(as_vector(tte), yte);
    out.require(got >= 0.95 * bayes, "recovered auc " + fmt(got) + " vs bayes " + fmt(bayes));
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("planted auc ") + fmt(got) + "/" + fmt(bayes);
}

// ---- criterion 3 ----------------------------------------------------------

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return a.dot(b) / (a.norm() * b.norm());
}

void embeddings(Outcome& out)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 0.5);
    double worst = 0.0;
    const int d = 10;
    const int k = 5;
    const int parts = 4;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd theta(d * (parts + 1 + k));
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            theta(i) = normal(rng);
        }
        // Plain SGNS uses the first block as the centre; the subword variant sums the first `parts`.
        for (int sub : {1, parts}) {
            auto loss = [&](const Eigen::VectorXd& t, SgnsGradient* g) {
                Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
                for (int p = 0; p < sub; ++p) {
                    h += t.segment(p * d, d);
                }
                Eigen::MatrixXd neg(d, k);
                for (int j = 0; j < k; ++j) {
                    neg.col(j) = t.segment((parts + 1 + j) * d, d);
                }
                auto r = sgns_loss_gradient(h, t.segment(parts * d, d), neg);
                if (g) {
                    *g = r;
                }
                return r.loss;
            };
            SgnsGradient g;
            loss(theta, &g);
            Eigen::VectorXd analytic = Eigen::VectorXd::Zero(theta.size());
            for (int p = 0; p < sub; ++p) {
                analytic.segment(p * d, d) = g.center;
            }
            analytic.segment(parts * d, d) = g.context;
            analytic.tail(d * k) = Eigen::Map<const Eigen::VectorXd>(g.negatives.data(), d * k);
            const auto numeric = finite_difference([&](const Eigen::VectorXd& t) { return loss(t, nullptr); }, theta);
            worst = std::max(worst, gradient_error(analytic, numeric));
        }
    }
    out.require(worst < 1e-4, "gradient rel err " + std::to_string(worst));

    std::vector<TokenSeq> cooc;
    std::uniform_int_distribution<int> pick(0, 9);
    for (int i = 0; i < 300; ++i) {
        const std::string filler = "f" + std::to_string(pick(rng));
        cooc.push_back(i % 2 == 0 ? TokenSeq{"a", filler, "b", "a", "b"} : TokenSeq{"c", "d", filler, "d", "c"});
    }
    SgnsOptions opt;
    opt.dim = 16;
    opt.window = 2;
    opt.epochs = 10;
    opt.min_count = 1;
    opt.subsample = 0;
    const auto table = train_sgns(cooc, opt);
    auto vec = [&](const char* w) { return Eigen::VectorXd(table.word_vector(*table.word_index(w))); };
    const double ab = cosine(vec("a"), vec("b"));
    const double ac = cosine(vec("a"), vec("c"));
    out.require(ab > ac, "cos(a,b) " + fmt(ab) + " <= cos(a,c) " + fmt(ac));

    std::vector<TokenSeq> toy;
    const std::vector<TokenSeq> hostile = {{"you", "suck", "loser"}, {"suck", "it", "loser"}, {"you", "suck", "badly"},
                                           {"such", "a", "loser", "you", "suck"}};
    const std::vector<TokenSeq> nice = {{"happier", "days", "friend"}, {"lovely", "photo", "friend"},
                                        {"snappy", "lovely", "days"}, {"so", "happier", "today"}};
    for (std::size_t i = 0; i < 80; ++i) {
        toy.push_back(hostile[i % hostile.size()]);
        toy.push_back(nice[i % nice.size()]);
    }
    opt.epochs = 15;
    const auto sub = train_subword_sgns(toy, opt);
    const auto suck = *sub.lookup("suck");
    const auto sucks = sub.lookup("sucks");
    const auto happy = sub.lookup("happy");
    out.require(sucks && happy, "OOV words not composable");
    if (sucks && happy) {
        const double s1 = cosine(*sucks, suck);
        const double s2 = cosine(*happy, suck);
        out.require(s1 > s2, "cos(sucks,suck) " + fmt(s1) + " <= cos(happy,suck) " + fmt(s2));
    }
}

// ---- criterion 4 ----------------------------------------------------------

void ksc(Outcome& out)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_series = [&](int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) {
            v(i) = unit(rng) < 0.4 ? unit(rng) * 5 : 0.0;
        }
        v(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n))) += 1.0;
        return v;
    };
    for (int rep = 0; rep < 100; ++rep) {
        const auto x = random_series(48);
        const double c = 0.01 + 100.0 * unit(rng);
        const auto d = ksc_distance(x, (c * x).eval(), 24);
        out.require(d.distance < 1e-9, "d(x, cx) = " + std::to_string(d.distance));
    }
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(60);
        y.segment(20, 12) = random_series(12);
        const int q = static_cast<int>(rng() % 21) - 10;
        const Eigen::VectorXd x = 2.5 * shift_series(y, q);
        const auto d = ksc_distance(x, y, 12);
        out.require(d.shift == q && d.distance < 1e-9,
                    "shift " + std::to_string(d.shift) + " expected " + std::to_string(q));
    }

    double worst_agreement = 1.0;
    double worst_rise = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 g(seed * 977);
        std::uniform_real_distribution<double> scale(0.5, 5.0);
        std::uniform_int_distribution<int> jitter(-3, 3);
        std::uniform_real_distribution<double> noise(0.0, 0.05);
        std::vector<Eigen::VectorXd> series;
        std::vector<int> family;
        for (int f = 0; f < 2; ++f) {
            for (int i = 0; i < 50; ++i) {
                const double s = scale(g);
                const int centre = (f == 0 ? 10 : 80) + jitter(g);
                const double width = f == 0 ? 1.0 : 12.0;
                Eigen::VectorXd v(kSeriesHours);
                for (int h = 0; h < kSeriesHours; ++h) {
                    const double z = (h - centre) / width;
                    v(h) = s * (std::exp(-0.5 * z * z) + noise(g));
                }
                series.push_back(v);
                family.push_back(f);
            }
        }
        KscOptions opt;
        opt.k = 2;
        opt.seed = seed;
        const auto r = ksc_cluster(series, opt);
        std::size_t same = 0;
        for (std::size_t i = 0; i < family.size(); ++i) {
            same += r.assignment[i] == family[i] ? 1 : 0;
        }
        const double frac = static_cast<double>(same) / static_cast<double>(family.size());
        worst_agreement = std::min(worst_agreement, std::max(frac, 1.0 - frac));
        for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
            worst_rise = std::max(worst_rise, r.objective_history[i] - r.objective_history[i - 1]);
        }
    }
    out.require(worst_agreement >= 0.95, "agreement " + fmt(worst_agreement));
    out.require(worst_rise <= 1e-9, "objective rose by " + std::to_string(worst_rise));
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("min agreement ") + fmt(worst_agreement);
}

// ---- criteria 5 to 8 share one corpus -------------------------------------

struct Bench {
    SynthResult synth;
    std::unique_ptr<TokenizedCorpus> tokens;
    std::unique_ptr<EmbeddingTable> words;
    std::unique_ptr<EmbeddingTable> subwords;
    std::unique_ptr<FeatureCache> cache;
    std::vector<ExperimentRun> leads;
    std::vector<ExperimentRun> intensity;
    double sweep_seconds = 0.0;
    bool ready = false;
};

Bench bench;

void build_bench()
{
    const auto start = std::chrono::steady_clock::now();
    bench.synth = generate_synthetic(SynthConfig{});
    const auto& corpus = bench.synth.corpus;
    bench.tokens = std::make_unique<TokenizedCorpus>(corpus);
    std::vector<TokenSeq> sentences;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        for (const auto& s : bench.tokens->post_tokens(p)) {
            sentences.push_back(s);
        }
    }
    const SgnsOptions opt;
    bench.words = std::make_unique<EmbeddingTable>(train_sgns(sentences, opt));
    bench.subwords = std::make_unique<EmbeddingTable>(train_subword_sgns(sentences, opt));
    bench.cache = std::make_unique<FeatureCache>(ExperimentResources{
        &corpus, bench.tokens.get(), &bench.synth.lexicons, bench.words.get(), bench.subwords.get()});

    const std::vector<GroupSet> full = {GroupSet::all()};
    const ExperimentOptions eo;
    const std::vector<double> leads = {1, 3, 5, 8, 10};
    const std::vector<int> ns = {5, 10};
    bench.leads = sweep_lead_time(*bench.cache, leads, full, eo);
    bench.intensity = sweep_intensity(*bench.cache, ns, full, eo);
    bench.sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bench.ready = true;
}

void planted(Outcome& out)
{
    build_bench();
    out.require(bench.sweep_seconds < 600, "sweep took " + fmt(bench.sweep_seconds) + " s");
    std::string series;
    for (std::size_t i = 0; i < bench.leads.size(); ++i) {
        const auto& r = bench.leads[i].results[0].auc;
        series += fmt(bench.leads[i].dataset.param) + "h:" + fmt(r.mean) + "+-" + fmt(r.se) + " ";
        if (i > 0) {
            const auto& prev = bench.leads[i - 1].results[0].auc;
            out.require(r.mean <= prev.mean + std::max(r.se, prev.se),
                        "auc rises from lead " + fmt(bench.leads[i - 1].dataset.param));
        }
    }
    const auto& first = bench.leads.front().results[0].auc;
    out.require(first.mean >= 0.75, "1h auc " + fmt(first.mean));
    const auto& n5 = bench.intensity[0].results[0].auc;
    const auto& n10 = bench.intensity[1].results[0].auc;
    out.require(n10.mean > n5.mean - std::max(n5.se, n10.se),
                "auc(N=10) " + fmt(n10.mean) + " vs auc(N=5) " + fmt(n5.mean));
    out.detail += (out.detail.empty() ? "" : "; ") + series + "N5:" + fmt(n5.mean) + " N10:" + fmt(n10.mean);
}

void leakage(Outcome& out)
{
    out.require(bench.ready, "sweep did not run");
    std::size_t predictions = 0;
    std::size_t violations = 0;
    std::size_t models = 0;
    for (const auto* runs : {&bench.leads, &bench.intensity}) {
        for (const auto& run : *runs) {
            predictions += run.audit.predictions;
            violations += run.audit.violations + run.audit.posterior_violations;
            models += run.audit.posterior_models;
            out.require(run.audit.posterior_models > 0, "trend posteriors were not produced");
        }
    }
    out.require(violations == 0, std::to_string(violations) + " violations");
    out.detail += (out.detail.empty() ? "" : "; ") + std::to_string(predictions) + " predictions, " +
                  std::to_string(models) + " comment models audited";
}

void balance(Outcome& out)
{
    out.require(bench.ready, "sweep did not run");
    for (const auto& run : bench.leads) {
        std::map<std::size_t, long> hist;
        long diff = 0;
        for (const auto& inst : run.dataset.instances) {
            hist[inst.k] += inst.label ? 1 : -1;
            diff += inst.label ? 1 : -1;
        }
        out.require(diff == 0, "unequal classes at lead " + fmt(run.dataset.param));
        for (const auto& [k, d] : hist) {
            out.require(d == 0, "k=" + std::to_string(k) + " unbalanced at lead " + fmt(run.dataset.param));
        }
    }
}

void null_check(Outcome& out)
{
    out.require(bench.ready, "sweep did not run");
    const ExperimentOptions eo;
    std::vector<GroupSet> t1, t2;
    for (const char* n : {"U", "U+prev-post", "best1", "full"}) {
        t1.push_back(named_feature_set(n));
    }
    for (const char* n : {"U", "best2", "full"}) {
        t2.push_back(named_feature_set(n));
    }
    const std::vector<double> lead = {3};
    const std::vector<int> n = {5};
    std::vector<ExperimentRun> runs = sweep_lead_time(*bench.cache, lead, t1, eo, true);
    auto r2 = sweep_intensity(*bench.cache, n, t2, eo, true);
    runs.insert(runs.end(), r2.begin(), r2.end());
    std::string values;
    for (const auto& run : runs) {
        for (const auto& r : run.results) {
            values += task_name(run.dataset.task) + "/" + r.name + ":" + fmt(r.auc.mean) + " ";
            out.require(std::abs(r.auc.mean - 0.5) <= 0.07,
                        task_name(run.dataset.task) + " " + r.name + " auc " + fmt(r.auc.mean));
        }
    }
    out.detail += (out.detail.empty() ? "" : "; ") + values;
}

// ---- criterion 9 ----------------------------------------------------------

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "hostility");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream o, e;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
    if (code != 0) {
        std::cerr << e.str();
    }
    return code;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism(Outcome& out)
{
    TempDir dir;
    const auto cfg = dir.path() / "synth.json";
    write_file_atomic(cfg, R"({"synth": {"n_posts": 300}})");
    out.require(cli({"synth", "--config", cfg.string(), "--out", (dir.path() / "s").string()}) == 0, "synth failed");
    const auto corpus = (dir.path() / "s" / "corpus.jsonl").string();
    const std::vector<std::string> args = {"task1", "--corpus", corpus, "--lead-hours", "1", "3", "--features",
                                           "U", "best1", "full", "--dim", "20", "--epochs", "2", "--seed", "5"};
    for (const char* run : {"a", "b"}) {
        auto a = args;
        a.insert(a.end(), {"--out", (dir.path() / run).string()});
        out.require(cli(a) == 0, std::string("run ") + run + " failed");
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "a")) {
        if (e.path().extension() == ".csv") {
            ++files;
            out.require(slurp(e.path()) == slurp(dir.path() / "b" / e.path().filename()),
                        e.path().filename().string() + " differs");
        }
    }
    out.require(files >= 5, "only " + std::to_string(files) + " report files");
    out.detail += (out.detail.empty() ? "" : "; ") + std::to_string(files) + " CSVs identical";
}

// ---- criterion 10 ---------------------------------------------------------

void trend(Outcome& out)
{
    auto near = [](const Eigen::Vector4d& a, const Eigen::Vector4d& b) { return (a - b).cwiseAbs().maxCoeff() < 1e-12; };
    out.require(near(trend_features(std::vector<double>{0.1, 0.2, 0.9}), Eigen::Vector4d(1, 1.0 / 3, 0.7, 0.8)),
                "[0.1, 0.2, 0.9]");
    out.require(near(trend_features(std::vector<double>{0.4, 0.4}), Eigen::Vector4d(2, 1, 0, 0)), "[0.4, 0.4]");
    out.require(near(trend_features(std::vector<double>{0.2}), Eigen::Vector4d(0, 0, 0, 0)), "[0.2]");
}

} // namespace

int main()
{
    criterion(1, "AUC and P/R/F1 against oracles", 5, metrics);
    criterion(2, "logistic gradient and planted recovery", 30, logistic);
    criterion(3, "embedding gradients and toy geometry", 60, embeddings);
    criterion(4, "K-SC distance, shifts and clustering", 60, ksc);
    criterion(7, "planted signal over lead and N", 600, planted);
    criterion(5, "leakage audit with trend features", 1e9, leakage);
    criterion(6, "task-1 class and k balance", 1e9, balance);
    criterion(8, "permuted-label null check", 300, null_check);
    criterion(9, "CLI report determinism", 1e9, determinism);
    criterion(10, "trend feature examples", 1e9, trend);
    std::printf("%d criteria failed\n", failures);
    return failures;
}
