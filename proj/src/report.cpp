#include "hostility/report.hpp"

#include "hostility/io.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace hostility {

std::string report_csv(std::span<const ExperimentRun> runs)
{
    std::ostringstream out;
    out << "task,feature_set,param,fold,auc,f1,precision,recall\n";
    for (const auto& run : runs) {
        for (const auto& r : run.results) {
            for (const auto& f : r.folds) {
                out << task_name(run.dataset.task) << ',' << r.name << ',' << format_double(run.dataset.param) << ','
                    << f.fold << ',' << format_double(f.auc) << ',' << format_double(f.prf.f1) << ','
                    << format_double(f.prf.precision) << ',' << format_double(f.prf.recall) << '\n';
            }
        }
    }
    return out.str();
}

std::string summary_csv(std::span<const ExperimentRun> runs)
{
    std::ostringstream out;
    out << "task,feature_set,param,instances,folds,auc_mean,auc_se,f1_mean,f1_se,precision_mean,precision_se,"
           "recall_mean,recall_se\n";
    for (const auto& run : runs) {
        for (const auto& r : run.results) {
            out << task_name(run.dataset.task) << ',' << r.name << ',' << format_double(run.dataset.param) << ','
                << run.dataset.instances.size() << ',' << r.folds.size();
            for (const auto* m : {&r.auc, &r.f1, &r.precision, &r.recall}) {
                out << ',' << format_double(m->mean) << ',' << format_double(m->se);
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string series_csv(std::span<const ExperimentRun> runs)
{
    std::vector<std::tuple<std::string, std::string, double, double, double>> rows;
    for (const auto& run : runs) {
        for (const auto& r : run.results) {
            rows.emplace_back(task_name(run.dataset.task), r.name, run.dataset.param, r.auc.mean, r.auc.se);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a)) <
               std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b));
    });
    std::ostringstream out;
    out << "task,feature_set,param,auc_mean,auc_se\n";
    for (const auto& [task, name, param, m, se] : rows) {
        out << task << ',' << name << ',' << format_double(param) << ',' << format_double(m) << ','
            << format_double(se) << '\n';
    }
    return out.str();
}

std::string strata_csv(std::span<const ExperimentRun> runs, std::span<const Bucket> buckets)
{
    std::ostringstream out;
    out << "task,feature_set,param,bucket,count,positives,auc\n";
    for (const auto& run : runs) {
        for (std::size_t i = 0; i < run.results.size(); ++i) {
            for (const auto& s : stratify(run, i, buckets)) {
                out << task_name(run.dataset.task) << ',' << run.results[i].name << ','
                    << format_double(run.dataset.param) << ',' << bucket_label(s.bucket) << ',' << s.count << ','
                    << s.positives << ',' << (s.auc ? format_double(*s.auc) : "") << '\n';
            }
        }
    }
    return out.str();
}

std::string audit_csv(std::span<const ExperimentRun> runs)
{
    std::ostringstream out;
    out << "task,param,instances,discarded,unmatched,excluded,predictions,violations,comment_models,"
           "posterior_violations,comment_auc\n";
    for (const auto& run : runs) {
        const auto& d = run.dataset;
        const auto& a = run.audit;
        out << task_name(d.task) << ',' << format_double(d.param) << ',' << d.instances.size() << ',' << d.discarded
            << ',' << d.unmatched << ',' << d.excluded << ',' << a.predictions << ',' << a.violations << ','
            << a.posterior_models << ',' << a.posterior_violations << ',' << format_double(run.comment_auc) << '\n';
    }
    return out.str();
}

void write_reports(std::span<const ExperimentRun> runs, const std::filesystem::path& dir)
{
    const auto buckets = default_buckets();
    write_file_atomic(dir / "report.csv", report_csv(runs));
    write_file_atomic(dir / "summary.csv", summary_csv(runs));
    write_file_atomic(dir / "series.csv", series_csv(runs));
    write_file_atomic(dir / "strata.csv", strata_csv(runs, buckets));
    write_file_atomic(dir / "audit.csv", audit_csv(runs));
}

} // namespace hostility
