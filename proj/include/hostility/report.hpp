#pragma once

#include "hostility/experiment.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace hostility {

/// `task,feature_set,param,fold,auc,f1,precision,recall`
std::string report_csv(std::span<const ExperimentRun> runs);
/// Means and standard errors over folds, one row per (task, feature set, param).
std::string summary_csv(std::span<const ExperimentRun> runs);
/// `task,feature_set,param,auc_mean,auc_se` ordered by feature set, then param.
std::string series_csv(std::span<const ExperimentRun> runs);
/// `task,feature_set,param,bucket,count,positives,auc`; auc empty for single-class buckets.
std::string strata_csv(std::span<const ExperimentRun> runs, std::span<const Bucket> buckets);
/// Dataset sizes and leakage-audit counts per run.
std::string audit_csv(std::span<const ExperimentRun> runs);

/// Writes report.csv, summary.csv, series.csv, strata.csv and audit.csv.
void write_reports(std::span<const ExperimentRun> runs, const std::filesystem::path& dir);

} // namespace hostility
