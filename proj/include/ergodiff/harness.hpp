#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ergodiff/edgeworth.hpp"
#include "ergodiff/model.hpp"
#include "ergodiff/nonparam.hpp"
#include "ergodiff/param.hpp"

namespace ergodiff {

struct StudyFailure : std::runtime_error {
    explicit StudyFailure(const std::string& what) : std::runtime_error(what) {}
};

enum class Estimator { Empirical, Mle, OneStep };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct StudyConfig {
    std::string family = "ou";
    double gamma_true = 1.0;
    std::string F = "x2";
    std::vector<double> T_list;
    double dt = 0.01;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 1;
    std::vector<Estimator> estimators;
    std::string outputs = "out";
    int threads = 0; // 0 = hardware concurrency

    void validate() const;
    std::string canonical() const; // stable key=value dump used for hashing
    static StudyConfig from_file(const std::string& path);
    static StudyConfig from_stream(std::istream& in);
};

struct ColumnSummary {
    double mean = 0.0;
    double var = 0.0;
    double k3 = 0.0; // NaN when replicates < 1000
    double ks_normal = 0.0;
    double ks_edgeworth = 0.0; // NaN for non-empirical columns
    double avar_oracle = 0.0;
};

struct StudyColumn {
    double T = 0.0;
    std::string name; // theta_empirical, theta_one_step, gamma_one_step, ...
    std::vector<double> standardized;
    ColumnSummary summary;
};

struct StudyResult {
    StudyConfig config;
    double theta_truth = 0.0;
    double gamma_truth = 0.0;
    double avar_nonparam = 0.0;
    double avar_param_theta = 0.0;
    double fisher_info_truth = 0.0;
    double c3 = 0.0;
    std::vector<StudyColumn> columns;
    std::size_t errored = 0;
    std::size_t clamped = 0;
    std::vector<std::string> error_notes;
    std::string config_hash;
    std::string code_version;

    std::string summary_json() const;
    std::string replicate_csv() const;
    std::string density_csv() const;
    std::string verdict_table() const;
};

/// Run the Monte Carlo study: one stationary path per replicate, all
/// requested estimators on it, standardized by the quadrature truth.
/// Deterministic given master_seed regardless of thread count. Throws
/// StudyFailure if more than 1% of replicates errored.
StudyResult run_study(const StudyConfig& config);

/// Write summary JSON, per-replicate CSV, density CSV, and the verdict table
/// under out_dir. Throws IOFailure.
void report(const StudyResult& result, const std::string& out_dir);

/// Shared-counter worker pool; body(i) is called exactly once per index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Registered acceptance criteria, one line each (used by the verdict table).
const std::vector<std::string>& acceptance_criterion_names();

// Path / law CSV round-trip ("dt,<value>" header line, then one value per row).
void write_path_csv(std::ostream& out, const Path& path);
Path read_path_csv(std::istream& in);
void write_law_csv(std::ostream& out, const InvariantLaw& law);

} // namespace ergodiff
