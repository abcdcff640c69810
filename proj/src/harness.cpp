#include "ergodiff/harness.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ergodiff/errors.hpp"
#include "ergodiff/rng.hpp"
#include "ergodiff/stats.hpp"

namespace ergodiff {

namespace {

constexpr const char* kCodeVersion = "0.1.0";

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::Empirical: return "empirical";
        case Estimator::Mle: return "mle";
        case Estimator::OneStep: return "one_step";
    }
    return "?";
}

Estimator estimator_from_string(const std::string& s) {
    if (s == "empirical") return Estimator::Empirical;
    if (s == "mle") return Estimator::Mle;
    if (s == "one_step") return Estimator::OneStep;
    throw InvalidConfig("unknown estimator: " + s);
}

void StudyConfig::validate() const {
    if (T_list.empty()) throw InvalidConfig("T_list must not be empty");
    if (replicates < 1) throw InvalidConfig("replicates must be positive");
    if (estimators.empty()) throw InvalidConfig("estimators must not be empty");
    if (!(dt > 0.0) || dt > 0.05) throw InvalidConfig("dt must lie in (0, 0.05]");
    for (double T : T_list) {
        if (!(T > 0.0)) throw InvalidConfig("all horizons must be positive");
        const double n = T / dt;
        if (std::abs(n - std::llround(n)) > 1e-9 * n)
            throw InvalidConfig("T/dt must be integral (T = " + std::to_string(T) + ")");
    }
}

std::string StudyConfig::canonical() const {
    std::ostringstream os;
    os << "family=" << family << "\ngamma_true=" << fmt_double(gamma_true) << "\nF=" << F
       << "\nT_list=";
    for (std::size_t i = 0; i < T_list.size(); ++i) os << (i ? "," : "") << fmt_double(T_list[i]);
    os << "\ndt=" << fmt_double(dt) << "\nreplicates=" << replicates
       << "\nmaster_seed=" << master_seed << "\nestimators=";
    for (std::size_t i = 0; i < estimators.size(); ++i)
        os << (i ? "," : "") << to_string(estimators[i]);
    os << "\noutputs=" << outputs << "\n";
    return os.str();
}

StudyConfig StudyConfig::from_stream(std::istream& in) {
    StudyConfig cfg;
    cfg.estimators.clear();
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidConfig("bad config line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "family") cfg.family = val;
        else if (key == "gamma_true") cfg.gamma_true = std::stod(val);
        else if (key == "F") cfg.F = val;
        else if (key == "T_list") {
            cfg.T_list.clear();
            for (const auto& t : split_csv(val)) cfg.T_list.push_back(std::stod(t));
        } else if (key == "dt") cfg.dt = std::stod(val);
        else if (key == "replicates") cfg.replicates = std::stoull(val);
        else if (key == "master_seed") cfg.master_seed = std::stoull(val);
        else if (key == "estimators") {
            cfg.estimators.clear();
            for (const auto& e : split_csv(val)) cfg.estimators.push_back(estimator_from_string(e));
        } else if (key == "outputs") cfg.outputs = val;
        else if (key == "threads") cfg.threads = std::stoi(val);
        else throw InvalidConfig("unknown config key: " + key);
    }
    return cfg;
}

StudyConfig StudyConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailure("cannot open config file: " + path);
    return from_stream(in);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct ReplicateOut {
    double theta_emp = NAN;
    double theta_one_step = NAN, gamma_one_step = NAN;
    double theta_mle = NAN, gamma_mle = NAN;
    bool clamped = false;
    bool errored = false;
    std::string note;
};

} // namespace

StudyResult run_study(const StudyConfig& config) {
    config.validate();
    StudyResult res;
    res.config = config;
    res.code_version = kCodeVersion;
    res.config_hash = fnv1a_hex(config.canonical());

    const ParametricFamily family = make_family(config.family);
    const ScalarField F = make_moment_function(config.F);
    const DiffusionModel model = family.model_at(config.gamma_true);
    if (!check_ergodicity(model).ergodic)
        throw InvalidConfig("model failed the ergodicity check");

    auto law = std::make_shared<const InvariantLaw>(build_law(model));
    const NonparamBound bound = build_bound(law, F);
    res.theta_truth = bound.theta();
    res.gamma_truth = config.gamma_true;
    res.avar_nonparam = bound.avar();
    res.c3 = skewness_coefficient(law, F);
    res.fisher_info_truth = fisher_info(family, config.gamma_true);

    const bool want_empirical =
        std::count(config.estimators.begin(), config.estimators.end(), Estimator::Empirical) > 0;
    const bool want_one_step =
        std::count(config.estimators.begin(), config.estimators.end(), Estimator::OneStep) > 0;
    const bool want_mle =
        std::count(config.estimators.begin(), config.estimators.end(), Estimator::Mle) > 0;

    std::optional<ParamContext> ctx;
    if (want_one_step) ctx.emplace(build_param_context(family, F));
    if (want_one_step || want_mle) {
        const double tdot = ctx ? ctx->theta_dot_of(config.gamma_true)
                                : build_param_context(family, F).theta_dot_of(config.gamma_true);
        res.avar_param_theta = tdot * tdot / res.fisher_info_truth;
    }

    const std::size_t n_T = config.T_list.size();
    const std::size_t R = config.replicates;
    std::vector<std::vector<ReplicateOut>> slots(n_T, std::vector<ReplicateOut>(R));

    parallel_for(n_T * R, config.threads, [&](std::size_t idx) {
        const std::size_t t_idx = idx / R;
        const std::size_t r = idx % R;
        ReplicateOut& out = slots[t_idx][r];
        SimConfig sim;
        sim.dt = config.dt;
        sim.T = config.T_list[t_idx];
        sim.seed = RngStream::substream_seed(config.master_seed, idx);
        try {
            const Path path = simulate_path(model, sim, law.get());
            if (want_empirical || want_one_step) out.theta_emp = empirical_moment(path, F);
            if (want_one_step) {
                const OneStepResult os = one_step(path, *ctx);
                out.theta_one_step = os.theta_tilde;
                out.gamma_one_step = os.gamma_tilde;
                out.clamped = os.clamped;
            }
            if (want_mle) {
                const MleResult m = mle(path, family);
                out.gamma_mle = m.gamma_hat;
                out.theta_mle = ctx ? ctx->theta_of(m.gamma_hat)
                                    : stationary_moment(build_law(family.model_at(m.gamma_hat)), F);
            }
        } catch (const std::exception& e) {
            out.errored = true;
            out.note = e.what();
        }
    });

    // Aggregate in deterministic index order.
    struct ColumnSpec {
        const char* name;
        double ReplicateOut::* field;
        bool gamma_scale; // standardize against gamma truth instead of theta
        double avar_oracle;
    };
    std::vector<ColumnSpec> specs;
    const double info = res.fisher_info_truth;
    if (want_empirical)
        specs.push_back({"theta_empirical", &ReplicateOut::theta_emp, false, res.avar_nonparam});
    if (want_one_step) {
        specs.push_back(
            {"theta_one_step", &ReplicateOut::theta_one_step, false, res.avar_param_theta});
        specs.push_back({"gamma_one_step", &ReplicateOut::gamma_one_step, true, 1.0 / info});
    }
    if (want_mle) {
        specs.push_back({"theta_mle", &ReplicateOut::theta_mle, false, res.avar_param_theta});
        specs.push_back({"gamma_mle", &ReplicateOut::gamma_mle, true, 1.0 / info});
    }

    for (std::size_t t_idx = 0; t_idx < n_T; ++t_idx) {
        const double T = config.T_list[t_idx];
        const double sqrt_T = std::sqrt(T);
        for (std::size_t r = 0; r < R; ++r) {
            const ReplicateOut& out = slots[t_idx][r];
            if (out.errored) {
                ++res.errored;
                if (res.error_notes.size() < 8)
                    res.error_notes.push_back("T=" + fmt_double(T) + " r=" + std::to_string(r) +
                                              ": " + out.note);
            }
            if (out.clamped) ++res.clamped;
        }
        for (const auto& spec : specs) {
            StudyColumn col;
            col.T = T;
            col.name = spec.name;
            col.standardized.resize(R, NAN);
            for (std::size_t r = 0; r < R; ++r) {
                const ReplicateOut& out = slots[t_idx][r];
                if (out.errored) continue;
                const double truth = spec.gamma_scale ? res.gamma_truth : res.theta_truth;
                col.standardized[r] = sqrt_T * (out.*spec.field - truth);
            }
            std::vector<double> clean;
            clean.reserve(R);
            for (double v : col.standardized)
                if (std::isfinite(v)) clean.push_back(v);
            if (clean.size() >= 2) {
                col.summary.mean = sample_mean(clean);
                col.summary.var = sample_variance(clean);
                col.summary.k3 =
                    clean.size() >= 1000 ? mc_cumulants(clean).k3 : NAN;
                col.summary.avar_oracle = spec.avar_oracle;
                col.summary.ks_normal = ks_distance(
                    clean, [&](double z) { return normal_cdf(z, spec.avar_oracle); });
                if (std::string(spec.name) == "theta_empirical") {
                    const EdgeworthDensity ed =
                        EdgeworthDensity::asymptotic(res.avar_nonparam, res.c3, T);
                    col.summary.ks_edgeworth =
                        ks_distance(clean, [&](double z) { return ed.cdf(z); });
                } else {
                    col.summary.ks_edgeworth = NAN;
                }
            }
            res.columns.push_back(std::move(col));
        }
    }

    const std::size_t total = n_T * R;
    if (res.errored * 100 > total) {
        std::string msg = "study failed: " + std::to_string(res.errored) + "/" +
                          std::to_string(total) + " replicates errored";
        for (const auto& note : res.error_notes) msg += "\n  " + note;
        throw StudyFailure(msg);
    }
    return res;
}

std::string StudyResult::summary_json() const {
    nlohmann::json j;
    j["config"]["family"] = config.family;
    j["config"]["gamma_true"] = config.gamma_true;
    j["config"]["F"] = config.F;
    j["config"]["T_list"] = config.T_list;
    j["config"]["dt"] = config.dt;
    j["config"]["replicates"] = config.replicates;
    j["config"]["master_seed"] = config.master_seed;
    {
        std::vector<std::string> es;
        for (auto e : config.estimators) es.push_back(to_string(e));
        j["config"]["estimators"] = es;
    }
    j["truth"]["theta"] = theta_truth;
    j["truth"]["gamma"] = gamma_truth;
    j["oracles"]["avar_nonparam"] = avar_nonparam;
    j["oracles"]["avar_param_theta"] = avar_param_theta;
    j["oracles"]["fisher_info"] = fisher_info_truth;
    j["oracles"]["c3"] = c3;
    j["columns"] = nlohmann::json::array();
    for (const auto& col : columns) {
        nlohmann::json c;
        c["T"] = col.T;
        c["estimator"] = col.name;
        c["n"] = col.standardized.size();
        c["mean"] = col.summary.mean;
        c["var"] = col.summary.var;
        if (std::isfinite(col.summary.k3)) c["k3"] = col.summary.k3;
        else c["k3"] = nullptr;
        c["ks_normal"] = col.summary.ks_normal;
        if (std::isfinite(col.summary.ks_edgeworth)) c["ks_edgeworth"] = col.summary.ks_edgeworth;
        else c["ks_edgeworth"] = nullptr;
        c["avar_oracle"] = col.summary.avar_oracle;
        j["columns"].push_back(c);
    }
    j["errored"] = errored;
    j["clamped"] = clamped;
    j["error_notes"] = error_notes;
    j["provenance"]["config_hash"] = config_hash;
    j["provenance"]["code_version"] = code_version;
    j["provenance"]["master_seed"] = config.master_seed;
    return j.dump(2) + "\n";
}

std::string StudyResult::replicate_csv() const {
    // Rows grouped by estimator request so the row count is
    // replicates x |T_list| x |estimators|.
    std::ostringstream os;
    os << "T,estimator,replicate,theta_std,gamma_std\n";
    os.precision(17);
    for (double T : config.T_list) {
        for (auto est : config.estimators) {
            const std::string base = to_string(est);
            const StudyColumn* theta_col = nullptr;
            const StudyColumn* gamma_col = nullptr;
            for (const auto& col : columns) {
                if (col.T != T) continue;
                if (est == Estimator::Empirical && col.name == "theta_empirical")
                    theta_col = &col;
                if (est == Estimator::OneStep && col.name == "theta_one_step") theta_col = &col;
                if (est == Estimator::OneStep && col.name == "gamma_one_step") gamma_col = &col;
                if (est == Estimator::Mle && col.name == "theta_mle") theta_col = &col;
                if (est == Estimator::Mle && col.name == "gamma_mle") gamma_col = &col;
            }
            for (std::size_t r = 0; r < config.replicates; ++r) {
                os << T << ',' << base << ',' << r << ',';
                if (theta_col) os << theta_col->standardized[r];
                os << ',';
                if (gamma_col) os << gamma_col->standardized[r];
                os << '\n';
            }
        }
    }
    return os.str();
}

std::string StudyResult::density_csv() const {
    // Density comparison for the smallest horizon with an empirical column.
    const StudyColumn* pick = nullptr;
    for (const auto& col : columns)
        if (col.name == "theta_empirical" && (pick == nullptr || col.T < pick->T)) pick = &col;
    std::ostringstream os;
    os << "z,normal_density,edgeworth_density,empirical_histogram_density\n";
    if (pick == nullptr) return os.str();
    os.precision(12);
    const double sd = std::sqrt(avar_nonparam);
    const double z_lo = -5.0 * sd, z_hi = 5.0 * sd;
    const int bins = 160;
    std::vector<double> hist(bins, 0.0);
    std::size_t n = 0;
    for (double v : pick->standardized)
        if (std::isfinite(v)) {
            ++n;
            const int b = static_cast<int>((v - z_lo) / (z_hi - z_lo) * bins);
            if (b >= 0 && b < bins) hist[b] += 1.0;
        }
    const double bin_w = (z_hi - z_lo) / bins;
    const EdgeworthDensity ed = EdgeworthDensity::asymptotic(avar_nonparam, c3, pick->T);
    for (int b = 0; b < bins; ++b) {
        const double z = z_lo + (b + 0.5) * bin_w;
        const double emp = n > 0 ? hist[b] / (n * bin_w) : 0.0;
        os << z << ',' << normal_pdf(z, avar_nonparam) << ',' << ed.pdf(z) << ',' << emp << '\n';
    }
    return os.str();
}

const std::vector<std::string>& acceptance_criterion_names() {
    static const std::vector<std::string> names = {
        "1 invariant-law oracles (normalizer, moments)",
        "2 efficiency-bound identity (quadrature vs long-run variance vs bracket)",
        "3 bracket keystone ([q] = -Q on the grid)",
        "4 Ito decomposition residual (halving + absolute budget)",
        "5 first-order CLT (variance bands + KS)",
        "6 one-step efficiency gap for F = x4",
        "7 score identity residual halving",
        "8 Edgeworth improvement and cumulant fit",
        "9 determinism across thread counts",
    };
    return names;
}

std::string StudyResult::verdict_table() const {
    std::ostringstream os;
    os << "criterion | status | detail\n";
    auto col_for = [&](const std::string& name, double T) -> const StudyColumn* {
        for (const auto& c : columns)
            if (c.name == name && c.T == T) return &c;
        return nullptr;
    };
    const bool base_ok = config.family == "ou" && config.gamma_true == 1.0;
    for (const auto& name : acceptance_criterion_names()) {
        std::string status = "skipped";
        std::string detail = "needs the dedicated verify run";
        if (name[0] == '5' && base_ok && config.F == "x2" && config.replicates >= 2000) {
            if (const StudyColumn* c = col_for("theta_empirical", 100.0)) {
                const bool ok = std::abs(c->summary.var - c->summary.avar_oracle) <=
                                    0.1 * c->summary.avar_oracle &&
                                c->summary.ks_normal < 0.05;
                status = ok ? "pass" : "fail";
                detail = "var=" + fmt_double(c->summary.var) +
                         " ks=" + fmt_double(c->summary.ks_normal);
            }
        } else if (name[0] == '6' && base_ok && config.F == "x4" && config.replicates >= 2000) {
            const StudyColumn* emp = col_for("theta_empirical", 100.0);
            const StudyColumn* os_col = col_for("theta_one_step", 100.0);
            if (emp && os_col) {
                const double gap = avar_nonparam - avar_param_theta;
                const bool ok = os_col->summary.var <= emp->summary.var - 0.5 * gap;
                status = ok ? "pass" : "fail";
                detail = "var_emp=" + fmt_double(emp->summary.var) +
                         " var_one_step=" + fmt_double(os_col->summary.var);
            }
        } else if (name[0] == '8' && base_ok && config.F == "x2" && config.replicates >= 10000) {
            if (const StudyColumn* c = col_for("theta_empirical", 25.0)) {
                const bool ok = c->summary.ks_edgeworth < c->summary.ks_normal;
                status = ok ? "pass" : "fail";
                detail = "ks_normal=" + fmt_double(c->summary.ks_normal) +
                         " ks_edgeworth=" + fmt_double(c->summary.ks_edgeworth);
            }
        }
        os << name << " | " << status << " | " << detail << "\n";
    }
    return os.str();
}

void report(const StudyResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IOFailure("cannot create output directory " + out_dir + ": " + ec.message());
    auto write = [&](const std::string& name, const std::string& content) {
        const fs::path p = fs::path(out_dir) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IOFailure("cannot open " + p.string());
        out << content;
        if (!out) throw IOFailure("write failed for " + p.string());
    };
    write("summary.json", result.summary_json());
    write("replicates.csv", result.replicate_csv());
    write("density.csv", result.density_csv());
    write("verdicts.txt", result.verdict_table());
}

void write_path_csv(std::ostream& out, const Path& path) {
    out << "dt," << fmt_double(path.dt) << "\n";
    out.precision(17);
    for (double v : path.values) out << v << "\n";
}

Path read_path_csv(std::istream& in) {
    Path path;
    std::string line;
    if (!std::getline(in, line)) throw IOFailure("empty path CSV");
    line = trim(line);
    if (line.rfind("dt,", 0) != 0) throw IOFailure("path CSV must start with a 'dt,<value>' line");
    path.dt = std::stod(line.substr(3));
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        path.values.push_back(std::stod(line));
    }
    if (path.values.size() < 2) throw IOFailure("path CSV holds fewer than two values");
    return path;
}

void write_law_csv(std::ostream& out, const InvariantLaw& law) {
    out << "x,density,cdf\n";
    out.precision(17);
    for (double x : law.grid()) out << x << ',' << law.density(x) << ',' << law.cdf(x) << '\n';
}

} // namespace ergodiff
