// Command-line front end: simulate paths, run estimators on path files,
// print efficiency bounds, dump expansion densities, run Monte Carlo studies,
// and run the verification suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergodiff/acceptance.hpp"
#include "ergodiff/harness.hpp"

using namespace ergodiff;

namespace {

std::shared_ptr<const InvariantLaw> law_for(const std::string& family, double gamma) {
    const ParametricFamily fam = make_family(family);
    return std::make_shared<const InvariantLaw>(build_law(fam.model_at(gamma)));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment estimation for ergodic one-dimensional diffusions"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand("simulate", "emit one path as CSV");
    std::string sim_family = "ou", sim_out = "path.csv", sim_scheme = "euler";
    double sim_gamma = 1.0, sim_T = 100.0, sim_dt = 0.01;
    std::uint64_t sim_seed = 1;
    std::optional<double> sim_x0;
    sim_cmd->add_option("--family", sim_family, "family name (ou, nonlinear)");
    sim_cmd->add_option("--gamma", sim_gamma, "drift parameter");
    sim_cmd->add_option("--T", sim_T, "horizon");
    sim_cmd->add_option("--dt", sim_dt, "grid step");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");
    sim_cmd->add_option("--x0", sim_x0, "fixed initial value (default: stationary draw)");
    sim_cmd->add_option("--scheme", sim_scheme, "euler or milstein");
    sim_cmd->add_option("--out", sim_out, "output CSV file");

    // --- estimate ---
    auto* est_cmd = app.add_subcommand("estimate", "estimators on a path CSV, JSON out");
    std::string est_path, est_family = "ou", est_F = "x2";
    bool est_with_mle = false;
    est_cmd->add_option("--path", est_path, "path CSV file")->required();
    est_cmd->add_option("--family", est_family, "family name");
    est_cmd->add_option("--F", est_F, "moment function (x, x2, x4, indicator(x0))");
    est_cmd->add_flag("--mle", est_with_mle, "also compute the likelihood maximizer");

    // --- bound ---
    auto* bound_cmd = app.add_subcommand("bound", "efficiency bound for (family, gamma, F)");
    std::string bound_family = "ou", bound_F = "x2", bound_csv, bound_law_csv;
    double bound_gamma = 1.0;
    bound_cmd->add_option("--family", bound_family, "family name");
    bound_cmd->add_option("--gamma", bound_gamma, "drift parameter");
    bound_cmd->add_option("--F", bound_F, "moment function");
    bound_cmd->add_option("--csv", bound_csv, "optional CSV dump of (x, M, Q, H)");
    bound_cmd->add_option("--law-csv", bound_law_csv, "optional CSV dump of (x, density, cdf)");

    // --- edgeworth ---
    auto* edge_cmd = app.add_subcommand("edgeworth", "expansion density CSV");
    std::string edge_family = "ou", edge_F = "x2", edge_out = "edgeworth.csv";
    double edge_gamma = 1.0, edge_T = 25.0, edge_dt = 0.01;
    std::size_t edge_reps = 0;
    std::uint64_t edge_seed = 1;
    int edge_threads = 0;
    edge_cmd->add_option("--family", edge_family, "family name");
    edge_cmd->add_option("--gamma", edge_gamma, "drift parameter");
    edge_cmd->add_option("--F", edge_F, "moment function");
    edge_cmd->add_option("--T", edge_T, "horizon the density is evaluated at");
    edge_cmd->add_option("--dt", edge_dt, "grid step for the optional MC column");
    edge_cmd->add_option("--replicates", edge_reps,
                         "Monte Carlo replicates for the histogram column (0 = none)");
    edge_cmd->add_option("--seed", edge_seed, "master seed for the MC column");
    edge_cmd->add_option("--threads", edge_threads, "worker threads");
    edge_cmd->add_option("--out", edge_out, "output CSV file");

    // --- study ---
    auto* study_cmd = app.add_subcommand("study", "full Monte Carlo study from a config file");
    std::string study_config;
    std::optional<std::uint64_t> study_seed;
    std::optional<int> study_threads;
    std::optional<std::string> study_out;
    study_cmd->add_option("--config", study_config, "study config file")->required();
    study_cmd->add_option("--seed", study_seed, "override master_seed");
    study_cmd->add_option("--threads", study_threads, "override worker threads");
    study_cmd->add_option("--out", study_out, "override output directory");

    // --- verify ---
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
    std::uint64_t verify_seed = AcceptanceOptions{}.master_seed;
    int verify_threads = 0;
    bool verify_fast = false;
    std::string verify_out;
    verify_cmd->add_option("--seed", verify_seed, "master seed");
    verify_cmd->add_option("--threads", verify_threads, "worker threads");
    verify_cmd->add_flag("--skip-slow", verify_fast, "skip the slow Edgeworth criterion");
    verify_cmd->add_option("--out", verify_out, "artifact directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            const ParametricFamily fam = make_family(sim_family);
            const DiffusionModel model = fam.model_at(sim_gamma);
            SimConfig cfg;
            cfg.dt = sim_dt;
            cfg.T = sim_T;
            cfg.seed = sim_seed;
            cfg.fixed_init = sim_x0;
            cfg.scheme = sim_scheme == "milstein" ? Scheme::Milstein : Scheme::EulerMaruyama;
            std::shared_ptr<const InvariantLaw> law;
            if (!sim_x0) law = law_for(sim_family, sim_gamma);
            const Path path = simulate_path(model, cfg, law.get());
            std::ofstream out(sim_out);
            if (!out) throw IOFailure("cannot open " + sim_out);
            write_path_csv(out, path);
            std::printf("wrote %zu values to %s\n", path.values.size(), sim_out.c_str());
        } else if (est_cmd->parsed()) {
            std::ifstream in(est_path);
            if (!in) throw IOFailure("cannot open " + est_path);
            const Path path = read_path_csv(in);
            const ParametricFamily fam = make_family(est_family);
            const ScalarField F = make_moment_function(est_F);
            const ParamContext ctx = build_param_context(fam, F);
            const OneStepResult os = one_step(path, ctx);
            nlohmann::json j;
            j["theta_star"] = os.theta_star;
            j["gamma_star"] = os.gamma_star;
            j["gamma_tilde"] = os.gamma_tilde;
            j["theta_tilde"] = os.theta_tilde;
            std::vector<std::string> flags;
            if (os.clamped) flags.push_back("clamped");
            if (est_with_mle) {
                const MleResult m = mle(path, fam);
                j["gamma_mle"] = m.gamma_hat;
                if (m.boundary) flags.push_back("boundary_maximum");
            }
            j["flags"] = flags;
            std::cout << j.dump(2) << "\n";
        } else if (bound_cmd->parsed()) {
            auto law = law_for(bound_family, bound_gamma);
            const ScalarField F = make_moment_function(bound_F);
            const NonparamBound b = build_bound(law, F);
            nlohmann::json j;
            j["theta"] = b.theta();
            j["info"] = b.info();
            j["avar"] = b.avar();
            j["degenerate"] = b.degenerate();
            std::cout << j.dump(2) << "\n";
            if (!bound_csv.empty()) {
                std::ofstream out(bound_csv);
                if (!out) throw IOFailure("cannot open " + bound_csv);
                out << "x,M,Q,H\n";
                out.precision(17);
                for (double x : law->grid())
                    out << x << ',' << b.M(x) << ',' << b.Q(x) << ',' << b.H(x) << '\n';
            }
            if (!bound_law_csv.empty()) {
                std::ofstream out(bound_law_csv);
                if (!out) throw IOFailure("cannot open " + bound_law_csv);
                write_law_csv(out, *law);
            }
        } else if (edge_cmd->parsed()) {
            StudyConfig cfg;
            cfg.family = edge_family;
            cfg.gamma_true = edge_gamma;
            cfg.F = edge_F;
            cfg.T_list = {edge_T};
            cfg.dt = edge_dt;
            cfg.replicates = edge_reps > 0 ? edge_reps : 1;
            cfg.master_seed = edge_seed;
            cfg.estimators = {Estimator::Empirical};
            cfg.threads = edge_threads;
            if (edge_reps > 0) {
                const StudyResult res = run_study(cfg);
                std::ofstream out(edge_out);
                if (!out) throw IOFailure("cannot open " + edge_out);
                out << res.density_csv();
            } else {
                auto law = law_for(edge_family, edge_gamma);
                const ScalarField F = make_moment_function(edge_F);
                const NonparamBound b = build_bound(law, F);
                const double c3 = skewness_coefficient(law, F);
                const EdgeworthDensity ed = EdgeworthDensity::asymptotic(b.avar(), c3, edge_T);
                std::ofstream out(edge_out);
                if (!out) throw IOFailure("cannot open " + edge_out);
                out << "z,normal_density,edgeworth_density,empirical_histogram_density\n";
                out.precision(12);
                const double sd = std::sqrt(b.avar());
                for (int i = 0; i <= 200; ++i) {
                    const double z = -5.0 * sd + 10.0 * sd * i / 200.0;
                    out << z << ',' << normal_pdf(z, b.avar()) << ',' << ed.pdf(z) << ",0\n";
                }
            }
            std::printf("wrote %s\n", edge_out.c_str());
        } else if (study_cmd->parsed()) {
            StudyConfig cfg = StudyConfig::from_file(study_config);
            if (study_seed) cfg.master_seed = *study_seed;
            if (study_threads) cfg.threads = *study_threads;
            if (study_out) cfg.outputs = *study_out;
            const StudyResult res = run_study(cfg);
            report(res, cfg.outputs);
            std::printf("study complete: %zu columns, %zu errored, %zu clamped -> %s\n",
                        res.columns.size(), res.errored, res.clamped, cfg.outputs.c_str());
        } else if (verify_cmd->parsed()) {
            AcceptanceOptions opts;
            opts.master_seed = verify_seed;
            opts.threads = verify_threads;
            opts.include_slow = !verify_fast;
            opts.out_dir = verify_out;
            const bool ok = print_outcomes(run_acceptance(opts));
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
