#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ulight/errors.hpp"
#include "ulight/io.hpp"
#include "ulight/metrics.hpp"
#include "ulight/oracle.hpp"
#include "ulight/scenario.hpp"
#include "ulight/solver.hpp"

namespace {

using nlohmann::json;
using namespace ulight;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void write_json_report(const std::string& path, const json& j) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

// ---- generate ----------------------------------------------------------

struct GenerateArgs {
    std::string scenario = "gauss_mix";
    long n = 10000;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_generate(const GenerateArgs& args) {
    const Scenario scenario = make_scenario(args.scenario);
    std::filesystem::create_directories(args.out_dir);
    Rng rng(args.seed);
    const Eigen::MatrixXd src = sample(scenario.source, 1.0, rng, static_cast<int>(args.n));
    const Eigen::MatrixXd tgt = sample(scenario.target, 1.0, rng, static_cast<int>(args.n));
    const auto cols = io::indexed_columns("x", scenario.source.dim);
    io::write_csv(args.out_dir + "/source.csv", src, cols);
    io::write_csv(args.out_dir + "/target.csv", tgt, cols);
    std::cout << "wrote " << args.out_dir << "/source.csv and target.csv (n=" << args.n
              << ", seed=" << args.seed << ")\n";
    return 0;
}

// ---- train -------------------------------------------------------------

struct TrainArgs {
    std::string source_path;
    std::string target_path;
    std::string out_path;
    std::string progress_path;
    std::string config_path;
    std::string init_path;
    SolverConfig config;
    std::string div = "kl";
    double tau1 = 1.0;
    double tau2 = 1.0;
};

void apply_config_file(TrainArgs& args, const std::vector<std::string>& given) {
    if (args.config_path.empty()) return;
    std::ifstream in(args.config_path);
    if (!in) throw IoError("cannot open " + args.config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("config " + args.config_path + ": " + e.what());
    }
    auto absent = [&](const std::string& flag) {
        return std::find(given.begin(), given.end(), flag) == given.end();
    };
    if (j.contains("epsilon") && absent("--epsilon")) args.config.epsilon = j["epsilon"];
    if (j.contains("tau1") && absent("--tau1")) args.tau1 = j["tau1"];
    if (j.contains("tau2") && absent("--tau2")) args.tau2 = j["tau2"];
    if (j.contains("div") && absent("--div")) args.div = j["div"];
    if (j.contains("components_k") && absent("--components-k"))
        args.config.components_k = j["components_k"];
    if (j.contains("components_l") && absent("--components-l"))
        args.config.components_l = j["components_l"];
    if (j.contains("lr") && absent("--lr")) args.config.learning_rate = j["lr"];
    if (j.contains("steps") && absent("--steps")) args.config.steps = j["steps"];
    if (j.contains("batch_size") && absent("--batch-size")) args.config.batch_size = j["batch_size"];
    if (j.contains("seed") && absent("--seed")) args.config.seed = j["seed"];
}

int cmd_train(TrainArgs& args, const std::vector<std::string>& given) {
    apply_config_file(args, given);
    args.config.div1 = {divergence_kind_from_string(args.div), args.tau1};
    args.config.div2 = {divergence_kind_from_string(args.div), args.tau2};

    const Eigen::MatrixXd xs = io::read_csv(args.source_path);
    const Eigen::MatrixXd ys = io::read_csv(args.target_path);

    std::optional<PlanModel> init;
    if (!args.init_path.empty()) init = io::load_checkpoint(args.init_path).plan;

    std::ofstream progress;
    ProgressSink sink;
    if (!args.progress_path.empty()) {
        progress.open(args.progress_path);
        if (!progress) throw IoError("cannot write " + args.progress_path);
        sink = [&progress](long step, double value) { progress << step << "," << value << "\n"; };
    }

    const PlanModel plan = train(args.config, xs, ys, init, sink);
    io::save_checkpoint(args.out_path, {plan, args.config.seed, args.config.steps});

    std::cout.precision(10);
    std::cout << "final_objective=" << objective(plan, xs, ys) << "\n";
    std::cout << "checkpoint=" << args.out_path << "\n";
    return 0;
}

// ---- sample ------------------------------------------------------------

struct SampleArgs {
    std::string checkpoint_path;
    std::string source_path;
    bool marginal = false;
    long n = 1000;
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_sample(const SampleArgs& args) {
    const io::Checkpoint ckpt = io::load_checkpoint(args.checkpoint_path);
    const int d = ckpt.plan.v.dim;
    Rng rng(args.seed);

    if (args.marginal) {
        const Eigen::MatrixXd draws =
            sample(ckpt.plan.u, ckpt.plan.epsilon, rng, static_cast<int>(args.n));
        io::write_csv(args.out_path, draws, io::indexed_columns("x", d));
        std::cout.precision(10);
        std::cout << "total_mass=" << total_mass(ckpt.plan.u) << "\n";
        return 0;
    }

    const Eigen::MatrixXd xs = io::read_csv(args.source_path);
    if (xs.cols() != d) {
        throw DimensionError("sample: data dimension " + std::to_string(xs.cols()) +
                             " does not match checkpoint dimension " + std::to_string(d));
    }
    Eigen::MatrixXd out(xs.rows(), 2 * d);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        const ConditionalMixture cond = conditional(ckpt.plan, xs.row(i));
        out.row(i).head(d) = xs.row(i);
        out.row(i).tail(d) = cond.sample(rng, 1);
    }
    auto cols = io::indexed_columns("x", d);
    const auto ycols = io::indexed_columns("y", d);
    cols.insert(cols.end(), ycols.begin(), ycols.end());
    io::write_csv(args.out_path, out, cols);
    return 0;
}

// ---- evaluate ----------------------------------------------------------

struct EvaluateArgs {
    std::string checkpoint_path;
    std::string source_path;
    std::string target_path;
    std::string out_path;
    std::string scenario = "gauss_mix";
    int draws_per_x = 1;
    int w2_subsample = 1024;
    std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const double t0 = now_seconds();
    const io::Checkpoint ckpt = io::load_checkpoint(args.checkpoint_path);
    const Eigen::MatrixXd xs = io::read_csv(args.source_path);
    const Eigen::MatrixXd ys = io::read_csv(args.target_path);

    metrics::EvaluateOptions options;
    options.draws_per_x = args.draws_per_x;
    options.w2_subsample = args.w2_subsample;
    const Scenario scenario = make_scenario(args.scenario);
    if (scenario.centers_source.cols() == xs.cols()) {
        options.centers_src = scenario.centers_source;
        options.centers_tgt = scenario.centers_target;
    }

    Rng rng(args.seed);
    const metrics::MetricReport report = metrics::evaluate_plan(ckpt.plan, xs, ys, options, rng);

    json j;
    j["ot_cost"] = report.ot_cost;
    j["ot_cost_se"] = report.ot_cost_se;
    j["w2"] = report.w2;
    j["learned_mass"] = report.learned_mass;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < report.mode_matrix.rows(); ++r) {
        rows.emplace_back(report.mode_matrix.row(r).begin(), report.mode_matrix.row(r).end());
    }
    j["mode_matrix"] = rows;
    j["elapsed_seconds"] = now_seconds() - t0;
    write_json_report(args.out_path, j);
    return 0;
}

// ---- oracle ------------------------------------------------------------

struct OracleArgs {
    double grid_lo = -6.0;
    double grid_hi = 6.0;
    int grid_n = 256;
    double epsilon = 0.1;
    std::string div = "kl";
    double tau1 = 1.0;
    double tau2 = 1.0;
    int max_iter = 20000;
    double tol = 1e-9;
    double gap_tol = 1e-4;
    double slack = 1e-6;
    int draws = 50;
    std::uint64_t seed = 0;
    std::string out_path;
};

// Built-in 1D validation measures: two-mode mixtures inside [-2, 2].
GaussianMixture oracle_density_p() {
    GaussianMixture m;
    m.dim = 1;
    m.log_weights.resize(2);
    m.log_weights << std::log(0.55), std::log(0.45);
    m.means.resize(2, 1);
    m.means << -1.2, 0.9;
    m.log_diag_covs.resize(2, 1);
    m.log_diag_covs << std::log(0.16), std::log(0.09);
    return m;
}

GaussianMixture oracle_density_q() {
    GaussianMixture m;
    m.dim = 1;
    m.log_weights.resize(2);
    m.log_weights << std::log(0.5), std::log(0.5);
    m.means.resize(2, 1);
    m.means << -0.6, 1.4;
    m.log_diag_covs.resize(2, 1);
    m.log_diag_covs << std::log(0.09), std::log(0.16);
    return m;
}

Eigen::VectorXd density_on_grid(const GaussianMixture& m, const oracle::Grid1D& grid) {
    Eigen::VectorXd out(grid.n);
    Eigen::VectorXd x(1);
    for (int i = 0; i < grid.n; ++i) {
        x[0] = grid.node(i);
        out[i] = std::exp(log_density(m, 1.0, x));
    }
    return out;
}

int cmd_oracle(const std::string& mode, const OracleArgs& args) {
    const double t0 = now_seconds();
    const oracle::Grid1D grid(args.grid_lo, args.grid_hi, args.grid_n);
    const DivergenceSpec d1{divergence_kind_from_string(args.div), args.tau1};
    const DivergenceSpec d2{divergence_kind_from_string(args.div), args.tau2};
    const Eigen::VectorXd p = density_on_grid(oracle_density_p(), grid);
    const Eigen::VectorXd q = density_on_grid(oracle_density_q(), grid);

    json j;
    j["mode"] = mode;
    j["epsilon"] = args.epsilon;
    j["div"] = args.div;
    j["grid_n"] = args.grid_n;

    const oracle::SinkhornResult res = oracle::sinkhorn_ueot(p, q, grid, grid, args.epsilon, d1,
                                                             d2, args.max_iter, args.tol);
    j["iterations"] = res.iterations;
    j["residual"] = res.residual;
    j["plan_mass"] = res.plan.total_mass();

    if (mode == "sinkhorn") {
        const Eigen::VectorXd mx = res.plan.marginal_mass_x();
        const Eigen::VectorXd my = res.plan.marginal_mass_y();
        const double rp = (mx - p * grid.step()).cwiseAbs().maxCoeff();
        const double rq = (my - q * grid.step()).cwiseAbs().maxCoeff();
        j["marginal_residual_p"] = rp;
        j["marginal_residual_q"] = rq;
        bool pass = res.residual <= args.tol;
        if (d1.kind == DivergenceKind::balanced) pass = pass && rp <= 1e-6;
        if (d2.kind == DivergenceKind::balanced) pass = pass && rq <= 1e-6;
        j["pass"] = pass;
    } else if (mode == "duality-gap") {
        const double primal = oracle::primal_value(res.plan, p, q, args.epsilon, d1, d2);
        const double dual =
            oracle::dual_value_on_grid(res.phi, res.psi, grid, grid, p, q, args.epsilon, d1, d2);
        const double gap = std::abs(primal + dual);
        j["primal"] = primal;
        j["dual_L"] = dual;
        j["gap"] = gap;
        j["gap_tol"] = args.gap_tol;
        j["pass"] = gap <= args.gap_tol;
    } else { // bound-check
        const double l_star =
            oracle::dual_value_on_grid(res.phi, res.psi, grid, grid, p, q, args.epsilon, d1, d2);
        j["L_star"] = l_star;
        Rng rng(args.seed);
        int violations = 0;
        double worst = -1e300;
        for (int t = 0; t < args.draws; ++t) {
            PlanModel plan;
            plan.epsilon = args.epsilon;
            plan.div1 = d1;
            plan.div2 = d2;
            auto random_mixture = [&](int comps) {
                GaussianMixture m;
                m.dim = 1;
                m.log_weights.resize(comps);
                m.means.resize(comps, 1);
                m.log_diag_covs.resize(comps, 1);
                for (int k = 0; k < comps; ++k) {
                    m.log_weights[k] = -1.0 + 1.5 * rng.uniform();
                    m.means(k, 0) = -2.0 + 4.0 * rng.uniform();
                    m.log_diag_covs(k, 0) = -1.0 + 1.5 * rng.uniform();
                }
                return m;
            };
            plan.v = random_mixture(1 + static_cast<int>(rng.integer(3)));
            plan.u = random_mixture(1 + static_cast<int>(rng.integer(3)));

            const Eigen::VectorXd phi = oracle::phi_on_grid(plan, grid);
            const Eigen::VectorXd psi = oracle::psi_on_grid(plan, grid);
            const double l_plan =
                oracle::dual_value_on_grid(phi, psi, grid, grid, p, q, args.epsilon, d1, d2);
            const double kl = oracle::grid_kl_vs_potentials(res.plan, phi, psi, args.epsilon);
            const double margin = (l_plan - l_star + args.slack) - args.epsilon * kl;
            if (!(margin >= 0.0)) ++violations;
            worst = std::max(worst, args.epsilon * kl - (l_plan - l_star));
        }
        j["draws"] = args.draws;
        j["violations"] = violations;
        j["worst_excess"] = worst; // eps*KL - (L - L*), negative when the bound is strict
        j["slack"] = args.slack;
        j["pass"] = violations == 0;
    }

    j["elapsed_seconds"] = now_seconds() - t0;
    write_json_report(args.out_path, j);
    return j["pass"].get<bool>() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ulight: continuous unbalanced entropic optimal transport solver"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "Sample a built-in scenario to CSV datasets");
    cmd_gen->add_option("--scenario", gen.scenario, "gauss_mix or gauss_mix_outliers");
    cmd_gen->add_option("-n,--n", gen.n, "samples per side")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--seed", gen.seed, "PRNG seed");
    cmd_gen->add_option("--out", gen.out_dir, "output directory")->required();

    TrainArgs tr;
    auto* cmd_tr = app.add_subcommand("train", "Fit the plan to source/target datasets");
    cmd_tr->add_option("--source", tr.source_path)->required();
    cmd_tr->add_option("--target", tr.target_path)->required();
    cmd_tr->add_option("--out", tr.out_path, "checkpoint path")->required();
    cmd_tr->add_option("--progress", tr.progress_path, "per-step objective CSV");
    cmd_tr->add_option("--config", tr.config_path, "JSON config (flags take precedence)");
    cmd_tr->add_option("--init", tr.init_path, "checkpoint to start from");
    cmd_tr->add_option("--epsilon", tr.config.epsilon);
    cmd_tr->add_option("--tau1", tr.tau1);
    cmd_tr->add_option("--tau2", tr.tau2);
    cmd_tr->add_option("--div", tr.div, "kl, chi2 or balanced");
    cmd_tr->add_option("--components-k", tr.config.components_k);
    cmd_tr->add_option("--components-l", tr.config.components_l);
    cmd_tr->add_option("--lr", tr.config.learning_rate);
    cmd_tr->add_option("--steps", tr.config.steps);
    cmd_tr->add_option("--batch-size", tr.config.batch_size);
    cmd_tr->add_option("--seed", tr.config.seed);

    SampleArgs sa;
    auto* cmd_sa = app.add_subcommand("sample", "Draw from a trained plan");
    cmd_sa->add_option("--checkpoint", sa.checkpoint_path)->required();
    cmd_sa->add_option("--source", sa.source_path, "inputs for conditional draws");
    cmd_sa->add_flag("--marginal", sa.marginal, "draw from the normalized left marginal");
    cmd_sa->add_option("-n,--n", sa.n)->check(CLI::PositiveNumber);
    cmd_sa->add_option("--seed", sa.seed);
    cmd_sa->add_option("--out", sa.out_path)->required();

    EvaluateArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "Transport metrics of a trained plan");
    cmd_ev->add_option("--checkpoint", ev.checkpoint_path)->required();
    cmd_ev->add_option("--source", ev.source_path)->required();
    cmd_ev->add_option("--target", ev.target_path)->required();
    cmd_ev->add_option("--out", ev.out_path, "report path (stdout when omitted)");
    cmd_ev->add_option("--scenario", ev.scenario, "mode centers for the transport matrix");
    cmd_ev->add_option("--draws-per-x", ev.draws_per_x);
    cmd_ev->add_option("--w2-subsample", ev.w2_subsample);
    cmd_ev->add_option("--seed", ev.seed);

    OracleArgs orc;
    auto* cmd_orc = app.add_subcommand("oracle", "Discrete reference checks on a 1D grid");
    cmd_orc->require_subcommand(1);
    std::vector<CLI::App*> oracle_modes;
    for (const char* name : {"sinkhorn", "duality-gap", "bound-check"}) {
        auto* sub = cmd_orc->add_subcommand(name);
        sub->add_option("--grid-lo", orc.grid_lo);
        sub->add_option("--grid-hi", orc.grid_hi);
        sub->add_option("--grid-n", orc.grid_n);
        sub->add_option("--epsilon", orc.epsilon);
        sub->add_option("--div", orc.div, "kl or balanced");
        sub->add_option("--tau1", orc.tau1);
        sub->add_option("--tau2", orc.tau2);
        sub->add_option("--max-iter", orc.max_iter);
        sub->add_option("--tol", orc.tol);
        sub->add_option("--gap-tol", orc.gap_tol);
        sub->add_option("--slack", orc.slack);
        sub->add_option("--draws", orc.draws);
        sub->add_option("--seed", orc.seed);
        sub->add_option("--out", orc.out_path);
        oracle_modes.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_gen->parsed()) return cmd_generate(gen);
        if (cmd_tr->parsed()) {
            std::vector<std::string> given;
            for (const auto* opt : cmd_tr->get_options()) {
                if (opt->count() > 0) given.push_back(opt->get_name());
            }
            return cmd_train(tr, given);
        }
        if (cmd_sa->parsed()) {
            if (!sa.marginal && sa.source_path.empty()) {
                throw IoError("sample: provide --source or --marginal");
            }
            return cmd_sample(sa);
        }
        if (cmd_ev->parsed()) return cmd_evaluate(ev);
        if (cmd_orc->parsed()) {
            for (auto* sub : oracle_modes) {
                if (sub->parsed()) return cmd_oracle(sub->get_name(), orc);
            }
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
