// Command-line front end: deterministic runs of the alternating-direction
// solvers, the localization simulator, and the scalar fixed-point oracle,
// with replayable manifests next to every output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "adlm/algorithms.hpp"
#include "adlm/localization.hpp"
#include "adlm/manifest.hpp"
#include "adlm/problem_io.hpp"
#include "adlm/scalar_oracle.hpp"
#include "adlm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMaxIters = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitFlaggedNetwork = 4;
constexpr int kExitDisagreement = 5;

int run_cli(const std::vector<std::string>& args);  // forward, used by replay

adlm::Vector parse_vector_flag(const std::string& csv, Eigen::Index expected,
                               const std::string& name) {
    if (csv.empty()) return adlm::Vector::Zero(expected);
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        vals.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (static_cast<Eigen::Index>(vals.size()) != expected)
        throw CLI::ValidationError(name, "expected " + std::to_string(expected) + " values");
    adlm::Vector v(expected);
    for (Eigen::Index i = 0; i < expected; ++i) v[i] = vals[static_cast<std::size_t>(i)];
    return v;
}

adlm::PenaltySchedule parse_schedule(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::string rest = spec.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            std::size_t comma = rest.find(',', pos);
            params.push_back(std::stod(
                rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (kind == "constant" && params.size() == 1) return adlm::PenaltySchedule::constant(params[0]);
    if (kind == "linear" && params.size() == 2)
        return adlm::PenaltySchedule::linear(params[0], params[1]);
    if (kind == "geometric" && params.size() == 3)
        return adlm::PenaltySchedule::geometric(params[0], params[1], static_cast<int>(params[2]));
    throw CLI::ValidationError(
        "--schedule", "expected constant:RHO, linear:RHO0,SLOPE, or geometric:RHO0,DELTA,KAPPA");
}

// Block shorthand for the oracle: cos, sin, negsq, cosine:AMP,PHASE,
// quad:A[,B], poly:C0,C1,..., huber:DELTA.
adlm::ObjectiveBlock parse_scalar_block(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::string rest = spec.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            std::size_t comma = rest.find(',', pos);
            params.push_back(std::stod(
                rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (kind == "cos") return adlm::ObjectiveBlock::cosine1d(1.0, 0.0);
    if (kind == "sin") return adlm::sine1d();
    if (kind == "negsq") return adlm::ObjectiveBlock::negative_square_1d();
    if (kind == "cosine" && params.size() == 2)
        return adlm::ObjectiveBlock::cosine1d(params[0], params[1]);
    if (kind == "quad" && (params.size() == 1 || params.size() == 2))
        return adlm::ObjectiveBlock::quadratic(adlm::Matrix::Constant(1, 1, params[0]),
                                               adlm::Vector::Constant(1, params.size() == 2 ? params[1] : 0.0));
    if (kind == "poly" && !params.empty()) return adlm::ObjectiveBlock::polynomial1d(params);
    if (kind == "huber" && params.size() == 1) {
        auto delta = params[0];
        return adlm::ObjectiveBlock::huber(1, delta);
    }
    throw CLI::ValidationError("--f/--g", "unknown scalar block \"" + spec + "\"");
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    if (const char* env = std::getenv("ADLM_SEED")) return std::stoull(env);
    return flag_seed;
}

void write_text(const std::string& path, const std::string& content) {
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << content;
}

int verdict_exit_code(adlm::Verdict v) {
    switch (v) {
        case adlm::Verdict::Converged: return kExitOk;
        case adlm::Verdict::MaxIters: return kExitMaxIters;
        case adlm::Verdict::Diverged: return kExitDiverged;
    }
    return kExitUsage;
}

struct SolveOptions {
    std::string problem_path, algo, schedule_spec, trace_path, summary_path, manifest_path;
    std::string z0_csv, y0_csv, strategy = "auto";
    double rho = 0.0;
    int max_iter = 1000;
    double tol = 1e-8, step_tol = 0.0, divergence_bound = 1e6, solver_tol = 0.0;
    int grid_points = 101, inner_iters = 5000, multistart = 1;
    std::string dual = "zero";
    double dual_bound = 0.0;
    std::uint64_t seed = 0;
};

int cmd_solve(const SolveOptions& opt, const std::vector<std::string>& raw_args) {
    adlm::StructuredProblem problem = adlm::load_problem(opt.problem_path);

    adlm::SolverPolicy policy;
    policy.tol = opt.solver_tol;
    policy.grid_points_per_dim = opt.grid_points;
    policy.max_inner_iters = opt.inner_iters;
    policy.multistart_count = opt.multistart;
    policy.seed = effective_seed(opt.seed);
    if (opt.strategy == "auto") policy.strategy = adlm::SolveStrategy::Auto;
    else if (opt.strategy == "closed-form") policy.strategy = adlm::SolveStrategy::ClosedForm;
    else if (opt.strategy == "projected-gradient") policy.strategy = adlm::SolveStrategy::ProjectedGradient;
    else if (opt.strategy == "grid-global") policy.strategy = adlm::SolveStrategy::GridGlobal;
    else if (opt.strategy == "scalar-exact") policy.strategy = adlm::SolveStrategy::ScalarExact;
    else throw CLI::ValidationError("--strategy", "unknown strategy " + opt.strategy);

    adlm::StopRule stop;
    stop.max_iters = opt.max_iter;
    stop.primal_tol = opt.tol;
    stop.step_tol = opt.step_tol > 0.0 ? opt.step_tol : opt.tol;
    stop.divergence_bound = opt.divergence_bound;

    adlm::Vector z0 = parse_vector_flag(opt.z0_csv, problem.z_dim(), "--z0");
    adlm::Vector y0 = parse_vector_flag(opt.y0_csv, problem.coupling_dim(), "--y0");

    adlm::IterationTrace trace;
    if (opt.algo == "admm") {
        if (opt.rho <= 0.0) throw CLI::ValidationError("--rho", "admm needs --rho > 0");
        trace = adlm::run_admm(problem, opt.rho, z0, y0, policy, stop);
    } else if (opt.algo == "mm") {
        if (opt.rho <= 0.0) throw CLI::ValidationError("--rho", "mm needs --rho > 0");
        trace = adlm::run_method_of_multipliers(problem, opt.rho, z0, y0, policy, stop);
    } else if (opt.algo == "adpm" || opt.algo == "qpm") {
        adlm::PenaltySchedule schedule =
            opt.schedule_spec.empty() ? adlm::PenaltySchedule::linear(1.0, 1.0)
                                      : parse_schedule(opt.schedule_spec);
        if (opt.algo == "adpm") {
            adlm::DualPolicy dual = adlm::DualPolicy::zero();
            if (opt.dual == "bounded") {
                if (opt.dual_bound <= 0.0)
                    throw CLI::ValidationError("--dual-bound", "bounded dual policy needs a bound > 0");
                dual = adlm::DualPolicy::bounded_recursion(opt.dual_bound);
            } else if (opt.dual != "zero") {
                throw CLI::ValidationError("--dual", "adpm admits zero or bounded");
            }
            trace = adlm::run_adpm(problem, schedule, dual, z0, y0, policy, stop);
        } else {
            trace = adlm::run_quadratic_penalty(problem, schedule, z0, y0, policy, stop);
        }
    } else {
        throw CLI::ValidationError("--algo", "expected adpm, admm, qpm, or mm");
    }

    write_text(opt.trace_path, trace.csv());

    ordered_json summary = trace.summary();
    const auto& last = trace.final_record();
    summary["final"] = {{"x", std::vector<double>(last.x.data(), last.x.data() + last.x.size())},
                        {"z", std::vector<double>(last.z.data(), last.z.data() + last.z.size())},
                        {"y", std::vector<double>(last.y.data(), last.y.data() + last.y.size())}};
    write_text(opt.summary_path, summary.dump(2) + "\n");

    adlm::RunManifest manifest;
    manifest.command = "solve";
    manifest.arguments = raw_args;
    manifest.seed = policy.seed;
    manifest.config = {{"problem", opt.problem_path}, {"algo", opt.algo},
                       {"rho", opt.rho},             {"schedule", opt.schedule_spec},
                       {"max_iter", opt.max_iter},   {"tol", opt.tol},
                       {"step_tol", stop.step_tol},  {"strategy", opt.strategy}};
    manifest.add_input(opt.problem_path);
    manifest.add_output(opt.trace_path);
    manifest.add_output(opt.summary_path);
    std::string manifest_path =
        opt.manifest_path.empty() ? opt.summary_path + ".manifest.json" : opt.manifest_path;
    manifest.write(manifest_path);

    std::cout << summary.dump(2) << "\n";
    return verdict_exit_code(trace.verdict);
}

struct LocalizeOptions {
    int sensors = 10;
    std::string anchors = "corner4";
    double radius = 0.5, noise_factor = 0.05;
    std::uint64_t seed = 0;
    std::string algo = "admm-1", out_dir = ".", network_path;
    int iters = 5000, threads = 0;
    bool allow_disconnected = false, eq16_literal = false;
};

// corner4 or an explicit list "x1,y1;x2,y2;..."
Eigen::Matrix<double, Eigen::Dynamic, 2> parse_anchors(const std::string& spec) {
    if (spec == "corner4") {
        Eigen::Matrix<double, Eigen::Dynamic, 2> corners(4, 2);
        corners << 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0;
        return corners;
    }
    std::vector<Eigen::Vector2d> points;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        std::size_t semi = spec.find(';', pos);
        std::string pair = spec.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
        std::size_t comma = pair.find(',');
        if (comma == std::string::npos)
            throw CLI::ValidationError("--anchors", "expected corner4 or x1,y1;x2,y2;...");
        points.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
        if (semi == std::string::npos) break;
        pos = semi + 1;
    }
    Eigen::Matrix<double, Eigen::Dynamic, 2> anchors(static_cast<Eigen::Index>(points.size()), 2);
    for (std::size_t i = 0; i < points.size(); ++i) anchors.row(static_cast<Eigen::Index>(i)) = points[i];
    return anchors;
}

int cmd_localize(const LocalizeOptions& opt, const std::vector<std::string>& raw_args) {
    std::uint64_t seed = effective_seed(opt.seed);
    adlm::SensorNetwork net;
    std::string network_input;
    if (!opt.network_path.empty()) {
        net = adlm::load_network(opt.network_path);
        network_input = opt.network_path;
    } else {
        net = adlm::generate_network(opt.sensors, parse_anchors(opt.anchors), opt.radius,
                                     opt.noise_factor, seed);
    }
    if (net.flagged && !opt.allow_disconnected) {
        std::cerr << "network flagged: " << net.flag_reason
                  << " (pass --allow-disconnected to run anyway)\n";
        return kExitFlaggedNetwork;
    }

    adlm::LocalizationRunConfig cfg = adlm::LocalizationRunConfig::from_table_name(opt.algo);
    cfg.iterations = opt.iters;
    cfg.seed = seed;
    cfg.threads = opt.threads;
    cfg.allow_flagged = opt.allow_disconnected;
    cfg.eq16_literal = opt.eq16_literal;
    cfg.node_policy.seed = seed;

    adlm::LocalizationResult result = cfg.algo == adlm::LocalAlgo::Dgd
                                          ? adlm::run_dgd(net, cfg)
                                          : adlm::run_dadlm(net, cfg);

    fs::create_directories(opt.out_dir);
    std::string network_path = (fs::path(opt.out_dir) / "network.json").string();
    adlm::save_network(net, network_path);
    std::string trace_path = (fs::path(opt.out_dir) / ("trace-" + opt.algo + ".csv")).string();
    write_text(trace_path, result.trace.csv());

    ordered_json estimates = ordered_json::array();
    for (Eigen::Index i = 0; i < result.estimates.rows(); ++i)
        estimates.push_back({result.estimates(i, 0), result.estimates(i, 1)});
    ordered_json summary = result.trace.summary();
    summary["rmse"] = result.rmse;
    summary["estimates"] = estimates;
    std::string estimates_path =
        (fs::path(opt.out_dir) / ("estimates-" + opt.algo + ".json")).string();
    write_text(estimates_path, summary.dump(2) + "\n");

    adlm::RunManifest manifest;
    manifest.command = "localize";
    manifest.arguments = raw_args;
    manifest.seed = seed;
    manifest.config = {{"sensors", opt.sensors},   {"anchors", opt.anchors},
                       {"radius", opt.radius},     {"noise_factor", opt.noise_factor},
                       {"algo", opt.algo},         {"iters", opt.iters},
                       {"eq16_literal", opt.eq16_literal}};
    if (!network_input.empty()) manifest.add_input(network_input);
    manifest.add_output(network_path);
    manifest.add_output(trace_path);
    manifest.add_output(estimates_path);
    manifest.write((fs::path(opt.out_dir) / ("manifest-" + opt.algo + ".json")).string());

    std::cout << "algo " << opt.algo << ": verdict " << adlm::to_string(result.trace.verdict)
              << ", final residual " << result.trace.final_primal_residual() << ", rmse "
              << result.rmse << "\n";
    return result.trace.verdict == adlm::Verdict::Diverged ? kExitDiverged : kExitOk;
}

struct OracleOptions {
    std::string f_spec = "cos", g_spec = "sin";
    double z0 = 0.0, rho = 2.0, scan_bound = 1e3, scan_step = 1e-3;
    int max_iter = 500;
    bool verify = false;
};

int cmd_oracle(const OracleOptions& opt) {
    adlm::ScalarInstance inst = adlm::ScalarInstance::make(parse_scalar_block(opt.f_spec),
                                                           parse_scalar_block(opt.g_spec), opt.z0,
                                                           opt.rho);
    adlm::FixedPointPrediction pred =
        adlm::predict_fixed_point(inst, opt.scan_bound, opt.scan_step);

    ordered_json j;
    j["case"] = adlm::to_string(pred.which);
    if (pred.finite()) {
        j["zstar"] = pred.zstar;
        j["certificate"] = pred.certificate ? *pred.certificate : 0.0;
        j["ystar"] = inst.g.derivative(pred.zstar);
    } else {
        j["zstar"] = pred.zstar > 0 ? "+inf" : "-inf";
    }
    j["L"] = inst.lipschitz;
    j["y0"] = inst.y0();

    if (!opt.verify) {
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    adlm::StopRule stop{opt.max_iter, 1e-9, 1e-9, 1e6};
    adlm::AgreementReport report = adlm::verify_prediction(inst, pred, stop);
    j["verification"] = {{"agrees", report.agrees},
                         {"verdict", adlm::to_string(report.verdict)},
                         {"z_final", report.z_final},
                         {"y_final", report.y_final},
                         {"detail", report.detail}};
    std::cout << j.dump(2) << "\n";
    return report.agrees ? kExitOk : kExitDisagreement;
}

int cmd_replay(const std::string& manifest_path, bool check) {
    adlm::RunManifest manifest = adlm::RunManifest::load(manifest_path);
    int rc = run_cli(manifest.arguments);
    if (rc != kExitOk && rc != kExitMaxIters) return rc;
    if (check) {
        auto mismatches = manifest.verify_digests();
        if (!mismatches.empty()) {
            std::cerr << "replay: digests changed for:";
            for (const auto& p : mismatches) std::cerr << " " << p;
            std::cerr << "\n";
            return kExitDisagreement;
        }
        std::cout << "replay: all digests match\n";
    }
    return rc;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"alternating-direction Lagrangian method toolkit"};
    app.set_version_flag("--version", ADLM_VERSION);
    app.require_subcommand(1);

    SolveOptions solve_opt;
    auto* solve = app.add_subcommand("solve", "run a solver on a problem-spec file");
    solve->add_option("--problem", solve_opt.problem_path, "problem-spec JSON file")->required();
    solve->add_option("--algo", solve_opt.algo, "adpm | admm | qpm | mm")->required();
    solve->add_option("--rho", solve_opt.rho, "fixed penalty (admm, mm)");
    solve->add_option("--schedule", solve_opt.schedule_spec,
                      "constant:R | linear:R0,S | geometric:R0,D,K (adpm, qpm)");
    solve->add_option("--max-iter", solve_opt.max_iter, "iteration cap");
    solve->add_option("--tol", solve_opt.tol, "primal residual tolerance");
    solve->add_option("--step-tol", solve_opt.step_tol, "step / dual-step tolerance (default --tol)");
    solve->add_option("--divergence-bound", solve_opt.divergence_bound, "iterate norm bound");
    solve->add_option("--z0", solve_opt.z0_csv, "initial z, comma separated (default zeros)");
    solve->add_option("--y0", solve_opt.y0_csv, "initial y, comma separated (default zeros)");
    solve->add_option("--trace", solve_opt.trace_path, "trace CSV output path")->required();
    solve->add_option("--summary", solve_opt.summary_path, "summary JSON output path")->required();
    solve->add_option("--manifest", solve_opt.manifest_path, "manifest path (default <summary>.manifest.json)");
    solve->add_option("--strategy", solve_opt.strategy,
                      "auto | closed-form | projected-gradient | grid-global | scalar-exact");
    solve->add_option("--grid-points", solve_opt.grid_points, "grid points per dimension");
    solve->add_option("--inner-iters", solve_opt.inner_iters, "inner iteration cap");
    solve->add_option("--multistart", solve_opt.multistart, "projected-gradient starts");
    solve->add_option("--solver-tol", solve_opt.solver_tol, "subproblem tolerance (0 = per-path default)");
    solve->add_option("--dual", solve_opt.dual, "adpm dual policy: zero | bounded");
    solve->add_option("--dual-bound", solve_opt.dual_bound, "bound for --dual bounded");
    solve->add_option("--seed", solve_opt.seed, "seed (env ADLM_SEED overrides)");

    LocalizeOptions loc_opt;
    auto* localize = app.add_subcommand("localize", "simulate and solve a localization network");
    localize->add_option("--sensors", loc_opt.sensors, "number of sensors");
    localize->add_option("--anchors", loc_opt.anchors,
                         "corner4 or an explicit list x1,y1;x2,y2;...");
    localize->add_option("--radius", loc_opt.radius, "connectivity radius");
    localize->add_option("--noise-factor", loc_opt.noise_factor, "variance factor of range noise");
    localize->add_option("--seed", loc_opt.seed, "seed (env ADLM_SEED overrides)");
    localize->add_option("--algo", loc_opt.algo, "adpm | adpm-y | admm-1 | admm-10 | admm:RHO | dgd")
        ->required();
    localize->add_option("--iters", loc_opt.iters, "iterations");
    localize->add_option("--out-dir", loc_opt.out_dir, "output directory")->required();
    localize->add_option("--network", loc_opt.network_path, "run on an existing network file");
    localize->add_option("--threads", loc_opt.threads, "node solve workers (0 = hardware)");
    localize->add_flag("--allow-disconnected", loc_opt.allow_disconnected,
                       "run even if the network is flagged");
    localize->add_flag("--eq16-literal", loc_opt.eq16_literal,
                       "neighbor-average z-update instead of the exact minimizer");

    OracleOptions oracle_opt;
    auto* oracle = app.add_subcommand("oracle", "scalar fixed-point prediction (and verification)");
    oracle->add_option("--f", oracle_opt.f_spec, "cos | sin | negsq | cosine:A,P | quad:A[,B] | poly:... | huber:D")
        ->required();
    oracle->add_option("--g", oracle_opt.g_spec, "same shorthand as --f")->required();
    oracle->add_option("--z0", oracle_opt.z0, "initial z")->required();
    oracle->add_option("--rho", oracle_opt.rho, "penalty (must exceed the Lipschitz constant)")
        ->required();
    oracle->add_option("--scan-bound", oracle_opt.scan_bound, "scan window half-width");
    oracle->add_option("--scan-step", oracle_opt.scan_step, "scan step");
    oracle->add_option("--max-iter", oracle_opt.max_iter, "verification iteration cap");
    oracle->add_flag("--verify", oracle_opt.verify, "also run the solver and compare");

    std::string replay_manifest;
    bool replay_check = false;
    auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
    replay->add_option("--manifest", replay_manifest, "manifest file")->required();
    replay->add_flag("--check", replay_check, "verify output digests after the re-run");

    try {
        // CLI11 wants argv-style parsing; it parses reversed vectors in place.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(solve_opt, args);
        if (localize->parsed()) return cmd_localize(loc_opt, args);
        if (oracle->parsed()) return cmd_oracle(oracle_opt);
        if (replay->parsed()) return cmd_replay(replay_manifest, replay_check);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args);
}
