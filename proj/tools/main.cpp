#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosmowave/cosmology.hpp"
#include "cosmowave/criteria.hpp"
#include "cosmowave/diagnostics.hpp"
#include "cosmowave/energies.hpp"
#include "cosmowave/homogeneous.hpp"
#include "cosmowave/io.hpp"
#include "cosmowave/mode.hpp"
#include "cosmowave/report.hpp"
#include "cosmowave/runner.hpp"

using namespace cosmowave;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kTolerance = 2;
constexpr int kConfig = 3;
constexpr int kNumerical = 4;
constexpr int kWrongRegime = 5;

int exit_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::WrongRegime: return kWrongRegime;
        case ErrorCode::SolverDiverged:
        case ErrorCode::SeedTooLarge:
        case ErrorCode::TailTooLarge:
        case ErrorCode::CFLViolation:
        case ErrorCode::NotConverged:
        case ErrorCode::QuadratureFail:
        case ErrorCode::DenominatorZero:
        case ErrorCode::CertificateFail: return kNumerical;
        default: return kConfig;
    }
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

SpatialType parse_type(int t) {
    if (t == 0) return SpatialType::Type0;
    if (t == -1) return SpatialType::TypeMinus1;
    throw Error(ErrorCode::ConfigInvalid, "--type must be 0 or -1");
}

std::vector<double> parse_stops(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigInvalid, "--stops: cannot parse '" + item + "'");
        }
    }
    return out;
}

// Output goes to the file if one was given, else stdout.
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path, std::ios::binary);
        if (!file) throw Error(ErrorCode::IoError, "cannot write " + path);
        os = &file;
    }
};

struct Globals {
    std::string config;
    std::string out_dir;
    int threads = 1;
    double tol = 0.0;  // 0: command default
};

double tol_or(const Globals& g, double fallback) { return g.tol > 0.0 ? g.tol : fallback; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear waves on FLRW-type backgrounds toward the big bang"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Scenario file (YAML)");
    app.add_option("--out-dir", g.out_dir, "Output directory");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--tol", g.tol, "Solver tolerance")->check(CLI::PositiveNumber);
    app.fallthrough();

    // scale-factor
    auto* sf = app.add_subcommand("scale-factor", "Tabulate a(t), a'(t), rho(t) and h(t)");
    int sf_type = -1;
    double sf_gamma = 1.0, sf_B = Cosmology{}.B, sf_seed = 1e-12, sf_tmax = 1e4, sf_t1 = 0.0;
    double sf_from = 1e-8, sf_to = 1e2;
    int sf_per = 10;
    std::string sf_out;
    sf->add_option("--type", sf_type, "Spatial type 0 or -1");
    sf->add_option("--gamma", sf_gamma, "Equation of state parameter");
    sf->add_option("--B", sf_B, "Density constant");
    sf->add_option("--t-seed", sf_seed, "Start of the numerical curve");
    sf->add_option("--t-max", sf_tmax, "End of the numerical curve");
    sf->add_option("--t1", sf_t1, "Upper limit of the finite integral of a^-3 (type 0)");
    sf->add_option("--from", sf_from, "First tabulated time");
    sf->add_option("--to", sf_to, "Last tabulated time");
    sf->add_option("--per-decade", sf_per, "Rows per decade");
    sf->add_option("--out", sf_out, "CSV file (default stdout)");

    // evolve-mode
    auto* em = app.add_subcommand("evolve-mode", "Evolve one eigenmode amplitude");
    int em_type = 0;
    double em_lambda = 0.0, em_gamma = 1.0, em_B = Cosmology{}.B, em_t0 = 1.0, em_u = 1.0, em_v = 0.0, em_stop = 1e-6;
    int em_per = 8;
    std::string em_out, em_summary;
    em->add_option("--lambda", em_lambda, "Laplace eigenvalue")->required();
    em->add_option("--gamma", em_gamma, "Equation of state parameter");
    em->add_option("--type", em_type, "Spatial type 0 or -1");
    em->add_option("--B", em_B, "Density constant");
    em->add_option("--t0", em_t0, "Data time");
    em->add_option("--u", em_u, "u(t0)");
    em->add_option("--udot", em_v, "u'(t0)");
    em->add_option("--t-stop", em_stop, "Final time");
    em->add_option("--per-decade", em_per, "CSV rows per decade");
    em->add_option("--out", em_out, "CSV file (default stdout)");
    em->add_option("--summary", em_summary, "JSON summary file (default stderr)");

    // evolve-field
    auto* ef = app.add_subcommand("evolve-field", "Evolve a field and write snapshots");
    std::string ef_stops;
    ef->add_option("--stops", ef_stops, "Comma separated stop times (default: scenario stops)");

    // check-energies
    auto* ce = app.add_subcommand("check-energies", "Energy report for a trajectory");
    std::string ce_traj, ce_out;
    int ce_N = 2;
    double ce_eps = 0.0, ce_mtol = 1e-6;
    ce->add_option("--traj", ce_traj, "Trajectory directory")->required();
    ce->add_option("--Nmax", ce_N, "Highest Laplacian power");
    ce->add_option("--epsilon", ce_eps, "epsilon in the type -1 weight (0: default)");
    ce->add_option("--monotonicity-tol", ce_mtol, "Relative tolerance of the monotonicity checks");
    ce->add_option("--out", ce_out, "JSON report (default stdout)");

    // extract-profile
    auto* ep = app.add_subcommand("extract-profile", "Extract the blow-up profile");
    std::string ep_traj, ep_method = "rescale", ep_out = "profile.bin";
    int ep_N = 2;
    ep->add_option("--traj", ep_traj, "Trajectory directory")->required();
    ep->add_option("--method", ep_method, "rescale or stiff")->check(CLI::IsMember({"rescale", "stiff"}));
    ep->add_option("--Nmax", ep_N, "Number of Laplacians of A");
    ep->add_option("--out", ep_out, "Binary output; metadata goes next to it as .json");

    // check-criteria
    auto* cc = app.add_subcommand("check-criteria", "Evaluate a blow-up criterion on data at t0");
    std::string cc_data, cc_crit, cc_out;
    std::optional<double> cc_eps, cc_amp, cc_t0;
    double cc_slack = 0.1;
    cc->add_option("--data", cc_data, "Scenario file or trajectory directory (first snapshot)")->required();
    cc->add_option("--criterion", cc_crit, "stiff-pointwise, stiff-simplified, global-type0, global-type-1, pointwise")
        ->required();
    cc->add_option("--epsilon", cc_eps, "epsilon");
    cc->add_option("--amplitude", cc_amp, "Homogeneous amplitude");
    cc->add_option("--t0", cc_t0, "Data time (scenario input only)");
    cc->add_option("--slack", cc_slack, "Slack of the simplified screen");
    cc->add_option("--out", cc_out, "JSON report (default stdout)");

    // run
    auto* rn = app.add_subcommand("run", "Run a full scenario");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*sf) {
            const Cosmology cosmo = Cosmology::make(parse_type(sf_type), sf_gamma, sf_B);
            const Background bg = Background::make(cosmo, sf_seed, sf_tmax, tol_or(g, 1e-11));
            Sink sink(sf_out);
            std::ostream& os = *sink.os;
            os << "t,a,a_dot,rho,h\n";
            if (!(sf_from > 0.0 && sf_to > 0.0 && sf_to != sf_from) || sf_per < 1) {
                throw Error(ErrorCode::ConfigInvalid, "--from/--to/--per-decade describe an empty table");
            }
            const int rows = static_cast<int>(std::ceil(sf_per * std::abs(std::log10(sf_to / sf_from)))) + 1;
            for (int i = 0; i < rows; ++i) {
                const double t = sf_from * std::pow(sf_to / sf_from, rows > 1 ? double(i) / (rows - 1) : 0.0);
                const ScaleFactorValue v = bg.scale_factor(t);
                os << num(t) << ',' << num(v.a) << ',' << num(v.a_dot) << ',' << num(bg.rho(t)) << ',';
                if (bg.type() == SpatialType::TypeMinus1) {
                    os << num(far_field_integral(bg, t).value);
                } else if (sf_t1 > 0.0 && t <= sf_t1) {
                    os << num(bg.integral_inv_a_cubed(t, sf_t1));
                }
                os << '\n';
            }
            return kOk;
        }

        if (*em) {
            const Cosmology cosmo = Cosmology::make(parse_type(em_type), em_gamma, em_B);
            const Background bg = Background::make(cosmo);
            const double tol = tol_or(g, 1e-12);
            const ModeState s0{em_lambda, em_t0, em_u, em_v};
            std::vector<double> stops = geometric_stops(em_t0, em_stop, em_per);
            stops.erase(stops.begin());
            if (stops.empty() || stops.back() != em_stop) stops.push_back(em_stop);
            const auto traj = evolve_mode_ladder(bg, s0, stops, tol);
            Sink sink(em_out);
            *sink.os << "t,u,u_dot,u_over_psihom\n";
            auto row = [&](const ModeState& m) {
                const double h = psi_hom_basis(bg, m.t);
                *sink.os << num(m.t) << ',' << num(m.u) << ',' << num(m.u_dot) << ',' << (h != 0.0 ? num(m.u / h) : "")
                         << '\n';
            };
            row(s0);
            for (const auto& m : traj) row(m);
            Json summary;
            if (em_stop < em_t0) {
                const ModeAmplitude a = extract_mode_amplitude(bg, s0, em_stop, tol);
                summary = {{"A_mode", a.A_mode}, {"error_estimate", a.error_estimate}, {"observed_ratio", a.observed_ratio}};
            }
            if (em_summary.empty()) {
                std::cerr << summary.dump(2) << '\n';
            } else {
                write_text(em_summary, summary.dump(2) + "\n");
            }
            return kOk;
        }

        if (*ef) {
            if (g.config.empty()) throw Error(ErrorCode::ConfigInvalid, "evolve-field needs --config");
            Scenario s = load_scenario(g.config);
            if (!ef_stops.empty()) s.stops = parse_stops(ef_stops);
            EvolveOptions opts = s.evolve;
            if (app.count("--threads")) opts.threads = g.threads;
            if (g.tol > 0.0) opts.tol = g.tol;
            const Background bg = s.background.build();
            const FieldState s0 = scenario_initial_state(s, bg);
            const auto traj = sample_trajectory(s0, s.stops, opts);
            write_trajectory(g.out_dir.empty() ? s.out_dir : fs::path(g.out_dir), traj, s.background);
            return kOk;
        }

        if (*ce) {
            const LoadedTrajectory lt = read_trajectory(ce_traj);
            const auto& traj = lt.states;
            const Background& bg = traj.front().background;
            const bool rescale = !(bg.cosmology().stiff() && bg.type() == SpatialType::Type0 && traj.front().t >= 1.0);
            const double eps = ce_eps > 0.0 ? ce_eps : default_epsilon(bg.gamma());
            std::vector<EnergyReport> reports;
            for (const auto& st : traj) reports.push_back(energy_report(st, ce_N, rescale, eps));
            const auto mono = monotonicity_violations(reports, ce_mtol);
            std::vector<Violation> seq;
            for (const auto& v : sequence_violations(reports, ce_mtol)) {
                if (v.quantity != "a6E") seq.push_back(v);
            }
            std::optional<double> flux;
            const double decades = std::log10(traj.front().t / traj.back().t);
            if (traj.size() >= 3 && traj.size() - 1 >= 8.0 * decades - 1e-9) flux = flux_balance_residual(traj);
            Sink sink(ce_out);
            *sink.os << energy_document(reports, mono, seq, flux).dump(2) << '\n';
            return mono.empty() && seq.empty() ? kOk : kTolerance;
        }

        if (*ep) {
            const LoadedTrajectory lt = read_trajectory(ep_traj);
            const ProfileMethod m = ep_method == "stiff" ? ProfileMethod::StiffIntegral : ProfileMethod::Rescale;
            const BlowupProfile p = extract_profile(lt.states, m, {ep_N, tol_or(g, 1e-10)});
            fs::path stem = ep_out;
            stem.replace_extension();
            write_profile(stem, p, *lt.states.front().metric);
            return kOk;
        }

        if (*cc) {
            const Criterion which = criterion_from_name(cc_crit);
            std::optional<FieldState> data;
            if (fs::is_directory(cc_data)) {
                if (cc_t0) throw Error(ErrorCode::ConfigInvalid, "--t0 applies to scenario input only");
                data = read_trajectory(cc_data).states.front();
            } else {
                Scenario s = load_scenario(cc_data);
                if (cc_t0) s.t0 = *cc_t0;
                data = scenario_initial_state(s, s.background.build());
            }
            CriteriaReport r;
            switch (which) {
                case Criterion::StiffInclusivePointwise: r = check_stiff_inclusive(*data, cc_amp); break;
                case Criterion::StiffInclusiveSimplified: r = check_stiff_simplified(*data, cc_amp, cc_slack); break;
                case Criterion::GlobalType0: r = check_global_type0(*data, cc_eps.value_or(0.5)); break;
                case Criterion::GlobalTypeMinus1: r = check_global_type_minus1(*data, cc_eps.value_or(0.5)); break;
                case Criterion::PointwiseNonStiff: r = check_pointwise_nonstiff(*data, cc_amp, cc_eps.value_or(0.0)); break;
            }
            Sink sink(cc_out);
            *sink.os << to_json(r).dump(2) << '\n';
            return kOk;
        }

        if (*rn) {
            if (g.config.empty()) throw Error(ErrorCode::ConfigInvalid, "run needs --config");
            Scenario s = load_scenario(g.config);
            if (!g.out_dir.empty()) s.out_dir = g.out_dir;
            if (app.count("--threads")) s.evolve.threads = g.threads;
            if (g.tol > 0.0) s.evolve.tol = g.tol;
            const RunResult r = run_scenario(s);
            for (const auto& f : r.failures) std::cerr << "violation: " << f << '\n';
            return r.status;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
